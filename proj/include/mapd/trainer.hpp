#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mapd/adam.hpp"
#include "mapd/mlp.hpp"
#include "mapd/rng.hpp"
#include "mapd/sharing.hpp"
#include "mapd/spread_env.hpp"

#include <json.hpp>

namespace mapd {

struct TrainConfig {
  double gamma = 0.99;
  double actor_lr = 3e-4;
  double critic_lr = 3e-4;
  double entropy_weight = 0.01;
  int rollout_length = 16;
  std::int64_t total_steps = 100000;
  std::vector<int> hidden = {64, 64};
  void validate() const;
};

enum class NetKind { Actor = 0, Critic = 1 };

// Actor and critic parameters for all agents, owned per (block, group) under
// one SharingScheme. Agents in a group read bit-identical block parameters;
// per-agent full vectors are materialized copies refreshed after any change.
class AgentNets {
 public:
  AgentNets(int n_agents, int obs_dim, int n_actions, const std::vector<int>& hidden,
            SharingScheme scheme, Rng& init_rng, bool identical_init = true);

  int n_agents() const { return n_agents_; }
  int obs_dim() const { return obs_dim_; }
  int n_actions() const { return n_actions_; }
  const std::vector<int>& hidden() const { return hidden_; }
  const Mlp& net(NetKind k) const { return k == NetKind::Actor ? actor_ : critic_; }
  const Mlp& actor() const { return actor_; }
  const Mlp& critic() const { return critic_; }
  const SharingScheme& scheme() const { return scheme_; }

  std::span<const double> params(NetKind k, int agent) const;
  std::span<const double> actor_params(int agent) const { return params(NetKind::Actor, agent); }
  std::span<const double> critic_params(int agent) const { return params(NetKind::Critic, agent); }

  // Flat [lo, hi) range of a block inside a full parameter vector.
  std::pair<int, int> block_range(NetKind k, int block) const;

  std::vector<double>& group_params(NetKind k, int block, int group);
  const std::vector<double>& group_params(NetKind k, int block, int group) const;
  AdamState& group_adam(NetKind k, int block, int group);

  // Size-weighted average of the two groups' block parameters (both nets);
  // Adam moments restart for the merged group. Returns the merged group index.
  int fuse_groups(int block, int group_a, int group_b);

  // Clones the block parameters (and Adam state) of `group` into one copy per
  // child. children_a/b must partition the group's members.
  void split_group(int block, int group, const std::vector<int>& children_a,
                   const std::vector<int>& children_b);

  void refresh_materialized();

  nlohmann::json to_json() const;
  static AgentNets from_json(const nlohmann::json& j);

 private:
  AgentNets() : actor_({1, 1}), critic_({1, 1}) {}
  void allocate_storage();
  void restore_canonical_order(int block);

  int n_agents_ = 0, obs_dim_ = 0, n_actions_ = 0;
  std::vector<int> hidden_;
  Mlp actor_, critic_;
  SharingScheme scheme_;
  // storage_[kind][block][group]
  struct GroupSlot {
    std::vector<double> params;
    AdamState adam;
  };
  std::vector<std::vector<std::vector<GroupSlot>>> storage_;
  // materialized_[kind][agent] -> full flat parameter vector
  std::vector<std::vector<std::vector<double>>> materialized_;
};

enum class ActMode {
  Sample,         // action sampled from the softmax policy
  Greedy,         // argmax action, distribution still the softmax policy
  Deterministic,  // argmax action and a one-hot distribution
};

struct ActResult {
  std::vector<double> dist;
  int action = 0;
};

// One policy decision. The returned distribution is recorded exactly as the
// policy produced it (one-hot in Deterministic mode).
ActResult act(const Mlp& actor, std::span<const double> params, std::span<const double> obs,
              Rng& rng, ActMode mode = ActMode::Sample);

struct Transition {
  std::vector<double> obs;
  std::vector<double> dist;
  int action = 0;
  double reward = 0.0;
  bool done = false;
  double value = 0.0;
};

struct TrajectoryBatch {
  std::vector<std::vector<Transition>> per_agent;  // [agent][step], rectangular
  std::vector<std::vector<double>> final_obs;      // observation after the last step
  int n_agents() const { return static_cast<int>(per_agent.size()); }
  int steps() const { return per_agent.empty() ? 0 : static_cast<int>(per_agent.front().size()); }
};

// Tracks the live observations between consecutive rollouts of one run.
struct RolloutCursor {
  std::vector<std::vector<double>> obs;
  bool initialized = false;
};

// Collects exactly `steps` transitions per agent; the environment resets
// automatically at episode end.
TrajectoryBatch collect_rollout(SpreadEnv& env, RolloutCursor& cursor, const AgentNets& nets,
                                int steps, Rng& rng, ActMode mode = ActMode::Sample);

struct UpdateReport {
  double actor_loss = 0.0;
  double critic_loss = 0.0;
  double mean_entropy = 0.0;
  bool skipped = false;
  std::string error;
};

// Advantage actor-critic update: per-agent gradients, averaged over each
// sharing group, one Adam step per (net, block, group).
UpdateReport a2c_update(const TrajectoryBatch& batch, AgentNets& nets, const TrainConfig& cfg);

struct EvalReport {
  double mean = 0.0;
  double stddev = 0.0;
  std::vector<double> per_episode;  // mean per-agent episode return
};

EvalReport evaluate(SpreadEnv& env, const AgentNets& nets, int episodes);

namespace detail {

// Bootstrapped discounted returns; G resets to 0 across done boundaries.
std::vector<double> discounted_returns(const std::vector<Transition>& traj, double bootstrap,
                                       double gamma);

// Mean actor loss -(A log pi(a|o)) - entropy_weight * H(pi) over the
// trajectory, with fixed advantages. Accumulates dLoss/dparams when grad is
// non-empty. Returns the loss.
double actor_loss_grad(const Mlp& actor, std::span<const double> params,
                       const std::vector<Transition>& traj, std::span<const double> advantages,
                       double entropy_weight, std::span<double> grad,
                       double* entropy_out = nullptr);

// Mean squared TD error (return - value)^2 with fixed returns.
double critic_loss_grad(const Mlp& critic, std::span<const double> params,
                        const std::vector<Transition>& traj, std::span<const double> returns,
                        std::span<double> grad);

}  // namespace detail

}  // namespace mapd

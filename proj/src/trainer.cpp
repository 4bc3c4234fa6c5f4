#include "mapd/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mapd/distributions.hpp"

namespace mapd {

void TrainConfig::validate() const {
  if (!(gamma >= 0.0 && gamma < 1.0)) throw std::invalid_argument("TrainConfig: need 0 <= gamma < 1");
  if (!(actor_lr > 0.0) || !(critic_lr > 0.0))
    throw std::invalid_argument("TrainConfig: learning rates must be > 0");
  if (rollout_length < 1) throw std::invalid_argument("TrainConfig: rollout_length must be >= 1");
  if (entropy_weight < 0.0) throw std::invalid_argument("TrainConfig: entropy_weight must be >= 0");
}

AgentNets::AgentNets(int n_agents, int obs_dim, int n_actions, const std::vector<int>& hidden,
                     SharingScheme scheme, Rng& init_rng, bool identical_init)
    : n_agents_(n_agents),
      obs_dim_(obs_dim),
      n_actions_(n_actions),
      hidden_(hidden),
      actor_([&] {
        std::vector<int> sizes = {obs_dim};
        sizes.insert(sizes.end(), hidden.begin(), hidden.end());
        sizes.push_back(n_actions);
        return Mlp(sizes);
      }()),
      critic_([&] {
        std::vector<int> sizes = {obs_dim};
        sizes.insert(sizes.end(), hidden.begin(), hidden.end());
        sizes.push_back(1);
        return Mlp(sizes);
      }()),
      scheme_(std::move(scheme)) {
  if (hidden_.empty())
    throw std::invalid_argument("AgentNets: need at least one hidden layer for a trunk/head split");
  scheme_.normalize();
  scheme_.validate(n_agents_);
  if (scheme_.blocks != std::vector<std::string>{kTrunkBlock, kHeadBlock})
    throw std::invalid_argument("AgentNets: expected the [trunk, head] block layout");
  allocate_storage();

  // Draw one full init per agent and slice it into the agent's group blocks;
  // identical_init draws a single vector shared by everyone. A group takes its
  // lowest member's draw, so fully-shared and independent schemes agree on
  // initial behavior when identical_init is set.
  for (int k = 0; k < 2; ++k) {
    const Mlp& net = k == 0 ? actor_ : critic_;
    std::vector<std::vector<double>> draws;
    if (identical_init) {
      std::vector<double> one(static_cast<std::size_t>(net.param_count()));
      net.init_params(one, init_rng);
      draws.assign(static_cast<std::size_t>(n_agents_), one);
    } else {
      for (int a = 0; a < n_agents_; ++a) {
        std::vector<double> d(static_cast<std::size_t>(net.param_count()));
        net.init_params(d, init_rng);
        draws.push_back(std::move(d));
      }
    }
    for (int b = 0; b < scheme_.n_blocks(); ++b) {
      const auto [lo, hi] = block_range(static_cast<NetKind>(k), b);
      for (int g = 0; g < scheme_.n_groups(b); ++g) {
        const int owner = scheme_.group_members(b, g).front();
        auto& slot = storage_[static_cast<std::size_t>(k)][static_cast<std::size_t>(b)]
                             [static_cast<std::size_t>(g)];
        slot.params.assign(draws[static_cast<std::size_t>(owner)].begin() + lo,
                           draws[static_cast<std::size_t>(owner)].begin() + hi);
      }
    }
  }
  refresh_materialized();
}

void AgentNets::allocate_storage() {
  storage_.assign(2, {});
  for (int k = 0; k < 2; ++k) {
    storage_[static_cast<std::size_t>(k)].resize(static_cast<std::size_t>(scheme_.n_blocks()));
    for (int b = 0; b < scheme_.n_blocks(); ++b) {
      const auto [lo, hi] = block_range(static_cast<NetKind>(k), b);
      auto& groups = storage_[static_cast<std::size_t>(k)][static_cast<std::size_t>(b)];
      groups.resize(static_cast<std::size_t>(scheme_.n_groups(b)));
      for (auto& slot : groups) {
        slot.params.assign(static_cast<std::size_t>(hi - lo), 0.0);
        slot.adam = AdamState(static_cast<std::size_t>(hi - lo));
      }
    }
  }
  materialized_.assign(2, std::vector<std::vector<double>>(
                              static_cast<std::size_t>(n_agents_)));
}

std::pair<int, int> AgentNets::block_range(NetKind k, int block) const {
  const Mlp& net = this->net(k);
  if (block == 0) return {0, net.head_offset()};
  if (block == 1) return {net.head_offset(), net.param_count()};
  throw std::invalid_argument("AgentNets::block_range: bad block index");
}

std::span<const double> AgentNets::params(NetKind k, int agent) const {
  return materialized_[static_cast<std::size_t>(k)][static_cast<std::size_t>(agent)];
}

std::vector<double>& AgentNets::group_params(NetKind k, int block, int group) {
  return storage_[static_cast<std::size_t>(k)][static_cast<std::size_t>(block)]
                 [static_cast<std::size_t>(group)].params;
}

const std::vector<double>& AgentNets::group_params(NetKind k, int block, int group) const {
  return storage_[static_cast<std::size_t>(k)][static_cast<std::size_t>(block)]
                 [static_cast<std::size_t>(group)].params;
}

AdamState& AgentNets::group_adam(NetKind k, int block, int group) {
  return storage_[static_cast<std::size_t>(k)][static_cast<std::size_t>(block)]
                 [static_cast<std::size_t>(group)].adam;
}

void AgentNets::refresh_materialized() {
  for (int k = 0; k < 2; ++k) {
    const Mlp& net = this->net(static_cast<NetKind>(k));
    for (int a = 0; a < n_agents_; ++a) {
      auto& full = materialized_[static_cast<std::size_t>(k)][static_cast<std::size_t>(a)];
      full.resize(static_cast<std::size_t>(net.param_count()));
      for (int b = 0; b < scheme_.n_blocks(); ++b) {
        const auto [lo, hi] = block_range(static_cast<NetKind>(k), b);
        const auto& src = group_params(static_cast<NetKind>(k), b, scheme_.group_of(b, a));
        std::copy(src.begin(), src.end(), full.begin() + lo);
      }
    }
  }
}

void AgentNets::restore_canonical_order(int block) {
  auto& part = scheme_.partitions[static_cast<std::size_t>(block)];
  std::vector<std::size_t> order(part.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t x, std::size_t y) { return part[x].front() < part[y].front(); });
  std::vector<std::vector<int>> new_part;
  std::vector<std::vector<GroupSlot>> new_storage(2);
  for (std::size_t i : order) {
    new_part.push_back(part[i]);
    for (int k = 0; k < 2; ++k)
      new_storage[static_cast<std::size_t>(k)].push_back(
          std::move(storage_[static_cast<std::size_t>(k)][static_cast<std::size_t>(block)][i]));
  }
  part = std::move(new_part);
  for (int k = 0; k < 2; ++k)
    storage_[static_cast<std::size_t>(k)][static_cast<std::size_t>(block)] =
        std::move(new_storage[static_cast<std::size_t>(k)]);
}

int AgentNets::fuse_groups(int block, int group_a, int group_b) {
  if (group_a == group_b) throw std::invalid_argument("fuse_groups: identical groups");
  auto& part = scheme_.partitions[static_cast<std::size_t>(block)];
  const std::vector<int> members_a = part[static_cast<std::size_t>(group_a)];
  const std::vector<int> members_b = part[static_cast<std::size_t>(group_b)];
  std::vector<int> merged = members_a;
  merged.insert(merged.end(), members_b.begin(), members_b.end());
  std::sort(merged.begin(), merged.end());
  const double wa = static_cast<double>(members_a.size());
  const double wb = static_cast<double>(members_b.size());

  for (int k = 0; k < 2; ++k) {
    auto& groups = storage_[static_cast<std::size_t>(k)][static_cast<std::size_t>(block)];
    auto& pa = groups[static_cast<std::size_t>(group_a)].params;
    const auto& pb = groups[static_cast<std::size_t>(group_b)].params;
    for (std::size_t i = 0; i < pa.size(); ++i)
      pa[i] = (wa * pa[i] + wb * pb[i]) / (wa + wb);
    groups[static_cast<std::size_t>(group_a)].adam.reset();
    groups.erase(groups.begin() + group_b);
  }
  part[static_cast<std::size_t>(group_a)] = merged;
  part.erase(part.begin() + group_b);
  restore_canonical_order(block);

  scheme_.validate(n_agents_);
  refresh_materialized();
  return scheme_.find_group(block, merged);
}

void AgentNets::split_group(int block, int group, const std::vector<int>& children_a,
                            const std::vector<int>& children_b) {
  auto& part = scheme_.partitions[static_cast<std::size_t>(block)];
  std::vector<int> combined = children_a;
  combined.insert(combined.end(), children_b.begin(), children_b.end());
  std::sort(combined.begin(), combined.end());
  if (combined != part[static_cast<std::size_t>(group)] || children_a.empty() || children_b.empty())
    throw std::invalid_argument("split_group: children must partition the group");

  std::vector<int> ca = children_a, cb = children_b;
  std::sort(ca.begin(), ca.end());
  std::sort(cb.begin(), cb.end());
  part[static_cast<std::size_t>(group)] = ca;
  part.push_back(cb);
  for (int k = 0; k < 2; ++k) {
    auto& groups = storage_[static_cast<std::size_t>(k)][static_cast<std::size_t>(block)];
    GroupSlot clone = groups[static_cast<std::size_t>(group)];  // bit-identical copy
    groups.push_back(std::move(clone));
  }
  restore_canonical_order(block);

  scheme_.validate(n_agents_);
  refresh_materialized();
}

nlohmann::json AgentNets::to_json() const {
  nlohmann::json j;
  j["version"] = 1;
  j["n_agents"] = n_agents_;
  j["obs_dim"] = obs_dim_;
  j["n_actions"] = n_actions_;
  j["hidden"] = hidden_;
  j["scheme"] = {{"blocks", scheme_.blocks}, {"partitions", scheme_.partitions}};
  for (int k = 0; k < 2; ++k) {
    nlohmann::json nets = nlohmann::json::array();
    for (int b = 0; b < scheme_.n_blocks(); ++b) {
      nlohmann::json blocks = nlohmann::json::array();
      for (int g = 0; g < scheme_.n_groups(b); ++g) {
        const auto& slot = storage_[static_cast<std::size_t>(k)][static_cast<std::size_t>(b)]
                                   [static_cast<std::size_t>(g)];
        blocks.push_back({{"params", slot.params},
                          {"adam_m", slot.adam.m},
                          {"adam_v", slot.adam.v},
                          {"adam_step", slot.adam.step}});
      }
      nets.push_back(std::move(blocks));
    }
    j[k == 0 ? "actor" : "critic"] = std::move(nets);
  }
  return j;
}

AgentNets AgentNets::from_json(const nlohmann::json& j) {
  SharingScheme scheme;
  scheme.blocks = j.at("scheme").at("blocks").get<std::vector<std::string>>();
  scheme.partitions =
      j.at("scheme").at("partitions").get<std::vector<std::vector<std::vector<int>>>>();
  Rng dummy(0);
  AgentNets nets(j.at("n_agents").get<int>(), j.at("obs_dim").get<int>(),
                 j.at("n_actions").get<int>(), j.at("hidden").get<std::vector<int>>(),
                 std::move(scheme), dummy, true);
  for (int k = 0; k < 2; ++k) {
    const auto& src = j.at(k == 0 ? "actor" : "critic");
    for (int b = 0; b < nets.scheme_.n_blocks(); ++b) {
      const auto& blocks = src.at(static_cast<std::size_t>(b));
      if (static_cast<int>(blocks.size()) != nets.scheme_.n_groups(b))
        throw std::invalid_argument("AgentNets::from_json: group count mismatch");
      for (int g = 0; g < nets.scheme_.n_groups(b); ++g) {
        auto& slot = nets.storage_[static_cast<std::size_t>(k)][static_cast<std::size_t>(b)]
                                  [static_cast<std::size_t>(g)];
        const auto& jg = blocks.at(static_cast<std::size_t>(g));
        auto params = jg.at("params").get<std::vector<double>>();
        if (params.size() != slot.params.size())
          throw std::invalid_argument("AgentNets::from_json: parameter length mismatch");
        slot.params = std::move(params);
        slot.adam.m = jg.at("adam_m").get<std::vector<double>>();
        slot.adam.v = jg.at("adam_v").get<std::vector<double>>();
        slot.adam.step = jg.at("adam_step").get<std::int64_t>();
        if (slot.adam.m.size() != slot.params.size() || slot.adam.v.size() != slot.params.size())
          throw std::invalid_argument("AgentNets::from_json: adam length mismatch");
      }
    }
  }
  nets.refresh_materialized();
  return nets;
}

ActResult act(const Mlp& actor, std::span<const double> params, std::span<const double> obs,
              Rng& rng, ActMode mode) {
  const auto logits = actor.forward(params, obs);
  for (double v : logits)
    if (!std::isfinite(v)) throw std::runtime_error("act: non-finite actor logits");
  ActResult r;
  r.dist = softmax(logits);
  switch (mode) {
    case ActMode::Sample: r.action = sample_categorical(r.dist, rng); break;
    case ActMode::Greedy: r.action = argmax(r.dist); break;
    case ActMode::Deterministic: {
      r.action = argmax(r.dist);
      std::fill(r.dist.begin(), r.dist.end(), 0.0);
      r.dist[static_cast<std::size_t>(r.action)] = 1.0;
      break;
    }
  }
  return r;
}

TrajectoryBatch collect_rollout(SpreadEnv& env, RolloutCursor& cursor, const AgentNets& nets,
                                int steps, Rng& rng, ActMode mode) {
  const int n = env.config().n_agents;
  if (nets.n_agents() != n) throw std::invalid_argument("collect_rollout: agent count mismatch");
  if (!cursor.initialized) {
    cursor.obs = env.reset();
    cursor.initialized = true;
  }
  TrajectoryBatch batch;
  batch.per_agent.assign(static_cast<std::size_t>(n), {});
  for (auto& t : batch.per_agent) t.reserve(static_cast<std::size_t>(steps));

  for (int s = 0; s < steps; ++s) {
    std::vector<int> actions(static_cast<std::size_t>(n));
    std::vector<Transition> pending(static_cast<std::size_t>(n));
    for (int a = 0; a < n; ++a) {
      auto& tr = pending[static_cast<std::size_t>(a)];
      tr.obs = cursor.obs[static_cast<std::size_t>(a)];
      auto res = act(nets.actor(), nets.actor_params(a), tr.obs, rng, mode);
      tr.dist = std::move(res.dist);
      tr.action = res.action;
      tr.value = nets.critic().forward(nets.critic_params(a), tr.obs)[0];
      actions[static_cast<std::size_t>(a)] = tr.action;
    }
    auto step = env.step(actions);
    for (int a = 0; a < n; ++a) {
      auto& tr = pending[static_cast<std::size_t>(a)];
      tr.reward = step.rewards[static_cast<std::size_t>(a)];
      tr.done = step.done;
      batch.per_agent[static_cast<std::size_t>(a)].push_back(std::move(tr));
    }
    cursor.obs = step.done ? env.reset() : std::move(step.obs);
  }
  batch.final_obs = cursor.obs;
  return batch;
}

namespace detail {

std::vector<double> discounted_returns(const std::vector<Transition>& traj, double bootstrap,
                                       double gamma) {
  std::vector<double> ret(traj.size());
  double g = bootstrap;
  for (int t = static_cast<int>(traj.size()) - 1; t >= 0; --t) {
    if (traj[static_cast<std::size_t>(t)].done) g = 0.0;
    g = traj[static_cast<std::size_t>(t)].reward + gamma * g;
    ret[static_cast<std::size_t>(t)] = g;
  }
  return ret;
}

double actor_loss_grad(const Mlp& actor, std::span<const double> params,
                       const std::vector<Transition>& traj, std::span<const double> advantages,
                       double entropy_weight, std::span<double> grad, double* entropy_out) {
  const double inv_n = 1.0 / static_cast<double>(traj.size());
  double loss = 0.0, ent_sum = 0.0;
  std::vector<double> dlogits(static_cast<std::size_t>(actor.output_size()));
  for (std::size_t t = 0; t < traj.size(); ++t) {
    const auto& tr = traj[t];
    const auto logits = actor.forward(params, tr.obs);
    const auto pi = softmax(logits);
    const double adv = advantages[t];
    const double h = entropy(pi);
    ent_sum += h;
    const double logp = std::log(std::max(pi[static_cast<std::size_t>(tr.action)], 1e-300));
    loss += -adv * logp - entropy_weight * h;
    if (!grad.empty()) {
      for (std::size_t k = 0; k < pi.size(); ++k) {
        const double indicator = (static_cast<int>(k) == tr.action) ? 1.0 : 0.0;
        const double logpk = std::log(std::max(pi[k], 1e-300));
        // d(-A log pi_a)/dlogit_k = A (pi_k - 1{k=a});
        // d(-w H)/dlogit_k = w pi_k (log pi_k + H)
        dlogits[k] = (adv * (pi[k] - indicator) + entropy_weight * pi[k] * (logpk + h)) * inv_n;
      }
      actor.backward(params, tr.obs, dlogits, grad);
    }
  }
  if (entropy_out) *entropy_out = ent_sum * inv_n;
  return loss * inv_n;
}

double critic_loss_grad(const Mlp& critic, std::span<const double> params,
                        const std::vector<Transition>& traj, std::span<const double> returns,
                        std::span<double> grad) {
  const double inv_n = 1.0 / static_cast<double>(traj.size());
  double loss = 0.0;
  std::vector<double> dout(1);
  for (std::size_t t = 0; t < traj.size(); ++t) {
    const auto& tr = traj[t];
    const double v = critic.forward(params, tr.obs)[0];
    const double err = returns[t] - v;
    loss += err * err;
    if (!grad.empty()) {
      dout[0] = 2.0 * (v - returns[t]) * inv_n;
      critic.backward(params, tr.obs, dout, grad);
    }
  }
  return loss * inv_n;
}

}  // namespace detail

UpdateReport a2c_update(const TrajectoryBatch& batch, AgentNets& nets, const TrainConfig& cfg) {
  cfg.validate();
  UpdateReport rep;
  const int n = batch.n_agents();
  if (n != nets.n_agents()) throw std::invalid_argument("a2c_update: agent count mismatch");
  if (batch.steps() == 0) throw std::invalid_argument("a2c_update: empty batch");

  const int ap = nets.actor().param_count();
  const int cp = nets.critic().param_count();
  std::vector<std::vector<double>> actor_grads(static_cast<std::size_t>(n),
                                               std::vector<double>(static_cast<std::size_t>(ap), 0.0));
  std::vector<std::vector<double>> critic_grads(static_cast<std::size_t>(n),
                                                std::vector<double>(static_cast<std::size_t>(cp), 0.0));
  double ent_total = 0.0;
  for (int a = 0; a < n; ++a) {
    const auto& traj = batch.per_agent[static_cast<std::size_t>(a)];
    const double bootstrap =
        nets.critic().forward(nets.critic_params(a), batch.final_obs[static_cast<std::size_t>(a)])[0];
    const auto returns = detail::discounted_returns(traj, bootstrap, cfg.gamma);
    std::vector<double> adv(returns.size());
    for (std::size_t t = 0; t < adv.size(); ++t) adv[t] = returns[t] - traj[t].value;

    double ent = 0.0;
    rep.actor_loss += detail::actor_loss_grad(nets.actor(), nets.actor_params(a), traj, adv,
                                              cfg.entropy_weight,
                                              actor_grads[static_cast<std::size_t>(a)], &ent);
    rep.critic_loss += detail::critic_loss_grad(nets.critic(), nets.critic_params(a), traj, returns,
                                                critic_grads[static_cast<std::size_t>(a)]);
    ent_total += ent;
  }
  rep.actor_loss /= n;
  rep.critic_loss /= n;
  rep.mean_entropy = ent_total / n;
  if (!std::isfinite(rep.actor_loss) || !std::isfinite(rep.critic_loss)) {
    rep.skipped = true;
    rep.error = "non-finite loss; update skipped";
    return rep;
  }

  // Average member gradients per sharing group, then one Adam step per group.
  const auto& scheme = nets.scheme();
  for (int k = 0; k < 2; ++k) {
    const NetKind kind = static_cast<NetKind>(k);
    const auto& grads = (kind == NetKind::Actor) ? actor_grads : critic_grads;
    const double lr = (kind == NetKind::Actor) ? cfg.actor_lr : cfg.critic_lr;
    for (int b = 0; b < scheme.n_blocks(); ++b) {
      const auto [lo, hi] = nets.block_range(kind, b);
      for (int g = 0; g < scheme.n_groups(b); ++g) {
        const auto& members = scheme.group_members(b, g);
        std::vector<double> avg(static_cast<std::size_t>(hi - lo), 0.0);
        for (int m : members) {
          const auto& src = grads[static_cast<std::size_t>(m)];
          for (int i = lo; i < hi; ++i) avg[static_cast<std::size_t>(i - lo)] += src[static_cast<std::size_t>(i)];
        }
        const double inv = 1.0 / static_cast<double>(members.size());
        for (auto& v : avg) v *= inv;
        adam_step(nets.group_params(kind, b, g), avg, nets.group_adam(kind, b, g), lr);
      }
    }
  }
  nets.refresh_materialized();
  return rep;
}

EvalReport evaluate(SpreadEnv& env, const AgentNets& nets, int episodes) {
  if (episodes < 1) throw std::invalid_argument("evaluate: episodes must be >= 1");
  const int n = env.config().n_agents;
  EvalReport rep;
  Rng unused(0);
  for (int e = 0; e < episodes; ++e) {
    auto obs = env.reset();
    double total = 0.0;
    bool done = false;
    while (!done) {
      std::vector<int> actions(static_cast<std::size_t>(n));
      for (int a = 0; a < n; ++a)
        actions[static_cast<std::size_t>(a)] =
            act(nets.actor(), nets.actor_params(a), obs[static_cast<std::size_t>(a)], unused,
                ActMode::Greedy)
                .action;
      auto step = env.step(actions);
      for (double r : step.rewards) total += r;
      obs = std::move(step.obs);
      done = step.done;
    }
    rep.per_episode.push_back(total / n);
  }
  double sum = 0.0;
  for (double v : rep.per_episode) sum += v;
  rep.mean = sum / static_cast<double>(rep.per_episode.size());
  double var = 0.0;
  for (double v : rep.per_episode) var += (v - rep.mean) * (v - rep.mean);
  rep.stddev = rep.per_episode.size() > 1
                   ? std::sqrt(var / static_cast<double>(rep.per_episode.size() - 1))
                   : 0.0;
  return rep;
}

}  // namespace mapd

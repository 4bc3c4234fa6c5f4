#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mapd/rng.hpp"

namespace mapd {

// Multi-agent spread task: n agents, one landmark per color. Each agent is
// guided towards the landmark of its color, penalized for collisions, and a
// sparse gather bonus rewards same-color agents that crowd their landmark.
struct SpreadConfig {
  int n_agents = 15;
  std::vector<int> color_allocation = {5, 5, 5};  // group sizes, sums to n_agents
  double half_width = 1.0;                        // world square is [-hw, hw]^2
  double agent_radius = 0.05;
  double collision_penalty = 1.0;
  double gather_radius = 0.15;  // rho: qualify when closer than this to the landmark
  double gather_bonus = 5.0;    // beta
  bool shuffle = false;         // fixed per-agent permutation of the observation
  bool append_agent_id = false; // FPS-id: one-hot agent index appended
  int episode_length = 50;
  double move_step = 0.05;

  int n_colors() const { return static_cast<int>(color_allocation.size()); }
  // 2 own pos + 2k landmark offsets + 2(n-1) agent offsets + k color one-hot.
  int base_obs_dim() const { return 2 + 3 * n_colors() + 2 * (n_agents - 1); }
  int obs_dim() const { return base_obs_dim() + (append_agent_id ? n_agents : 0); }
  void validate() const;
};

// Scenario names like "15a_3c", "15a_3c_shuffle", "15a_3c_super".
SpreadConfig parse_scenario(const std::string& name);

enum class SpreadAction : int { Stay = 0, Up = 1, Down = 2, Left = 3, Right = 4 };
inline constexpr int kSpreadActionCount = 5;

struct WorldState {
  std::vector<std::array<double, 2>> agent_pos;
  std::vector<std::array<double, 2>> landmark_pos;
  std::vector<int> agent_color;
  int step_count = 0;
};

struct StepResult {
  std::vector<std::vector<double>> obs;
  std::vector<double> rewards;
  bool done = false;
};

class SpreadEnv {
 public:
  SpreadEnv(SpreadConfig config, std::uint64_t seed);

  const SpreadConfig& config() const { return cfg_; }
  const WorldState& state() const { return state_; }
  const std::vector<std::vector<int>>& permutations() const { return perms_; }

  // Draws fresh uniform agent/landmark positions; returns per-agent observations.
  std::vector<std::vector<double>> reset();

  // Replaces the world state (positions/step counter) after validating shapes.
  void set_state(WorldState s);

  // One action per agent from {stay, up, down, left, right}.
  StepResult step(const std::vector<int>& actions);

  std::vector<double> observe(int agent_id) const;

  // Reward pieces recomputable from the post-move state, used by tests.
  double guidance_reward(int agent_id) const;
  double gather_reward(int agent_id) const;
  int collision_count(int agent_id) const;

  // Inverse of the fixed shuffle permutation (identity when shuffle is off).
  // Strips a trailing agent-id block if present.
  std::vector<double> unshuffle(int agent_id, std::span<const double> obs) const;

 private:
  std::vector<double> base_observation(int agent_id) const;

  SpreadConfig cfg_;
  Rng rng_;
  WorldState state_;
  std::vector<std::vector<int>> perms_;  // per agent, over the base observation
};

}  // namespace mapd

#include "mapd/spread_env.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace mapd {

namespace {

double dist2d(const std::array<double, 2>& a, const std::array<double, 2>& b) {
  const double dx = a[0] - b[0], dy = a[1] - b[1];
  return std::sqrt(dx * dx + dy * dy);
}

// Uneven ("super") allocation: ~60% of the agents take the first color, the
// rest is split as evenly as possible, every color keeping at least one agent.
std::vector<int> super_allocation(int agents, int colors) {
  std::vector<int> alloc(static_cast<std::size_t>(colors), 1);
  int first = std::max(1, static_cast<int>(std::lround(0.6 * agents)));
  first = std::min(first, agents - (colors - 1));
  alloc[0] = first;
  int rest = agents - first;
  for (int c = 1; c < colors; ++c) {
    const int share = rest / (colors - c);
    alloc[static_cast<std::size_t>(c)] = share;
    rest -= share;
  }
  return alloc;
}

}  // namespace

void SpreadConfig::validate() const {
  if (n_agents < 1) throw std::invalid_argument("SpreadConfig: n_agents must be >= 1");
  if (color_allocation.empty())
    throw std::invalid_argument("SpreadConfig: color_allocation empty");
  int sum = 0;
  for (int c : color_allocation) {
    if (c < 1) throw std::invalid_argument("SpreadConfig: color group sizes must be >= 1");
    sum += c;
  }
  if (sum != n_agents)
    throw std::invalid_argument("SpreadConfig: color_allocation must sum to n_agents");
  if (!(gather_radius > 0.0)) throw std::invalid_argument("SpreadConfig: gather_radius must be > 0");
  if (episode_length < 1) throw std::invalid_argument("SpreadConfig: episode_length must be >= 1");
  if (!(half_width > 0.0) || !(move_step > 0.0) || !(agent_radius > 0.0))
    throw std::invalid_argument("SpreadConfig: geometry parameters must be > 0");
}

SpreadConfig parse_scenario(const std::string& name) {
  // Grammar: <n>a_<k>c with optional _super / _shuffle suffixes in any order.
  auto fail = [&]() -> SpreadConfig {
    throw std::invalid_argument("parse_scenario: cannot parse '" + name +
                                "' (expected forms like 15a_3c, 15a_3c_shuffle, 15a_3c_super)");
  };
  std::vector<std::string> parts;
  std::size_t pos = 0;
  while (pos <= name.size()) {
    const std::size_t us = name.find('_', pos);
    parts.push_back(name.substr(pos, us == std::string::npos ? us : us - pos));
    if (us == std::string::npos) break;
    pos = us + 1;
  }
  if (parts.size() < 2) fail();
  auto parse_count = [&](const std::string& tok, char suffix) -> int {
    if (tok.size() < 2 || tok.back() != suffix) fail();
    int v = 0;
    for (std::size_t i = 0; i + 1 < tok.size(); ++i) {
      if (tok[i] < '0' || tok[i] > '9') fail();
      v = v * 10 + (tok[i] - '0');
    }
    if (v < 1) fail();
    return v;
  };
  SpreadConfig cfg;
  cfg.n_agents = parse_count(parts[0], 'a');
  const int colors = parse_count(parts[1], 'c');
  if (colors > cfg.n_agents) fail();
  bool super = false;
  for (std::size_t i = 2; i < parts.size(); ++i) {
    if (parts[i] == "shuffle")
      cfg.shuffle = true;
    else if (parts[i] == "super")
      super = true;
    else
      fail();
  }
  cfg.color_allocation = super ? super_allocation(cfg.n_agents, colors)
                               : std::vector<int>();
  if (!super) {
    // Even split, remainder to the earlier colors.
    cfg.color_allocation.assign(static_cast<std::size_t>(colors), cfg.n_agents / colors);
    for (int c = 0; c < cfg.n_agents % colors; ++c) cfg.color_allocation[static_cast<std::size_t>(c)]++;
  }
  cfg.validate();
  return cfg;
}

SpreadEnv::SpreadEnv(SpreadConfig config, std::uint64_t seed)
    : cfg_(std::move(config)), rng_(Rng::substream(seed, 0xE17)) {
  cfg_.validate();
  // Fixed per-agent permutations for the whole run, drawn from the run seed.
  Rng perm_rng = Rng::substream(seed, 0x5F07);
  perms_.resize(static_cast<std::size_t>(cfg_.n_agents));
  for (int a = 0; a < cfg_.n_agents; ++a) {
    auto& p = perms_[static_cast<std::size_t>(a)];
    p.resize(static_cast<std::size_t>(cfg_.base_obs_dim()));
    std::iota(p.begin(), p.end(), 0);
    if (cfg_.shuffle) perm_rng.shuffle(p);
  }
  state_.agent_color.clear();
  for (int c = 0; c < cfg_.n_colors(); ++c)
    for (int i = 0; i < cfg_.color_allocation[static_cast<std::size_t>(c)]; ++i)
      state_.agent_color.push_back(c);
  reset();
}

std::vector<std::vector<double>> SpreadEnv::reset() {
  const double hw = cfg_.half_width;
  state_.agent_pos.assign(static_cast<std::size_t>(cfg_.n_agents), {0.0, 0.0});
  state_.landmark_pos.assign(static_cast<std::size_t>(cfg_.n_colors()), {0.0, 0.0});
  for (auto& p : state_.agent_pos) {
    p[0] = rng_.uniform(-hw, hw);
    p[1] = rng_.uniform(-hw, hw);
  }
  for (auto& p : state_.landmark_pos) {
    p[0] = rng_.uniform(-hw, hw);
    p[1] = rng_.uniform(-hw, hw);
  }
  state_.step_count = 0;
  std::vector<std::vector<double>> obs;
  obs.reserve(static_cast<std::size_t>(cfg_.n_agents));
  for (int a = 0; a < cfg_.n_agents; ++a) obs.push_back(observe(a));
  return obs;
}

void SpreadEnv::set_state(WorldState s) {
  if (static_cast<int>(s.agent_pos.size()) != cfg_.n_agents ||
      static_cast<int>(s.landmark_pos.size()) != cfg_.n_colors() ||
      static_cast<int>(s.agent_color.size()) != cfg_.n_agents)
    throw std::invalid_argument("SpreadEnv::set_state: shape mismatch with config");
  state_ = std::move(s);
}

StepResult SpreadEnv::step(const std::vector<int>& actions) {
  if (static_cast<int>(actions.size()) != cfg_.n_agents)
    throw std::invalid_argument("SpreadEnv::step: one action per agent required");
  const double hw = cfg_.half_width, d = cfg_.move_step;
  for (int a = 0; a < cfg_.n_agents; ++a) {
    const int act = actions[static_cast<std::size_t>(a)];
    if (act < 0 || act >= kSpreadActionCount)
      throw std::invalid_argument("SpreadEnv::step: invalid action index " + std::to_string(act));
    auto& p = state_.agent_pos[static_cast<std::size_t>(a)];
    switch (static_cast<SpreadAction>(act)) {
      case SpreadAction::Stay: break;
      case SpreadAction::Up: p[1] += d; break;
      case SpreadAction::Down: p[1] -= d; break;
      case SpreadAction::Left: p[0] -= d; break;
      case SpreadAction::Right: p[0] += d; break;
    }
    p[0] = std::clamp(p[0], -hw, hw);
    p[1] = std::clamp(p[1], -hw, hw);
  }
  state_.step_count += 1;

  StepResult out;
  out.rewards.resize(static_cast<std::size_t>(cfg_.n_agents));
  for (int a = 0; a < cfg_.n_agents; ++a) {
    out.rewards[static_cast<std::size_t>(a)] =
        guidance_reward(a) - cfg_.collision_penalty * collision_count(a) + gather_reward(a);
  }
  out.done = state_.step_count >= cfg_.episode_length;
  out.obs.reserve(static_cast<std::size_t>(cfg_.n_agents));
  for (int a = 0; a < cfg_.n_agents; ++a) out.obs.push_back(observe(a));
  return out;
}

double SpreadEnv::guidance_reward(int agent_id) const {
  const int c = state_.agent_color[static_cast<std::size_t>(agent_id)];
  return -dist2d(state_.agent_pos[static_cast<std::size_t>(agent_id)],
                 state_.landmark_pos[static_cast<std::size_t>(c)]);
}

int SpreadEnv::collision_count(int agent_id) const {
  int n = 0;
  const auto& me = state_.agent_pos[static_cast<std::size_t>(agent_id)];
  for (int b = 0; b < cfg_.n_agents; ++b) {
    if (b == agent_id) continue;
    if (dist2d(me, state_.agent_pos[static_cast<std::size_t>(b)]) < 2.0 * cfg_.agent_radius) ++n;
  }
  return n;
}

double SpreadEnv::gather_reward(int agent_id) const {
  const int color = state_.agent_color[static_cast<std::size_t>(agent_id)];
  const auto& lm = state_.landmark_pos[static_cast<std::size_t>(color)];
  const double rho = cfg_.gather_radius;
  if (dist2d(state_.agent_pos[static_cast<std::size_t>(agent_id)], lm) >= rho) return 0.0;

  std::vector<int> qualifying;
  int color_total = 0;
  for (int b = 0; b < cfg_.n_agents; ++b) {
    if (state_.agent_color[static_cast<std::size_t>(b)] != color) continue;
    ++color_total;
    if (dist2d(state_.agent_pos[static_cast<std::size_t>(b)], lm) < rho) qualifying.push_back(b);
  }
  const int q = static_cast<int>(qualifying.size());
  if (q < 2) return 0.0;
  double pair_sum = 0.0;
  for (std::size_t i = 0; i < qualifying.size(); ++i)
    for (std::size_t j = i + 1; j < qualifying.size(); ++j)
      pair_sum += dist2d(state_.agent_pos[static_cast<std::size_t>(qualifying[i])],
                         state_.agent_pos[static_cast<std::size_t>(qualifying[j])]);
  const double mean_pair = pair_sum / (0.5 * q * (q - 1));
  return cfg_.gather_bonus * (static_cast<double>(q) / color_total) *
         std::max(0.0, 1.0 - mean_pair / rho);
}

std::vector<double> SpreadEnv::base_observation(int agent_id) const {
  const auto& me = state_.agent_pos[static_cast<std::size_t>(agent_id)];
  std::vector<double> o;
  o.reserve(static_cast<std::size_t>(cfg_.base_obs_dim()));
  o.push_back(me[0]);
  o.push_back(me[1]);
  for (const auto& lm : state_.landmark_pos) {
    o.push_back(lm[0] - me[0]);
    o.push_back(lm[1] - me[1]);
  }
  for (int b = 0; b < cfg_.n_agents; ++b) {
    if (b == agent_id) continue;
    const auto& p = state_.agent_pos[static_cast<std::size_t>(b)];
    o.push_back(p[0] - me[0]);
    o.push_back(p[1] - me[1]);
  }
  for (int c = 0; c < cfg_.n_colors(); ++c)
    o.push_back(c == state_.agent_color[static_cast<std::size_t>(agent_id)] ? 1.0 : 0.0);
  return o;
}

std::vector<double> SpreadEnv::observe(int agent_id) const {
  if (agent_id < 0 || agent_id >= cfg_.n_agents)
    throw std::invalid_argument("SpreadEnv::observe: bad agent id");
  const std::vector<double> base = base_observation(agent_id);
  const auto& perm = perms_[static_cast<std::size_t>(agent_id)];
  std::vector<double> o(base.size());
  for (std::size_t i = 0; i < base.size(); ++i)
    o[i] = base[static_cast<std::size_t>(perm[i])];
  if (cfg_.append_agent_id) {
    o.resize(base.size() + static_cast<std::size_t>(cfg_.n_agents), 0.0);
    o[base.size() + static_cast<std::size_t>(agent_id)] = 1.0;
  }
  return o;
}

std::vector<double> SpreadEnv::unshuffle(int agent_id, std::span<const double> obs) const {
  const auto& perm = perms_[static_cast<std::size_t>(agent_id)];
  if (obs.size() < perm.size())
    throw std::invalid_argument("SpreadEnv::unshuffle: observation too short");
  std::vector<double> base(perm.size());
  for (std::size_t i = 0; i < perm.size(); ++i)
    base[static_cast<std::size_t>(perm[i])] = obs[i];
  return base;
}

}  // namespace mapd

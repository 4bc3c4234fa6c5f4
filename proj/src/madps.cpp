#include "mapd/madps.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

namespace mapd {

void MadpsConfig::validate() const {
  if (!(eps1 > 0.0)) throw std::invalid_argument("MadpsConfig: eps1 must be > 0");
  if (resolved_eps2() < 2.0 * eps1 - 1e-12)
    throw std::invalid_argument("MadpsConfig: eps2 must satisfy eps2 >= 2 * eps1");
  if (period < 1) throw std::invalid_argument("MadpsConfig: period must be >= 1");
}

nlohmann::json SchemeEvent::to_json() const {
  return {{"kind", kind == Kind::Fusion ? "fusion" : "division"},
          {"block", block},
          {"group_a", group_a},
          {"group_b", group_b},
          {"parent", parent},
          {"trigger_distance", trigger_distance},
          {"round", round}};
}

SchemeEvent SchemeEvent::from_json(const nlohmann::json& j) {
  SchemeEvent e;
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "fusion")
    e.kind = Kind::Fusion;
  else if (kind == "division")
    e.kind = Kind::Division;
  else
    throw std::invalid_argument("SchemeEvent: unknown kind '" + kind + "'");
  e.block = j.at("block").get<std::string>();
  e.group_a = j.at("group_a").get<std::vector<int>>();
  e.group_b = j.at("group_b").get<std::vector<int>>();
  e.parent = j.value("parent", std::vector<int>{});
  e.trigger_distance = j.at("trigger_distance").get<double>();
  e.round = j.value("round", 0);
  return e;
}

std::vector<SchemeEvent> propose_updates(const DistanceMatrix& matrix, const SharingScheme& scheme,
                                         const MadpsConfig& cfg, int round) {
  cfg.validate();
  const int n = matrix.n();
  for (int b = 0; b < scheme.n_blocks(); ++b)
    for (int g = 0; g < scheme.n_groups(b); ++g)
      for (int a : scheme.group_members(b, g))
        if (a < 0 || a >= n)
          throw std::invalid_argument("propose_updates: matrix does not cover the scheme");

  const double eps1 = cfg.eps1;
  const double eps2 = cfg.resolved_eps2();
  auto d = [&](int i, int j) { return matrix.at(i, j); };

  std::vector<SchemeEvent> events;
  std::set<int> divided;

  // Division pass, deepest (output-side) block first. Each agent set divides
  // at most once per round, in the deepest block where it is still shared.
  for (int b = scheme.n_blocks() - 1; b >= 0; --b) {
    for (int g = 0; g < scheme.n_groups(b); ++g) {
      const auto& members = scheme.group_members(b, g);
      if (members.size() < 2) continue;
      if (std::any_of(members.begin(), members.end(),
                      [&](int a) { return divided.count(a) > 0; }))
        continue;
      double worst = -1.0;
      int wi = -1, wj = -1;
      for (std::size_t x = 0; x < members.size(); ++x)
        for (std::size_t y = x + 1; y < members.size(); ++y) {
          const double v = d(members[x], members[y]);
          if (v > worst) {
            worst = v;
            wi = members[x];
            wj = members[y];
          }
        }
      if (worst <= eps2) continue;
      const int seed_a = std::min(wi, wj);
      const int seed_b = std::max(wi, wj);
      SchemeEvent e;
      e.kind = SchemeEvent::Kind::Division;
      e.block = scheme.blocks[static_cast<std::size_t>(b)];
      e.parent = members;
      for (int m : members) {
        if (m == seed_a) {
          e.group_a.push_back(m);
        } else if (m == seed_b) {
          e.group_b.push_back(m);
        } else if (d(m, seed_a) <= d(m, seed_b)) {  // ties go to the lower seed id
          e.group_a.push_back(m);
        } else {
          e.group_b.push_back(m);
        }
      }
      e.trigger_distance = worst;
      e.round = round;
      events.push_back(std::move(e));
      divided.insert(members.begin(), members.end());
    }
  }

  // Fusion pass: close pairs in ascending order of distance.
  struct Pair {
    double d;
    int i, j;
  };
  std::vector<Pair> close;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (d(i, j) < eps1 && !divided.count(i) && !divided.count(j)) close.push_back({d(i, j), i, j});
  std::sort(close.begin(), close.end(), [](const Pair& a, const Pair& b) {
    if (a.d != b.d) return a.d < b.d;
    if (a.i != b.i) return a.i < b.i;
    return a.j < b.j;
  });

  std::vector<std::set<std::vector<int>>> used(static_cast<std::size_t>(scheme.n_blocks()));
  for (const auto& p : close) {
    int block = -1;
    for (int b = 0; b < scheme.n_blocks(); ++b)
      if (scheme.group_of(b, p.i) != scheme.group_of(b, p.j)) {
        block = b;  // shallowest unshared block
        break;
      }
    if (block < 0) continue;  // already fully shared
    const auto ga = scheme.group_members(block, scheme.group_of(block, p.i));
    const auto gb = scheme.group_members(block, scheme.group_of(block, p.j));
    if (used[static_cast<std::size_t>(block)].count(ga) ||
        used[static_cast<std::size_t>(block)].count(gb))
      continue;
    // complete linkage keeps every member pair under eps1, so the merged
    // group's intra distance stays below eps2 = 2 * eps1
    bool all_close = true;
    for (int a : ga) {
      for (int b2 : gb)
        if (!(d(a, b2) < eps1)) {
          all_close = false;
          break;
        }
      if (!all_close) break;
    }
    if (!all_close) continue;
    SchemeEvent e;
    e.kind = SchemeEvent::Kind::Fusion;
    e.block = scheme.blocks[static_cast<std::size_t>(block)];
    e.group_a = ga;
    e.group_b = gb;
    e.trigger_distance = p.d;
    e.round = round;
    events.push_back(std::move(e));
    used[static_cast<std::size_t>(block)].insert(ga);
    used[static_cast<std::size_t>(block)].insert(gb);
  }
  return events;
}

bool apply_fusion(AgentNets& nets, const SchemeEvent& event) {
  if (event.kind != SchemeEvent::Kind::Fusion)
    throw std::invalid_argument("apply_fusion: not a fusion event");
  const int b = nets.scheme().block_index(event.block);
  if (b < 0) return false;
  const int ga = nets.scheme().find_group(b, event.group_a);
  const int gb = nets.scheme().find_group(b, event.group_b);
  if (ga < 0 || gb < 0 || ga == gb) return false;  // stale: scheme moved on
  nets.fuse_groups(b, ga, gb);
  return true;
}

bool apply_division(AgentNets& nets, const SchemeEvent& event) {
  if (event.kind != SchemeEvent::Kind::Division)
    throw std::invalid_argument("apply_division: not a division event");
  const int b = nets.scheme().block_index(event.block);
  if (b < 0) return false;
  const int g = nets.scheme().find_group(b, event.parent);
  if (g < 0) return false;
  nets.split_group(b, g, event.group_a, event.group_b);
  return true;
}

MadpsRound madps_step(const SpreadConfig& env_cfg, AgentNets& nets, const MadpsConfig& cfg,
                      int round, Rng& rng) {
  cfg.validate();
  MadpsRound out;
  try {
    const auto data = collect_measurement_data(env_cfg, nets, cfg.measurement, rng);
    out.matrix = measure_policy_distances(nets, data, cfg.measurement, rng);
  } catch (const std::exception& ex) {
    out.skipped = true;
    out.error = ex.what();
    out.scheme_after = nets.scheme();
    return out;
  }
  out.events = propose_updates(out.matrix, nets.scheme(), cfg, round);
  for (const auto& e : out.events) {
    const bool ok = e.kind == SchemeEvent::Kind::Fusion ? apply_fusion(nets, e)
                                                        : apply_division(nets, e);
    if (ok)
      ++out.applied;
    else
      ++out.stale;
  }
  out.scheme_after = nets.scheme();
  return out;
}

}  // namespace mapd

#pragma once

#include <string>
#include <vector>

#include "mapd/distance.hpp"
#include "mapd/measurement.hpp"
#include "mapd/trainer.hpp"

#include <json.hpp>

namespace mapd {

struct MadpsConfig {
  double eps1 = 1.1;   // fusion threshold
  double eps2 = 0.0;   // division threshold; <= 0 means 2 * eps1
  std::int64_t period = 10000;  // environment steps between measurement rounds
  MeasurementConfig measurement;

  double resolved_eps2() const { return eps2 > 0.0 ? eps2 : 2.0 * eps1; }
  // eps2 >= 2 * eps1: keeps freshly fused groups below the division threshold.
  void validate() const;
};

struct SchemeEvent {
  enum class Kind { Fusion, Division };
  Kind kind = Kind::Fusion;
  std::string block;
  // Fusion: the two groups being merged. Division: the two children.
  std::vector<int> group_a;
  std::vector<int> group_b;
  std::vector<int> parent;  // division only: the group being split
  double trigger_distance = 0.0;
  int round = 0;

  nlohmann::json to_json() const;
  static SchemeEvent from_json(const nlohmann::json& j);
};

// Pure decision pass over one distance matrix. Division first: any group in
// its deepest shared block whose max intra-group distance exceeds eps2 splits
// around its two farthest members. Fusion second: agent pairs closer than
// eps1, ascending, merge their groups in the shallowest unshared block when
// every cross-group pair is also closer than eps1; a group fuses at most once
// per round and groups touched by a division sit the round out.
std::vector<SchemeEvent> propose_updates(const DistanceMatrix& matrix, const SharingScheme& scheme,
                                         const MadpsConfig& cfg, int round = 0);

// Both return false (skipped) when the event no longer matches the scheme.
bool apply_fusion(AgentNets& nets, const SchemeEvent& event);
bool apply_division(AgentNets& nets, const SchemeEvent& event);

struct MadpsRound {
  DistanceMatrix matrix;
  std::vector<SchemeEvent> events;
  int applied = 0;
  int stale = 0;
  bool skipped = false;      // measurement failed; training continues
  std::string error;
  SharingScheme scheme_after;
};

// One full measurement round: fresh greedy rollouts, fresh auto-encoder,
// distance matrix, propose, apply.
MadpsRound madps_step(const SpreadConfig& env_cfg, AgentNets& nets, const MadpsConfig& cfg,
                      int round, Rng& rng);

}  // namespace mapd

#pragma once

#include "mapd/autoencoder.hpp"
#include "mapd/distance.hpp"
#include "mapd/trainer.hpp"

namespace mapd {

// Fresh data for one measurement round: pooled decision samples of all agents
// (auto-encoder training set) and the shared padded observation set for the
// Monte-Carlo distance estimate.
struct MeasurementData {
  std::vector<DecisionSample> samples;
  std::vector<std::vector<double>> obs_set;
  int rollouts = 0;
};

struct MeasurementConfig {
  int rollouts = 4;
  int steps_per_rollout = 100;
  ActMode rollout_mode = ActMode::Greedy;  // greedy rollouts cut estimate variance
  AutoEncoderConfig ae;
};

// Runs `rollouts` fresh environments for `steps_per_rollout` steps each and
// records every agent's (observation, policy distribution) pair. Recorded
// distributions are the softmax policies; the mode only drives the actions.
MeasurementData collect_measurement_data(const SpreadConfig& cfg, const AgentNets& nets,
                                         const MeasurementConfig& mcfg, Rng& rng);

// Evaluates each agent's policy on a shared padded observation, truncating to
// the network input size, so two agents are always compared on the same o.
PolicyEvalFn make_policy_eval(const AgentNets& nets,
                              const std::vector<std::vector<double>>& obs_set);

// Full round: train a fresh shared auto-encoder on the pooled samples, then
// build the pairwise distance matrix over the shared observation set.
DistanceMatrix measure_policy_distances(const AgentNets& nets, const MeasurementData& data,
                                        const MeasurementConfig& mcfg, Rng& rng);

}  // namespace mapd

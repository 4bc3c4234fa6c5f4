#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mapd/autoencoder.hpp"
#include "mapd/distance.hpp"
#include "mapd/measurement.hpp"
#include "mapd/trainer.hpp"

namespace mapd {

// A user-chosen aspect of behavior, modeled as a stochastic variable observed
// one step after the conditioning observation. Built-ins cover the spread
// case studies; arbitrary features arrive through the offline JSONL format.
struct FeatureSpec {
  enum class Kind {
    LandmarkDistance,          // distance to a fixed landmark at t+1
    MatchingLandmarkDistance,  // distance to the agent's own landmark at t+1
    ActionReconstruction,      // c := the action distribution itself; reduces
                               // to the ordinary policy distance
  };
  std::string id;
  Kind kind = Kind::MatchingLandmarkDistance;
  int dim = 1;
  int landmark_index = -1;  // 0-based, LandmarkDistance only
};

// Accepts "dist_to_matching_landmark", "dist_to_landmark:<k>" (k 1-based as
// in the task descriptions) and "action".
FeatureSpec parse_feature_spec(const std::string& id);

struct CustomizedSample {
  DecisionSample base;
  std::vector<double> feature;
};

// One sample per (agent, step t < last): the decision at t paired with the
// feature observed at t+1. Shuffled observations are unscrambled through the
// environment's fixed permutations before the feature is read off.
std::vector<CustomizedSample> extract_features(const TrajectoryBatch& batch, const SpreadEnv& env,
                                               const FeatureSpec& spec);

struct CustomAeLossResult {
  double loss = 0.0;
  double recon = 0.0;
  double kl = 0.0;
  std::vector<double> encoder_grad;
  std::vector<double> decoder_grad;
};

// Negative-ELBO loss for the customized auto-encoder: Gaussian reconstruction
// of the feature (fixed observation noise ae.sigma()) plus the prior-matching
// KL term.
CustomAeLossResult custom_ae_loss(const AutoEncoder& ae, const CustomizedSample& sample, Rng& rng);

struct CustomizedConfig {
  double sigma_c = 0.1;  // feature observation noise, in standardized units
  bool standardize_features = true;
  AutoEncoderConfig ae;
};

struct CustomizedTraining {
  AutoEncoder ae;
  std::vector<double> feature_mean;
  std::vector<double> feature_std;
  std::vector<double> epoch_loss;
};

// Trains a fresh Gaussian-head auto-encoder on pooled customized samples;
// features are standardized over the pool first (when enabled).
CustomizedTraining train_customized_autoencoder(const std::vector<CustomizedSample>& samples,
                                                const CustomizedConfig& cfg, Rng& rng);

// Full Eq.-6 style pipeline: extract features from the batch, train the
// customized auto-encoder, then compute the pairwise distance matrix over the
// batch's observations with the customized encoder.
DistanceMatrix customized_distance_matrix(const FeatureSpec& spec, const TrajectoryBatch& batch,
                                          const SpreadEnv& env, const AgentNets& nets,
                                          const CustomizedConfig& cfg, Rng& rng);

// Same measurement but on pre-extracted samples (offline ingestion path).
DistanceMatrix customized_distance_matrix_from_samples(
    const std::vector<CustomizedSample>& samples,
    const std::vector<std::vector<double>>& obs_set, const PolicyEvalFn& policies, int n_agents,
    const CustomizedConfig& cfg, Rng& rng);

}  // namespace mapd

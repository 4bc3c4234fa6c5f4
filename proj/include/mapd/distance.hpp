#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "mapd/autoencoder.hpp"
#include "mapd/matrix.hpp"

namespace mapd {

struct DistanceMatrixMeta {
  int obs_samples = 0;
  int rollouts = 0;
  std::uint64_t seed = 0;
};

// Symmetric pairwise policy distances with a zero diagonal. Entries are means
// of per-observation 2-Wasserstein distances in the shared latent space, so
// the triangle inequality carries over (up to accumulation error).
struct DistanceMatrix {
  std::vector<int> agent_ids;
  Matrix values;
  DistanceMatrixMeta meta;

  int n() const { return static_cast<int>(agent_ids.size()); }
  double at(int i, int j) const { return values.at(i, j); }

  // symmetry is exact by construction; diagonal within 1e-9; nonnegative;
  // triangle inequality over all triples within the tolerance
  void validate(double triangle_tol = 1e-6) const;

  double max_offdiag() const;
  double mean_offdiag() const;
};

// Returns agent `agent`'s action distribution on obs_set[obs_idx], not yet
// padded (the measurement code pads to the auto-encoder's action dim).
using PolicyEvalFn = std::function<std::vector<double>(int agent, int obs_idx)>;

// Eq.-3 style Monte-Carlo distance: mean over the shared observation set of
// the W2 distance between the two agents' encoded decisions.
double pairwise_policy_distance(const AutoEncoder& ae, int agent_i, int agent_j,
                                const std::vector<std::vector<double>>& obs_set,
                                const PolicyEvalFn& policies);

DistanceMatrix distance_matrix(const AutoEncoder& ae, const std::vector<int>& agents,
                               const std::vector<std::vector<double>>& obs_set,
                               const PolicyEvalFn& policies);

}  // namespace mapd

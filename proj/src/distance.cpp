#include "mapd/distance.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace mapd {

void DistanceMatrix::validate(double triangle_tol) const {
  const int m = n();
  if (values.rows != m || values.cols != m)
    throw std::runtime_error("DistanceMatrix: shape/agent-id mismatch");
  for (int i = 0; i < m; ++i) {
    if (std::abs(values.at(i, i)) > 1e-9)
      throw std::runtime_error("DistanceMatrix: nonzero diagonal at " + std::to_string(i));
    for (int j = 0; j < m; ++j) {
      const double v = values.at(i, j);
      if (!std::isfinite(v) || v < 0.0)
        throw std::runtime_error("DistanceMatrix: negative or non-finite entry");
      if (values.at(i, j) != values.at(j, i))
        throw std::runtime_error("DistanceMatrix: asymmetry at (" + std::to_string(i) + "," +
                                 std::to_string(j) + ")");
    }
  }
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      for (int k = 0; k < m; ++k)
        if (values.at(i, j) > values.at(i, k) + values.at(k, j) + triangle_tol)
          throw std::runtime_error("DistanceMatrix: triangle inequality violated at (" +
                                   std::to_string(i) + "," + std::to_string(j) + "," +
                                   std::to_string(k) + ")");
}

double DistanceMatrix::max_offdiag() const {
  double mx = 0.0;
  for (int i = 0; i < n(); ++i)
    for (int j = 0; j < n(); ++j)
      if (i != j) mx = std::max(mx, values.at(i, j));
  return mx;
}

double DistanceMatrix::mean_offdiag() const {
  double sum = 0.0;
  int count = 0;
  for (int i = 0; i < n(); ++i)
    for (int j = 0; j < n(); ++j)
      if (i != j) {
        sum += values.at(i, j);
        ++count;
      }
  return count ? sum / count : 0.0;
}

namespace {

LatentGaussian encode_decision(const AutoEncoder& ae, const PolicyEvalFn& policies, int agent,
                               int obs_idx, const std::vector<double>& obs) {
  const auto dist = policies(agent, obs_idx);
  const auto padded = pad_to_common(dist, ae.act_dim());
  return ae.encode(padded, obs);
}

}  // namespace

double pairwise_policy_distance(const AutoEncoder& ae, int agent_i, int agent_j,
                                const std::vector<std::vector<double>>& obs_set,
                                const PolicyEvalFn& policies) {
  if (obs_set.empty()) throw std::invalid_argument("pairwise_policy_distance: empty observation set");
  if (agent_i == agent_j) return 0.0;
  double acc = 0.0;
  for (int o = 0; o < static_cast<int>(obs_set.size()); ++o) {
    const auto& obs = obs_set[static_cast<std::size_t>(o)];
    acc += w2_diag_gaussian(encode_decision(ae, policies, agent_i, o, obs),
                            encode_decision(ae, policies, agent_j, o, obs));
  }
  return acc / static_cast<double>(obs_set.size());
}

DistanceMatrix distance_matrix(const AutoEncoder& ae, const std::vector<int>& agents,
                               const std::vector<std::vector<double>>& obs_set,
                               const PolicyEvalFn& policies) {
  if (obs_set.empty()) throw std::invalid_argument("distance_matrix: empty observation set");
  const int n = static_cast<int>(agents.size());
  DistanceMatrix dm;
  dm.agent_ids = agents;
  dm.values = Matrix(n, n, 0.0);
  dm.meta.obs_samples = static_cast<int>(obs_set.size());

  // encode every (agent, observation) pair once; pairs then reuse them
  std::vector<std::vector<LatentGaussian>> enc(static_cast<std::size_t>(n));
  for (int a = 0; a < n; ++a) {
    enc[static_cast<std::size_t>(a)].reserve(obs_set.size());
    for (int o = 0; o < static_cast<int>(obs_set.size()); ++o)
      enc[static_cast<std::size_t>(a)].push_back(encode_decision(
          ae, policies, agents[static_cast<std::size_t>(a)], o, obs_set[static_cast<std::size_t>(o)]));
  }
  const double inv = 1.0 / static_cast<double>(obs_set.size());
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      double acc = 0.0;
      for (std::size_t o = 0; o < obs_set.size(); ++o)
        acc += w2_diag_gaussian(enc[static_cast<std::size_t>(i)][o], enc[static_cast<std::size_t>(j)][o]);
      const double d = acc * inv;
      dm.values.at(i, j) = d;
      dm.values.at(j, i) = d;
    }
  return dm;
}

}  // namespace mapd

#pragma once

// Independent oracles used by the test suites. Nothing here calls back into
// the implementation paths it checks: gradients come from finite differences,
// the Gaussian W2 from a discrete optimal-transport solve on samples, the KL
// from quadrature, and the sharing-scheme clustering from brute force.

#include <functional>
#include <vector>

#include "mapd/rng.hpp"

namespace mapd::oracles {

// Central finite differences of a scalar function at x.
std::vector<double> finite_diff_gradient(const std::function<double(const std::vector<double>&)>& f,
                                         std::vector<double> x, double h = 1e-5);

// Relative error with a small floor so near-zero coordinates do not blow up.
double rel_err(double a, double b, double floor_ = 1e-6);

// KL( N(mu, sigma) || N(0, 1) ) for 1-D Gaussians via composite Simpson.
double kl_gaussian_quadrature(double mu, double sigma);

// Discrete optimal-transport estimate of the 2-Wasserstein distance between
// diagonal Gaussians. Per coordinate, n samples are drawn from each marginal
// and the 1-D OT problem between the two empirical measures is solved exactly
// by sorted matching; coordinate costs add up because both measures are
// product measures under quadratic cost.
double w2_sampling_ot(const std::vector<double>& mean_p, const std::vector<double>& std_p,
                      const std::vector<double>& mean_q, const std::vector<double>& std_q,
                      int n_samples, Rng& rng);

// Same estimate with the squared cost averaged over independent repeats.
double w2_sampling_ot_avg(const std::vector<double>& mean_p, const std::vector<double>& std_p,
                          const std::vector<double>& mean_q, const std::vector<double>& std_q,
                          int n_samples, int repeats, Rng& rng);

// Exact 1-D OT cost between two equal-size point sets under squared distance,
// by exhaustive search over assignments. Validates the sorted-matching step.
double ot_1d_bruteforce(std::vector<double> xs, std::vector<double> ys);
double ot_1d_sorted(std::vector<double> xs, std::vector<double> ys);

// Threshold clustering used as the MADPS fixed-point oracle: repeatedly merge
// the two clusters whose complete-linkage distance is smallest and below eps.
std::vector<std::vector<int>> complete_linkage_clusters(const std::vector<std::vector<double>>& d,
                                                        double eps);

}  // namespace mapd::oracles

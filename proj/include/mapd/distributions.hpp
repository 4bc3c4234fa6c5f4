#pragma once

#include <span>
#include <vector>

#include "mapd/rng.hpp"

namespace mapd {

// --- Categorical action distributions -------------------------------------

// Numerically stable softmax; invariant to adding a constant to all logits.
std::vector<double> softmax(std::span<const double> logits, double temperature = 1.0);

double entropy(std::span<const double> probs);

int argmax(std::span<const double> v);

int sample_categorical(std::span<const double> probs, Rng& rng);

// 1-Wasserstein distance between categorical distributions over the index
// line with unit spacing: sum_k |CDF_p(k) - CDF_q(k)|.
double wasserstein_1d_categorical(std::span<const double> p, std::span<const double> q);

// Hellinger distance, in [0, 1].
double hellinger_categorical(std::span<const double> p, std::span<const double> q);

// --- Diagonal Gaussians in latent space ------------------------------------

// Diagonal Gaussian over the latent space. Scale is stored as log-std so the
// std is positive by construction.
struct LatentGaussian {
  std::vector<double> mean;
  std::vector<double> log_std;

  int dim() const { return static_cast<int>(mean.size()); }
  std::vector<double> std_dev() const;
};

// z = mean + std * noise, elementwise; noise must hold standard normals.
std::vector<double> reparam_sample(const LatentGaussian& g, std::span<const double> noise);

// Exact 2-Wasserstein distance between diagonal Gaussians:
// sqrt(|mu_p - mu_q|^2 + |sigma_p - sigma_q|^2).
double w2_diag_gaussian(const LatentGaussian& p, const LatentGaussian& q);

// KL(p || N(0, I)) in closed form: sum_d 0.5 (sigma^2 + mu^2 - 1 - 2 ln sigma).
double kl_to_standard_normal(const LatentGaussian& p);

}  // namespace mapd

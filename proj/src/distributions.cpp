#include "mapd/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mapd {

namespace {

void check_distribution(std::span<const double> p, const char* who) {
  if (p.empty()) throw std::invalid_argument(std::string(who) + ": empty distribution");
  double sum = 0.0;
  for (double v : p) {
    if (!(v >= -1e-9) || !std::isfinite(v))
      throw std::invalid_argument(std::string(who) + ": negative or non-finite entry");
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-6)
    throw std::invalid_argument(std::string(who) + ": probabilities do not sum to 1");
}

}  // namespace

std::vector<double> softmax(std::span<const double> logits, double temperature) {
  if (logits.empty()) throw std::invalid_argument("softmax: empty input");
  if (!(temperature > 0.0)) throw std::invalid_argument("softmax: temperature must be > 0");
  double mx = logits[0];
  for (double v : logits) {
    if (!std::isfinite(v)) throw std::invalid_argument("softmax: non-finite logit");
    mx = std::max(mx, v);
  }
  std::vector<double> out(logits.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp((logits[i] - mx) / temperature);
    sum += out[i];
  }
  for (double& v : out) v /= sum;
  return out;
}

double entropy(std::span<const double> probs) {
  double h = 0.0;
  for (double p : probs)
    if (p > 0.0) h -= p * std::log(p);
  return h;
}

int argmax(std::span<const double> v) {
  if (v.empty()) throw std::invalid_argument("argmax: empty input");
  int best = 0;
  for (int i = 1; i < static_cast<int>(v.size()); ++i)
    if (v[i] > v[best]) best = i;
  return best;
}

int sample_categorical(std::span<const double> probs, Rng& rng) {
  const double u = rng.uniform01();
  double acc = 0.0;
  for (int i = 0; i < static_cast<int>(probs.size()); ++i) {
    acc += probs[i];
    if (u < acc) return i;
  }
  return static_cast<int>(probs.size()) - 1;  // guard against rounding
}

double wasserstein_1d_categorical(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size())
    throw std::invalid_argument("wasserstein_1d_categorical: length mismatch");
  check_distribution(p, "wasserstein_1d_categorical");
  check_distribution(q, "wasserstein_1d_categorical");
  double cp = 0.0, cq = 0.0, d = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    cp += p[k];
    cq += q[k];
    d += std::abs(cp - cq);
  }
  return d;
}

double hellinger_categorical(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size())
    throw std::invalid_argument("hellinger_categorical: length mismatch");
  check_distribution(p, "hellinger_categorical");
  check_distribution(q, "hellinger_categorical");
  double acc = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    const double d = std::sqrt(std::max(0.0, p[k])) - std::sqrt(std::max(0.0, q[k]));
    acc += d * d;
  }
  return std::sqrt(0.5 * acc);
}

std::vector<double> LatentGaussian::std_dev() const {
  std::vector<double> s(log_std.size());
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = std::exp(log_std[i]);
  return s;
}

std::vector<double> reparam_sample(const LatentGaussian& g, std::span<const double> noise) {
  if (g.mean.size() != g.log_std.size())
    throw std::invalid_argument("reparam_sample: mean/log_std length mismatch");
  if (noise.size() != g.mean.size())
    throw std::invalid_argument("reparam_sample: noise dimension mismatch");
  std::vector<double> z(g.mean.size());
  for (std::size_t i = 0; i < z.size(); ++i)
    z[i] = g.mean[i] + std::exp(g.log_std[i]) * noise[i];
  return z;
}

double w2_diag_gaussian(const LatentGaussian& p, const LatentGaussian& q) {
  if (p.dim() != q.dim()) throw std::invalid_argument("w2_diag_gaussian: dimension mismatch");
  double acc = 0.0;
  for (int i = 0; i < p.dim(); ++i) {
    const double dm = p.mean[i] - q.mean[i];
    const double ds = std::exp(p.log_std[i]) - std::exp(q.log_std[i]);
    acc += dm * dm + ds * ds;
  }
  return std::sqrt(acc);
}

double kl_to_standard_normal(const LatentGaussian& p) {
  double acc = 0.0;
  for (int i = 0; i < p.dim(); ++i) {
    const double var = std::exp(2.0 * p.log_std[i]);
    acc += 0.5 * (var + p.mean[i] * p.mean[i] - 1.0 - 2.0 * p.log_std[i]);
  }
  return acc;
}

}  // namespace mapd

#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace mapd {

// Per-parameter-vector Adam state. beta1/beta2/eps fixed at the usual values.
struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  std::int64_t step = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  AdamState() = default;
  explicit AdamState(std::size_t n) : m(n, 0.0), v(n, 0.0) {}

  void reset() {
    std::fill(m.begin(), m.end(), 0.0);
    std::fill(v.begin(), v.end(), 0.0);
    step = 0;
  }
};

// One bias-corrected Adam update in place. Returns false (and leaves params
// and state untouched) when any gradient entry is non-finite.
bool adam_step(std::span<double> params, std::span<const double> grads,
               AdamState& state, double lr);

}  // namespace mapd

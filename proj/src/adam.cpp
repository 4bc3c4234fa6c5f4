#include "mapd/adam.hpp"

#include <cmath>
#include <stdexcept>

namespace mapd {

bool adam_step(std::span<double> params, std::span<const double> grads,
               AdamState& state, double lr) {
  const std::size_t n = params.size();
  if (grads.size() != n || state.m.size() != n || state.v.size() != n)
    throw std::invalid_argument("adam_step: vector length mismatch");
  for (std::size_t i = 0; i < n; ++i)
    if (!std::isfinite(grads[i])) return false;

  state.step += 1;
  const double b1t = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double b2t = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < n; ++i) {
    state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * grads[i];
    state.v[i] = state.beta2 * state.v[i] + (1.0 - state.beta2) * grads[i] * grads[i];
    const double mhat = state.m[i] / b1t;
    const double vhat = state.v[i] / b2t;
    params[i] -= lr * mhat / (std::sqrt(vhat) + state.eps);
  }
  return true;
}

}  // namespace mapd

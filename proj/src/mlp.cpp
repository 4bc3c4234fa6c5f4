#include "mapd/mlp.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace mapd {

Mlp::Mlp(std::vector<int> layer_sizes) : sizes_(std::move(layer_sizes)) {
  if (sizes_.size() < 2) throw std::invalid_argument("Mlp: need at least one linear layer");
  for (int s : sizes_)
    if (s <= 0) throw std::invalid_argument("Mlp: layer sizes must be positive");
  offsets_.reserve(sizes_.size());
  int off = 0;
  for (int l = 0; l + 1 < static_cast<int>(sizes_.size()); ++l) {
    offsets_.push_back(off);
    off += sizes_[l] * sizes_[l + 1] + sizes_[l + 1];
  }
  offsets_.push_back(off);
  param_count_ = off;
}

void Mlp::init_params(std::span<double> params, Rng& rng) const {
  if (static_cast<int>(params.size()) != param_count_)
    throw std::invalid_argument("Mlp::init_params: bad parameter vector length");
  for (int l = 0; l < num_layers(); ++l) {
    const int in = sizes_[l], out = sizes_[l + 1];
    const double bound = std::sqrt(6.0 / (in + out));
    double* w = params.data() + offsets_[l];
    for (int i = 0; i < out * in; ++i) w[i] = rng.uniform(-bound, bound);
    double* b = w + out * in;
    for (int i = 0; i < out; ++i) b[i] = 0.0;
  }
}

std::vector<double> Mlp::forward(std::span<const double> params,
                                 std::span<const double> input) const {
  if (static_cast<int>(params.size()) != param_count_)
    throw std::invalid_argument("Mlp::forward: bad parameter vector length");
  if (static_cast<int>(input.size()) != input_size())
    throw std::invalid_argument("Mlp::forward: input length " +
                                std::to_string(input.size()) + " != " +
                                std::to_string(input_size()));
  std::vector<double> cur(input.begin(), input.end());
  std::vector<double> next;
  for (int l = 0; l < num_layers(); ++l) {
    const int in = sizes_[l], out = sizes_[l + 1];
    const double* w = params.data() + offsets_[l];
    const double* b = w + out * in;
    next.assign(static_cast<std::size_t>(out), 0.0);
    for (int o = 0; o < out; ++o) {
      double acc = b[o];
      const double* row = w + static_cast<std::size_t>(o) * in;
      for (int i = 0; i < in; ++i) acc += row[i] * cur[i];
      next[o] = (l + 1 < num_layers()) ? std::tanh(acc) : acc;
    }
    cur.swap(next);
  }
  return cur;
}

void Mlp::backward(std::span<const double> params, std::span<const double> input,
                   std::span<const double> output_grad, std::span<double> param_grad,
                   std::span<double> input_grad) const {
  if (static_cast<int>(params.size()) != param_count_ ||
      static_cast<int>(param_grad.size()) != param_count_)
    throw std::invalid_argument("Mlp::backward: bad parameter vector length");
  if (static_cast<int>(input.size()) != input_size())
    throw std::invalid_argument("Mlp::backward: bad input length");
  if (static_cast<int>(output_grad.size()) != output_size())
    throw std::invalid_argument("Mlp::backward: bad output_grad length");
  if (!input_grad.empty() && static_cast<int>(input_grad.size()) != input_size())
    throw std::invalid_argument("Mlp::backward: bad input_grad length");

  // Forward pass keeping post-activation values per layer.
  const int L = num_layers();
  std::vector<std::vector<double>> acts(static_cast<std::size_t>(L) + 1);
  acts[0].assign(input.begin(), input.end());
  for (int l = 0; l < L; ++l) {
    const int in = sizes_[l], out = sizes_[l + 1];
    const double* w = params.data() + offsets_[l];
    const double* b = w + out * in;
    auto& a = acts[static_cast<std::size_t>(l) + 1];
    a.assign(static_cast<std::size_t>(out), 0.0);
    for (int o = 0; o < out; ++o) {
      double acc = b[o];
      const double* row = w + static_cast<std::size_t>(o) * in;
      for (int i = 0; i < in; ++i) acc += row[i] * acts[l][i];
      a[o] = (l + 1 < L) ? std::tanh(acc) : acc;
    }
  }

  // Backward pass. delta holds dLoss/d(pre-activation) of the current layer.
  std::vector<double> delta(output_grad.begin(), output_grad.end());
  std::vector<double> prev_delta;
  for (int l = L - 1; l >= 0; --l) {
    const int in = sizes_[l], out = sizes_[l + 1];
    const double* w = params.data() + offsets_[l];
    double* gw = param_grad.data() + offsets_[l];
    double* gb = gw + out * in;
    const auto& a_in = acts[static_cast<std::size_t>(l)];
    for (int o = 0; o < out; ++o) {
      const double d = delta[o];
      double* grow = gw + static_cast<std::size_t>(o) * in;
      for (int i = 0; i < in; ++i) grow[i] += d * a_in[i];
      gb[o] += d;
    }
    const bool need_input = (l > 0) || !input_grad.empty();
    if (!need_input) break;
    prev_delta.assign(static_cast<std::size_t>(in), 0.0);
    for (int o = 0; o < out; ++o) {
      const double d = delta[o];
      const double* row = w + static_cast<std::size_t>(o) * in;
      for (int i = 0; i < in; ++i) prev_delta[i] += d * row[i];
    }
    if (l > 0) {
      // Chain through the tanh of the layer below: a = tanh(z), da/dz = 1 - a^2.
      for (int i = 0; i < in; ++i) prev_delta[i] *= 1.0 - a_in[i] * a_in[i];
    }
    delta.swap(prev_delta);
  }
  if (!input_grad.empty())
    for (int i = 0; i < input_size(); ++i) input_grad[i] = delta[i];
}

}  // namespace mapd

#pragma once

#include <span>
#include <vector>

#include "mapd/rng.hpp"

namespace mapd {

// Fixed-shape multilayer perceptron: tanh hidden activations, identity
// output. The network owns no parameters; it describes the architecture and
// operates on externally owned flat parameter vectors, so sharing groups can
// own the storage. Flat layout per linear layer l: weights W_l (out x in,
// row-major) followed by bias b_l.
class Mlp {
 public:
  explicit Mlp(std::vector<int> layer_sizes);

  const std::vector<int>& layer_sizes() const { return sizes_; }
  int input_size() const { return sizes_.front(); }
  int output_size() const { return sizes_.back(); }
  int num_layers() const { return static_cast<int>(sizes_.size()) - 1; }
  int param_count() const { return param_count_; }

  // Flat offset of layer l's parameters.
  int layer_offset(int l) const { return offsets_[static_cast<std::size_t>(l)]; }
  // Offset of the final linear layer; everything before it is the trunk.
  int head_offset() const { return offsets_[static_cast<std::size_t>(num_layers() - 1)]; }

  // Uniform Xavier/Glorot init, deterministic under the given generator.
  void init_params(std::span<double> params, Rng& rng) const;

  std::vector<double> forward(std::span<const double> params,
                              std::span<const double> input) const;

  // Accumulates dLoss/dparams into param_grad (+=). If input_grad is
  // non-empty it is overwritten with dLoss/dinput. Recomputes the forward
  // pass internally.
  void backward(std::span<const double> params, std::span<const double> input,
                std::span<const double> output_grad, std::span<double> param_grad,
                std::span<double> input_grad = {}) const;

 private:
  std::vector<int> sizes_;
  std::vector<int> offsets_;  // per layer, plus trailing total
  int param_count_ = 0;
};

}  // namespace mapd

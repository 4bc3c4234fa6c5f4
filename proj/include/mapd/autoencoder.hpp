#pragma once

#include <span>
#include <vector>

#include "mapd/distributions.hpp"
#include "mapd/mlp.hpp"
#include "mapd/rng.hpp"

namespace mapd {

// One agent decision: the observation and the action distribution the policy
// produced on it, both padded to the common measurement space.
struct DecisionSample {
  int agent = 0;
  int step = 0;
  std::vector<double> obs;
  std::vector<double> dist;
};

// Pads with trailing zeros up to target_dim; the original entries stay in place.
std::vector<double> pad_to_common(std::span<const double> v, int target_dim);

struct AutoEncoderConfig {
  int latent_dim = 8;
  std::vector<int> hidden = {64, 64};
  int epochs = 200;
  double lr = 1e-3;
  int batch_size = 64;
};

enum class ReconHead {
  Categorical,  // decoder emits action logits, reconstruction is KL(target || softmax)
  Gaussian,     // decoder emits a feature mean, reconstruction is squared error / sigma^2
};

// Shared conditional auto-encoder over agent decisions. The encoder maps
// [action distribution ; observation] to a diagonal Gaussian posterior over
// the latent; the decoder maps [z ; observation] back to the reconstruction
// target. One instance serves all agents of a measurement round so every
// latent lives in the same space.
class AutoEncoder {
 public:
  static AutoEncoder categorical(int obs_dim, int act_dim, const AutoEncoderConfig& cfg,
                                 Rng& init_rng);
  static AutoEncoder gaussian(int obs_dim, int act_dim, int feature_dim, double sigma,
                              const AutoEncoderConfig& cfg, Rng& init_rng);

  int obs_dim() const { return obs_dim_; }
  int act_dim() const { return act_dim_; }
  int latent_dim() const { return latent_dim_; }
  int out_dim() const { return out_dim_; }
  ReconHead head() const { return head_; }
  double sigma() const { return sigma_; }

  const Mlp& encoder() const { return encoder_; }
  const Mlp& decoder() const { return decoder_; }
  std::vector<double>& encoder_params() { return enc_params_; }
  std::vector<double>& decoder_params() { return dec_params_; }
  const std::vector<double>& encoder_params() const { return enc_params_; }
  const std::vector<double>& decoder_params() const { return dec_params_; }

  // Posterior q(z | dist, obs); deterministic in its inputs.
  LatentGaussian encode(std::span<const double> dist, std::span<const double> obs) const;

  // Reconstruction from a latent sample: action probabilities (Categorical)
  // or the predicted feature vector (Gaussian).
  std::vector<double> decode(std::span<const double> z, std::span<const double> obs) const;

 private:
  AutoEncoder(int obs_dim, int act_dim, int out_dim, ReconHead head, double sigma,
              const AutoEncoderConfig& cfg, Rng& init_rng);

  int obs_dim_, act_dim_, latent_dim_, out_dim_;
  ReconHead head_;
  double sigma_;
  Mlp encoder_, decoder_;
  std::vector<double> enc_params_, dec_params_;
};

struct AeLossResult {
  double loss = 0.0;
  double recon = 0.0;
  double kl = 0.0;
  std::vector<double> encoder_grad;
  std::vector<double> decoder_grad;
};

// Single-sample loss of the decision auto-encoder: reconstruction
// KL(target || decode(z, obs)) with one reparameterized latent draw, plus the
// closed-form KL of the posterior against the standard normal prior.
AeLossResult ae_loss(const AutoEncoder& ae, const DecisionSample& sample, Rng& rng);

// Trains a categorical-head auto-encoder on the pooled samples of all agents.
AutoEncoder train_autoencoder(const std::vector<DecisionSample>& samples,
                              const AutoEncoderConfig& cfg, Rng& rng,
                              std::vector<double>* epoch_loss = nullptr);

namespace detail {

// Loss with caller-provided noise (reparameterization input); gradients are
// accumulated (+=) into the spans when non-empty. `target` is the action
// distribution (Categorical) or the feature vector (Gaussian).
double ae_loss_with_noise(const AutoEncoder& ae, std::span<const double> enc_params,
                          std::span<const double> dec_params, std::span<const double> dist,
                          std::span<const double> obs, std::span<const double> target,
                          std::span<const double> noise, std::span<double> enc_grad,
                          std::span<double> dec_grad, double* recon_out = nullptr,
                          double* kl_out = nullptr);

void validate_samples(const std::vector<DecisionSample>& samples, int obs_dim, int act_dim);

struct TrainView {
  std::span<const double> dist;
  std::span<const double> obs;
  std::span<const double> target;
};

// Minibatch Adam loop shared by the categorical and Gaussian heads.
void train_vae(AutoEncoder& ae, const std::vector<TrainView>& data, int epochs, double lr,
               int batch_size, Rng& rng, std::vector<double>* epoch_loss);

}  // namespace detail

}  // namespace mapd

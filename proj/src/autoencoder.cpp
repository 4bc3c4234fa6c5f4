#include "mapd/autoencoder.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "mapd/adam.hpp"

namespace mapd {

std::vector<double> pad_to_common(std::span<const double> v, int target_dim) {
  if (static_cast<int>(v.size()) > target_dim)
    throw std::invalid_argument("pad_to_common: vector longer than target dimension");
  std::vector<double> out(static_cast<std::size_t>(target_dim), 0.0);
  std::copy(v.begin(), v.end(), out.begin());
  return out;
}

AutoEncoder::AutoEncoder(int obs_dim, int act_dim, int out_dim, ReconHead head, double sigma,
                         const AutoEncoderConfig& cfg, Rng& init_rng)
    : obs_dim_(obs_dim),
      act_dim_(act_dim),
      latent_dim_(cfg.latent_dim),
      out_dim_(out_dim),
      head_(head),
      sigma_(sigma),
      encoder_([&] {
        std::vector<int> sizes = {act_dim + obs_dim};
        sizes.insert(sizes.end(), cfg.hidden.begin(), cfg.hidden.end());
        sizes.push_back(2 * cfg.latent_dim);
        return Mlp(sizes);
      }()),
      decoder_([&] {
        std::vector<int> sizes = {cfg.latent_dim + obs_dim};
        sizes.insert(sizes.end(), cfg.hidden.begin(), cfg.hidden.end());
        sizes.push_back(out_dim);
        return Mlp(sizes);
      }()) {
  if (obs_dim < 1 || act_dim < 1 || out_dim < 1 || cfg.latent_dim < 1)
    throw std::invalid_argument("AutoEncoder: dimensions must be positive");
  if (head_ == ReconHead::Gaussian && !(sigma_ > 0.0))
    throw std::invalid_argument("AutoEncoder: sigma must be > 0");
  enc_params_.resize(static_cast<std::size_t>(encoder_.param_count()));
  dec_params_.resize(static_cast<std::size_t>(decoder_.param_count()));
  encoder_.init_params(enc_params_, init_rng);
  decoder_.init_params(dec_params_, init_rng);
}

AutoEncoder AutoEncoder::categorical(int obs_dim, int act_dim, const AutoEncoderConfig& cfg,
                                     Rng& init_rng) {
  return AutoEncoder(obs_dim, act_dim, act_dim, ReconHead::Categorical, 1.0, cfg, init_rng);
}

AutoEncoder AutoEncoder::gaussian(int obs_dim, int act_dim, int feature_dim, double sigma,
                                  const AutoEncoderConfig& cfg, Rng& init_rng) {
  return AutoEncoder(obs_dim, act_dim, feature_dim, ReconHead::Gaussian, sigma, cfg, init_rng);
}

LatentGaussian AutoEncoder::encode(std::span<const double> dist,
                                   std::span<const double> obs) const {
  if (static_cast<int>(dist.size()) != act_dim_ || static_cast<int>(obs.size()) != obs_dim_)
    throw std::invalid_argument("AutoEncoder::encode: dimension mismatch");
  std::vector<double> in;
  in.reserve(dist.size() + obs.size());
  in.insert(in.end(), dist.begin(), dist.end());
  in.insert(in.end(), obs.begin(), obs.end());
  const auto out = encoder_.forward(enc_params_, in);
  LatentGaussian g;
  g.mean.assign(out.begin(), out.begin() + latent_dim_);
  g.log_std.assign(out.begin() + latent_dim_, out.end());
  return g;
}

std::vector<double> AutoEncoder::decode(std::span<const double> z,
                                        std::span<const double> obs) const {
  if (static_cast<int>(z.size()) != latent_dim_ || static_cast<int>(obs.size()) != obs_dim_)
    throw std::invalid_argument("AutoEncoder::decode: dimension mismatch");
  std::vector<double> in;
  in.reserve(z.size() + obs.size());
  in.insert(in.end(), z.begin(), z.end());
  in.insert(in.end(), obs.begin(), obs.end());
  auto out = decoder_.forward(dec_params_, in);
  if (head_ == ReconHead::Categorical) return softmax(out);
  return out;
}

namespace detail {

double ae_loss_with_noise(const AutoEncoder& ae, std::span<const double> enc_params,
                          std::span<const double> dec_params, std::span<const double> dist,
                          std::span<const double> obs, std::span<const double> target,
                          std::span<const double> noise, std::span<double> enc_grad,
                          std::span<double> dec_grad, double* recon_out, double* kl_out) {
  const int L = ae.latent_dim();
  if (static_cast<int>(noise.size()) != L)
    throw std::invalid_argument("ae_loss_with_noise: noise dimension mismatch");
  if (static_cast<int>(target.size()) != ae.out_dim())
    throw std::invalid_argument("ae_loss_with_noise: target dimension mismatch");

  // encoder forward -> posterior
  std::vector<double> enc_in;
  enc_in.reserve(dist.size() + obs.size());
  enc_in.insert(enc_in.end(), dist.begin(), dist.end());
  enc_in.insert(enc_in.end(), obs.begin(), obs.end());
  const auto enc_out = ae.encoder().forward(enc_params, enc_in);

  // reparameterized latent draw
  std::vector<double> z(static_cast<std::size_t>(L));
  std::vector<double> stds(static_cast<std::size_t>(L));
  for (int d = 0; d < L; ++d) {
    stds[static_cast<std::size_t>(d)] = std::exp(enc_out[static_cast<std::size_t>(L + d)]);
    z[static_cast<std::size_t>(d)] =
        enc_out[static_cast<std::size_t>(d)] + stds[static_cast<std::size_t>(d)] * noise[d];
  }

  // decoder forward -> reconstruction
  std::vector<double> dec_in;
  dec_in.reserve(z.size() + obs.size());
  dec_in.insert(dec_in.end(), z.begin(), z.end());
  dec_in.insert(dec_in.end(), obs.begin(), obs.end());
  const auto dec_out = ae.decoder().forward(dec_params, dec_in);

  double recon = 0.0;
  std::vector<double> ddec(dec_out.size(), 0.0);
  if (ae.head() == ReconHead::Categorical) {
    const auto r = softmax(dec_out);
    for (std::size_t k = 0; k < r.size(); ++k) {
      const double t = target[k];
      if (t > 0.0) recon += t * (std::log(t) - std::log(std::max(r[k], 1e-300)));
      ddec[k] = r[k] - t;  // gradient of -sum t log softmax
    }
  } else {
    const double inv_var = 1.0 / (ae.sigma() * ae.sigma());
    for (std::size_t k = 0; k < dec_out.size(); ++k) {
      const double e = dec_out[k] - target[k];
      recon += 0.5 * e * e * inv_var;
      ddec[k] = e * inv_var;
    }
  }

  // closed-form KL(q || N(0, I)) on the posterior parameters
  double kl = 0.0;
  for (int d = 0; d < L; ++d) {
    const double mu = enc_out[static_cast<std::size_t>(d)];
    const double ls = enc_out[static_cast<std::size_t>(L + d)];
    kl += 0.5 * (std::exp(2.0 * ls) + mu * mu - 1.0 - 2.0 * ls);
  }

  if (!dec_grad.empty() || !enc_grad.empty()) {
    // backprop through the decoder; its input gradient carries dLoss/dz
    std::vector<double> dec_in_grad(dec_in.size(), 0.0);
    std::vector<double> scratch_dec(dec_grad.empty()
                                        ? static_cast<std::size_t>(ae.decoder().param_count())
                                        : 0);
    ae.decoder().backward(dec_params, dec_in, ddec,
                          dec_grad.empty() ? std::span<double>(scratch_dec) : dec_grad,
                          dec_in_grad);
    if (!enc_grad.empty()) {
      // chain z = mu + exp(ls) * eps into the encoder outputs, add KL terms
      std::vector<double> denc(enc_out.size(), 0.0);
      for (int d = 0; d < L; ++d) {
        const double dz = dec_in_grad[static_cast<std::size_t>(d)];
        const double mu = enc_out[static_cast<std::size_t>(d)];
        const double ls = enc_out[static_cast<std::size_t>(L + d)];
        denc[static_cast<std::size_t>(d)] = dz + mu;
        denc[static_cast<std::size_t>(L + d)] =
            dz * noise[d] * stds[static_cast<std::size_t>(d)] + (std::exp(2.0 * ls) - 1.0);
      }
      ae.encoder().backward(enc_params, enc_in, denc, enc_grad);
    }
  }

  if (recon_out) *recon_out = recon;
  if (kl_out) *kl_out = kl;
  return recon + kl;
}

void validate_samples(const std::vector<DecisionSample>& samples, int obs_dim, int act_dim) {
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& s = samples[i];
    if (static_cast<int>(s.obs.size()) != obs_dim || static_cast<int>(s.dist.size()) != act_dim)
      throw std::invalid_argument("DecisionSample " + std::to_string(i) + ": dimension mismatch");
    double sum = 0.0;
    for (double v : s.dist) {
      if (!std::isfinite(v) || v < -1e-9)
        throw std::invalid_argument("DecisionSample " + std::to_string(i) +
                                    ": invalid action distribution");
      sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-6)
      throw std::invalid_argument("DecisionSample " + std::to_string(i) +
                                  ": action distribution does not sum to 1");
    for (double v : s.obs)
      if (!std::isfinite(v))
        throw std::invalid_argument("DecisionSample " + std::to_string(i) +
                                    ": non-finite observation");
  }
}

}  // namespace detail

AeLossResult ae_loss(const AutoEncoder& ae, const DecisionSample& sample, Rng& rng) {
  AeLossResult res;
  res.encoder_grad.assign(static_cast<std::size_t>(ae.encoder().param_count()), 0.0);
  res.decoder_grad.assign(static_cast<std::size_t>(ae.decoder().param_count()), 0.0);
  std::vector<double> noise(static_cast<std::size_t>(ae.latent_dim()));
  for (auto& v : noise) v = rng.normal();
  res.loss = detail::ae_loss_with_noise(ae, ae.encoder_params(), ae.decoder_params(), sample.dist,
                                        sample.obs, sample.dist, noise, res.encoder_grad,
                                        res.decoder_grad, &res.recon, &res.kl);
  if (!std::isfinite(res.loss)) throw std::runtime_error("ae_loss: non-finite loss");
  return res;
}

namespace detail {

void train_vae(AutoEncoder& ae, const std::vector<TrainView>& data, int epochs, double lr,
               int batch_size, Rng& rng, std::vector<double>* epoch_loss) {
  if (data.empty()) throw std::invalid_argument("train_vae: empty sample set");
  if (batch_size < 1) throw std::invalid_argument("train_vae: batch_size must be >= 1");
  AdamState enc_adam(ae.encoder_params().size());
  AdamState dec_adam(ae.decoder_params().size());
  std::vector<double> enc_grad(ae.encoder_params().size());
  std::vector<double> dec_grad(ae.decoder_params().size());
  std::vector<double> noise(static_cast<std::size_t>(ae.latent_dim()));
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);

  if (epoch_loss) epoch_loss->clear();
  for (int epoch = 0; epoch < epochs; ++epoch) {
    rng.shuffle(order);
    double epoch_sum = 0.0;
    std::size_t cursor = 0;
    while (cursor < order.size()) {
      const std::size_t batch_end =
          std::min(order.size(), cursor + static_cast<std::size_t>(batch_size));
      std::fill(enc_grad.begin(), enc_grad.end(), 0.0);
      std::fill(dec_grad.begin(), dec_grad.end(), 0.0);
      const double inv = 1.0 / static_cast<double>(batch_end - cursor);
      for (std::size_t i = cursor; i < batch_end; ++i) {
        const auto& s = data[order[i]];
        for (auto& v : noise) v = rng.normal();
        epoch_sum += ae_loss_with_noise(ae, ae.encoder_params(), ae.decoder_params(), s.dist,
                                        s.obs, s.target, noise, enc_grad, dec_grad);
      }
      for (auto& v : enc_grad) v *= inv;
      for (auto& v : dec_grad) v *= inv;
      adam_step(ae.encoder_params(), enc_grad, enc_adam, lr);
      adam_step(ae.decoder_params(), dec_grad, dec_adam, lr);
      cursor = batch_end;
    }
    if (epoch_loss) epoch_loss->push_back(epoch_sum / static_cast<double>(data.size()));
  }
}

}  // namespace detail

AutoEncoder train_autoencoder(const std::vector<DecisionSample>& samples,
                              const AutoEncoderConfig& cfg, Rng& rng,
                              std::vector<double>* epoch_loss) {
  if (samples.empty()) throw std::invalid_argument("train_autoencoder: empty sample set");
  const int obs_dim = static_cast<int>(samples.front().obs.size());
  const int act_dim = static_cast<int>(samples.front().dist.size());
  detail::validate_samples(samples, obs_dim, act_dim);

  AutoEncoder ae = AutoEncoder::categorical(obs_dim, act_dim, cfg, rng);
  std::vector<detail::TrainView> views;
  views.reserve(samples.size());
  for (const auto& s : samples) views.push_back({s.dist, s.obs, s.dist});
  detail::train_vae(ae, views, cfg.epochs, cfg.lr, cfg.batch_size, rng, epoch_loss);
  return ae;
}

}  // namespace mapd

#include "mapd/custom.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mapd {

namespace {

// Distance to a landmark read off the unshuffled base observation: entries
// [2 + 2k, 2 + 2k + 2) hold the offset to landmark k.
double landmark_distance(const std::vector<double>& base_obs, int landmark) {
  const double dx = base_obs[static_cast<std::size_t>(2 + 2 * landmark)];
  const double dy = base_obs[static_cast<std::size_t>(2 + 2 * landmark + 1)];
  return std::sqrt(dx * dx + dy * dy);
}

int own_color(const std::vector<double>& base_obs, const SpreadConfig& cfg) {
  const int off = 2 + 2 * cfg.n_colors() + 2 * (cfg.n_agents - 1);
  for (int c = 0; c < cfg.n_colors(); ++c)
    if (base_obs[static_cast<std::size_t>(off + c)] > 0.5) return c;
  throw std::runtime_error("extract_features: observation has no color one-hot");
}

}  // namespace

FeatureSpec parse_feature_spec(const std::string& id) {
  FeatureSpec spec;
  spec.id = id;
  spec.dim = 1;
  if (id == "dist_to_matching_landmark") {
    spec.kind = FeatureSpec::Kind::MatchingLandmarkDistance;
    return spec;
  }
  if (id == "action") {
    spec.kind = FeatureSpec::Kind::ActionReconstruction;
    spec.dim = -1;  // resolved from the action distribution width
    return spec;
  }
  const std::string prefix = "dist_to_landmark:";
  if (id.rfind(prefix, 0) == 0) {
    const std::string num = id.substr(prefix.size());
    if (num.empty() || num.find_first_not_of("0123456789") != std::string::npos)
      throw std::invalid_argument("parse_feature_spec: bad landmark number in '" + id + "'");
    const int one_based = std::stoi(num);
    if (one_based < 1)
      throw std::invalid_argument("parse_feature_spec: landmark numbers are 1-based");
    spec.kind = FeatureSpec::Kind::LandmarkDistance;
    spec.landmark_index = one_based - 1;
    return spec;
  }
  throw std::invalid_argument(
      "parse_feature_spec: unknown feature '" + id +
      "' (expected dist_to_matching_landmark, dist_to_landmark:<k> or action)");
}

std::vector<CustomizedSample> extract_features(const TrajectoryBatch& batch, const SpreadEnv& env,
                                               const FeatureSpec& spec) {
  if (batch.steps() < 2)
    throw std::invalid_argument("extract_features: need at least 2 steps for one-step lookahead");
  const auto& cfg = env.config();
  if (spec.landmark_index >= cfg.n_colors())
    throw std::invalid_argument("extract_features: landmark index out of range");
  std::vector<CustomizedSample> out;
  out.reserve(static_cast<std::size_t>(batch.n_agents()) * (batch.steps() - 1));
  const bool action_case = spec.kind == FeatureSpec::Kind::ActionReconstruction;
  for (int a = 0; a < batch.n_agents(); ++a) {
    const auto& traj = batch.per_agent[static_cast<std::size_t>(a)];
    for (int t = 0; t + 1 < static_cast<int>(traj.size()); ++t) {
      CustomizedSample s;
      s.base.agent = a;
      s.base.step = t;
      s.base.obs = traj[static_cast<std::size_t>(t)].obs;
      s.base.dist = traj[static_cast<std::size_t>(t)].dist;
      if (action_case) {
        s.feature = s.base.dist;
      } else {
        const auto next_base = env.unshuffle(a, traj[static_cast<std::size_t>(t) + 1].obs);
        const int lm = spec.landmark_index >= 0 ? spec.landmark_index : own_color(next_base, cfg);
        s.feature = {landmark_distance(next_base, lm)};
      }
      out.push_back(std::move(s));
    }
  }
  return out;
}

CustomAeLossResult custom_ae_loss(const AutoEncoder& ae, const CustomizedSample& sample, Rng& rng) {
  if (ae.head() != ReconHead::Gaussian)
    throw std::invalid_argument("custom_ae_loss: expected a Gaussian-head auto-encoder");
  CustomAeLossResult res;
  res.encoder_grad.assign(static_cast<std::size_t>(ae.encoder().param_count()), 0.0);
  res.decoder_grad.assign(static_cast<std::size_t>(ae.decoder().param_count()), 0.0);
  std::vector<double> noise(static_cast<std::size_t>(ae.latent_dim()));
  for (auto& v : noise) v = rng.normal();
  res.loss = detail::ae_loss_with_noise(ae, ae.encoder_params(), ae.decoder_params(),
                                        sample.base.dist, sample.base.obs, sample.feature, noise,
                                        res.encoder_grad, res.decoder_grad, &res.recon, &res.kl);
  if (!std::isfinite(res.loss)) throw std::runtime_error("custom_ae_loss: non-finite loss");
  return res;
}

CustomizedTraining train_customized_autoencoder(const std::vector<CustomizedSample>& samples,
                                                const CustomizedConfig& cfg, Rng& rng) {
  if (samples.empty()) throw std::invalid_argument("train_customized_autoencoder: empty sample set");
  const int obs_dim = static_cast<int>(samples.front().base.obs.size());
  const int act_dim = static_cast<int>(samples.front().base.dist.size());
  const int feat_dim = static_cast<int>(samples.front().feature.size());
  for (const auto& s : samples) {
    if (static_cast<int>(s.feature.size()) != feat_dim)
      throw std::invalid_argument("train_customized_autoencoder: feature dimension mismatch");
    for (double v : s.feature)
      if (!std::isfinite(v))
        throw std::invalid_argument("train_customized_autoencoder: non-finite feature");
  }

  // Standardize features over the pool; distances are reported in this space.
  std::vector<double> mean(static_cast<std::size_t>(feat_dim), 0.0);
  std::vector<double> stddev(static_cast<std::size_t>(feat_dim), 1.0);
  if (cfg.standardize_features) {
    for (const auto& s : samples)
      for (int k = 0; k < feat_dim; ++k) mean[static_cast<std::size_t>(k)] += s.feature[static_cast<std::size_t>(k)];
    for (auto& v : mean) v /= static_cast<double>(samples.size());
    std::vector<double> var(static_cast<std::size_t>(feat_dim), 0.0);
    for (const auto& s : samples)
      for (int k = 0; k < feat_dim; ++k) {
        const double d = s.feature[static_cast<std::size_t>(k)] - mean[static_cast<std::size_t>(k)];
        var[static_cast<std::size_t>(k)] += d * d;
      }
    for (int k = 0; k < feat_dim; ++k)
      stddev[static_cast<std::size_t>(k)] =
          std::max(1e-8, std::sqrt(var[static_cast<std::size_t>(k)] /
                                   static_cast<double>(samples.size())));
  }

  std::vector<std::vector<double>> targets;
  targets.reserve(samples.size());
  for (const auto& s : samples) {
    std::vector<double> t(static_cast<std::size_t>(feat_dim));
    for (int k = 0; k < feat_dim; ++k)
      t[static_cast<std::size_t>(k)] = (s.feature[static_cast<std::size_t>(k)] -
                                        mean[static_cast<std::size_t>(k)]) /
                                       stddev[static_cast<std::size_t>(k)];
    targets.push_back(std::move(t));
  }

  CustomizedTraining out{
      AutoEncoder::gaussian(obs_dim, act_dim, feat_dim, cfg.sigma_c, cfg.ae, rng),
      std::move(mean), std::move(stddev), {}};
  std::vector<detail::TrainView> views;
  views.reserve(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i)
    views.push_back({samples[i].base.dist, samples[i].base.obs, targets[i]});
  detail::train_vae(out.ae, views, cfg.ae.epochs, cfg.ae.lr, cfg.ae.batch_size, rng,
                    &out.epoch_loss);
  return out;
}

DistanceMatrix customized_distance_matrix_from_samples(
    const std::vector<CustomizedSample>& samples,
    const std::vector<std::vector<double>>& obs_set, const PolicyEvalFn& policies, int n_agents,
    const CustomizedConfig& cfg, Rng& rng) {
  auto trained = train_customized_autoencoder(samples, cfg, rng);
  std::vector<int> agents(static_cast<std::size_t>(n_agents));
  for (int a = 0; a < n_agents; ++a) agents[static_cast<std::size_t>(a)] = a;
  return distance_matrix(trained.ae, agents, obs_set, policies);
}

DistanceMatrix customized_distance_matrix(const FeatureSpec& spec, const TrajectoryBatch& batch,
                                          const SpreadEnv& env, const AgentNets& nets,
                                          const CustomizedConfig& cfg, Rng& rng) {
  const auto samples = extract_features(batch, env, spec);
  std::vector<std::vector<double>> obs_set;
  obs_set.reserve(samples.size());
  for (const auto& s : samples) obs_set.push_back(s.base.obs);
  auto policies = make_policy_eval(nets, obs_set);
  auto dm = customized_distance_matrix_from_samples(samples, obs_set, policies, nets.n_agents(),
                                                    cfg, rng);
  dm.meta.rollouts = 1;
  return dm;
}

}  // namespace mapd

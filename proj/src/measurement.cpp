#include "mapd/measurement.hpp"

#include <stdexcept>

namespace mapd {

MeasurementData collect_measurement_data(const SpreadConfig& cfg, const AgentNets& nets,
                                         const MeasurementConfig& mcfg, Rng& rng) {
  if (mcfg.rollouts < 1 || mcfg.steps_per_rollout < 1)
    throw std::invalid_argument("collect_measurement_data: non-positive budget");
  MeasurementData data;
  data.rollouts = mcfg.rollouts;
  const int n = cfg.n_agents;
  for (int r = 0; r < mcfg.rollouts; ++r) {
    SpreadEnv env(cfg, rng.next_u64());
    RolloutCursor cursor;
    auto batch = collect_rollout(env, cursor, nets, mcfg.steps_per_rollout, rng, mcfg.rollout_mode);
    for (int a = 0; a < n; ++a) {
      for (int t = 0; t < batch.steps(); ++t) {
        const auto& tr = batch.per_agent[static_cast<std::size_t>(a)][static_cast<std::size_t>(t)];
        DecisionSample s;
        s.agent = a;
        s.step = r * mcfg.steps_per_rollout + t;
        s.obs = tr.obs;
        s.dist = tr.dist;
        data.obs_set.push_back(s.obs);
        data.samples.push_back(std::move(s));
      }
    }
  }
  return data;
}

PolicyEvalFn make_policy_eval(const AgentNets& nets,
                              const std::vector<std::vector<double>>& obs_set) {
  const int in_dim = nets.actor().input_size();
  return [&nets, &obs_set, in_dim](int agent, int obs_idx) {
    const auto& obs = obs_set[static_cast<std::size_t>(obs_idx)];
    if (static_cast<int>(obs.size()) < in_dim)
      throw std::invalid_argument("policy eval: observation shorter than the network input");
    const std::span<const double> view(obs.data(), static_cast<std::size_t>(in_dim));
    return softmax(nets.actor().forward(nets.actor_params(agent), view));
  };
}

DistanceMatrix measure_policy_distances(const AgentNets& nets, const MeasurementData& data,
                                        const MeasurementConfig& mcfg, Rng& rng) {
  AutoEncoder ae = train_autoencoder(data.samples, mcfg.ae, rng);
  std::vector<int> agents(static_cast<std::size_t>(nets.n_agents()));
  for (int a = 0; a < nets.n_agents(); ++a) agents[static_cast<std::size_t>(a)] = a;
  auto policies = make_policy_eval(nets, data.obs_set);
  DistanceMatrix dm = distance_matrix(ae, agents, data.obs_set, policies);
  dm.meta.rollouts = data.rollouts;
  return dm;
}

}  // namespace mapd

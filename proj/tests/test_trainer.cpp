#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>

#include "mapd/distributions.hpp"
#include "mapd/trainer.hpp"
#include "oracles.hpp"

using namespace mapd;

namespace {

AgentNets make_nets(int n_agents, int obs_dim, const SharingScheme& scheme, std::uint64_t seed,
                    bool identical = true, std::vector<int> hidden = {8, 8}) {
  Rng rng(seed);
  return AgentNets(n_agents, obs_dim, kSpreadActionCount, hidden, scheme, rng, identical);
}

std::uint64_t hash_params(std::span<const double> p) {
  std::uint64_t h = 1469598103934665603ULL;
  for (double v : p) {
    std::uint64_t bits;
    static_assert(sizeof(bits) == sizeof(v));
    std::memcpy(&bits, &v, sizeof(bits));
    h = (h ^ bits) * 1099511628211ULL;
  }
  return h;
}

}  // namespace

TEST_CASE("act: shared agents produce identical distributions on one observation") {
  auto cfg = parse_scenario("4a_2c");
  auto nets = make_nets(4, cfg.obs_dim(), SharingScheme::fully_shared(4), 3);
  SpreadEnv env(cfg, 12);
  auto obs = env.observe(0);
  Rng r1(5), r2(5);
  auto a0 = act(nets.actor(), nets.actor_params(0), obs, r1);
  auto a1 = act(nets.actor(), nets.actor_params(1), obs, r2);
  CHECK(a0.dist == a1.dist);
}

TEST_CASE("act: zero-weight actor is uniform over the 5 actions") {
  auto cfg = parse_scenario("4a_2c");
  SharingScheme scheme = SharingScheme::fully_shared(4);
  Rng rng(1);
  AgentNets nets(4, cfg.obs_dim(), kSpreadActionCount, {8, 8}, scheme, rng);
  for (int b = 0; b < 2; ++b)
    for (auto& v : nets.group_params(NetKind::Actor, b, 0)) v = 0.0;
  nets.refresh_materialized();
  SpreadEnv env(cfg, 2);
  Rng r(9);
  auto res = act(nets.actor(), nets.actor_params(2), env.observe(2), r);
  for (double p : res.dist) CHECK(p == doctest::Approx(0.2).epsilon(1e-12));
}

TEST_CASE("act: deterministic mode yields a one-hot distribution on the argmax") {
  auto cfg = parse_scenario("4a_2c");
  auto nets = make_nets(4, cfg.obs_dim(), SharingScheme::independent(4), 17, false);
  SpreadEnv env(cfg, 3);
  Rng r(1);
  auto obs = env.observe(1);
  auto soft = act(nets.actor(), nets.actor_params(1), obs, r, ActMode::Greedy);
  auto det = act(nets.actor(), nets.actor_params(1), obs, r, ActMode::Deterministic);
  CHECK(det.action == soft.action);
  CHECK(det.action == argmax(soft.dist));
  for (int k = 0; k < 5; ++k)
    CHECK(det.dist[static_cast<std::size_t>(k)] == (k == det.action ? 1.0 : 0.0));
}

TEST_CASE("collect_rollout: shapes, determinism, finite rewards") {
  auto cfg = parse_scenario("15a_3c");
  auto run = [&](std::uint64_t seed) {
    SpreadEnv env(cfg, seed);
    auto nets = make_nets(15, cfg.obs_dim(), SharingScheme::independent(15), 7);
    RolloutCursor cursor;
    Rng rng(seed + 1);
    return collect_rollout(env, cursor, nets, 100, rng);
  };
  auto b1 = run(5);
  auto b2 = run(5);
  CHECK(b1.n_agents() == 15);
  CHECK(b1.steps() == 100);
  // 100 steps x 15 agents -> 1500 decision records
  int count = 0;
  for (const auto& traj : b1.per_agent)
    for (const auto& tr : traj) {
      ++count;
      CHECK(std::isfinite(tr.reward));
      CHECK(tr.dist.size() == 5);
    }
  CHECK(count == 1500);
  // identical seeds -> identical batches
  for (int a = 0; a < 15; ++a)
    for (int t = 0; t < 100; ++t) {
      const auto& x = b1.per_agent[static_cast<std::size_t>(a)][static_cast<std::size_t>(t)];
      const auto& y = b2.per_agent[static_cast<std::size_t>(a)][static_cast<std::size_t>(t)];
      CHECK(x.obs == y.obs);
      CHECK(x.action == y.action);
      CHECK(x.reward == y.reward);
      CHECK(x.value == y.value);
    }
  // episode boundaries every 50 steps
  CHECK(b1.per_agent[0][49].done);
  CHECK(b1.per_agent[0][99].done);
  CHECK_FALSE(b1.per_agent[0][37].done);
}

TEST_CASE("discounted returns: hand-checked with done boundaries") {
  std::vector<Transition> traj(3);
  traj[0].reward = 1.0;
  traj[1].reward = 2.0;
  traj[1].done = true;
  traj[2].reward = 3.0;
  const auto ret = detail::discounted_returns(traj, 10.0, 0.5);
  // t=2: 3 + 0.5*10 = 8; t=1: done resets, 2; t=0: 1 + 0.5*2 = 2
  CHECK(ret[2] == doctest::Approx(8.0));
  CHECK(ret[1] == doctest::Approx(2.0));
  CHECK(ret[0] == doctest::Approx(2.0));
}

TEST_CASE("a2c gradients match finite differences on a 2-agent toy batch") {
  auto cfg = parse_scenario("2a_2c");
  SpreadEnv env(cfg, 21);
  auto nets = make_nets(2, cfg.obs_dim(), SharingScheme::independent(2), 23, false, {4});
  RolloutCursor cursor;
  Rng rng(9);
  auto batch = collect_rollout(env, cursor, nets, 6, rng);

  for (int agent = 0; agent < 2; ++agent) {
    const auto& traj = batch.per_agent[static_cast<std::size_t>(agent)];
    const double bootstrap = nets.critic().forward(nets.critic_params(agent),
                                                   batch.final_obs[static_cast<std::size_t>(agent)])[0];
    const auto returns = detail::discounted_returns(traj, bootstrap, 0.99);
    std::vector<double> adv(returns.size());
    for (std::size_t t = 0; t < adv.size(); ++t) adv[t] = returns[t] - traj[t].value;

    // actor loss with fixed advantages
    std::vector<double> aparams(nets.actor_params(agent).begin(), nets.actor_params(agent).end());
    std::vector<double> agrad(aparams.size(), 0.0);
    detail::actor_loss_grad(nets.actor(), aparams, traj, adv, 0.01, agrad);
    auto actor_loss_fn = [&](const std::vector<double>& p) {
      return detail::actor_loss_grad(nets.actor(), p, traj, adv, 0.01, {});
    };
    auto fd = oracles::finite_diff_gradient(actor_loss_fn, aparams, 1e-5);
    double worst = 0.0;
    for (std::size_t i = 0; i < agrad.size(); ++i)
      worst = std::max(worst, oracles::rel_err(agrad[i], fd[i]));
    CHECK(worst < 1e-4);

    // critic loss with fixed returns
    std::vector<double> cparams(nets.critic_params(agent).begin(), nets.critic_params(agent).end());
    std::vector<double> cgrad(cparams.size(), 0.0);
    detail::critic_loss_grad(nets.critic(), cparams, traj, returns, cgrad);
    auto critic_loss_fn = [&](const std::vector<double>& p) {
      return detail::critic_loss_grad(nets.critic(), p, traj, returns, {});
    };
    auto fdc = oracles::finite_diff_gradient(critic_loss_fn, cparams, 1e-5);
    double worst_c = 0.0;
    for (std::size_t i = 0; i < cgrad.size(); ++i)
      worst_c = std::max(worst_c, oracles::rel_err(cgrad[i], fdc[i]));
    CHECK(worst_c < 1e-4);
  }
}

TEST_CASE("a2c: zero advantages leave the pure entropy-bonus gradient") {
  auto cfg = parse_scenario("2a_2c");
  SpreadEnv env(cfg, 4);
  auto nets = make_nets(2, cfg.obs_dim(), SharingScheme::independent(2), 6, false, {4});
  RolloutCursor cursor;
  Rng rng(2);
  auto batch = collect_rollout(env, cursor, nets, 4, rng);
  const auto& traj = batch.per_agent[0];
  std::vector<double> zero_adv(traj.size(), 0.0);
  std::vector<double> params(nets.actor_params(0).begin(), nets.actor_params(0).end());

  std::vector<double> grad(params.size(), 0.0);
  detail::actor_loss_grad(nets.actor(), params, traj, zero_adv, 0.05, grad);

  auto entropy_only = [&](const std::vector<double>& p) {
    double acc = 0.0;
    for (const auto& tr : traj) acc += -0.05 * entropy(softmax(nets.actor().forward(p, tr.obs)));
    return acc / static_cast<double>(traj.size());
  };
  auto fd = oracles::finite_diff_gradient(entropy_only, params, 1e-5);
  for (std::size_t i = 0; i < grad.size(); ++i) CHECK(oracles::rel_err(grad[i], fd[i]) < 1e-4);
}

TEST_CASE("parameter sharing: group members stay bit-identical, NPS stays isolated") {
  auto cfg = parse_scenario("6a_2c");
  SpreadEnv env(cfg, 31);
  SharingScheme scheme = SharingScheme::independent(6);
  // share trunk between agents {0,1,2}, heads independent
  scheme.partitions[0] = {{0, 1, 2}, {3}, {4}, {5}};
  auto nets = make_nets(6, cfg.obs_dim(), scheme, 3);
  TrainConfig tc;
  tc.rollout_length = 8;
  RolloutCursor cursor;
  Rng rng(1);
  std::vector<std::uint64_t> before_heads;
  for (int a = 0; a < 6; ++a) before_heads.push_back(hash_params(nets.actor_params(a)));
  for (int it = 0; it < 3; ++it) {
    auto batch = collect_rollout(env, cursor, nets, tc.rollout_length, rng);
    auto rep = a2c_update(batch, nets, tc);
    CHECK_FALSE(rep.skipped);
  }
  // trunk group members read bit-identical trunk parameters
  const auto [tlo, thi] = nets.block_range(NetKind::Actor, 0);
  auto p0 = nets.actor_params(0), p1 = nets.actor_params(1), p2 = nets.actor_params(2);
  for (int i = tlo; i < thi; ++i) {
    CHECK(p0[static_cast<std::size_t>(i)] == p1[static_cast<std::size_t>(i)]);
    CHECK(p0[static_cast<std::size_t>(i)] == p2[static_cast<std::size_t>(i)]);
  }
  // fully-shared scheme: exactly one parameter vector per block is updated
  CHECK(nets.scheme().n_groups(0) == 4);

  // NPS: no cross-agent contamination. Train agents with a scheme where only
  // agent 0's experience differs and check 1..5 evolve independently of it.
  auto nps_a = make_nets(6, cfg.obs_dim(), SharingScheme::independent(6), 8);
  auto nps_b = make_nets(6, cfg.obs_dim(), SharingScheme::independent(6), 8);
  SpreadEnv env_a(cfg, 40), env_b(cfg, 40);
  RolloutCursor ca, cb;
  Rng ra(2), rb(2);
  auto batch_a = collect_rollout(env_a, ca, nps_a, 8, ra);
  auto batch_b = collect_rollout(env_b, cb, nps_b, 8, rb);
  // tamper with agent 0's rewards only
  for (auto& tr : batch_b.per_agent[0]) tr.reward += 100.0;
  a2c_update(batch_a, nps_a, tc);
  a2c_update(batch_b, nps_b, tc);
  CHECK(hash_params(nps_a.actor_params(0)) != hash_params(nps_b.actor_params(0)));
  for (int a = 1; a < 6; ++a)
    CHECK(hash_params(nps_a.actor_params(a)) == hash_params(nps_b.actor_params(a)));
}

TEST_CASE("fuse/split groups: weighted averages and bit-identical clones") {
  auto cfg = parse_scenario("4a_2c");
  auto nets = make_nets(4, cfg.obs_dim(), SharingScheme::independent(4), 5, false);
  // give group params recognizable values on the trunk block
  auto& v0 = nets.group_params(NetKind::Actor, 0, 0);
  auto& v1 = nets.group_params(NetKind::Actor, 0, 1);
  std::fill(v0.begin(), v0.end(), 1.0);
  std::fill(v1.begin(), v1.end(), 3.0);
  nets.refresh_materialized();
  const int merged = nets.fuse_groups(0, 0, 1);
  const auto& avg = nets.group_params(NetKind::Actor, 0, merged);
  for (double v : avg) CHECK(v == doctest::Approx(2.0));  // equal sizes: (v+w)/2
  CHECK(nets.scheme().group_members(0, merged) == std::vector<int>{0, 1});

  // sizes 2 and 1 -> (2*a + 1*b) / 3
  auto& pa = nets.group_params(NetKind::Actor, 0, merged);
  std::fill(pa.begin(), pa.end(), 1.0);
  const int g2 = nets.scheme().group_of(0, 2);
  auto& pb = nets.group_params(NetKind::Actor, 0, g2);
  std::fill(pb.begin(), pb.end(), 4.0);
  nets.refresh_materialized();
  const int merged2 = nets.fuse_groups(0, merged, g2);
  for (double v : nets.group_params(NetKind::Actor, 0, merged2))
    CHECK(v == doctest::Approx(2.0));  // (2*1 + 1*4)/3

  // split back: clones bit-identical, partition sizes [2,1]
  nets.split_group(0, merged2, {0, 1}, {2});
  const int ga = nets.scheme().find_group(0, {0, 1});
  const int gb = nets.scheme().find_group(0, {2});
  REQUIRE(ga >= 0);
  REQUIRE(gb >= 0);
  CHECK(nets.group_params(NetKind::Actor, 0, ga) == nets.group_params(NetKind::Actor, 0, gb));
  CHECK_THROWS_AS(nets.split_group(0, ga, {0}, {0, 1}), std::invalid_argument);
}

TEST_CASE("evaluate: deterministic greedy returns, per-episode report") {
  auto cfg = parse_scenario("5a_1c");
  auto nets = make_nets(5, cfg.obs_dim(), SharingScheme::fully_shared(5), 2);
  SpreadEnv e1(cfg, 50), e2(cfg, 50);
  auto r1 = evaluate(e1, nets, 4);
  auto r2 = evaluate(e2, nets, 4);
  CHECK(r1.per_episode.size() == 4);
  CHECK(r1.per_episode == r2.per_episode);
  CHECK(r1.mean == r2.mean);
}

TEST_CASE("agent nets serialize and round-trip bit-exactly") {
  auto cfg = parse_scenario("5a_2c");
  SharingScheme scheme = SharingScheme::independent(5);
  scheme.partitions[0] = {{0, 2}, {1}, {3, 4}};
  auto nets = make_nets(5, cfg.obs_dim(), scheme, 77, false);
  // push through a couple of updates so adam states are non-trivial
  SpreadEnv env(cfg, 7);
  RolloutCursor cursor;
  Rng rng(3);
  TrainConfig tc;
  for (int i = 0; i < 2; ++i) a2c_update(collect_rollout(env, cursor, nets, 6, rng), nets, tc);

  const auto j = nets.to_json();
  auto restored = AgentNets::from_json(j);
  CHECK(restored.scheme() == nets.scheme());
  for (int a = 0; a < 5; ++a) {
    CHECK(std::equal(nets.actor_params(a).begin(), nets.actor_params(a).end(),
                     restored.actor_params(a).begin(), restored.actor_params(a).end()));
    CHECK(std::equal(nets.critic_params(a).begin(), nets.critic_params(a).end(),
                     restored.critic_params(a).begin(), restored.critic_params(a).end()));
  }
  // bytes survive a serialize -> parse -> serialize cycle
  const std::string s1 = j.dump();
  const std::string s2 = AgentNets::from_json(nlohmann::json::parse(s1)).to_json().dump();
  CHECK(s1 == s2);
}

TEST_CASE("identical init: all agents start with the same policy") {
  auto cfg = parse_scenario("6a_3c");
  auto nets = make_nets(6, cfg.obs_dim(), SharingScheme::independent(6), 13, true);
  for (int a = 1; a < 6; ++a) {
    CHECK(hash_params(nets.actor_params(a)) == hash_params(nets.actor_params(0)));
    CHECK(hash_params(nets.critic_params(a)) == hash_params(nets.critic_params(0)));
  }
}

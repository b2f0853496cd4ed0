#include "latmdp/agents/train_policy.hpp"
#include "latmdp/envs/gridworld.hpp"

#include <doctest.h>

#include "grad_check.hpp"

using namespace latmdp;
using namespace latmdp::agents;

namespace {

/// Forces a (critic-shaped) Mlp to a constant output by zeroing the final
/// layer and pinning its bias.
template <typename Scalar>
void make_constant(std::vector<nets::ParamRef<Scalar>> params, const std::string& prefix,
                   Scalar value) {
  for (auto& p : params) {
    if (p.name == prefix + ".fc2.W") p.value->setZero();
    if (p.name == prefix + ".fc2.b") p.value->setConstant(value);
  }
}

nets::BundleDims tiny_dims() {
  nets::BundleDims d;
  d.image_h = d.image_w = 16;
  d.n_actions = 4;
  d.dim_s = 4;
  d.dim_a = 2;
  return d;
}

LatentTransition<double> make_lt(int dim_s, int dim_a, double r, bool done,
                                 std::mt19937_64& rng) {
  LatentTransition<double> t;
  std::normal_distribution<double> g(0, 1);
  t.s.resize(dim_s);
  t.s_next.resize(dim_s);
  t.a.resize(dim_a);
  for (int i = 0; i < dim_s; ++i) {
    t.s[i] = g(rng);
    t.s_next[i] = g(rng);
  }
  for (int i = 0; i < dim_a; ++i) t.a[i] = std::tanh(g(rng));
  t.r = r;
  t.done = done;
  return t;
}

}  // namespace

TEST_CASE("td3_target reproduces the min-critic bootstrap value") {
  nets::BundleDims d = tiny_dims();
  nets::ModelBundle<double> bundle(d);
  bundle.init(1);
  TD3Config cfg;
  cfg.gamma = 0.99;
  cfg.sigma_target = 0.0;  // deterministic target action
  cfg.seed = 2;
  Td3Agent<double> agent(d.dim_s, d.dim_a, cfg, &bundle.action_decoder);
  make_constant<double>(agent.critic1_target().params(), "critic1_target", 2.0);
  make_constant<double>(agent.critic2_target().params(), "critic2_target", 1.5);

  auto rng = make_rng(3, 0);
  LatentTransition<double> t = make_lt(d.dim_s, d.dim_a, 1.0, false, rng);
  auto y = agent.td3_target({&t});
  CHECK(y[0] == doctest::Approx(1.0 + 0.99 * 1.5).epsilon(1e-12));  // 2.485

  t.done = true;
  y = agent.td3_target({&t});
  CHECK(y[0] == doctest::Approx(1.0));
}

TEST_CASE("sigma_target = 0 makes the smoothed action the target policy output") {
  nets::BundleDims d = tiny_dims();
  nets::ModelBundle<double> bundle(d);
  bundle.init(4);
  TD3Config cfg;
  cfg.sigma_target = 0.0;
  cfg.seed = 5;
  Td3Agent<double> agent(d.dim_s, d.dim_a, cfg, &bundle.action_decoder);
  // With identical constant critics the target reduces to r + gamma*c for
  // whatever action; instead verify via the actor-target directly.
  auto rng = make_rng(5, 0);
  LatentTransition<double> t = make_lt(d.dim_s, d.dim_a, 0.0, false, rng);
  Mat<double> pi = agent.actor_target().forward(t.s_next);
  // Reconstruct y by hand.
  Mat<double> q1 = agent.critic1_target().forward(t.s_next, pi);
  Mat<double> q2 = agent.critic2_target().forward(t.s_next, pi);
  auto y = agent.td3_target({&t});
  CHECK(y[0] == doctest::Approx(cfg.gamma * std::min(q1(0, 0), q2(0, 0))).epsilon(1e-12));
}

TEST_CASE("td3_target never exceeds the single-critic bootstrap") {
  nets::BundleDims d = tiny_dims();
  nets::ModelBundle<double> bundle(d);
  bundle.init(6);
  TD3Config cfg;
  cfg.sigma_target = 0.0;
  cfg.seed = 7;
  Td3Agent<double> agent(d.dim_s, d.dim_a, cfg, &bundle.action_decoder);
  auto rng = make_rng(8, 0);
  for (int i = 0; i < 50; ++i) {
    LatentTransition<double> t = make_lt(d.dim_s, d.dim_a, 0.3, false, rng);
    Mat<double> pi = agent.actor_target().forward(t.s_next);
    Mat<double> q1 = agent.critic1_target().forward(t.s_next, pi);
    auto y = agent.td3_target({&t});
    CHECK(y[0] <= t.r + cfg.gamma * q1(0, 0) + 1e-12);
  }
}

TEST_CASE("act is deterministic without exploration and clips with it") {
  nets::BundleDims d = tiny_dims();
  nets::ModelBundle<double> bundle(d);
  bundle.init(9);
  TD3Config cfg;
  cfg.sigma_explore = 0.35;
  cfg.seed = 10;
  Td3Agent<double> agent(d.dim_s, d.dim_a, cfg, &bundle.action_decoder);
  Vec<double> s = Vec<double>::Random(d.dim_s);

  auto [a1, i1] = agent.act(s, false);
  auto [a2, i2] = agent.act(s, false);
  CHECK(a1 == a2);
  CHECK(i1 == i2);

  for (int k = 0; k < 100; ++k) {
    auto [abar, idx] = agent.act(s, true);
    CHECK(abar.cwiseAbs().maxCoeff() <= 1.0);
    CHECK(idx >= 0);
    CHECK(idx < d.n_actions);
  }

  TD3Config zero = cfg;
  zero.sigma_explore = 0.0;
  Td3Agent<double> agent0(d.dim_s, d.dim_a, zero, &bundle.action_decoder);
  Vec<double> g1 = agent0.act(s, true).first;
  Vec<double> g2 = agent0.act(s, false).first;
  CHECK(g1 == g2);  // sigma=0: explore path equals greedy path
}

TEST_CASE("critic loss vanishes when critics already equal the targets") {
  nets::BundleDims d = tiny_dims();
  nets::ModelBundle<double> bundle(d);
  bundle.init(11);
  TD3Config cfg;
  cfg.gamma = 0.9;
  cfg.sigma_target = 0.3;  // irrelevant for constant targets
  cfg.seed = 12;
  Td3Agent<double> agent(d.dim_s, d.dim_a, cfg, &bundle.action_decoder);
  make_constant<double>(agent.critic1_target().params(), "critic1_target", 1.0);
  make_constant<double>(agent.critic2_target().params(), "critic2_target", 1.0);
  const double y = 0.5 + 0.9 * 1.0;
  make_constant<double>(agent.critic1().params(), "critic1", y);
  make_constant<double>(agent.critic2().params(), "critic2", y);

  auto rng = make_rng(13, 0);
  std::vector<LatentTransition<double>> storage;
  std::vector<const LatentTransition<double>*> batch;
  for (int i = 0; i < 8; ++i) storage.push_back(make_lt(d.dim_s, d.dim_a, 0.5, false, rng));
  for (auto& t : storage) batch.push_back(&t);
  auto stats = agent.td3_update(batch);
  CHECK(stats.critic_loss == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("policy_delay gates actor updates; tau=1 copies targets") {
  nets::BundleDims d = tiny_dims();
  nets::ModelBundle<double> bundle(d);
  bundle.init(14);
  TD3Config cfg;
  cfg.policy_delay = 2;
  cfg.tau = 1.0;
  cfg.seed = 15;
  Td3Agent<double> agent(d.dim_s, d.dim_a, cfg, &bundle.action_decoder);

  auto rng = make_rng(16, 0);
  std::vector<LatentTransition<double>> storage;
  std::vector<const LatentTransition<double>*> batch;
  for (int i = 0; i < 8; ++i) storage.push_back(make_lt(d.dim_s, d.dim_a, 0.1, false, rng));
  for (auto& t : storage) batch.push_back(&t);

  auto actor_snapshot = [&] {
    std::vector<Mat<double>> copy;
    for (auto& p : agent.actor().params()) copy.push_back(*p.value);
    return copy;
  };
  auto equals = [](const std::vector<Mat<double>>& a, const std::vector<Mat<double>>& b) {
    for (std::size_t i = 0; i < a.size(); ++i)
      if (a[i] != b[i]) return false;
    return true;
  };

  auto before = actor_snapshot();
  auto s1 = agent.td3_update(batch);  // odd step: critics only
  CHECK(!s1.actor_updated);
  CHECK(equals(before, actor_snapshot()));

  auto s2 = agent.td3_update(batch);  // even step: actor + targets
  CHECK(s2.actor_updated);
  CHECK(!equals(before, actor_snapshot()));

  // tau = 1: targets now exactly equal the online networks.
  auto online = agent.critic1().params();
  auto target = agent.critic1_target().params();
  for (std::size_t i = 0; i < online.size(); ++i) CHECK(*online[i].value == *target[i].value);
  auto aon = agent.actor().params();
  auto atg = agent.actor_target().params();
  for (std::size_t i = 0; i < aon.size(); ++i) CHECK(*aon[i].value == *atg[i].value);
}

TEST_CASE("soft target update is the exact convex combination after td3_update") {
  nets::BundleDims d = tiny_dims();
  nets::ModelBundle<double> bundle(d);
  bundle.init(17);
  TD3Config cfg;
  cfg.policy_delay = 1;
  cfg.tau = 0.125;
  cfg.seed = 18;
  Td3Agent<double> agent(d.dim_s, d.dim_a, cfg, &bundle.action_decoder);

  std::vector<Mat<double>> old_target;
  for (auto& p : agent.critic1_target().params()) old_target.push_back(*p.value);

  auto rng = make_rng(19, 0);
  std::vector<LatentTransition<double>> storage;
  std::vector<const LatentTransition<double>*> batch;
  for (int i = 0; i < 4; ++i) storage.push_back(make_lt(d.dim_s, d.dim_a, 0.2, false, rng));
  for (auto& t : storage) batch.push_back(&t);
  agent.td3_update(batch);

  auto online = agent.critic1().params();
  auto target = agent.critic1_target().params();
  for (std::size_t i = 0; i < online.size(); ++i) {
    Mat<double> expect = 0.125 * (*online[i].value) + 0.875 * old_target[i];
    CHECK((*target[i].value - expect).cwiseAbs().maxCoeff() < 1e-15);
  }
}

TEST_CASE("deterministic policy gradient matches finite differences on a quadratic critic") {
  const int dim_s = 3, dim_a = 2, B = 8;
  nets::Actor<double> actor(dim_s, dim_a, 16);
  auto rng = make_rng(20, 0);
  actor.init(rng);
  Mat<double> S = Mat<double>::Random(dim_s, B);
  Mat<double> G = Mat<double>::Random(dim_a, dim_s);  // targets g(s) = G s

  // J(theta) = mean_i -||pi(s_i) - G s_i||^2, maximized at pi == g.
  auto objective = [&] {
    Mat<double> A = actor.forward(S);
    return -(A - G * S).colwise().squaredNorm().mean();
  };
  nets::MlpCache<double> cache;
  Mat<double> A = actor.forward(S, &cache);
  Mat<double> dA = -2.0 / B * (A - G * S);  // dJ/dA
  actor.zero_grads();
  actor.backward(dA, cache);

  auto report = testing::finite_difference_check(actor.params(), objective, rng, 10, 1e-4);
  CHECK_MESSAGE(report.failed == 0, "worst " << report.worst << " err " << report.max_rel_err);
}

TEST_CASE("dqn: terminal targets, epsilon extremes, update learns constants") {
  DQNConfig cfg;
  cfg.seed = 21;
  cfg.gamma = 0.9;
  DqnAgent<double> agent(4, 3, cfg);

  auto rng = make_rng(22, 0);
  SUBCASE("epsilon = 1 explores uniformly; epsilon = 0 is greedy") {
    DQNConfig eps1 = cfg;
    eps1.epsilon_greedy = 1.0;
    DqnAgent<double> explorer(4, 3, eps1);
    Vec<double> s = Vec<double>::Random(4);
    std::set<int> seen;
    for (int i = 0; i < 200; ++i) seen.insert(explorer.act(s, true));
    CHECK(seen.size() == 3);

    DQNConfig eps0 = cfg;
    eps0.epsilon_greedy = 0.0;
    DqnAgent<double> greedy(4, 3, eps0);
    Vec<double> q = greedy.qnet().forward(s);
    Eigen::Index best;
    q.maxCoeff(&best);
    for (int i = 0; i < 20; ++i) CHECK(greedy.act(s, true) == static_cast<int>(best));
    CHECK(agent.act(s, false) >= 0);  // greedy path regardless of epsilon
  }

  SUBCASE("terminal transitions regress toward r alone") {
    std::vector<DiscreteLatentTransition<double>> storage;
    std::vector<const DiscreteLatentTransition<double>*> batch;
    std::normal_distribution<double> g(0, 1);
    for (int i = 0; i < 16; ++i) {
      DiscreteLatentTransition<double> t;
      t.s = Vec<double>::Random(4);
      t.s_next = Vec<double>::Random(4);
      t.a = static_cast<int>(rng() % 3);
      t.r = 0.7;
      t.done = true;
      storage.push_back(t);
    }
    for (auto& t : storage) batch.push_back(&t);
    double first = agent.dqn_update(batch);
    double last = 0;
    for (int i = 0; i < 400; ++i) last = agent.dqn_update(batch);
    CHECK(last < first);
    Vec<double> q = agent.qnet().forward(storage[0].s);
    CHECK(q[storage[0].a] == doctest::Approx(0.7).epsilon(0.05));
  }
}

TEST_CASE("train_policy: frozen representation, determinism, metric stream") {
  envs::GridWorldConfig env_cfg;
  env_cfg.grid_n = 4;
  env_cfg.image_size = 16;
  env_cfg.max_steps = 20;
  env_cfg.seed = 30;
  envs::GridWorld env(env_cfg);

  nets::BundleDims d = tiny_dims();
  nets::ModelBundle<Real> bundle(d);
  bundle.init(31);

  std::vector<Mat<Real>> before;
  for (auto& p : bundle.params()) before.push_back(*p.value);

  TD3Config cfg;
  cfg.batch_size = 16;
  RunBudget budget;
  budget.total_steps = 400;
  budget.warmup_steps = 64;
  budget.replay_capacity = 1000;
  budget.run_seed = 7;

  auto out1 = train_policy_td3(env, bundle, cfg, budget);
  CHECK(!out1.episodes.empty());

  // Frozenness: representation parameters are bit-identical.
  auto params = bundle.params();
  for (std::size_t i = 0; i < params.size(); ++i) CHECK(before[i] == *params[i].value);

  envs::GridWorld env2(env_cfg);
  auto out2 = train_policy_td3(env2, bundle, cfg, budget);
  REQUIRE(out1.episodes.size() == out2.episodes.size());
  for (std::size_t i = 0; i < out1.episodes.size(); ++i) {
    CHECK(out1.episodes[i].steps == out2.episodes[i].steps);
    CHECK(out1.episodes[i].ret == out2.episodes[i].ret);  // bit-identical stream
    CHECK(out1.episodes[i].success == out2.episodes[i].success);
  }

  envs::GridWorld env3(env_cfg);
  RunBudget other = budget;
  other.run_seed = 8;
  auto out3 = train_policy_td3(env3, bundle, cfg, other);
  bool differs = out3.episodes.size() != out1.episodes.size();
  for (std::size_t i = 0; !differs && i < out1.episodes.size(); ++i)
    differs = out1.episodes[i].ret != out3.episodes[i].ret;
  CHECK(differs);
}

TEST_CASE("train_policy_dqn runs and respects the episode budget") {
  envs::GridWorldConfig env_cfg;
  env_cfg.grid_n = 4;
  env_cfg.image_size = 16;
  env_cfg.max_steps = 15;
  env_cfg.seed = 33;
  envs::GridWorld env(env_cfg);

  nets::BundleDims d = tiny_dims();
  nets::ModelBundle<Real> bundle(d);
  bundle.init(34);

  DQNConfig cfg;
  cfg.batch_size = 16;
  RunBudget budget;
  budget.total_steps = 100000;
  budget.max_episodes = 5;
  budget.warmup_steps = 32;
  budget.replay_capacity = 500;
  budget.run_seed = 9;
  auto out = train_policy_dqn(env, bundle, cfg, budget);
  CHECK(out.episodes.size() == 5);
  for (const auto& e : out.episodes) CHECK(e.steps <= env_cfg.max_steps);
}

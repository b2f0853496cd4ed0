#include "latmdp/homoverify/prop2.hpp"
#include "latmdp/homoverify/tabular.hpp"
#include "latmdp/rng.hpp"

#include <doctest.h>

#include <filesystem>

using namespace latmdp;
using namespace latmdp::homoverify;

namespace {

HomomorphismMap identity_map(const TabularMDP& M) {
  HomomorphismMap h;
  h.f.resize(M.n_states);
  for (int s = 0; s < M.n_states; ++s) h.f[s] = s;
  h.g.resize(M.n_states, M.n_actions);
  for (int s = 0; s < M.n_states; ++s)
    for (int a = 0; a < M.n_actions; ++a) h.g(s, a) = a;
  return h;
}

}  // namespace

TEST_CASE("identity homomorphism always passes") {
  TabularMDP M = make_grid3_mdp(2, 2);
  auto report = check_homomorphism(M, M, identity_map(M));
  CHECK(report.transition_ok);
  CHECK(report.reward_ok);
  CHECK(report.violations.empty());
}

TEST_CASE("mirror quotient of the 3x3 grid is a homomorphism") {
  TabularMDP M = make_grid3_mdp(2, 2);
  auto [Mb, h] = make_grid3_mirror_quotient(M, 2, 2);
  CHECK(Mb.n_states == 6);
  auto report = check_homomorphism(M, Mb, h);
  CHECK(report.ok());
  CHECK(report.violations.empty());
}

TEST_CASE("a corrupted abstract transition is reported with its pair") {
  TabularMDP M = make_grid3_mdp(1, 1);
  auto [Mb, h] = make_grid3_mirror_quotient(M, 1, 1);
  // Find an abstract entry actually exercised by some (s,a) and corrupt it.
  const int fs = h.f[0];
  const int ga = h.g(0, 0);
  Mb.T(fs, ga) = (Mb.T(fs, ga) + 1) % Mb.n_states;
  auto report = check_homomorphism(M, Mb, h);
  CHECK(!report.transition_ok);
  bool found = false;
  for (const auto& v : report.violations)
    if (v.kind == "transition" && h.f[v.state] == fs && h.g(v.state, v.action) == ga)
      found = true;
  CHECK(found);
}

TEST_CASE("value iteration: single absorbing state gives the geometric series") {
  TabularMDP M;
  M.n_states = 1;
  M.n_actions = 1;
  M.gamma = 0.9;
  M.T = MatrixXi::Zero(1, 1);
  M.R = MatrixXd::Constant(1, 1, 1.0);
  auto res = value_iteration(M);
  CHECK(res.V[0] == doctest::Approx(10.0).epsilon(1e-9));
}

TEST_CASE("value iteration: two-state chain respects the Bellman relation") {
  TabularMDP M;
  M.n_states = 2;
  M.n_actions = 1;
  M.gamma = 0.8;
  M.T.resize(2, 1);
  M.R.resize(2, 1);
  M.T(0, 0) = 1;  // start -> goal
  M.T(1, 0) = 1;  // absorbing goal
  M.R(0, 0) = 1.0;
  M.R(1, 0) = 0.0;
  auto res = value_iteration(M);
  CHECK(res.V[1] == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(res.V[0] == doctest::Approx(1.0 + M.gamma * res.V[1]).epsilon(1e-12));
}

TEST_CASE("value iteration matches exhaustive policy enumeration on the 3x3 grid") {
  TabularMDP M = make_grid3_mdp(2, 2, 0.9);
  auto vi = value_iteration(M);
  auto brute = enumerate_optimal_policy(M);
  CHECK((vi.V - brute.V).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("greedy ties break to the lowest action index") {
  TabularMDP M;  // two identical actions
  M.n_states = 1;
  M.n_actions = 2;
  M.gamma = 0.5;
  M.T = MatrixXi::Zero(1, 2);
  M.R = MatrixXd::Constant(1, 2, 1.0);
  auto res = value_iteration(M);
  CHECK(res.policy[0] == 0);
}

TEST_CASE("lifting through the identity reproduces the abstract policy") {
  TabularMDP M = make_grid3_mdp(2, 2);
  auto vi = value_iteration(M);
  auto lifted = lift_policy(M, M, identity_map(M), vi.policy);
  CHECK(lifted == vi.policy);
}

TEST_CASE("policy lifted from the mirror quotient is optimal in the original MDP") {
  for (int goal = 0; goal < 3; ++goal) {
    TabularMDP M = make_grid3_mdp(goal, goal, 0.95);
    auto [Mb, h] = make_grid3_mirror_quotient(M, goal, goal);
    REQUIRE(check_homomorphism(M, Mb, h).ok());

    auto vi_abstract = value_iteration(Mb);
    auto lifted = lift_policy(M, Mb, h, vi_abstract.policy);
    auto v_lifted = policy_evaluation(M, lifted);
    auto vi_orig = value_iteration(M);
    CHECK((v_lifted - vi_orig.V).cwiseAbs().maxCoeff() < 1e-10);

    auto brute = enumerate_optimal_policy(M);
    CHECK((v_lifted - brute.V).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("lift_policy reports a missing preimage") {
  TabularMDP M = make_grid3_mdp(2, 2);
  auto [Mb, h] = make_grid3_mirror_quotient(M, 2, 2);
  VectorXi bogus = VectorXi::Zero(Mb.n_states);
  // Remap every g(0, a) away from abstract action 3, then demand it.
  for (int a = 0; a < 4; ++a) h.g(0, a) = 0;
  bogus[h.f[0]] = 3;
  CHECK_THROWS(lift_policy(M, Mb, h, bogus));
}

TEST_CASE("violated homomorphism can break lifting optimality") {
  // Goal off the diagonal: the mirror map is NOT a homomorphism, and the
  // check reports it; lifting under a failed precondition loses optimality
  // for at least one goal placement.
  TabularMDP M = make_grid3_mdp(0, 2, 0.95);
  auto [Mb, h] = make_grid3_mirror_quotient(M, 2, 2);  // wrong quotient for this goal
  // Rebuild abstract tables from the (now non-symmetric) M with the same maps.
  for (int s = 0; s < 9; ++s)
    for (int a = 0; a < 4; ++a)
      if (s % 3 >= s / 3) {  // canonical cells r <= c
        Mb.T(h.f[s], h.g(s, a)) = h.f[M.T(s, a)];
        Mb.R(h.f[s], h.g(s, a)) = M.R(s, a);
      }
  auto report = check_homomorphism(M, Mb, h);
  CHECK(!report.ok());
}

TEST_CASE("stochastic homomorphism definitional check on a 2-state example") {
  // Original: 4 states collapsing pairwise; uniform noise inside each class.
  StochasticTabularMDP M;
  M.n_states = 4;
  M.n_actions = 1;
  M.gamma = 0.9;
  M.T.resize(1);
  M.T[0].resize(4, 4);
  // From class {0,1} go to class {2,3} with the mass split arbitrarily.
  M.T[0] << 0.0, 0.0, 0.3, 0.7,
            0.0, 0.0, 0.6, 0.4,
            0.5, 0.5, 0.0, 0.0,
            0.9, 0.1, 0.0, 0.0;
  M.R.resize(4, 1);
  M.R << 1.0, 1.0, -1.0, -1.0;

  StochasticTabularMDP Mb;
  Mb.n_states = 2;
  Mb.n_actions = 1;
  Mb.gamma = 0.9;
  Mb.T.resize(1);
  Mb.T[0].resize(2, 2);
  Mb.T[0] << 0.0, 1.0,
             1.0, 0.0;
  Mb.R.resize(2, 1);
  Mb.R << 1.0, -1.0;

  HomomorphismMap h;
  h.f.resize(4);
  h.f << 0, 0, 1, 1;
  h.g = MatrixXi::Zero(4, 1);

  CHECK(check_stochastic_homomorphism(M, Mb, h).ok());

  // Perturbing one row breaks the class-mass identity.
  M.T[0](0, 2) = 0.4;
  M.T[0](0, 3) = 0.6;
  M.T[0](0, 0) = 0.0;
  Mb.T[0](0, 1) = 0.9;
  Mb.T[0](0, 0) = 0.1;
  CHECK(!check_stochastic_homomorphism(M, Mb, h).ok());
}

TEST_CASE("tabular MDP and map files round-trip") {
  namespace fs = std::filesystem;
  const auto dir = fs::temp_directory_path() / "latmdp_tabular";
  fs::create_directories(dir);
  TabularMDP M = make_grid3_mdp(2, 2, 0.93);
  save_tabular_mdp((dir / "m.txt").string(), M);
  TabularMDP M2 = load_tabular_mdp((dir / "m.txt").string());
  CHECK(M2.T == M.T);
  CHECK(M2.R == M.R);
  CHECK(M2.gamma == M.gamma);

  auto [Mb, h] = make_grid3_mirror_quotient(M, 2, 2);
  save_homomorphism_map((dir / "h.txt").string(), h);
  auto h2 = load_homomorphism_map((dir / "h.txt").string());
  CHECK(h2.f == h.f);
  CHECK(h2.g == h.g);
  fs::remove_all(dir);
}

TEST_CASE("proposition 2: uniform policy on a constant-reward MDP has zero gradient") {
  auto rng = make_rng(3, 0);
  LatentPolicyInstance inst = random_prop2_instance(rng, 4, 3);
  inst.theta.setZero();                      // uniform latent policy
  inst.R.setConstant(1.0);                   // symmetric: J independent of theta
  auto report = check_proposition2(inst, false);
  CHECK(report.grad_intermediate.cwiseAbs().maxCoeff() < 1e-12);
  CHECK(report.grad_latent.cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("proposition 2 holds on a 2-state 2-action instance") {
  auto rng = make_rng(17, 0);
  LatentPolicyInstance inst = random_prop2_instance(rng, 2, 2);
  inst.n_states = 2;
  auto report = check_proposition2(inst, true);
  CHECK(report.max_rel_err < 1e-6);
  CHECK(report.fd_max_rel_err < 1e-4);
}

TEST_CASE("proposition 2 holds across random small instances") {
  auto rng = make_rng(23, 0);
  for (int i = 0; i < 10; ++i) {
    LatentPolicyInstance inst = random_prop2_instance(rng);
    auto report = check_proposition2(inst, false);
    CHECK(report.max_rel_err < 1e-6);
  }
}

TEST_CASE("a stochastic decoder breaks the gradient identity") {
  auto rng = make_rng(29, 0);
  LatentPolicyInstance inst = random_prop2_instance(rng, 5, 3);
  perturb_decoder(inst, 0.3);
  auto report = check_proposition2(inst, true);
  CHECK(report.max_rel_err > 1e-3);     // determinism hypothesis is necessary
  CHECK(report.fd_max_rel_err < 1e-4);  // route (i) still matches the true gradient
}

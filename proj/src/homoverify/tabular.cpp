#include "latmdp/homoverify/tabular.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace latmdp::homoverify {

void TabularMDP::validate() const {
  if (n_states <= 0 || n_actions <= 0)
    throw std::invalid_argument("TabularMDP: empty state or action set");
  if (T.rows() != n_states || T.cols() != n_actions || R.rows() != n_states ||
      R.cols() != n_actions)
    throw std::invalid_argument("TabularMDP: table shape mismatch");
  for (int s = 0; s < n_states; ++s)
    for (int a = 0; a < n_actions; ++a) {
      if (T(s, a) < 0 || T(s, a) >= n_states)
        throw std::invalid_argument("TabularMDP: transition target out of range");
      if (!std::isfinite(R(s, a))) throw std::invalid_argument("TabularMDP: non-finite reward");
    }
  if (!(gamma > 0 && gamma < 1)) throw std::invalid_argument("TabularMDP: gamma must be in (0,1)");
}

HomomorphismReport check_homomorphism(const TabularMDP& M, const TabularMDP& M_bar,
                                      const HomomorphismMap& h, double reward_tol) {
  M.validate();
  M_bar.validate();
  if (h.f.size() != M.n_states || h.g.rows() != M.n_states || h.g.cols() != M.n_actions)
    throw std::invalid_argument("check_homomorphism: map shape mismatch");
  HomomorphismReport report;
  for (int s = 0; s < M.n_states; ++s)
    for (int a = 0; a < M.n_actions; ++a) {
      const int fs = h.f[s];
      const int ga = h.g(s, a);
      if (fs < 0 || fs >= M_bar.n_states || ga < 0 || ga >= M_bar.n_actions)
        throw std::invalid_argument("check_homomorphism: map image out of range");
      if (M_bar.T(fs, ga) != h.f[M.T(s, a)]) {
        report.transition_ok = false;
        report.violations.push_back({s, a, "transition"});
      }
      if (std::abs(M_bar.R(fs, ga) - M.R(s, a)) > reward_tol) {
        report.reward_ok = false;
        report.violations.push_back({s, a, "reward"});
      }
    }
  return report;
}

ValueIterationResult value_iteration(const TabularMDP& M, double tol, int max_iterations) {
  M.validate();
  ValueIterationResult res;
  res.V = VectorXd::Zero(M.n_states);
  for (res.iterations = 0; res.iterations < max_iterations; ++res.iterations) {
    VectorXd next(M.n_states);
    for (int s = 0; s < M.n_states; ++s) {
      double best = -std::numeric_limits<double>::infinity();
      for (int a = 0; a < M.n_actions; ++a)
        best = std::max(best, M.R(s, a) + M.gamma * res.V[M.T(s, a)]);
      next[s] = best;
    }
    const double residual = (next - res.V).cwiseAbs().maxCoeff();
    res.V = next;
    if (residual < tol) break;
  }
  res.policy = VectorXi::Zero(M.n_states);
  for (int s = 0; s < M.n_states; ++s) {
    double best = -std::numeric_limits<double>::infinity();
    for (int a = 0; a < M.n_actions; ++a) {
      const double q = M.R(s, a) + M.gamma * res.V[M.T(s, a)];
      if (q > best) {
        best = q;
        res.policy[s] = a;  // strict improvement only: ties keep the lowest index
      }
    }
  }
  return res;
}

VectorXd policy_evaluation(const TabularMDP& M, const VectorXi& policy) {
  M.validate();
  MatrixXd A = MatrixXd::Identity(M.n_states, M.n_states);
  VectorXd r(M.n_states);
  for (int s = 0; s < M.n_states; ++s) {
    const int a = policy[s];
    A(s, M.T(s, a)) -= M.gamma;
    r[s] = M.R(s, a);
  }
  return A.partialPivLu().solve(r);
}

VectorXi lift_policy(const TabularMDP& M, const TabularMDP& M_bar, const HomomorphismMap& h,
                     const VectorXi& abstract_policy) {
  (void)M_bar;
  VectorXi policy(M.n_states);
  for (int s = 0; s < M.n_states; ++s) {
    const int want = abstract_policy[h.f[s]];
    int found = -1;
    for (int a = 0; a < M.n_actions; ++a)
      if (h.g(s, a) == want) {
        found = a;
        break;
      }
    if (found < 0)
      throw std::runtime_error("lift_policy: no action at state " + std::to_string(s) +
                               " maps to abstract action " + std::to_string(want));
    policy[s] = found;
  }
  return policy;
}

ValueIterationResult enumerate_optimal_policy(const TabularMDP& M) {
  M.validate();
  const double count = std::pow(static_cast<double>(M.n_actions), M.n_states);
  if (count > 5e6)
    throw std::invalid_argument("enumerate_optimal_policy: instance too large for brute force");
  ValueIterationResult best;
  best.V = VectorXd::Constant(M.n_states, -std::numeric_limits<double>::infinity());
  VectorXi policy = VectorXi::Zero(M.n_states);
  const long total = static_cast<long>(count);
  for (long it = 0; it < total; ++it) {
    long code = it;
    for (int s = 0; s < M.n_states; ++s) {
      policy[s] = static_cast<int>(code % M.n_actions);
      code /= M.n_actions;
    }
    VectorXd V = policy_evaluation(M, policy);
    if (V.sum() > best.V.sum()) {
      best.V = V;
      best.policy = policy;
    }
  }
  return best;
}

HomomorphismReport check_stochastic_homomorphism(const StochasticTabularMDP& M,
                                                 const StochasticTabularMDP& M_bar,
                                                 const HomomorphismMap& h, double tol) {
  HomomorphismReport report;
  for (int s = 0; s < M.n_states; ++s)
    for (int a = 0; a < M.n_actions; ++a) {
      const int fs = h.f[s];
      const int ga = h.g(s, a);
      // Probability mass of each equivalence class [s']_f must match.
      VectorXd mass = VectorXd::Zero(M_bar.n_states);
      for (int s2 = 0; s2 < M.n_states; ++s2) mass[h.f[s2]] += M.T[a](s, s2);
      for (int sb = 0; sb < M_bar.n_states; ++sb)
        if (std::abs(mass[sb] - M_bar.T[ga](fs, sb)) > tol) {
          report.transition_ok = false;
          report.violations.push_back({s, a, "transition"});
          break;
        }
      if (std::abs(M_bar.R(fs, ga) - M.R(s, a)) > tol) {
        report.reward_ok = false;
        report.violations.push_back({s, a, "reward"});
      }
    }
  return report;
}

TabularMDP load_tabular_mdp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_tabular_mdp: cannot open " + path);
  TabularMDP M;
  in >> M.n_states >> M.n_actions >> M.gamma;
  if (!in) throw std::runtime_error("load_tabular_mdp: bad header in " + path);
  M.T.resize(M.n_states, M.n_actions);
  M.R.resize(M.n_states, M.n_actions);
  for (int s = 0; s < M.n_states; ++s)
    for (int a = 0; a < M.n_actions; ++a) in >> M.T(s, a);
  for (int s = 0; s < M.n_states; ++s)
    for (int a = 0; a < M.n_actions; ++a) in >> M.R(s, a);
  if (!in) throw std::runtime_error("load_tabular_mdp: truncated tables in " + path);
  M.validate();
  return M;
}

void save_tabular_mdp(const std::string& path, const TabularMDP& M) {
  std::ofstream out(path);
  out << M.n_states << " " << M.n_actions << " ";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", M.gamma);
  out << buf << "\n";
  for (int s = 0; s < M.n_states; ++s) {
    for (int a = 0; a < M.n_actions; ++a) out << M.T(s, a) << (a + 1 < M.n_actions ? " " : "\n");
  }
  for (int s = 0; s < M.n_states; ++s)
    for (int a = 0; a < M.n_actions; ++a) {
      std::snprintf(buf, sizeof(buf), "%.17g", M.R(s, a));
      out << buf << (a + 1 < M.n_actions ? " " : "\n");
    }
  if (!out) throw std::runtime_error("save_tabular_mdp: write failed for " + path);
}

HomomorphismMap load_homomorphism_map(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_homomorphism_map: cannot open " + path);
  int n_states = 0, n_actions = 0;
  in >> n_states >> n_actions;
  HomomorphismMap h;
  h.f.resize(n_states);
  h.g.resize(n_states, n_actions);
  for (int s = 0; s < n_states; ++s) in >> h.f[s];
  for (int s = 0; s < n_states; ++s)
    for (int a = 0; a < n_actions; ++a) in >> h.g(s, a);
  if (!in) throw std::runtime_error("load_homomorphism_map: truncated file " + path);
  return h;
}

void save_homomorphism_map(const std::string& path, const HomomorphismMap& h) {
  std::ofstream out(path);
  out << h.f.size() << " " << h.g.cols() << "\n";
  for (Eigen::Index s = 0; s < h.f.size(); ++s)
    out << h.f[s] << (s + 1 < h.f.size() ? " " : "\n");
  for (Eigen::Index s = 0; s < h.g.rows(); ++s)
    for (Eigen::Index a = 0; a < h.g.cols(); ++a)
      out << h.g(s, a) << (a + 1 < h.g.cols() ? " " : "\n");
  if (!out) throw std::runtime_error("save_homomorphism_map: write failed for " + path);
}

namespace {

constexpr int kGridDeltas[4][2] = {{-1, 0}, {1, 0}, {0, -1}, {0, 1}};  // N, S, W, E

int grid_cell(int r, int c) { return r * 3 + c; }

}  // namespace

TabularMDP make_grid3_mdp(int goal_row, int goal_col, double gamma, double eta,
                          double r_reached) {
  TabularMDP M;
  M.n_states = 9;
  M.n_actions = 4;
  M.gamma = gamma;
  M.T.resize(9, 4);
  M.R.resize(9, 4);
  const int goal = grid_cell(goal_row, goal_col);
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) {
      const int s = grid_cell(r, c);
      for (int a = 0; a < 4; ++a) {
        if (s == goal) {  // absorbing goal
          M.T(s, a) = s;
          M.R(s, a) = 0.0;
          continue;
        }
        int nr = r + kGridDeltas[a][0], nc = c + kGridDeltas[a][1];
        if (nr < 0 || nr > 2 || nc < 0 || nc > 2) {
          nr = r;
          nc = c;
        }
        const int next = grid_cell(nr, nc);
        M.T(s, a) = next;
        const double d = std::abs(r - goal_row) + std::abs(c - goal_col);
        M.R(s, a) = next == goal ? r_reached : -eta * d / 9.0;
      }
    }
  return M;
}

std::pair<TabularMDP, HomomorphismMap> make_grid3_mirror_quotient(const TabularMDP& M,
                                                                  int goal_row, int goal_col) {
  if (goal_row != goal_col)
    throw std::invalid_argument("make_grid3_mirror_quotient: goal must lie on the diagonal");
  // Orbits of the diagonal reflection (r,c) <-> (c,r); representative r <= c.
  std::map<int, int> orbit_of;  // canonical cell -> abstract index
  VectorXi f(9);
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) {
      const int rep = r <= c ? grid_cell(r, c) : grid_cell(c, r);
      if (!orbit_of.count(rep)) orbit_of[rep] = static_cast<int>(orbit_of.size());
      f[grid_cell(r, c)] = orbit_of[rep];
    }

  // N<->W and S<->E swap under the reflection.
  auto swap_action = [](int a) {
    switch (a) {
      case 0: return 2;
      case 2: return 0;
      case 1: return 3;
      case 3: return 1;
    }
    return a;
  };

  HomomorphismMap h;
  h.f = f;
  h.g.resize(9, 4);
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c)
      for (int a = 0; a < 4; ++a)
        h.g(grid_cell(r, c), a) = r <= c ? a : swap_action(a);

  TabularMDP Mb;
  Mb.n_states = static_cast<int>(orbit_of.size());
  Mb.n_actions = 4;
  Mb.gamma = M.gamma;
  Mb.T.resize(Mb.n_states, 4);
  Mb.R.resize(Mb.n_states, 4);
  for (const auto& [rep, idx] : orbit_of)
    for (int a = 0; a < 4; ++a) {
      Mb.T(idx, a) = f[M.T(rep, a)];
      Mb.R(idx, a) = M.R(rep, a);
    }
  return {Mb, h};
}

}  // namespace latmdp::homoverify

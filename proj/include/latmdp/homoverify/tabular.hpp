#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace latmdp::homoverify {

using Eigen::MatrixXd;
using Eigen::MatrixXi;
using Eigen::VectorXd;
using Eigen::VectorXi;

/// Explicit finite MDP with a deterministic transition function.
struct TabularMDP {
  int n_states = 0;
  int n_actions = 0;
  MatrixXi T;   // n_states x n_actions -> next state index
  MatrixXd R;   // n_states x n_actions
  double gamma = 0.99;

  void validate() const;
};

/// Structure-preserving pair of maps into an abstract MDP.
struct HomomorphismMap {
  VectorXi f;   // n_states
  MatrixXi g;   // n_states x n_actions -> abstract action index
};

struct Violation {
  int state = 0;
  int action = 0;
  std::string kind;  // "transition" | "reward"
};

struct HomomorphismReport {
  bool transition_ok = true;
  bool reward_ok = true;
  std::vector<Violation> violations;
  bool ok() const { return transition_ok && reward_ok; }
};

/// Exhaustively verifies T(s,a)=s' => T_bar(f(s),g_s(a))=f(s') and
/// R_bar(f(s),g_s(a))=R(s,a) over all state-action pairs.
HomomorphismReport check_homomorphism(const TabularMDP& M, const TabularMDP& M_bar,
                                      const HomomorphismMap& h, double reward_tol = 1e-12);

struct ValueIterationResult {
  VectorXd V;
  VectorXi policy;  // greedy, ties broken by lowest action index
  int iterations = 0;
};

/// Fixed-point iteration to residual < tol with greedy policy extraction.
ValueIterationResult value_iteration(const TabularMDP& M, double tol = 1e-12,
                                     int max_iterations = 1000000);

/// Exact policy evaluation via the linear system (I - gamma P_pi) V = r_pi.
VectorXd policy_evaluation(const TabularMDP& M, const VectorXi& policy);

/// Lifts an abstract deterministic policy through h: pi(s) = the lowest
/// action a with g(s,a) = pi_bar(f(s)). Throws when no preimage exists.
VectorXi lift_policy(const TabularMDP& M, const TabularMDP& M_bar, const HomomorphismMap& h,
                     const VectorXi& abstract_policy);

/// Exhaustive brute-force optimum over all deterministic policies; only
/// viable on tiny instances. Oracle for value iteration tests.
ValueIterationResult enumerate_optimal_policy(const TabularMDP& M);

// ---------------------------------------------------------------------------
// Stochastic definitional check (the general homomorphism condition where the
// abstract transition probability must equal the probability mass of the
// equivalence class [s']_f).
// ---------------------------------------------------------------------------

struct StochasticTabularMDP {
  int n_states = 0;
  int n_actions = 0;
  std::vector<MatrixXd> T;  // per action: n_states x n_states row-stochastic
  MatrixXd R;
  double gamma = 0.99;
};

HomomorphismReport check_stochastic_homomorphism(const StochasticTabularMDP& M,
                                                 const StochasticTabularMDP& M_bar,
                                                 const HomomorphismMap& h, double tol = 1e-12);

// ---------------------------------------------------------------------------
// Text format: "n_states n_actions gamma" header, then the T table
// (n_states rows x n_actions next-state indices) and the R table.
// ---------------------------------------------------------------------------

TabularMDP load_tabular_mdp(const std::string& path);
void save_tabular_mdp(const std::string& path, const TabularMDP& M);
/// Map format: "n_states n_actions" header, f row, then g table.
HomomorphismMap load_homomorphism_map(const std::string& path);
void save_homomorphism_map(const std::string& path, const HomomorphismMap& h);

/// 3x3 open grid with the distance-based reward, absorbing goal; the
/// canonical exact instance for the lifting theorems.
TabularMDP make_grid3_mdp(int goal_row, int goal_col, double gamma = 0.95, double eta = 0.1,
                          double r_reached = 1.0);

/// Quotient of a diagonal-symmetric 3x3 grid by its mirror symmetry (goal on
/// the diagonal): returns the abstract MDP and the map.
std::pair<TabularMDP, HomomorphismMap> make_grid3_mirror_quotient(const TabularMDP& M,
                                                                  int goal_row, int goal_col);

}  // namespace latmdp::homoverify

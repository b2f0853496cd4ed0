#include "latmdp/homoverify/prop2.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace latmdp::homoverify {
namespace {

MatrixXd softmax_rows(const MatrixXd& logits) {
  MatrixXd p(logits.rows(), logits.cols());
  for (Eigen::Index s = 0; s < logits.rows(); ++s) {
    Eigen::RowVectorXd e = (logits.row(s).array() - logits.row(s).maxCoeff()).exp();
    p.row(s) = e / e.sum();
  }
  return p;
}

/// Decoder distribution D(a|bin) as a dense matrix, deterministic or not.
MatrixXd decoder_matrix(const LatentPolicyInstance& inst) {
  if (inst.stochastic_decoder) return inst.decoder_dist;
  MatrixXd D = MatrixXd::Zero(inst.n_bins, inst.n_actions);
  for (int j = 0; j < inst.n_bins; ++j) D(j, inst.bin_action[j]) = 1.0;
  return D;
}

struct Solved {
  MatrixXd pi;   // n_states x n_actions
  VectorXd V;    // n_states
  MatrixXd Q;    // n_states x n_actions
  VectorXd rho;  // discounted occupancy
};

Solved solve_instance(const LatentPolicyInstance& inst, const MatrixXd& pol) {
  Solved out;
  const MatrixXd D = decoder_matrix(inst);
  out.pi = pol * D;  // pi_i(a|s) = sum_j pol(s,j) D(a|j)

  MatrixXd P = MatrixXd::Zero(inst.n_states, inst.n_states);
  VectorXd r = VectorXd::Zero(inst.n_states);
  for (int a = 0; a < inst.n_actions; ++a) {
    P += out.pi.col(a).asDiagonal() * inst.T[a];
    r += out.pi.col(a).cwiseProduct(inst.R.col(a));
  }
  const MatrixXd A = MatrixXd::Identity(inst.n_states, inst.n_states) - inst.gamma * P;
  out.V = A.partialPivLu().solve(r);
  out.Q.resize(inst.n_states, inst.n_actions);
  for (int a = 0; a < inst.n_actions; ++a)
    out.Q.col(a) = inst.R.col(a) + inst.gamma * (inst.T[a] * out.V);
  out.rho = A.transpose().partialPivLu().solve(inst.d0);
  return out;
}

}  // namespace

MatrixXd LatentPolicyInstance::policy_probs() const { return softmax_rows(theta); }

MatrixXd LatentPolicyInstance::intermediate_policy() const {
  return policy_probs() * decoder_matrix(*this);
}

double prop2_performance(const LatentPolicyInstance& inst) {
  const Solved sol = solve_instance(inst, inst.policy_probs());
  return inst.d0.dot(sol.V);
}

Prop2Report check_proposition2(const LatentPolicyInstance& inst, bool finite_difference_check,
                               double fd_step) {
  const MatrixXd pol = inst.policy_probs();
  const Solved sol = solve_instance(inst, pol);
  const MatrixXd D = decoder_matrix(inst);

  Prop2Report report;
  report.J = inst.d0.dot(sol.V);
  report.grad_intermediate = MatrixXd::Zero(inst.n_states, inst.n_bins);
  report.grad_latent = MatrixXd::Zero(inst.n_states, inst.n_bins);

  for (int s = 0; s < inst.n_states; ++s) {
    // Softmax Jacobian: d pol(s,j) / d theta(s,k) = pol_j (delta_jk - pol_k).
    for (int k = 0; k < inst.n_bins; ++k) {
      double gi = 0.0;
      for (int a = 0; a < inst.n_actions; ++a) {
        // d pi_i(a|s)/d theta(s,k) = sum_j D(a|j) pol_j (delta_jk - pol_k)
        const double dpi = D(k, a) * pol(s, k) - pol(s, k) * (pol.row(s) * D.col(a))(0, 0);
        gi += sol.Q(s, a) * dpi;
      }
      report.grad_intermediate(s, k) = sol.rho[s] * gi;

      // Route (ii): every bin carries the Q of its (assumed deterministic)
      // decoded action.
      double gl = 0.0;
      for (int j = 0; j < inst.n_bins; ++j) {
        const double qbar = sol.Q(s, inst.bin_action[j]);
        const double dpol = pol(s, j) * ((j == k ? 1.0 : 0.0) - pol(s, k));
        gl += qbar * dpol;
      }
      report.grad_latent(s, k) = sol.rho[s] * gl;
    }
  }

  const double scale = std::max(
      {report.grad_intermediate.cwiseAbs().maxCoeff(), report.grad_latent.cwiseAbs().maxCoeff(),
       1e-12});
  double max_rel = 0.0;
  for (Eigen::Index i = 0; i < report.grad_intermediate.size(); ++i) {
    const double a = report.grad_intermediate.data()[i];
    const double b = report.grad_latent.data()[i];
    max_rel = std::max(max_rel, std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-9 * scale}));
  }
  report.max_rel_err = max_rel;

  if (finite_difference_check) {
    LatentPolicyInstance probe = inst;
    double fd_rel = 0.0;
    for (int s = 0; s < inst.n_states; ++s)
      for (int k = 0; k < inst.n_bins; ++k) {
        const double orig = probe.theta(s, k);
        probe.theta(s, k) = orig + fd_step;
        const double jp = prop2_performance(probe);
        probe.theta(s, k) = orig - fd_step;
        const double jm = prop2_performance(probe);
        probe.theta(s, k) = orig;
        const double fd = (jp - jm) / (2.0 * fd_step);
        const double an = report.grad_intermediate(s, k);
        fd_rel = std::max(fd_rel,
                          std::abs(an - fd) / std::max({std::abs(an), std::abs(fd), 1e-6 * scale}));
      }
    report.fd_max_rel_err = fd_rel;
  }
  return report;
}

LatentPolicyInstance random_prop2_instance(std::mt19937_64& rng, int max_states,
                                           int max_actions) {
  std::uniform_int_distribution<int> pick_states(2, max_states);
  std::uniform_int_distribution<int> pick_actions(2, max_actions);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> sym(-1.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);

  LatentPolicyInstance inst;
  inst.n_states = pick_states(rng);
  inst.n_actions = pick_actions(rng);
  inst.gamma = 0.9;

  auto dirichlet_row = [&](Eigen::Index n) {
    VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = -std::log(std::max(unit(rng), 1e-12));
    return (v / v.sum()).eval();
  };

  inst.T.resize(inst.n_actions);
  for (int a = 0; a < inst.n_actions; ++a) {
    inst.T[a].resize(inst.n_states, inst.n_states);
    for (int s = 0; s < inst.n_states; ++s)
      inst.T[a].row(s) = dirichlet_row(inst.n_states).transpose();
  }
  inst.R.resize(inst.n_states, inst.n_actions);
  for (int s = 0; s < inst.n_states; ++s)
    for (int a = 0; a < inst.n_actions; ++a) inst.R(s, a) = sym(rng);
  inst.d0 = dirichlet_row(inst.n_states);

  // Distinct interior cut bins so each interval holds at least one bin.
  std::vector<int> cuts;
  while (static_cast<int>(cuts.size()) < inst.n_actions - 1) {
    std::uniform_int_distribution<int> pick_bin(1, inst.n_bins - 1);
    const int c = pick_bin(rng);
    if (std::find(cuts.begin(), cuts.end(), c) == cuts.end()) cuts.push_back(c);
  }
  std::sort(cuts.begin(), cuts.end());
  inst.thresholds.clear();
  for (int c : cuts) inst.thresholds.push_back(-1.0 + 2.0 * c / inst.n_bins);
  inst.bin_action.resize(inst.n_bins);
  for (int j = 0; j < inst.n_bins; ++j) {
    int a = 0;
    while (a < inst.n_actions - 1 && j >= cuts[a]) ++a;
    inst.bin_action[j] = a;
  }

  inst.theta.resize(inst.n_states, inst.n_bins);
  for (Eigen::Index i = 0; i < inst.theta.size(); ++i) inst.theta.data()[i] = gauss(rng);
  return inst;
}

void perturb_decoder(LatentPolicyInstance& inst, double leak) {
  inst.stochastic_decoder = true;
  inst.decoder_dist = MatrixXd::Zero(inst.n_bins, inst.n_actions);
  for (int j = 0; j < inst.n_bins; ++j) {
    const int a = inst.bin_action[j];
    const int other = (a + 1) % inst.n_actions;
    inst.decoder_dist(j, a) = 1.0 - leak;
    inst.decoder_dist(j, other) += leak;
  }
}

}  // namespace latmdp::homoverify

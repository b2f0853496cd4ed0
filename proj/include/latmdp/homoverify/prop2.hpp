#pragma once

#include "latmdp/homoverify/tabular.hpp"

#include <cstdint>
#include <random>
#include <vector>

namespace latmdp::homoverify {

/// A small abstract MDP with a 1-D latent action space in [-1,1], a binned
/// stochastic latent policy and an interval decoder. Bin edges align with the
/// decoder thresholds so preimage integrals are exact sums.
struct LatentPolicyInstance {
  int n_states = 2;
  int n_actions = 2;            // K decoder intervals
  std::vector<MatrixXd> T;      // per discrete action: n_states x n_states row-stochastic
  MatrixXd R;                   // n_states x n_actions
  double gamma = 0.9;
  VectorXd d0;                  // initial state distribution

  int n_bins = 64;
  std::vector<double> thresholds;  // K-1 interior cut points in (-1,1), on bin edges
  std::vector<int> bin_action;     // derived: decoded action per bin
  MatrixXd theta;                  // n_states x n_bins policy logits (softmax per state)

  // Optional stochastic decoder D(a|bin); when set, route (ii)'s
  // determinism assumption is violated by construction.
  bool stochastic_decoder = false;
  MatrixXd decoder_dist;  // n_bins x n_actions

  /// Bin membership probability pi_bar(bin j | state s).
  MatrixXd policy_probs() const;
  /// pi_i(a|s) = integral of the latent policy over the decoder preimage.
  MatrixXd intermediate_policy() const;
};

struct Prop2Report {
  MatrixXd grad_intermediate;  // route (i): exact policy gradient of pi_i
  MatrixXd grad_latent;        // route (ii): per-bin Q assignment on the latent MDP
  double max_rel_err = 0;
  double fd_max_rel_err = -1;  // -1 when the finite-difference check was skipped
  double J = 0;
};

/// Computes the performance-measure gradient two ways (and optionally a
/// central finite-difference cross-check of route (i)) and reports the
/// elementwise relative disagreement.
Prop2Report check_proposition2(const LatentPolicyInstance& inst, bool finite_difference_check,
                               double fd_step = 1e-6);

/// Exact discounted performance J(theta) of the instance.
double prop2_performance(const LatentPolicyInstance& inst);

LatentPolicyInstance random_prop2_instance(std::mt19937_64& rng, int max_states = 10,
                                           int max_actions = 4);

/// Replaces the deterministic interval decoder with a smoothed stochastic one
/// (probability `leak` of decoding to the next interval).
void perturb_decoder(LatentPolicyInstance& inst, double leak);

}  // namespace latmdp::homoverify

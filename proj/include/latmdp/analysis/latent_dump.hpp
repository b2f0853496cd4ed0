#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace latmdp::analysis {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// One encoded environment state: the true (not agent-observable) state
/// coordinates, the latent state, the reward at that state, and optionally
/// the latent action and latent transition vectors per discrete action.
struct LatentDumpRow {
  std::vector<double> true_state;  // (row, col) for grids, (x, y, heading) for nav
  VectorXd latent;
  double reward_at_state = 0;
  MatrixXd abar_per_action;   // dim_a x K when present, else 0x0
  MatrixXd delta_per_action;  // dim_s x K when present, else 0x0
};

struct LatentDump {
  int true_dim = 2;
  int dim_s = 0;
  int dim_a = 0;
  int n_actions = 0;
  bool has_actions = false;
  std::vector<LatentDumpRow> rows;

  MatrixXd latent_matrix() const;  // rows x dim_s
};

void save_latent_dump_csv(const std::string& path, const LatentDump& dump);
LatentDump load_latent_dump_csv(const std::string& path);

struct NeighborhoodScore {
  double score = 0;
  bool degenerate = false;  // collapsed dump: score reported as 0 with flag
};

/// Fraction of true-grid-adjacent state pairs (Manhattan distance 1) whose
/// latent distance lies below the median latent distance of non-adjacent
/// pairs. Invariant to rotation/translation/scaling of the latent cloud.
NeighborhoodScore neighborhood_consistency(const LatentDump& dump);

}  // namespace latmdp::analysis

#pragma once

#include "latmdp/envs/env.hpp"
#include "latmdp/rng.hpp"

#include <array>
#include <random>
#include <stdexcept>
#include <utility>
#include <vector>

namespace latmdp::envs {

using Cell = std::pair<int, int>;  // (row, col)

enum class DistanceNorm { Cells, Side };

struct GridWorldConfig {
  int grid_n = 6;
  int n_actions = 4;  // 4: N/S/W/E, 8: + diagonals
  int n_distractors = 0;
  int image_size = 50;
  double r_reached = 1.0;
  double eta = 0.1;
  int max_steps = 50;
  std::uint64_t seed = 0;
  DistanceNorm distance_norm = DistanceNorm::Cells;

  void validate() const {
    if (grid_n < 2) throw std::invalid_argument("GridWorldConfig: grid_n must be >= 2");
    if (n_actions != 4 && n_actions != 8)
      throw std::invalid_argument("GridWorldConfig: n_actions must be 4 or 8");
    if (n_distractors < 0 || n_distractors > 3)
      throw std::invalid_argument("GridWorldConfig: n_distractors must be in [0,3]");
    if (image_size < grid_n)
      throw std::invalid_argument("GridWorldConfig: image_size must be >= grid_n");
  }
};

struct GridWorldState {
  Cell agent_cell;
  Cell goal_cell;
  std::vector<Cell> distractor_cells;
  int steps = 0;
};

/// Open grid navigation with a fixed goal, random agent spawns, a
/// distance-based reward, and an RGB top-down rendering. The goal cell is
/// drawn once from the env seed; episode randomness (spawn, distractor
/// motion) lives on a separate reseedable stream.
class GridWorld final : public Env {
 public:
  explicit GridWorld(const GridWorldConfig& cfg);
  /// Rectangular variant for degenerate instances; goal drawn like above.
  GridWorld(int rows, int cols, const GridWorldConfig& cfg);

  Observation reset() override;
  StepResult step(const DiscreteAction& a) override;
  int n_actions() const override { return cfg_.n_actions; }
  int image_height() const override { return cfg_.image_size; }
  int image_width() const override { return cfg_.image_size; }
  void reseed_episodes(std::uint64_t seed) override { episode_rng_ = make_rng(seed, 0xe915); }
  const char* name() const override { return "grid"; }

  /// Deterministic rasterization of a state: red triangle agent, green
  /// (yellow with distractors) square goal, colored circles distractors.
  Observation render(const GridWorldState& s) const;

  /// BFS shortest-path length from the state's agent cell to the goal under
  /// this env's action set.
  int optimal_steps(const GridWorldState& s) const;
  /// BFS length averaged over the uniform non-goal spawn distribution.
  double optimal_steps_mean() const;

  const GridWorldState& state() const { return state_; }
  const GridWorldConfig& config() const { return cfg_; }
  int rows() const { return rows_; }
  int cols() const { return cols_; }
  bool episode_active() const { return episode_active_; }

  /// Action displacement table for the configured action count.
  static const std::array<Cell, 8>& action_deltas();

 private:
  double distance_penalty(const Cell& c) const;
  void move_distractors();
  Cell random_free_cell(const std::vector<Cell>& occupied);

  GridWorldConfig cfg_;
  int rows_, cols_;
  GridWorldState state_;
  std::mt19937_64 episode_rng_;
  bool episode_active_ = false;
};

}  // namespace latmdp::envs

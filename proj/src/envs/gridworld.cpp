#include "latmdp/envs/gridworld.hpp"

#include "latmdp/envs/render.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <deque>

namespace latmdp::envs {
namespace {

bool contains(const std::vector<Cell>& cells, const Cell& c) {
  return std::find(cells.begin(), cells.end(), c) != cells.end();
}

}  // namespace

const std::array<Cell, 8>& GridWorld::action_deltas() {
  // N, S, W, E, NE, NW, SE, SW
  static const std::array<Cell, 8> deltas{Cell{-1, 0}, Cell{1, 0},  Cell{0, -1}, Cell{0, 1},
                                          Cell{-1, 1}, Cell{-1, -1}, Cell{1, 1},  Cell{1, -1}};
  return deltas;
}

GridWorld::GridWorld(const GridWorldConfig& cfg) : GridWorld(cfg.grid_n, cfg.grid_n, cfg) {
  cfg.validate();
}

GridWorld::GridWorld(int rows, int cols, const GridWorldConfig& cfg)
    : cfg_(cfg), rows_(rows), cols_(cols), episode_rng_(make_rng(cfg.seed, 0xe915)) {
  if (rows_ < 1 || cols_ < 1 || rows_ * cols_ < 2)
    throw std::invalid_argument("GridWorld: need at least two cells");
  auto topo_rng = make_rng(cfg_.seed, 0x60a1);
  std::uniform_int_distribution<int> pr(0, rows_ - 1), pc(0, cols_ - 1);
  state_.goal_cell = {pr(topo_rng), pc(topo_rng)};
  state_.agent_cell = state_.goal_cell;  // placed properly by reset()
}

Cell GridWorld::random_free_cell(const std::vector<Cell>& occupied) {
  std::uniform_int_distribution<int> pr(0, rows_ - 1), pc(0, cols_ - 1);
  while (true) {
    Cell c{pr(episode_rng_), pc(episode_rng_)};
    if (!contains(occupied, c)) return c;
  }
}

Observation GridWorld::reset() {
  state_.agent_cell = random_free_cell({state_.goal_cell});
  state_.distractor_cells.clear();
  for (int i = 0; i < cfg_.n_distractors; ++i) {
    std::vector<Cell> occupied = state_.distractor_cells;
    occupied.push_back(state_.goal_cell);
    occupied.push_back(state_.agent_cell);
    state_.distractor_cells.push_back(random_free_cell(occupied));
  }
  state_.steps = 0;
  episode_active_ = true;
  return render(state_);
}

double GridWorld::distance_penalty(const Cell& c) const {
  const double manhattan = std::abs(c.first - state_.goal_cell.first) +
                           std::abs(c.second - state_.goal_cell.second);
  const double norm = cfg_.distance_norm == DistanceNorm::Cells
                          ? static_cast<double>(rows_) * cols_
                          : static_cast<double>(std::max(rows_, cols_));
  return -cfg_.eta * manhattan / norm;
}

void GridWorld::move_distractors() {
  const auto& deltas = action_deltas();
  for (std::size_t i = 0; i < state_.distractor_cells.size(); ++i) {
    std::vector<Cell> candidates;
    for (int k = 0; k < cfg_.n_actions; ++k) {
      Cell c{state_.distractor_cells[i].first + deltas[k].first,
             state_.distractor_cells[i].second + deltas[k].second};
      if (c.first < 0 || c.first >= rows_ || c.second < 0 || c.second >= cols_) continue;
      if (c == state_.agent_cell || c == state_.goal_cell) continue;
      bool clash = false;
      for (std::size_t j = 0; j < state_.distractor_cells.size(); ++j)
        if (j != i && state_.distractor_cells[j] == c) clash = true;
      if (!clash) candidates.push_back(c);
    }
    if (candidates.empty()) continue;
    std::uniform_int_distribution<std::size_t> pick(0, candidates.size() - 1);
    state_.distractor_cells[i] = candidates[pick(episode_rng_)];
  }
}

StepResult GridWorld::step(const DiscreteAction& a) {
  if (!episode_active_) throw std::logic_error("GridWorld::step: episode already finished");
  if (a.index < 0 || a.index >= cfg_.n_actions)
    throw std::out_of_range("GridWorld::step: action index out of range");

  const Cell before = state_.agent_cell;
  const auto& d = action_deltas()[a.index];
  Cell after{before.first + d.first, before.second + d.second};
  if (after.first < 0 || after.first >= rows_ || after.second < 0 || after.second >= cols_)
    after = before;  // off-grid moves are no-ops
  state_.agent_cell = after;
  move_distractors();
  state_.steps += 1;

  StepResult res;
  if (after == state_.goal_cell) {
    res.reward = cfg_.r_reached;
    res.event = StepEvent::Goal;
  } else {
    res.reward = distance_penalty(before);
    if (state_.steps >= cfg_.max_steps) res.event = StepEvent::Timeout;
  }
  res.done = res.event != StepEvent::None;
  episode_active_ = !res.done;
  res.obs = render(state_);
  return res;
}

Observation GridWorld::render(const GridWorldState& s) const {
  Observation img = make_canvas(cfg_.image_size, cfg_.image_size);
  const int n = std::max(rows_, cols_);
  const int cell = cfg_.image_size / n;
  const int oy = (cfg_.image_size - cell * rows_) / 2;
  const int ox = (cfg_.image_size - cell * cols_) / 2;
  auto cell_origin = [&](const Cell& c) {
    return std::array<int, 2>{oy + c.first * cell, ox + c.second * cell};
  };

  const Rgb goal_color = cfg_.n_distractors > 0 ? kGoalYellow : kGoalGreen;
  auto g = cell_origin(s.goal_cell);
  fill_rect(img, g[0] + 1, g[1] + 1, g[0] + cell - 1, g[1] + cell - 1, goal_color);

  for (std::size_t i = 0; i < s.distractor_cells.size(); ++i) {
    auto o = cell_origin(s.distractor_cells[i]);
    const double r = cell / 2.0 - 1.0;
    fill_circle(img, o[0] + cell / 2.0, o[1] + cell / 2.0, r,
                kDistractorPalette[i % kDistractorPalette.size()]);
  }

  auto a = cell_origin(s.agent_cell);
  const double top = a[0] + 1.0, bottom = a[0] + cell - 1.0;
  const double left = a[1] + 1.0, right = a[1] + cell - 1.0;
  fill_triangle(img, {top, (left + right) / 2.0}, {bottom, left}, {bottom, right}, kAgentRed);
  return img;
}

int GridWorld::optimal_steps(const GridWorldState& s) const {
  if (s.agent_cell == s.goal_cell) return 0;
  std::vector<int> dist(static_cast<std::size_t>(rows_) * cols_, -1);
  auto id = [&](const Cell& c) { return c.first * cols_ + c.second; };
  std::deque<Cell> queue{s.agent_cell};
  dist[id(s.agent_cell)] = 0;
  const auto& deltas = action_deltas();
  while (!queue.empty()) {
    Cell c = queue.front();
    queue.pop_front();
    if (c == s.goal_cell) return dist[id(c)];
    for (int k = 0; k < cfg_.n_actions; ++k) {
      Cell nxt{c.first + deltas[k].first, c.second + deltas[k].second};
      if (nxt.first < 0 || nxt.first >= rows_ || nxt.second < 0 || nxt.second >= cols_) continue;
      if (dist[id(nxt)] >= 0) continue;
      dist[id(nxt)] = dist[id(c)] + 1;
      queue.push_back(nxt);
    }
  }
  throw std::runtime_error("optimal_steps: goal unreachable");
}

double GridWorld::optimal_steps_mean() const {
  GridWorldState probe = state_;
  double total = 0.0;
  int count = 0;
  for (int r = 0; r < rows_; ++r)
    for (int c = 0; c < cols_; ++c) {
      if (Cell{r, c} == state_.goal_cell) continue;
      probe.agent_cell = {r, c};
      total += optimal_steps(probe);
      ++count;
    }
  return total / count;
}

}  // namespace latmdp::envs

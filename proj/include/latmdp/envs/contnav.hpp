#pragma once

#include "latmdp/envs/env.hpp"
#include "latmdp/rng.hpp"

#include <random>
#include <stdexcept>

namespace latmdp::envs {

struct ContinuousNavConfig {
  double arena_size = 1.0;
  int n_actions = 3;  // 3: forward / rotate+- ; 8: compass translations
  double d_min = 0.1;
  double r_reached = 1.0;
  double r_crashed = -1.0;
  double eta = 0.1;
  int image_size = 48;
  int max_steps = 100;
  std::uint64_t seed = 0;
  double step_len = 0.08;      // translation per move, in arena units
  double turn_angle = 0.3926990816987241;  // pi/8 per rotate action

  void validate() const {
    if (arena_size <= 0) throw std::invalid_argument("ContinuousNavConfig: arena_size <= 0");
    if (!(d_min > 0 && d_min < arena_size))
      throw std::invalid_argument("ContinuousNavConfig: need 0 < d_min < arena_size");
    if (n_actions != 3 && n_actions != 8)
      throw std::invalid_argument("ContinuousNavConfig: n_actions must be 3 or 8");
    if (!(r_crashed < 0 && 0 < r_reached))
      throw std::invalid_argument("ContinuousNavConfig: need r_crashed < 0 < r_reached");
  }
};

struct ContinuousNavState {
  double x = 0, y = 0;
  double heading = 0;  // radians
  double goal_x = 0, goal_y = 0;
  int steps = 0;
};

/// Top-down kinematic point-robot navigation in a square arena with a fixed
/// goal disc; leaving the arena is a terminal crash. Continuous underlying
/// state, discrete actions, RGB rendering.
class ContinuousNav final : public Env {
 public:
  explicit ContinuousNav(const ContinuousNavConfig& cfg);

  Observation reset() override;
  StepResult step(const DiscreteAction& a) override;
  int n_actions() const override { return cfg_.n_actions; }
  int image_height() const override { return cfg_.image_size; }
  int image_width() const override { return cfg_.image_size; }
  void reseed_episodes(std::uint64_t seed) override { episode_rng_ = make_rng(seed, 0xc0a7); }
  const char* name() const override { return "nav"; }

  Observation render(const ContinuousNavState& s) const;
  const ContinuousNavState& state() const { return state_; }
  const ContinuousNavConfig& config() const { return cfg_; }
  bool episode_active() const { return episode_active_; }

 private:
  double goal_distance(double x, double y) const;

  ContinuousNavConfig cfg_;
  ContinuousNavState state_;
  std::mt19937_64 episode_rng_;
  bool episode_active_ = false;
};

}  // namespace latmdp::envs

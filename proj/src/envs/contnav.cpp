#include "latmdp/envs/contnav.hpp"

#include "latmdp/envs/render.hpp"

#include <cmath>

namespace latmdp::envs {

ContinuousNav::ContinuousNav(const ContinuousNavConfig& cfg)
    : cfg_(cfg), episode_rng_(make_rng(cfg.seed, 0xc0a7)) {
  cfg_.validate();
  auto topo_rng = make_rng(cfg_.seed, 0x60a2);
  // Keep the goal disc fully visible inside the arena.
  std::uniform_real_distribution<double> pos(0.15 * cfg_.arena_size, 0.85 * cfg_.arena_size);
  state_.goal_x = pos(topo_rng);
  state_.goal_y = pos(topo_rng);
}

double ContinuousNav::goal_distance(double x, double y) const {
  return std::hypot(x - state_.goal_x, y - state_.goal_y);
}

Observation ContinuousNav::reset() {
  std::uniform_real_distribution<double> pos(0.0, cfg_.arena_size);
  std::uniform_real_distribution<double> ang(0.0, 2.0 * M_PI);
  do {
    state_.x = pos(episode_rng_);
    state_.y = pos(episode_rng_);
  } while (goal_distance(state_.x, state_.y) <= cfg_.d_min);
  state_.heading = ang(episode_rng_);
  state_.steps = 0;
  episode_active_ = true;
  return render(state_);
}

StepResult ContinuousNav::step(const DiscreteAction& a) {
  if (!episode_active_) throw std::logic_error("ContinuousNav::step: episode already finished");
  if (a.index < 0 || a.index >= cfg_.n_actions)
    throw std::out_of_range("ContinuousNav::step: action index out of range");

  const double d_before = goal_distance(state_.x, state_.y);
  double nx = state_.x, ny = state_.y, nh = state_.heading;
  if (cfg_.n_actions == 3) {
    if (a.index == 0) {  // forward
      nx += cfg_.step_len * std::cos(state_.heading);
      ny += cfg_.step_len * std::sin(state_.heading);
    } else if (a.index == 1) {
      nh = std::fmod(nh + cfg_.turn_angle, 2.0 * M_PI);
    } else {
      nh = std::fmod(nh - cfg_.turn_angle + 2.0 * M_PI, 2.0 * M_PI);
    }
  } else {
    // 8 compass translations: E, NE, N, NW, W, SW, S, SE
    const double angle = a.index * M_PI / 4.0;
    nx += cfg_.step_len * std::cos(angle);
    ny += cfg_.step_len * std::sin(angle);
  }

  state_.steps += 1;
  StepResult res;
  const bool crashed = nx < 0 || nx > cfg_.arena_size || ny < 0 || ny > cfg_.arena_size;
  if (crashed) {
    res.reward = cfg_.r_crashed;
    res.event = StepEvent::Crash;
    // state keeps the pre-collision pose; the episode is over either way
  } else {
    state_.x = nx;
    state_.y = ny;
    state_.heading = nh;
    if (goal_distance(nx, ny) <= cfg_.d_min) {
      res.reward = cfg_.r_reached;
      res.event = StepEvent::Goal;
    } else {
      res.reward = -cfg_.eta * d_before;
      if (state_.steps >= cfg_.max_steps) res.event = StepEvent::Timeout;
    }
  }
  res.done = res.event != StepEvent::None;
  episode_active_ = !res.done;
  res.obs = render(state_);
  return res;
}

Observation ContinuousNav::render(const ContinuousNavState& s) const {
  Observation img = make_canvas(cfg_.image_size, cfg_.image_size);
  const double scale = cfg_.image_size / cfg_.arena_size;
  auto px = [&](double wx) { return wx * scale; };
  auto py = [&](double wy) { return (cfg_.arena_size - wy) * scale; };  // y up

  fill_circle(img, py(s.goal_y), px(s.goal_x), cfg_.d_min * scale, kGoalPurple);

  // Robot: triangle pointing along the heading.
  const double r = 0.045 * cfg_.arena_size * scale;
  const double cy = py(s.y), cx = px(s.x);
  const double h = s.heading;
  auto vertex = [&](double ang, double rad) {
    return std::array<double, 2>{cy - rad * std::sin(ang), cx + rad * std::cos(ang)};
  };
  fill_triangle(img, vertex(h, 1.6 * r), vertex(h + 2.5, r), vertex(h - 2.5, r), kAgentRed);
  return img;
}

}  // namespace latmdp::envs

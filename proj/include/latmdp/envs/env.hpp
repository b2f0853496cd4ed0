#pragma once

#include "latmdp/types.hpp"

#include <cstdint>

namespace latmdp::envs {

enum class StepEvent { None, Goal, Crash, Timeout };

struct StepResult {
  Observation obs;
  double reward = 0.0;
  bool done = false;
  StepEvent event = StepEvent::None;
};

/// Minimal environment surface used by data collection and policy training.
class Env {
 public:
  virtual ~Env() = default;
  virtual Observation reset() = 0;
  virtual StepResult step(const DiscreteAction& a) = 0;
  virtual int n_actions() const = 0;
  virtual int image_height() const = 0;
  virtual int image_width() const = 0;
  /// Reseeds the episode stream (spawns, distractor motion) without moving
  /// fixed per-experiment topology such as the goal.
  virtual void reseed_episodes(std::uint64_t seed) = 0;
  virtual const char* name() const = 0;
};

}  // namespace latmdp::envs

#pragma once

#include "latmdp/agents/train_policy.hpp"
#include "latmdp/envs/contnav.hpp"
#include "latmdp/envs/gridworld.hpp"
#include "latmdp/repr/trainer.hpp"

#include <json.hpp>

#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace latmdp::cli {

using nlohmann::json;

/// Bad configuration: maps to exit code 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Stage execution failure: maps to exit code 3.
struct StageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct EnvBlock {
  std::string type = "grid";  // "grid" | "nav"
  envs::GridWorldConfig grid;
  envs::ContinuousNavConfig nav;
};

struct CollectBlock {
  long num_transitions = 4096;
  std::uint64_t seed = 0;
};

struct AgentBlock {
  agents::AgentKind algo = agents::AgentKind::TD3;
  agents::TD3Config td3;
  agents::DQNConfig dqn;
  long total_steps = 30000;
  long max_episodes = 0;  // 0: unbounded, step budget rules
  int warmup_steps = 1000;
  std::size_t replay_capacity = 100000;
};

struct AnalysisBlock {
  int components = 2;
  int best_k = 3;
  int final_window = 50;
  int eval_episodes = 50;
  int nav_dump_samples = 2000;
  int smooth_window = 1;
};

struct ExperimentConfig {
  int schema_version = 1;
  std::string name = "experiment";
  std::string output_dir;
  std::vector<std::uint64_t> seeds;
  EnvBlock env;
  CollectBlock collect;
  repr::ReprConfig repr;
  AgentBlock agent;
  AnalysisBlock analysis;
  json raw;  // parsed document; canonical source for fingerprints
};

std::uint64_t fnv1a(const std::string& data);
/// Hex FNV-1a of the canonical (sorted-key) JSON dump plus a salt; key order
/// in the input file does not affect the result.
std::string fingerprint_json(const json& j, const std::string& salt = "");

/// Dotted-path override "a.b.c=value"; value parsed as JSON when possible,
/// kept as string otherwise.
void apply_override(json& j, const std::string& assignment);

ExperimentConfig parse_experiment_config(const json& j);
ExperimentConfig load_experiment_config(const std::string& path,
                                        const std::vector<std::string>& overrides = {});

json env_block_to_json(const EnvBlock& env);
EnvBlock parse_env_block(const json& j);
std::unique_ptr<envs::Env> make_env(const EnvBlock& block);

/// Applies LATMDP_OUTPUT_ROOT to relative output directories.
std::string resolve_output_dir(const std::string& output_dir);

inline constexpr const char* kCodeVersion = "latmdp-0.1.0";

}  // namespace latmdp::cli

#pragma once

#include "latmdp/cli/config.hpp"
#include "latmdp/io/csv.hpp"

#include <string>
#include <vector>

namespace latmdp::cli {

struct StageRecord {
  std::string name;
  std::string fingerprint;
  std::string status;  // "done" | "skipped"
  std::vector<std::string> outputs;
  double wall_seconds = 0;
};

struct RunManifest {
  std::string name;
  std::string config_fingerprint;
  std::string code_version;
  std::vector<StageRecord> stages;

  json to_json() const;
  static RunManifest from_json(const json& j);
};

// Canonical JSON of the parsed blocks; defaults materialize so semantically
// identical configs fingerprint identically regardless of spelling.
json collect_block_to_json(const CollectBlock& c);
json repr_block_to_json(const repr::ReprConfig& r);
json agent_block_to_json(const AgentBlock& a);
json analysis_block_to_json(const AnalysisBlock& a);

/// Uniform-random-policy rollouts until n transitions are collected.
std::vector<Transition> collect_transitions(envs::Env& env, long n, std::uint64_t seed);

void run_collect_stage(const EnvBlock& env, const CollectBlock& collect,
                       const std::string& dataset_dir);

void run_train_repr_stage(const repr::ReprConfig& cfg, const std::string& dataset_dir,
                          const std::string& out_checkpoint, const std::string& losses_csv,
                          const std::string& fingerprint);

struct PolicyStageResult {
  std::vector<io::MetricsRow> rows;
  std::uint64_t best_seed = 0;
};

/// Trains one policy per seed (sequentially; seeds are independent), writes
/// the combined metrics CSV and one policy checkpoint per seed. The best
/// seed is picked by final-window mean (steps for grids, success for nav).
PolicyStageResult run_train_policy_stage(const EnvBlock& env, const AgentBlock& agent,
                                         const std::vector<std::uint64_t>& seeds,
                                         const std::string& repr_checkpoint,
                                         const std::string& metrics_csv,
                                         const std::string& policy_dir, int final_window);

void run_eval_stage(const EnvBlock& env, const AgentBlock& agent, const AnalysisBlock& analysis,
                    const std::string& repr_checkpoint, const std::string& policy_checkpoint,
                    const std::string& eval_csv, const std::string& dump_csv,
                    std::uint64_t seed);

void run_plot_stage(const AnalysisBlock& analysis, const std::string& dump_csv,
                    const std::string& metrics_csv, const std::string& out_dir,
                    const std::string& env_type);

/// Executes collect -> train-repr -> train-policy -> eval -> plot, skipping
/// stages whose outputs already exist with matching fingerprints. The
/// manifest is rewritten after every stage, so failures leave a partial
/// manifest behind.
RunManifest run_pipeline(const ExperimentConfig& cfg, bool force = false);

/// Builds a latent dump by enumerating grid states (or sampling nav poses)
/// through a frozen bundle.
analysis::LatentDump build_latent_dump(const EnvBlock& env, const nets::ModelBundle<Real>& bundle,
                                       int nav_samples, std::uint64_t seed);

}  // namespace latmdp::cli

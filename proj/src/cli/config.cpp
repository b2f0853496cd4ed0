#include "latmdp/cli/config.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace latmdp::cli {
namespace {

template <typename T>
void maybe(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

std::uint64_t fnv1a(const std::string& data) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string fingerprint_json(const json& j, const std::string& salt) {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a(j.dump() + "|" + salt)));
  return buf;
}

void apply_override(json& j, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos)
    throw ConfigError("override must look like key.path=value: " + assignment);
  const std::string path = assignment.substr(0, eq);
  const std::string value = assignment.substr(eq + 1);

  json* node = &j;
  std::stringstream ss(path);
  std::string part;
  std::vector<std::string> parts;
  while (std::getline(ss, part, '.')) parts.push_back(part);
  if (parts.empty()) throw ConfigError("override has empty key: " + assignment);
  for (std::size_t i = 0; i + 1 < parts.size(); ++i) node = &(*node)[parts[i]];
  try {
    (*node)[parts.back()] = json::parse(value);
  } catch (const json::parse_error&) {
    (*node)[parts.back()] = value;  // bare string
  }
}

EnvBlock parse_env_block(const json& j) {
  EnvBlock env;
  maybe(j, "type", env.type);
  if (env.type == "grid") {
    auto& g = env.grid;
    maybe(j, "grid_n", g.grid_n);
    maybe(j, "n_actions", g.n_actions);
    maybe(j, "n_distractors", g.n_distractors);
    maybe(j, "image_size", g.image_size);
    maybe(j, "r_reached", g.r_reached);
    maybe(j, "eta", g.eta);
    maybe(j, "max_steps", g.max_steps);
    maybe(j, "seed", g.seed);
    std::string norm = "cells";
    maybe(j, "distance_norm", norm);
    if (norm == "cells")
      g.distance_norm = envs::DistanceNorm::Cells;
    else if (norm == "side")
      g.distance_norm = envs::DistanceNorm::Side;
    else
      throw ConfigError("env.distance_norm must be 'cells' or 'side'");
    g.validate();
  } else if (env.type == "nav") {
    auto& n = env.nav;
    maybe(j, "arena_size", n.arena_size);
    maybe(j, "n_actions", n.n_actions);
    maybe(j, "d_min", n.d_min);
    maybe(j, "r_reached", n.r_reached);
    maybe(j, "r_crashed", n.r_crashed);
    maybe(j, "eta", n.eta);
    maybe(j, "image_size", n.image_size);
    maybe(j, "max_steps", n.max_steps);
    maybe(j, "seed", n.seed);
    maybe(j, "step_len", n.step_len);
    maybe(j, "turn_angle", n.turn_angle);
    n.validate();
  } else {
    throw ConfigError("env.type must be 'grid' or 'nav', got '" + env.type + "'");
  }
  return env;
}

json env_block_to_json(const EnvBlock& env) {
  json j;
  j["type"] = env.type;
  if (env.type == "grid") {
    const auto& g = env.grid;
    j["grid_n"] = g.grid_n;
    j["n_actions"] = g.n_actions;
    j["n_distractors"] = g.n_distractors;
    j["image_size"] = g.image_size;
    j["r_reached"] = g.r_reached;
    j["eta"] = g.eta;
    j["max_steps"] = g.max_steps;
    j["seed"] = g.seed;
    j["distance_norm"] = g.distance_norm == envs::DistanceNorm::Cells ? "cells" : "side";
  } else {
    const auto& n = env.nav;
    j["arena_size"] = n.arena_size;
    j["n_actions"] = n.n_actions;
    j["d_min"] = n.d_min;
    j["r_reached"] = n.r_reached;
    j["r_crashed"] = n.r_crashed;
    j["eta"] = n.eta;
    j["image_size"] = n.image_size;
    j["max_steps"] = n.max_steps;
    j["seed"] = n.seed;
    j["step_len"] = n.step_len;
    j["turn_angle"] = n.turn_angle;
  }
  return j;
}

std::unique_ptr<envs::Env> make_env(const EnvBlock& block) {
  if (block.type == "grid") return std::make_unique<envs::GridWorld>(block.grid);
  return std::make_unique<envs::ContinuousNav>(block.nav);
}

namespace {

repr::ReprConfig parse_repr_block(const json& j) {
  repr::ReprConfig cfg;
  if (j.contains("baseline")) cfg.baseline = repr::baseline_from_string(j.at("baseline"));
  if (j.contains("weights")) {
    const json& w = j.at("weights");
    maybe(w, "w_T", cfg.weights.w_T);
    maybe(w, "w_R", cfg.weights.w_R);
    maybe(w, "w_c", cfg.weights.w_c);
    maybe(w, "w_delta", cfg.weights.w_delta);
    maybe(w, "hinge_eps", cfg.weights.hinge_eps);
  }
  maybe(j, "learning_rate", cfg.learning_rate);
  maybe(j, "batch_size", cfg.batch_size);
  maybe(j, "epochs", cfg.epochs);
  maybe(j, "dim_s", cfg.dim_s);
  maybe(j, "dim_a", cfg.dim_a);
  maybe(j, "seed", cfg.seed);
  maybe(j, "stop_target_gradient", cfg.stop_target_gradient);
  maybe(j, "psi_state_free", cfg.psi_state_free);
  maybe(j, "dedupe_observations", cfg.dedupe_observations);
  cfg.validate();
  return cfg;
}

AgentBlock parse_agent_block(const json& j) {
  AgentBlock a;
  std::string algo = "td3";
  maybe(j, "algo", algo);
  a.algo = agents::agent_kind_from_string(algo);
  maybe(j, "gamma", a.td3.gamma);
  maybe(j, "tau", a.td3.tau);
  maybe(j, "policy_delay", a.td3.policy_delay);
  maybe(j, "sigma_explore", a.td3.sigma_explore);
  maybe(j, "sigma_target", a.td3.sigma_target);
  maybe(j, "clip_c", a.td3.clip_c);
  maybe(j, "lr_actor", a.td3.lr_actor);
  maybe(j, "lr_critic", a.td3.lr_critic);
  maybe(j, "batch_size", a.td3.batch_size);
  maybe(j, "gamma", a.dqn.gamma);
  maybe(j, "epsilon_greedy", a.dqn.epsilon_greedy);
  maybe(j, "lr", a.dqn.lr);
  maybe(j, "target_update_period", a.dqn.target_update_period);
  maybe(j, "batch_size", a.dqn.batch_size);
  maybe(j, "total_steps", a.total_steps);
  maybe(j, "max_episodes", a.max_episodes);
  maybe(j, "warmup_steps", a.warmup_steps);
  maybe(j, "replay_capacity", a.replay_capacity);
  a.td3.validate();
  a.dqn.validate();
  if (a.total_steps < 1) throw ConfigError("agent.total_steps must be positive");
  return a;
}

AnalysisBlock parse_analysis_block(const json& j) {
  AnalysisBlock a;
  maybe(j, "components", a.components);
  maybe(j, "best_k", a.best_k);
  maybe(j, "final_window", a.final_window);
  maybe(j, "eval_episodes", a.eval_episodes);
  maybe(j, "nav_dump_samples", a.nav_dump_samples);
  maybe(j, "smooth_window", a.smooth_window);
  if (a.components != 2 && a.components != 3)
    throw ConfigError("analysis.components must be 2 or 3");
  if (a.best_k < 1) throw ConfigError("analysis.best_k must be >= 1");
  return a;
}

}  // namespace

ExperimentConfig parse_experiment_config(const json& j) {
  try {
    ExperimentConfig cfg;
    cfg.raw = j;
    maybe(j, "schema_version", cfg.schema_version);
    if (cfg.schema_version != 1)
      throw ConfigError("unsupported schema_version " + std::to_string(cfg.schema_version));
    maybe(j, "name", cfg.name);
    if (!j.contains("output_dir")) throw ConfigError("config requires output_dir");
    cfg.output_dir = j.at("output_dir").get<std::string>();
    if (j.contains("seeds"))
      cfg.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    else
      cfg.seeds = {0};
    if (cfg.seeds.empty()) throw ConfigError("seeds must be non-empty");
    if (!j.contains("env")) throw ConfigError("config requires an env block");
    cfg.env = parse_env_block(j.at("env"));
    if (j.contains("collect")) {
      maybe(j.at("collect"), "num_transitions", cfg.collect.num_transitions);
      maybe(j.at("collect"), "seed", cfg.collect.seed);
    }
    if (cfg.collect.num_transitions <= 0)
      throw ConfigError("collect.num_transitions must be positive (empty dataset rejected)");
    if (j.contains("repr")) cfg.repr = parse_repr_block(j.at("repr"));
    if (j.contains("agent")) cfg.agent = parse_agent_block(j.at("agent"));
    if (j.contains("analysis")) cfg.analysis = parse_analysis_block(j.at("analysis"));
    return cfg;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
}

ExperimentConfig load_experiment_config(const std::string& path,
                                        const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  for (const auto& o : overrides) apply_override(j, o);
  return parse_experiment_config(j);
}

std::string resolve_output_dir(const std::string& output_dir) {
  namespace fs = std::filesystem;
  const char* root = std::getenv("LATMDP_OUTPUT_ROOT");
  if (root != nullptr && *root != '\0' && fs::path(output_dir).is_relative())
    return (fs::path(root) / output_dir).string();
  return output_dir;
}

}  // namespace latmdp::cli

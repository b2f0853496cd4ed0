#include "latmdp/analysis/pca.hpp"
#include "latmdp/analysis/svg.hpp"
#include "latmdp/cli/pipeline.hpp"
#include "latmdp/homoverify/prop2.hpp"
#include "latmdp/homoverify/tabular.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using namespace latmdp;
using nlohmann::json;

namespace {

cli::EnvBlock env_from_args(const std::string& config_path, const std::string& env_path,
                            const std::vector<std::string>& overrides) {
  if (!config_path.empty())
    return cli::load_experiment_config(config_path, overrides).env;
  if (env_path.empty()) throw cli::ConfigError("provide --config or --env");
  std::ifstream in(env_path);
  if (!in) throw cli::ConfigError("cannot open env file " + env_path);
  json j = json::parse(in);
  for (const auto& o : overrides) cli::apply_override(j, o);
  return cli::parse_env_block(j);
}

int cmd_collect(const std::string& config_path, const std::string& env_path,
                const std::vector<std::string>& overrides, long n, std::uint64_t seed,
                const std::string& out) {
  cli::EnvBlock env = env_from_args(config_path, env_path, overrides);
  cli::CollectBlock collect{n, seed};
  if (!config_path.empty()) {
    cli::ExperimentConfig cfg = cli::load_experiment_config(config_path, overrides);
    collect = cfg.collect;
    if (n > 0) collect.num_transitions = n;
  }
  cli::run_collect_stage(env, collect, out);
  std::cout << "collected " << collect.num_transitions << " transitions into " << out << "\n";
  return 0;
}

int cmd_train_repr(const std::string& config_path, const std::vector<std::string>& overrides,
                   const std::string& dataset, const std::string& out_ckpt,
                   const std::string& baseline, long seed, const std::string& losses_csv) {
  repr::ReprConfig cfg;
  if (!config_path.empty()) cfg = cli::load_experiment_config(config_path, overrides).repr;
  if (!baseline.empty()) cfg.baseline = repr::baseline_from_string(baseline);
  if (seed >= 0) cfg.seed = static_cast<std::uint64_t>(seed);
  const std::string csv = losses_csv.empty()
                              ? (fs::path(out_ckpt).parent_path() / "repr_losses.csv").string()
                              : losses_csv;
  const std::string fp =
      cli::fingerprint_json(cli::repr_block_to_json(cfg), "train-repr|" + dataset);
  cli::run_train_repr_stage(cfg, dataset, out_ckpt, csv, fp);
  std::cout << "trained " << repr::to_string(cfg.baseline) << " representation -> " << out_ckpt
            << "\nloss curves -> " << csv << "\n";
  return 0;
}

int cmd_train_policy(const std::string& config_path, const std::string& env_path,
                     const std::vector<std::string>& overrides, const std::string& repr_ckpt,
                     const std::string& agent_name, int n_seeds, long steps, long episodes,
                     const std::string& out_csv) {
  cli::EnvBlock env = env_from_args(config_path, env_path, overrides);
  cli::AgentBlock agent;
  cli::AnalysisBlock analysis;
  std::vector<std::uint64_t> seeds;
  if (!config_path.empty()) {
    cli::ExperimentConfig cfg = cli::load_experiment_config(config_path, overrides);
    agent = cfg.agent;
    analysis = cfg.analysis;
    seeds = cfg.seeds;
  }
  if (!agent_name.empty()) agent.algo = agents::agent_kind_from_string(agent_name);
  if (steps > 0) agent.total_steps = steps;
  if (episodes > 0) agent.max_episodes = episodes;
  if (n_seeds > 0) {
    seeds.clear();
    for (int i = 0; i < n_seeds; ++i) seeds.push_back(i);
  }
  if (seeds.empty()) seeds = {0};

  const std::string policy_dir = (fs::path(out_csv).parent_path() / "policies").string();
  cli::PolicyStageResult res = cli::run_train_policy_stage(
      env, agent, seeds, repr_ckpt, out_csv, policy_dir, analysis.final_window);
  std::cout << "trained " << seeds.size() << " seed(s); metrics -> " << out_csv
            << "\nbest seed: " << res.best_seed << " (checkpoints in " << policy_dir << ")\n";
  return 0;
}

int cmd_eval(const std::string& config_path, const std::string& env_path,
             const std::vector<std::string>& overrides, const std::string& repr_ckpt,
             const std::string& policy_ckpt, const std::string& agent_name, int episodes,
             const std::string& out_dir, std::uint64_t seed) {
  cli::EnvBlock env = env_from_args(config_path, env_path, overrides);
  cli::AgentBlock agent;
  cli::AnalysisBlock analysis;
  if (!config_path.empty()) {
    cli::ExperimentConfig cfg = cli::load_experiment_config(config_path, overrides);
    agent = cfg.agent;
    analysis = cfg.analysis;
  }
  if (!agent_name.empty()) agent.algo = agents::agent_kind_from_string(agent_name);
  if (episodes > 0) analysis.eval_episodes = episodes;
  fs::create_directories(out_dir);
  cli::run_eval_stage(env, agent, analysis, repr_ckpt, policy_ckpt,
                      (fs::path(out_dir) / "eval_metrics.csv").string(),
                      (fs::path(out_dir) / "latent_dump.csv").string(), seed);
  std::cout << "eval metrics and latent dump written to " << out_dir << "\n";
  return 0;
}

int cmd_plot(const std::string& dump_csv, int components, const std::string& color,
             const std::string& out_prefix) {
  if (color != "reward") throw cli::ConfigError("plot: only --color reward is supported");
  analysis::LatentDump dump = analysis::load_latent_dump_csv(dump_csv);
  const std::string csv_path = out_prefix + ".csv";
  const std::string svg_path = out_prefix + ".svg";
  std::vector<std::array<double, 3>> points;
  std::ofstream csv(csv_path);
  if (dump.rows.empty()) {
    std::cerr << "warning: empty dump, writing empty plot\n";
    csv << "pc1,pc2,reward\n";
  } else {
    const int comps = std::min(components, dump.dim_s);
    analysis::PcaResult pca = analysis::pca_project(dump.latent_matrix(), comps);
    csv << "pc1,pc2" << (pca.projected.cols() > 2 ? ",pc3" : "") << ",reward\n";
    for (Eigen::Index i = 0; i < pca.projected.rows(); ++i) {
      for (Eigen::Index k = 0; k < pca.projected.cols(); ++k)
        csv << (k ? "," : "") << io::fmt_double(pca.projected(i, k));
      csv << "," << io::fmt_double(dump.rows[i].reward_at_state) << "\n";
      if (pca.projected.cols() >= 2)
        points.push_back({pca.projected(i, 0), pca.projected(i, 1), dump.rows[i].reward_at_state});
    }
  }
  std::ofstream svg(svg_path);
  svg << analysis::svg_scatter(points, "latent states, principal components");
  std::cout << "wrote " << svg_path << " and " << csv_path << "\n";
  return 0;
}

int cmd_report(const std::vector<std::string>& inputs, int best_k, int window,
               const std::string& metric, const std::string& out_prefix) {
  std::ofstream csv(out_prefix + ".csv");
  std::ofstream md(out_prefix + ".md");
  csv << "label,seeds,best_k,metric,final_mean,final_variance,success_ratio\n";
  md << "| label | seeds | metric | final mean (best-" << best_k << ") | success ratio |\n";
  md << "|---|---|---|---|---|\n";
  for (const auto& spec : inputs) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos) throw cli::ConfigError("report inputs look like label=path");
    const std::string label = spec.substr(0, eq);
    const std::string path = spec.substr(eq + 1);
    auto rows = io::read_metrics_csv(path);
    auto series = io::metrics_to_series(rows, metric);
    const int k = std::min<int>(best_k, static_cast<int>(series.size()));
    analysis::CurveSet set = analysis::aggregate_curves(series, k, window, metric == "steps");
    double final_mean = 0, final_var = 0;
    const std::size_t w = std::min<std::size_t>(window, set.points.size());
    for (std::size_t i = set.points.size() - w; i < set.points.size(); ++i) {
      final_mean += set.points[i].mean;
      final_var += set.points[i].variance;
    }
    final_mean /= w;
    final_var /= w;
    double success = 0;
    auto s_series = io::metrics_to_series(rows, "success");
    for (const auto& s : s_series) success += analysis::final_window_mean(s, window);
    success /= static_cast<double>(s_series.size());
    csv << label << "," << series.size() << "," << k << "," << metric << ","
        << io::fmt_double(final_mean) << "," << io::fmt_double(final_var) << ","
        << io::fmt_double(success) << "\n";
    md << "| " << label << " | " << series.size() << " | " << metric << " | " << final_mean
       << " | " << success << " |\n";
  }
  std::cout << "wrote " << out_prefix << ".csv and " << out_prefix << ".md\n";
  return 0;
}

int cmd_verify(const std::string& mdp_path, const std::string& abstract_path,
               const std::string& map_path, bool prop2, int prop2_instances,
               std::uint64_t prop2_seed, const std::string& out_path) {
  json record;
  bool all_ok = true;

  if (!mdp_path.empty()) {
    homoverify::TabularMDP M = homoverify::load_tabular_mdp(mdp_path);
    homoverify::TabularMDP Mb = homoverify::load_tabular_mdp(abstract_path);
    homoverify::HomomorphismMap h = homoverify::load_homomorphism_map(map_path);
    homoverify::HomomorphismReport rep = homoverify::check_homomorphism(M, Mb, h);
    std::cout << "homomorphism check: transition " << (rep.transition_ok ? "OK" : "VIOLATED")
              << ", reward " << (rep.reward_ok ? "OK" : "VIOLATED") << "\n";
    for (const auto& v : rep.violations)
      std::cout << "  violation (" << v.kind << ") at state " << v.state << " action " << v.action
                << "\n";
    record["transition_ok"] = rep.transition_ok;
    record["reward_ok"] = rep.reward_ok;
    record["violations"] = json::array();
    for (const auto& v : rep.violations)
      record["violations"].push_back({{"state", v.state}, {"action", v.action}, {"kind", v.kind}});
    all_ok = all_ok && rep.ok();

    if (rep.ok()) {
      auto vi_abstract = homoverify::value_iteration(Mb);
      auto lifted = homoverify::lift_policy(M, Mb, h, vi_abstract.policy);
      auto vi_orig = homoverify::value_iteration(M);
      auto v_lifted = homoverify::policy_evaluation(M, lifted);
      const double gap = (v_lifted - vi_orig.V).cwiseAbs().maxCoeff();
      std::cout << "policy lifting: max |V_lifted - V*| = " << gap
                << (gap <= 1e-10 ? " (optimal)" : " (SUBOPTIMAL)") << "\n";
      record["lifting"] = {{"max_value_gap", gap}, {"optimal", gap <= 1e-10}};
      all_ok = all_ok && gap <= 1e-10;
    }
  }

  if (prop2) {
    auto rng = make_rng(prop2_seed, 0x9a07);
    double worst_pair = 0, worst_fd = 0;
    for (int i = 0; i < prop2_instances; ++i) {
      auto inst = homoverify::random_prop2_instance(rng);
      auto rep = homoverify::check_proposition2(inst, true);
      worst_pair = std::max(worst_pair, rep.max_rel_err);
      worst_fd = std::max(worst_fd, rep.fd_max_rel_err);
    }
    const bool ok = worst_pair < 1e-6 && worst_fd < 1e-4;
    std::cout << "proposition 2 (" << prop2_instances
              << " random instances): max pairwise rel err = " << worst_pair
              << ", max finite-difference rel err = " << worst_fd << (ok ? " OK" : " FAILED")
              << "\n";
    record["prop2"] = {{"instances", prop2_instances},
                       {"max_rel_err", worst_pair},
                       {"fd_max_rel_err", worst_fd},
                       {"ok", ok}};
    all_ok = all_ok && ok;
  }

  record["ok"] = all_ok;
  if (!out_path.empty()) {
    std::ofstream out(out_path);
    out << record.dump(2) << "\n";
  }
  return all_ok ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"latent MDP homomorphism framework"};
  app.require_subcommand(1);

  std::string config_path, env_path, dataset, out, repr_ckpt, policy_ckpt, agent_name, baseline;
  std::string dump_csv, color = "reward", metric = "steps", map_path, abstract_path;
  std::vector<std::string> overrides, report_inputs;
  long n = 0, steps = 0, episodes = 0, seed_flag = -1;
  std::uint64_t seed = 0;
  int n_seeds = 0, components = 2, best_k = 3, window = 50, prop2_instances = 20;
  bool force = false, prop2 = false;

  auto add_set = [&](CLI::App* cmd) {
    cmd->add_option("--set", overrides, "config override key.path=value");
  };

  auto* c_collect = app.add_subcommand("collect", "collect a random-interaction dataset");
  c_collect->add_option("--config", config_path);
  c_collect->add_option("--env", env_path, "env block JSON file");
  c_collect->add_option("--n", n, "number of transitions");
  c_collect->add_option("--seed", seed);
  c_collect->add_option("--out", out)->required();
  add_set(c_collect);

  auto* c_repr = app.add_subcommand("train-repr", "train a state/action representation");
  c_repr->add_option("--config", config_path);
  c_repr->add_option("--dataset", dataset)->required();
  c_repr->add_option("--out-checkpoint", out)->required();
  c_repr->add_option("--baseline", baseline, "OURS|MDP_H|D_MDP|JSAE|JSAE_C");
  c_repr->add_option("--seed", seed_flag);
  c_repr->add_option("--losses-csv", dump_csv);
  add_set(c_repr);

  auto* c_policy = app.add_subcommand("train-policy", "train a latent policy");
  c_policy->add_option("--config", config_path);
  c_policy->add_option("--env", env_path);
  c_policy->add_option("--repr-checkpoint", repr_ckpt)->required();
  c_policy->add_option("--agent", agent_name, "td3|dqn");
  c_policy->add_option("--seeds", n_seeds, "run seeds 0..N-1");
  c_policy->add_option("--steps", steps, "environment-step budget per seed");
  c_policy->add_option("--episodes", episodes, "episode budget per seed");
  c_policy->add_option("--out", out)->required();
  add_set(c_policy);

  auto* c_eval = app.add_subcommand("eval", "greedy evaluation + latent dump");
  c_eval->add_option("--config", config_path);
  c_eval->add_option("--env", env_path);
  c_eval->add_option("--repr-checkpoint", repr_ckpt)->required();
  c_eval->add_option("--policy-checkpoint", policy_ckpt)->required();
  c_eval->add_option("--agent", agent_name);
  c_eval->add_option("--episodes", episodes);
  c_eval->add_option("--seed", seed);
  c_eval->add_option("--out", out)->required();
  add_set(c_eval);

  auto* c_plot = app.add_subcommand("plot", "PCA scatter of a latent dump");
  c_plot->add_option("--dump", dump_csv)->required();
  c_plot->add_option("--components", components)->check(CLI::IsMember({2, 3}));
  c_plot->add_option("--color", color);
  c_plot->add_option("--out", out, "output prefix")->required();

  auto* c_report = app.add_subcommand("report", "merge metrics CSVs into a comparison table");
  c_report->add_option("--in", report_inputs, "label=metrics.csv")->required();
  c_report->add_option("--best-k", best_k);
  c_report->add_option("--window", window);
  c_report->add_option("--metric", metric, "steps|return|success");
  c_report->add_option("--out", out, "output prefix")->required();

  auto* c_verify = app.add_subcommand("verify-homomorphism", "exact tabular verification");
  c_verify->add_option("--mdp", config_path, "original MDP file");
  c_verify->add_option("--abstract", abstract_path, "abstract MDP file");
  c_verify->add_option("--map", map_path, "homomorphism map file");
  c_verify->add_flag("--prop2", prop2, "run the Proposition 2 numerical check");
  c_verify->add_option("--instances", prop2_instances);
  c_verify->add_option("--seed", seed);
  c_verify->add_option("--out", out, "machine-readable JSON record");

  auto* c_run = app.add_subcommand("run", "execute the full pipeline from a config");
  c_run->add_option("--config", config_path)->required();
  c_run->add_flag("--force", force, "ignore cached stages");
  add_set(c_run);

  CLI11_PARSE(app, argc, argv);

  try {
    if (c_collect->parsed())
      return cmd_collect(config_path, env_path, overrides, n, seed, out);
    if (c_repr->parsed())
      return cmd_train_repr(config_path, overrides, dataset, out, baseline, seed_flag, dump_csv);
    if (c_policy->parsed())
      return cmd_train_policy(config_path, env_path, overrides, repr_ckpt, agent_name, n_seeds,
                              steps, episodes, out);
    if (c_eval->parsed())
      return cmd_eval(config_path, env_path, overrides, repr_ckpt, policy_ckpt, agent_name,
                      static_cast<int>(episodes), out, seed);
    if (c_plot->parsed()) return cmd_plot(dump_csv, components, color, out);
    if (c_report->parsed()) return cmd_report(report_inputs, best_k, window, metric, out);
    if (c_verify->parsed()) {
      if (config_path.empty() && !prop2)
        throw cli::ConfigError("verify-homomorphism needs --mdp/--abstract/--map or --prop2");
      if (!config_path.empty() && (abstract_path.empty() || map_path.empty()))
        throw cli::ConfigError("verify-homomorphism needs --abstract and --map with --mdp");
      return cmd_verify(config_path, abstract_path, map_path, prop2, prop2_instances, seed, out);
    }
    if (c_run->parsed()) {
      cli::ExperimentConfig cfg = cli::load_experiment_config(config_path, overrides);
      cli::RunManifest manifest = cli::run_pipeline(cfg, force);
      for (const auto& s : manifest.stages)
        std::cout << s.name << ": " << s.status
                  << (s.status == "done" ? " (" + std::to_string(s.wall_seconds) + "s)" : "")
                  << "\n";
      return 0;
    }
  } catch (const cli::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}

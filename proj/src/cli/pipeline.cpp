#include "latmdp/cli/pipeline.hpp"

#include "latmdp/analysis/latent_dump.hpp"
#include "latmdp/analysis/pca.hpp"
#include "latmdp/analysis/svg.hpp"
#include "latmdp/dataset.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>

namespace latmdp::cli {
namespace {

namespace fs = std::filesystem;

double now_seconds() {
  return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

bool outputs_exist(const std::vector<std::string>& outputs) {
  for (const auto& o : outputs)
    if (!fs::exists(o)) return false;
  return true;
}

void write_manifest(const std::string& path, const RunManifest& m) {
  std::ofstream out(path);
  out << m.to_json().dump(2) << "\n";
}

}  // namespace

json RunManifest::to_json() const {
  json j;
  j["name"] = name;
  j["config_fingerprint"] = config_fingerprint;
  j["code_version"] = code_version;
  j["stages"] = json::array();
  for (const auto& s : stages) {
    json js;
    js["name"] = s.name;
    js["fingerprint"] = s.fingerprint;
    js["status"] = s.status;
    js["outputs"] = s.outputs;
    js["wall_seconds"] = s.wall_seconds;
    j["stages"].push_back(js);
  }
  return j;
}

RunManifest RunManifest::from_json(const json& j) {
  RunManifest m;
  m.name = j.value("name", "");
  m.config_fingerprint = j.value("config_fingerprint", "");
  m.code_version = j.value("code_version", "");
  for (const auto& js : j.value("stages", json::array())) {
    StageRecord s;
    s.name = js.at("name");
    s.fingerprint = js.at("fingerprint");
    s.status = js.value("status", "done");
    s.outputs = js.value("outputs", std::vector<std::string>{});
    s.wall_seconds = js.value("wall_seconds", 0.0);
    m.stages.push_back(s);
  }
  return m;
}

json collect_block_to_json(const CollectBlock& c) {
  json j;
  j["num_transitions"] = c.num_transitions;
  j["seed"] = c.seed;
  return j;
}

json repr_block_to_json(const repr::ReprConfig& r) {
  json j;
  j["baseline"] = repr::to_string(r.baseline);
  j["weights"] = {{"w_T", r.weights.w_T},
                  {"w_R", r.weights.w_R},
                  {"w_c", r.weights.w_c},
                  {"w_delta", r.weights.w_delta},
                  {"hinge_eps", r.weights.hinge_eps}};
  j["learning_rate"] = r.learning_rate;
  j["batch_size"] = r.batch_size;
  j["epochs"] = r.epochs;
  j["dim_s"] = r.dim_s;
  j["dim_a"] = r.dim_a;
  j["seed"] = r.seed;
  j["stop_target_gradient"] = r.stop_target_gradient;
  j["psi_state_free"] = r.psi_state_free;
  j["dedupe_observations"] = r.dedupe_observations;
  return j;
}

json agent_block_to_json(const AgentBlock& a) {
  json j;
  j["algo"] = a.algo == agents::AgentKind::TD3 ? "td3" : "dqn";
  j["gamma"] = a.td3.gamma;
  j["tau"] = a.td3.tau;
  j["policy_delay"] = a.td3.policy_delay;
  j["sigma_explore"] = a.td3.sigma_explore;
  j["sigma_target"] = a.td3.sigma_target;
  j["clip_c"] = a.td3.clip_c;
  j["lr_actor"] = a.td3.lr_actor;
  j["lr_critic"] = a.td3.lr_critic;
  j["epsilon_greedy"] = a.dqn.epsilon_greedy;
  j["lr"] = a.dqn.lr;
  j["target_update_period"] = a.dqn.target_update_period;
  j["batch_size"] = a.td3.batch_size;
  j["total_steps"] = a.total_steps;
  j["max_episodes"] = a.max_episodes;
  j["warmup_steps"] = a.warmup_steps;
  j["replay_capacity"] = a.replay_capacity;
  return j;
}

json analysis_block_to_json(const AnalysisBlock& a) {
  json j;
  j["components"] = a.components;
  j["best_k"] = a.best_k;
  j["final_window"] = a.final_window;
  j["eval_episodes"] = a.eval_episodes;
  j["nav_dump_samples"] = a.nav_dump_samples;
  j["smooth_window"] = a.smooth_window;
  return j;
}

std::vector<Transition> collect_transitions(envs::Env& env, long n, std::uint64_t seed) {
  if (n <= 0) throw ConfigError("collect: num_transitions must be positive");
  env.reseed_episodes(substream(seed, 0xc011));
  auto rng = make_rng(seed, 0xc012);
  std::uniform_int_distribution<int> pick(0, env.n_actions() - 1);
  std::vector<Transition> out;
  out.reserve(n);
  Observation obs = env.reset();
  while (static_cast<long>(out.size()) < n) {
    Transition t;
    t.o = obs;
    t.a = {pick(rng), env.n_actions()};
    envs::StepResult res = env.step(t.a);
    t.r = res.reward;
    t.o_next = res.obs;
    t.done = res.done;
    out.push_back(std::move(t));
    obs = res.done ? env.reset() : res.obs;
  }
  return out;
}

void run_collect_stage(const EnvBlock& env_block, const CollectBlock& collect,
                       const std::string& dataset_dir) {
  auto env = make_env(env_block);
  std::vector<Transition> transitions =
      collect_transitions(*env, collect.num_transitions, collect.seed);
  DatasetHeader header;
  header.env_name = env->name();
  header.image_height = env->image_height();
  header.image_width = env->image_width();
  header.n_actions = env->n_actions();
  header.count = transitions.size();
  header.env_config_json = env_block_to_json(env_block).dump();
  save_dataset(dataset_dir, header, transitions);
}

void run_train_repr_stage(const repr::ReprConfig& cfg, const std::string& dataset_dir,
                          const std::string& out_checkpoint, const std::string& losses_csv,
                          const std::string& fingerprint) {
  Dataset data = load_dataset(dataset_dir);
  repr::ReprTrainResult result = repr::train_representation(cfg, data);
  repr::save_bundle(out_checkpoint, result.bundle, fingerprint);
  io::write_loss_curves_csv(losses_csv, result.curve);
}

namespace {

std::string policy_meta_json(const AgentBlock& agent, const nets::BundleDims& dims,
                             std::uint64_t seed) {
  json j;
  j["algo"] = agent.algo == agents::AgentKind::TD3 ? "td3" : "dqn";
  j["dim_s"] = dims.dim_s;
  j["dim_a"] = dims.dim_a;
  j["n_actions"] = dims.n_actions;
  j["seed"] = seed;
  return j.dump();
}

}  // namespace

PolicyStageResult run_train_policy_stage(const EnvBlock& env_block, const AgentBlock& agent,
                                         const std::vector<std::uint64_t>& seeds,
                                         const std::string& repr_checkpoint,
                                         const std::string& metrics_csv,
                                         const std::string& policy_dir, int final_window) {
  nets::ModelBundle<Real> bundle = repr::load_bundle(repr_checkpoint);
  if (agent.algo == agents::AgentKind::TD3 && !bundle.dims.use_psi)
    throw StageError("train-policy: TD3 needs a representation trained with the action encoder");
  fs::create_directories(policy_dir);

  PolicyStageResult result;
  double best_metric = 0;
  bool have_best = false;
  const bool lower_better = env_block.type == "grid";
  for (std::uint64_t seed : seeds) {
    auto env = make_env(env_block);
    if (env->n_actions() != bundle.dims.n_actions ||
        env->image_height() != bundle.dims.image_h || env->image_width() != bundle.dims.image_w)
      throw StageError("train-policy: checkpoint/env dimension mismatch");
    agents::RunBudget budget{agent.total_steps, agent.max_episodes, agent.warmup_steps,
                             agent.replay_capacity, seed, true};
    std::vector<agents::EpisodeRecord> episodes;
    const std::string ckpt = (fs::path(policy_dir) / ("policy_seed" + std::to_string(seed) + ".ckpt")).string();
    if (agent.algo == agents::AgentKind::TD3) {
      auto out = agents::train_policy_td3(*env, bundle, agent.td3, budget);
      episodes = std::move(out.episodes);
      nets::save_checkpoint<Real>(ckpt, out.agent.policy_params(),
                                  {"", policy_meta_json(agent, bundle.dims, seed)});
    } else {
      auto out = agents::train_policy_dqn(*env, bundle, agent.dqn, budget);
      episodes = std::move(out.episodes);
      nets::save_checkpoint<Real>(ckpt, out.agent.policy_params(),
                                  {"", policy_meta_json(agent, bundle.dims, seed)});
    }
    io::append_metrics(result.rows, seed, episodes);

    if (!episodes.empty()) {
      analysis::SeedSeries series;
      series.seed = static_cast<int>(seed);
      for (const auto& e : episodes) {
        series.x.push_back(e.episode);
        series.value.push_back(lower_better ? e.steps : (e.success ? 1.0 : 0.0));
      }
      double metric = analysis::final_window_mean(series, final_window);
      if (!lower_better) metric = -metric;
      if (!have_best || metric < best_metric) {
        best_metric = metric;
        result.best_seed = seed;
        have_best = true;
      }
    }
  }
  io::write_metrics_csv(metrics_csv, result.rows);
  return result;
}

analysis::LatentDump build_latent_dump(const EnvBlock& env_block,
                                       const nets::ModelBundle<Real>& bundle, int nav_samples,
                                       std::uint64_t seed) {
  analysis::LatentDump dump;
  dump.dim_s = bundle.dims.dim_s;
  dump.dim_a = bundle.dims.dim_a;
  dump.n_actions = bundle.dims.n_actions;
  dump.has_actions = bundle.dims.use_psi;

  auto encode_row = [&](const Observation& obs, std::vector<double> true_state, double reward) {
    analysis::LatentDumpRow row;
    row.true_state = std::move(true_state);
    VecX latent = bundle.encode(obs);
    row.latent = latent.cast<double>();
    row.reward_at_state = reward;
    if (dump.has_actions) {
      row.abar_per_action.resize(dump.dim_a, dump.n_actions);
      row.delta_per_action.resize(dump.dim_s, dump.n_actions);
      for (int k = 0; k < dump.n_actions; ++k) {
        VecX onehot = one_hot<Real>({k, dump.n_actions});
        VecX abar = bundle.action_encoder.forward(latent, onehot);
        row.abar_per_action.col(k) = abar.cast<double>();
        row.delta_per_action.col(k) = bundle.transition.forward(latent, abar).cast<double>();
      }
    }
    dump.rows.push_back(std::move(row));
  };

  if (env_block.type == "grid") {
    dump.true_dim = 2;
    envs::GridWorld env(env_block.grid);
    envs::GridWorldState state = env.state();
    state.distractor_cells.clear();
    const double norm = env_block.grid.distance_norm == envs::DistanceNorm::Cells
                            ? static_cast<double>(env.rows()) * env.cols()
                            : static_cast<double>(std::max(env.rows(), env.cols()));
    for (int r = 0; r < env.rows(); ++r)
      for (int c = 0; c < env.cols(); ++c) {
        if (envs::Cell{r, c} == state.goal_cell) continue;
        state.agent_cell = {r, c};
        const double d = std::abs(r - state.goal_cell.first) +
                         std::abs(c - state.goal_cell.second);
        encode_row(env.render(state), {double(r), double(c)}, -env_block.grid.eta * d / norm);
      }
  } else {
    dump.true_dim = 3;
    envs::ContinuousNav env(env_block.nav);
    envs::ContinuousNavState state = env.state();
    auto rng = make_rng(seed, 0xd0a1);
    std::uniform_real_distribution<double> pos(0.0, env_block.nav.arena_size);
    std::uniform_real_distribution<double> ang(0.0, 2.0 * M_PI);
    for (int i = 0; i < nav_samples; ++i) {
      state.x = pos(rng);
      state.y = pos(rng);
      state.heading = ang(rng);
      const double d = std::hypot(state.x - state.goal_x, state.y - state.goal_y);
      const double reward = d <= env_block.nav.d_min ? env_block.nav.r_reached
                                                     : -env_block.nav.eta * d;
      encode_row(env.render(state), {state.x, state.y, state.heading}, reward);
    }
  }
  return dump;
}

void run_eval_stage(const EnvBlock& env_block, const AgentBlock& agent,
                    const AnalysisBlock& analysis_block, const std::string& repr_checkpoint,
                    const std::string& policy_checkpoint, const std::string& eval_csv,
                    const std::string& dump_csv, std::uint64_t seed) {
  nets::ModelBundle<Real> bundle = repr::load_bundle(repr_checkpoint);
  auto env = make_env(env_block);

  std::vector<io::MetricsRow> rows;
  if (agent.algo == agents::AgentKind::TD3) {
    agents::Td3Agent<Real> td3(bundle.dims.dim_s, bundle.dims.dim_a, agent.td3,
                               &bundle.action_decoder);
    nets::load_checkpoint<Real>(policy_checkpoint, td3.policy_params());
    auto episodes =
        agents::evaluate_policy_td3(*env, bundle, td3, analysis_block.eval_episodes, seed);
    io::append_metrics(rows, 0, episodes);
  } else {
    agents::DqnAgent<Real> dqn(bundle.dims.dim_s, env->n_actions(), agent.dqn);
    nets::load_checkpoint<Real>(policy_checkpoint, dqn.policy_params());
    env->reseed_episodes(substream(seed, 0xe7a1));
    agents::EncoderMemo<Real> memo(bundle, true);
    long cum = 0;
    std::vector<agents::EpisodeRecord> episodes;
    for (int e = 0; e < analysis_block.eval_episodes; ++e) {
      Observation obs = env->reset();
      agents::EpisodeRecord ep{e};
      while (true) {
        const int a = dqn.act(memo.encode(obs), false);
        envs::StepResult res = env->step({a, env->n_actions()});
        ep.steps += 1;
        ep.ret += res.reward;
        ++cum;
        obs = res.obs;
        if (res.done) {
          ep.success = res.event == envs::StepEvent::Goal;
          ep.cum_env_steps = cum;
          break;
        }
      }
      episodes.push_back(ep);
    }
    io::append_metrics(rows, 0, episodes);
  }
  io::write_metrics_csv(eval_csv, rows);

  analysis::LatentDump dump =
      build_latent_dump(env_block, bundle, analysis_block.nav_dump_samples, seed);
  analysis::save_latent_dump_csv(dump_csv, dump);
}

void run_plot_stage(const AnalysisBlock& analysis_block, const std::string& dump_csv,
                    const std::string& metrics_csv, const std::string& out_dir,
                    const std::string& env_type) {
  analysis::LatentDump dump = analysis::load_latent_dump_csv(dump_csv);
  const std::string pca_csv = (fs::path(out_dir) / "latent_pca.csv").string();
  const std::string pca_svg = (fs::path(out_dir) / "latent_pca.svg").string();
  std::vector<std::array<double, 3>> points;
  if (dump.rows.empty()) {
    std::cerr << "warning: empty latent dump; emitting empty plot\n";
    std::ofstream csv(pca_csv);
    csv << "pc1,pc2,reward\n";
    std::ofstream svg(pca_svg);
    svg << analysis::svg_scatter(points, "latent states (empty)");
  } else {
    const int comps = std::min<int>(analysis_block.components, dump.dim_s);
    analysis::PcaResult pca = analysis::pca_project(dump.latent_matrix(), comps);
    std::ofstream csv(pca_csv);
    csv << "pc1,pc2" << (pca.projected.cols() > 2 ? ",pc3" : "") << ",reward\n";
    for (Eigen::Index i = 0; i < pca.projected.rows(); ++i) {
      for (Eigen::Index k = 0; k < pca.projected.cols(); ++k)
        csv << (k ? "," : "") << io::fmt_double(pca.projected(i, k));
      csv << "," << io::fmt_double(dump.rows[i].reward_at_state) << "\n";
      if (pca.projected.cols() >= 2)
        points.push_back(
            {pca.projected(i, 0), pca.projected(i, 1), dump.rows[i].reward_at_state});
    }
    std::ofstream svg(pca_svg);
    svg << analysis::svg_scatter(points, "latent states, first two principal components");
  }

  // Aggregated training curve (best-k seeds).
  std::vector<io::MetricsRow> rows = io::read_metrics_csv(metrics_csv);
  const std::string metric = env_type == "grid" ? "steps" : "success";
  auto series = io::metrics_to_series(rows, metric);
  const int k = std::min<int>(analysis_block.best_k, static_cast<int>(series.size()));
  analysis::CurveSet set = analysis::aggregate_curves(series, k, analysis_block.final_window,
                                                      env_type == "grid");
  io::write_curveset_csv((fs::path(out_dir) / "curves.csv").string(), set);
  analysis::SvgSeries svg_series{metric, {}, {}, {}};
  for (const auto& p : set.points) {
    svg_series.x.push_back(p.x);
    svg_series.mean.push_back(p.mean);
    svg_series.variance.push_back(p.variance);
  }
  if (analysis_block.smooth_window > 1) {
    svg_series.mean = analysis::moving_average(svg_series.mean, analysis_block.smooth_window);
    svg_series.variance =
        analysis::moving_average(svg_series.variance, analysis_block.smooth_window);
  }
  std::ofstream svg((fs::path(out_dir) / "curves.svg").string());
  svg << analysis::svg_curves({svg_series}, "training curve (best-" + std::to_string(k) + ")",
                              "episode", metric);
}

RunManifest run_pipeline(const ExperimentConfig& cfg, bool force) {
  const std::string out_dir = resolve_output_dir(cfg.output_dir);
  fs::create_directories(out_dir);
  const std::string manifest_path = (fs::path(out_dir) / "manifest.json").string();

  RunManifest previous;
  if (!force && fs::exists(manifest_path)) {
    std::ifstream in(manifest_path);
    try {
      previous = RunManifest::from_json(json::parse(in));
    } catch (...) {
      previous = {};
    }
  }

  const json env_json = env_block_to_json(cfg.env);
  const json collect_json = collect_block_to_json(cfg.collect);
  const json repr_json = repr_block_to_json(cfg.repr);
  const json agent_json = agent_block_to_json(cfg.agent);
  const json analysis_json = analysis_block_to_json(cfg.analysis);
  const json seeds_json = cfg.seeds;

  RunManifest manifest;
  manifest.name = cfg.name;
  manifest.code_version = kCodeVersion;
  {
    json full;
    full["env"] = env_json;
    full["collect"] = collect_json;
    full["repr"] = repr_json;
    full["agent"] = agent_json;
    full["analysis"] = analysis_json;
    full["seeds"] = seeds_json;
    manifest.config_fingerprint = fingerprint_json(full, kCodeVersion);
  }

  const std::string dataset_dir = (fs::path(out_dir) / "dataset").string();
  const std::string repr_ckpt = (fs::path(out_dir) / "repr.ckpt").string();
  const std::string losses_csv = (fs::path(out_dir) / "repr_losses.csv").string();
  const std::string metrics_csv = (fs::path(out_dir) / "metrics.csv").string();
  const std::string policy_dir = (fs::path(out_dir) / "policies").string();
  const std::string best_policy_link = (fs::path(out_dir) / "best_policy.txt").string();
  const std::string eval_csv = (fs::path(out_dir) / "eval_metrics.csv").string();
  const std::string dump_csv = (fs::path(out_dir) / "latent_dump.csv").string();

  auto stage_cached = [&](const std::string& name, const std::string& fp,
                          const std::vector<std::string>& outputs) {
    if (force) return false;
    for (const auto& s : previous.stages)
      if (s.name == name && s.fingerprint == fp && outputs_exist(outputs)) return true;
    return false;
  };

  auto run_stage = [&](const std::string& name, const std::string& fp,
                       const std::vector<std::string>& outputs, auto&& body) {
    StageRecord rec{name, fp, "done", outputs, 0};
    if (stage_cached(name, fp, outputs)) {
      rec.status = "skipped";
      manifest.stages.push_back(rec);
      write_manifest(manifest_path, manifest);
      return;
    }
    const double t0 = now_seconds();
    try {
      body();
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      write_manifest(manifest_path, manifest);  // partial manifest
      throw StageError("stage '" + name + "' failed: " + e.what());
    }
    rec.wall_seconds = now_seconds() - t0;
    manifest.stages.push_back(rec);
    write_manifest(manifest_path, manifest);
  };

  const std::string fp_collect =
      fingerprint_json({{"env", env_json}, {"collect", collect_json}}, kCodeVersion);
  run_stage("collect", fp_collect, {dataset_dir + "/header.json", dataset_dir + "/transitions.bin"},
            [&] { run_collect_stage(cfg.env, cfg.collect, dataset_dir); });

  const std::string fp_repr = fingerprint_json(repr_json, fp_collect + "|repr");
  run_stage("train-repr", fp_repr, {repr_ckpt, losses_csv},
            [&] { run_train_repr_stage(cfg.repr, dataset_dir, repr_ckpt, losses_csv, fp_repr); });

  const std::string fp_policy =
      fingerprint_json({{"agent", agent_json}, {"seeds", seeds_json}}, fp_repr + "|policy");
  std::vector<std::string> policy_outputs{metrics_csv, best_policy_link};
  for (std::uint64_t s : cfg.seeds)
    policy_outputs.push_back(
        (fs::path(policy_dir) / ("policy_seed" + std::to_string(s) + ".ckpt")).string());
  run_stage("train-policy", fp_policy, policy_outputs, [&] {
    PolicyStageResult res =
        run_train_policy_stage(cfg.env, cfg.agent, cfg.seeds, repr_ckpt, metrics_csv, policy_dir,
                               cfg.analysis.final_window);
    std::ofstream link(best_policy_link);
    link << "policy_seed" << res.best_seed << ".ckpt\n";
  });

  const std::string fp_eval = fingerprint_json(
      {{"eval_episodes", cfg.analysis.eval_episodes},
       {"nav_dump_samples", cfg.analysis.nav_dump_samples}},
      fp_policy + "|eval");
  run_stage("eval", fp_eval, {eval_csv, dump_csv}, [&] {
    std::ifstream link(best_policy_link);
    std::string best;
    link >> best;
    if (best.empty()) throw StageError("eval: missing best policy record");
    run_eval_stage(cfg.env, cfg.agent, cfg.analysis, repr_ckpt,
                   (fs::path(policy_dir) / best).string(), eval_csv, dump_csv,
                   cfg.seeds.front());
  });

  const std::string fp_plot = fingerprint_json(analysis_json, fp_eval + "|plot");
  run_stage("plot", fp_plot,
            {(fs::path(out_dir) / "latent_pca.svg").string(),
             (fs::path(out_dir) / "latent_pca.csv").string(),
             (fs::path(out_dir) / "curves.svg").string(),
             (fs::path(out_dir) / "curves.csv").string()},
            [&] {
              run_plot_stage(cfg.analysis, dump_csv, metrics_csv, out_dir, cfg.env.type);
            });

  return manifest;
}

}  // namespace latmdp::cli

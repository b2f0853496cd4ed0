#pragma once

#include "latmdp/agents/train_policy.hpp"
#include "latmdp/analysis/curves.hpp"
#include "latmdp/repr/trainer.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace latmdp::io {

inline std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

struct MetricsRow {
  std::uint64_t seed = 0;
  int episode = 0;
  int steps = 0;
  double ret = 0;
  int success = 0;
  long cum_env_steps = 0;
};

inline void write_metrics_csv(const std::string& path, const std::vector<MetricsRow>& rows) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_metrics_csv: cannot open " + path);
  out << "seed,episode,steps,return,success,cum_env_steps\n";
  for (const auto& r : rows)
    out << r.seed << "," << r.episode << "," << r.steps << "," << fmt_double(r.ret) << ","
        << r.success << "," << r.cum_env_steps << "\n";
  if (!out) throw std::runtime_error("write_metrics_csv: write failed " + path);
}

inline std::vector<MetricsRow> read_metrics_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_metrics_csv: cannot open " + path);
  std::string line;
  std::getline(in, line);  // header
  std::vector<MetricsRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    MetricsRow r;
    std::getline(ss, cell, ',');
    r.seed = std::stoull(cell);
    std::getline(ss, cell, ',');
    r.episode = std::stoi(cell);
    std::getline(ss, cell, ',');
    r.steps = std::stoi(cell);
    std::getline(ss, cell, ',');
    r.ret = std::stod(cell);
    std::getline(ss, cell, ',');
    r.success = std::stoi(cell);
    if (std::getline(ss, cell, ',')) r.cum_env_steps = std::stol(cell);
    rows.push_back(r);
  }
  return rows;
}

inline void append_metrics(std::vector<MetricsRow>& rows, std::uint64_t seed,
                           const std::vector<agents::EpisodeRecord>& episodes) {
  for (const auto& e : episodes)
    rows.push_back({seed, e.episode, e.steps, e.ret, e.success ? 1 : 0, e.cum_env_steps});
}

/// Per-seed series of a chosen metric, x = episode index or cumulative steps.
inline std::vector<analysis::SeedSeries> metrics_to_series(const std::vector<MetricsRow>& rows,
                                                           const std::string& metric,
                                                           bool x_cum_steps = false) {
  std::map<std::uint64_t, analysis::SeedSeries> by_seed;
  for (const auto& r : rows) {
    auto& s = by_seed[r.seed];
    s.seed = static_cast<int>(r.seed);
    s.x.push_back(x_cum_steps ? static_cast<double>(r.cum_env_steps) : r.episode);
    if (metric == "steps")
      s.value.push_back(r.steps);
    else if (metric == "return")
      s.value.push_back(r.ret);
    else if (metric == "success")
      s.value.push_back(r.success);
    else
      throw std::invalid_argument("metrics_to_series: unknown metric " + metric);
  }
  std::vector<analysis::SeedSeries> out;
  out.reserve(by_seed.size());
  for (auto& [seed, series] : by_seed) out.push_back(std::move(series));
  return out;
}

inline void write_loss_curves_csv(const std::string& path,
                                  const std::vector<repr::EpochLosses>& curve) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_loss_curves_csv: cannot open " + path);
  out << "epoch,L_T,L_R,L_c,L_delta,total\n";
  for (const auto& e : curve)
    out << e.epoch << "," << fmt_double(e.L_T) << "," << fmt_double(e.L_R) << ","
        << fmt_double(e.L_c) << "," << fmt_double(e.L_delta) << "," << fmt_double(e.total)
        << "\n";
  if (!out) throw std::runtime_error("write_loss_curves_csv: write failed " + path);
}

inline void write_curveset_csv(const std::string& path, const analysis::CurveSet& set) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_curveset_csv: cannot open " + path);
  out << "x,mean,variance\n";
  for (const auto& p : set.points)
    out << fmt_double(p.x) << "," << fmt_double(p.mean) << "," << fmt_double(p.variance) << "\n";
}

}  // namespace latmdp::io

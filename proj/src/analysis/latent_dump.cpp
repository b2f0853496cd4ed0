#include "latmdp/analysis/latent_dump.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace latmdp::analysis {
namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

MatrixXd LatentDump::latent_matrix() const {
  MatrixXd m(static_cast<Eigen::Index>(rows.size()), dim_s);
  for (std::size_t i = 0; i < rows.size(); ++i) m.row(i) = rows[i].latent.transpose();
  return m;
}

void save_latent_dump_csv(const std::string& path, const LatentDump& dump) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_latent_dump_csv: cannot open " + path);
  out << "true_dim=" << dump.true_dim << ",dim_s=" << dump.dim_s << ",dim_a=" << dump.dim_a
      << ",n_actions=" << dump.n_actions << ",has_actions=" << (dump.has_actions ? 1 : 0)
      << "\n";
  for (int i = 0; i < dump.true_dim; ++i) out << "t" << i << ",";
  out << "reward";
  for (int i = 0; i < dump.dim_s; ++i) out << ",s" << i;
  if (dump.has_actions) {
    for (int k = 0; k < dump.n_actions; ++k)
      for (int i = 0; i < dump.dim_a; ++i) out << ",a" << k << "_" << i;
    for (int k = 0; k < dump.n_actions; ++k)
      for (int i = 0; i < dump.dim_s; ++i) out << ",dt" << k << "_" << i;
  }
  out << "\n";
  for (const auto& row : dump.rows) {
    for (int i = 0; i < dump.true_dim; ++i) out << fmt(row.true_state[i]) << ",";
    out << fmt(row.reward_at_state);
    for (int i = 0; i < dump.dim_s; ++i) out << "," << fmt(row.latent[i]);
    if (dump.has_actions) {
      for (int k = 0; k < dump.n_actions; ++k)
        for (int i = 0; i < dump.dim_a; ++i) out << "," << fmt(row.abar_per_action(i, k));
      for (int k = 0; k < dump.n_actions; ++k)
        for (int i = 0; i < dump.dim_s; ++i) out << "," << fmt(row.delta_per_action(i, k));
    }
    out << "\n";
  }
  if (!out) throw std::runtime_error("save_latent_dump_csv: write failed for " + path);
}

LatentDump load_latent_dump_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_latent_dump_csv: cannot open " + path);
  LatentDump dump;
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("load_latent_dump_csv: empty file");
  {
    std::stringstream ss(line);
    std::string kv;
    while (std::getline(ss, kv, ',')) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) continue;
      const std::string key = kv.substr(0, eq);
      const int value = std::stoi(kv.substr(eq + 1));
      if (key == "true_dim") dump.true_dim = value;
      else if (key == "dim_s") dump.dim_s = value;
      else if (key == "dim_a") dump.dim_a = value;
      else if (key == "n_actions") dump.n_actions = value;
      else if (key == "has_actions") dump.has_actions = value != 0;
    }
  }
  std::getline(in, line);  // column header
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> cells;
    while (std::getline(ss, cell, ',')) cells.push_back(std::stod(cell));
    LatentDumpRow row;
    std::size_t pos = 0;
    for (int i = 0; i < dump.true_dim; ++i) row.true_state.push_back(cells.at(pos++));
    row.reward_at_state = cells.at(pos++);
    row.latent.resize(dump.dim_s);
    for (int i = 0; i < dump.dim_s; ++i) row.latent[i] = cells.at(pos++);
    if (dump.has_actions) {
      row.abar_per_action.resize(dump.dim_a, dump.n_actions);
      for (int k = 0; k < dump.n_actions; ++k)
        for (int i = 0; i < dump.dim_a; ++i) row.abar_per_action(i, k) = cells.at(pos++);
      row.delta_per_action.resize(dump.dim_s, dump.n_actions);
      for (int k = 0; k < dump.n_actions; ++k)
        for (int i = 0; i < dump.dim_s; ++i) row.delta_per_action(i, k) = cells.at(pos++);
    }
    dump.rows.push_back(std::move(row));
  }
  return dump;
}

NeighborhoodScore neighborhood_consistency(const LatentDump& dump) {
  const std::size_t n = dump.rows.size();
  std::vector<double> adjacent, nonadjacent;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const auto& a = dump.rows[i];
      const auto& b = dump.rows[j];
      const double manhattan = std::abs(a.true_state[0] - b.true_state[0]) +
                               std::abs(a.true_state[1] - b.true_state[1]);
      const double dist = (a.latent - b.latent).norm();
      if (std::abs(manhattan - 1.0) < 1e-9)
        adjacent.push_back(dist);
      else
        nonadjacent.push_back(dist);
    }
  NeighborhoodScore out;
  if (adjacent.empty() || nonadjacent.empty()) {
    out.degenerate = true;
    return out;
  }
  std::sort(nonadjacent.begin(), nonadjacent.end());
  const std::size_t m = nonadjacent.size();
  const double median = m % 2 == 1 ? nonadjacent[m / 2]
                                   : 0.5 * (nonadjacent[m / 2 - 1] + nonadjacent[m / 2]);
  if (median <= 0) {  // collapsed embedding
    out.degenerate = true;
    return out;
  }
  std::size_t below = 0;
  for (double d : adjacent)
    if (d < median) ++below;
  out.score = static_cast<double>(below) / static_cast<double>(adjacent.size());
  return out;
}

}  // namespace latmdp::analysis

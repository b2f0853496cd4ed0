#include "latmdp/analysis/curves.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace latmdp::analysis {

double final_window_mean(const SeedSeries& run, int window) {
  if (run.value.empty()) throw std::invalid_argument("final_window_mean: empty series");
  const std::size_t w = std::min<std::size_t>(window, run.value.size());
  double total = 0;
  for (std::size_t i = run.value.size() - w; i < run.value.size(); ++i) total += run.value[i];
  return total / static_cast<double>(w);
}

CurveSet aggregate_curves(const std::vector<SeedSeries>& runs, int best_k, int final_window,
                          bool lower_is_better) {
  if (best_k < 1 || static_cast<std::size_t>(best_k) > runs.size())
    throw std::invalid_argument("aggregate_curves: need 1 <= best_k <= number of runs");

  std::vector<std::pair<double, std::size_t>> ranking;
  ranking.reserve(runs.size());
  for (std::size_t i = 0; i < runs.size(); ++i) {
    double m = final_window_mean(runs[i], final_window);
    if (!lower_is_better) m = -m;
    ranking.emplace_back(m, i);
  }
  // Tie-break on the seed id so the selection is invariant to run order.
  std::sort(ranking.begin(), ranking.end(), [&](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first < b.first;
    return runs[a.second].seed < runs[b.second].seed;
  });

  CurveSet out;
  std::size_t min_len = std::numeric_limits<std::size_t>::max();
  std::vector<const SeedSeries*> kept;
  for (int i = 0; i < best_k; ++i) {
    const SeedSeries& run = runs[ranking[i].second];
    kept.push_back(&run);
    out.kept_seeds.push_back(run.seed);
    min_len = std::min(min_len, run.value.size());
  }
  std::sort(out.kept_seeds.begin(), out.kept_seeds.end());

  out.points.resize(min_len);
  for (std::size_t t = 0; t < min_len; ++t) {
    double mean = 0;
    for (const SeedSeries* run : kept) mean += run->value[t];
    mean /= best_k;
    double var = 0;
    for (const SeedSeries* run : kept) {
      const double d = run->value[t] - mean;
      var += d * d;
    }
    out.points[t] = {kept.front()->x[t], mean, var / best_k};
  }
  return out;
}

std::vector<double> moving_average(const std::vector<double>& v, int window) {
  if (window <= 1) return v;
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const std::size_t lo = i >= static_cast<std::size_t>(window / 2) ? i - window / 2 : 0;
    const std::size_t hi = std::min(v.size(), i + window / 2 + 1);
    double total = 0;
    for (std::size_t j = lo; j < hi; ++j) total += v[j];
    out[i] = total / static_cast<double>(hi - lo);
  }
  return out;
}

}  // namespace latmdp::analysis

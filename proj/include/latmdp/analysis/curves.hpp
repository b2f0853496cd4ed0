#pragma once

#include <string>
#include <vector>

namespace latmdp::analysis {

/// One seed's training series; x is typically the episode index or the
/// cumulative environment step count.
struct SeedSeries {
  int seed = 0;
  std::vector<double> x;
  std::vector<double> value;
};

struct CurvePoint {
  double x = 0;
  double mean = 0;
  double variance = 0;
};

struct CurveSet {
  std::vector<int> kept_seeds;
  std::vector<CurvePoint> points;
};

/// Ranks seeds by the mean of the last `final_window` values, keeps the best
/// k and emits pointwise mean/variance over the kept seeds (series truncated
/// to the shortest kept length). Order of the input runs does not matter.
CurveSet aggregate_curves(const std::vector<SeedSeries>& runs, int best_k, int final_window,
                          bool lower_is_better);

/// Mean of the trailing `window` values (whole series when shorter).
double final_window_mean(const SeedSeries& run, int window);

/// Centered moving average used for plot smoothing.
std::vector<double> moving_average(const std::vector<double>& v, int window);

}  // namespace latmdp::analysis

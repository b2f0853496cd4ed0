#include "latmdp/analysis/curves.hpp"
#include "latmdp/analysis/latent_dump.hpp"
#include "latmdp/analysis/pca.hpp"
#include "latmdp/analysis/svg.hpp"
#include "latmdp/rng.hpp"

#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <random>

using namespace latmdp;
using namespace latmdp::analysis;

TEST_CASE("pca recovers planted planar structure") {
  auto rng = make_rng(1, 0);
  std::normal_distribution<double> g(0, 1);
  // Points on a random 2-D plane embedded in R^10.
  MatrixXd basis(10, 2);
  for (Eigen::Index i = 0; i < basis.size(); ++i) basis.data()[i] = g(rng);
  MatrixXd coeffs(400, 2);
  for (Eigen::Index i = 0; i < coeffs.size(); ++i) coeffs.data()[i] = g(rng);
  MatrixXd data = coeffs * basis.transpose();
  data.rowwise() += VectorXd::LinSpaced(10, -1, 1).transpose();

  PcaResult pca = pca_project(data, 2);
  REQUIRE(pca.projected.cols() == 2);
  CHECK(pca.explained_variance_ratio.sum() >= 0.999);
}

TEST_CASE("pca on a collapsed dump warns with zero variance") {
  MatrixXd data = MatrixXd::Constant(50, 6, 3.25);
  PcaResult pca = pca_project(data, 2);
  CHECK(pca.zero_variance);
  CHECK(pca.projected.cols() == 0);
}

TEST_CASE("pca reconstruction with all components is exact") {
  auto rng = make_rng(2, 0);
  std::normal_distribution<double> g(0, 1);
  MatrixXd data(60, 5);
  for (Eigen::Index i = 0; i < data.size(); ++i) data.data()[i] = g(rng);
  PcaResult pca = pca_project(data, 5);
  REQUIRE(pca.projected.cols() == 5);
  CHECK((pca_reconstruct(pca) - data).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("pca sign convention pins the largest loading positive") {
  auto rng = make_rng(3, 0);
  std::normal_distribution<double> g(0, 1);
  MatrixXd data(80, 4);
  for (Eigen::Index i = 0; i < data.size(); ++i) data.data()[i] = g(rng);
  PcaResult pca = pca_project(data, 3);
  for (Eigen::Index k = 0; k < pca.components.cols(); ++k) {
    Eigen::Index arg;
    pca.components.col(k).cwiseAbs().maxCoeff(&arg);
    CHECK(pca.components(arg, k) > 0.0);
  }
}

namespace {

SeedSeries series_of(int seed, std::vector<double> values) {
  SeedSeries s;
  s.seed = seed;
  for (std::size_t i = 0; i < values.size(); ++i) s.x.push_back(static_cast<double>(i));
  s.value = std::move(values);
  return s;
}

}  // namespace

TEST_CASE("aggregate_curves: identical runs have zero variance") {
  std::vector<SeedSeries> runs;
  for (int i = 0; i < 10; ++i) runs.push_back(series_of(i, {5, 4, 3, 2, 1}));
  CurveSet set = aggregate_curves(runs, 3, 2, true);
  REQUIRE(set.points.size() == 5);
  for (const auto& p : set.points) CHECK(p.variance == 0.0);
}

TEST_CASE("aggregate_curves selects the best-k by final window") {
  std::vector<SeedSeries> runs;
  runs.push_back(series_of(0, {30, 20, 5}));
  runs.push_back(series_of(1, {30, 20, 6}));
  runs.push_back(series_of(2, {30, 20, 7}));
  runs.push_back(series_of(3, {30, 20, 20}));
  runs.push_back(series_of(4, {30, 20, 35}));
  CurveSet set = aggregate_curves(runs, 3, 1, true);
  CHECK(set.kept_seeds == std::vector<int>{0, 1, 2});
  CHECK(set.points.back().mean == doctest::Approx(6.0));
}

TEST_CASE("aggregate_curves with k = all is the plain mean/variance") {
  std::vector<SeedSeries> runs{series_of(0, {2, 4}), series_of(1, {4, 8})};
  CurveSet set = aggregate_curves(runs, 2, 1, true);
  CHECK(set.points[0].mean == doctest::Approx(3.0));
  CHECK(set.points[1].mean == doctest::Approx(6.0));
  CHECK(set.points[1].variance == doctest::Approx(4.0));  // population variance
}

TEST_CASE("aggregate_curves is invariant to run order") {
  auto rng = make_rng(4, 0);
  std::vector<SeedSeries> runs;
  std::normal_distribution<double> g(10, 2);
  for (int i = 0; i < 8; ++i) {
    std::vector<double> v(20);
    for (auto& x : v) x = g(rng);
    runs.push_back(series_of(i, v));
  }
  CurveSet a = aggregate_curves(runs, 3, 5, true);
  std::reverse(runs.begin(), runs.end());
  CurveSet b = aggregate_curves(runs, 3, 5, true);
  CHECK(a.kept_seeds == b.kept_seeds);
  REQUIRE(a.points.size() == b.points.size());
  for (std::size_t i = 0; i < a.points.size(); ++i) {
    CHECK(a.points[i].mean == b.points[i].mean);
    CHECK(a.points[i].variance == b.points[i].variance);
  }
}

TEST_CASE("aggregate_curves rejects k beyond the number of runs") {
  std::vector<SeedSeries> runs{series_of(0, {1, 2})};
  CHECK_THROWS(aggregate_curves(runs, 3, 1, true));
}

namespace {

LatentDump grid_dump_from_coords(int n, const std::function<VectorXd(int, int)>& embed) {
  LatentDump dump;
  dump.true_dim = 2;
  dump.dim_s = static_cast<int>(embed(0, 0).size());
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) {
      LatentDumpRow row;
      row.true_state = {double(r), double(c)};
      row.latent = embed(r, c);
      row.reward_at_state = -0.1 * (r + c);
      dump.rows.push_back(std::move(row));
    }
  return dump;
}

}  // namespace

TEST_CASE("neighborhood consistency: exact grid coordinates score 1") {
  LatentDump dump = grid_dump_from_coords(6, [](int r, int c) {
    VectorXd v(2);
    v << r, c;
    return v;
  });
  NeighborhoodScore s = neighborhood_consistency(dump);
  CHECK(!s.degenerate);
  CHECK(s.score == doctest::Approx(1.0));
}

TEST_CASE("neighborhood consistency is invariant to similarity transforms") {
  auto rng = make_rng(5, 0);
  std::normal_distribution<double> g(0, 1);
  LatentDump base = grid_dump_from_coords(5, [&](int r, int c) {
    VectorXd v(3);
    v << r + 0.05 * g(rng), c + 0.05 * g(rng), 0.3 * g(rng);
    return v;
  });
  const double s0 = neighborhood_consistency(base).score;

  // Rotate, scale and translate the cloud.
  MatrixXd R(3, 3);
  const double th = 0.7;
  R << std::cos(th), -std::sin(th), 0, std::sin(th), std::cos(th), 0, 0, 0, 1;
  LatentDump moved = base;
  for (auto& row : moved.rows)
    row.latent = 3.7 * (R * row.latent) + VectorXd::Constant(3, 11.0);
  CHECK(neighborhood_consistency(moved).score == doctest::Approx(s0));
}

TEST_CASE("neighborhood consistency: random embeddings sit near one half") {
  auto rng = make_rng(6, 0);
  std::normal_distribution<double> g(0, 1);
  double mean = 0;
  const int reps = 200;
  for (int rep = 0; rep < reps; ++rep) {
    LatentDump dump = grid_dump_from_coords(6, [&](int, int) {
      VectorXd v(10);
      for (int i = 0; i < 10; ++i) v[i] = g(rng);
      return v;
    });
    mean += neighborhood_consistency(dump).score;
  }
  mean /= reps;
  CHECK(mean > 0.45);
  CHECK(mean < 0.55);
}

TEST_CASE("neighborhood consistency flags a collapsed dump") {
  LatentDump dump = grid_dump_from_coords(4, [](int, int) { return VectorXd::Zero(5); });
  NeighborhoodScore s = neighborhood_consistency(dump);
  CHECK(s.degenerate);
  CHECK(s.score == 0.0);
}

TEST_CASE("latent dump CSV round-trips rows and metadata") {
  namespace fs = std::filesystem;
  auto rng = make_rng(7, 0);
  std::normal_distribution<double> g(0, 1);
  LatentDump dump;
  dump.true_dim = 2;
  dump.dim_s = 4;
  dump.dim_a = 2;
  dump.n_actions = 3;
  dump.has_actions = true;
  for (int i = 0; i < 7; ++i) {
    LatentDumpRow row;
    row.true_state = {double(i), double(i % 3)};
    row.latent = VectorXd::NullaryExpr(4, [&](Eigen::Index) { return g(rng); });
    row.reward_at_state = g(rng);
    row.abar_per_action = MatrixXd::NullaryExpr(2, 3, [&](Eigen::Index, Eigen::Index) { return g(rng); });
    row.delta_per_action = MatrixXd::NullaryExpr(4, 3, [&](Eigen::Index, Eigen::Index) { return g(rng); });
    dump.rows.push_back(std::move(row));
  }
  const std::string path = (fs::temp_directory_path() / "latmdp_dump.csv").string();
  save_latent_dump_csv(path, dump);
  LatentDump loaded = load_latent_dump_csv(path);
  REQUIRE(loaded.rows.size() == dump.rows.size());
  CHECK(loaded.dim_s == 4);
  CHECK(loaded.has_actions);
  for (std::size_t i = 0; i < dump.rows.size(); ++i) {
    CHECK(loaded.rows[i].true_state == dump.rows[i].true_state);
    CHECK((loaded.rows[i].latent - dump.rows[i].latent).cwiseAbs().maxCoeff() == 0.0);
    CHECK(loaded.rows[i].reward_at_state == dump.rows[i].reward_at_state);
    CHECK((loaded.rows[i].abar_per_action - dump.rows[i].abar_per_action).cwiseAbs().maxCoeff() ==
          0.0);
  }
  fs::remove(path);
}

TEST_CASE("svg helpers emit valid-looking documents") {
  std::vector<std::array<double, 3>> pts{{0, 0, 0.1}, {1, 1, 0.9}, {0.5, 0.2, 0.5}};
  std::string scatter = svg_scatter(pts, "test");
  CHECK(scatter.find("<svg") != std::string::npos);
  CHECK(scatter.find("circle") != std::string::npos);
  CHECK(scatter.find("</svg>") != std::string::npos);

  std::string empty = svg_scatter({}, "empty");
  CHECK(empty.find("(empty)") != std::string::npos);

  SvgSeries s{"steps", {0, 1, 2}, {5, 4, 3}, {0.5, 0.25, 0.1}};
  std::string curves = svg_curves({s}, "curve", "episode", "steps");
  CHECK(curves.find("polyline") != std::string::npos);
}

TEST_CASE("moving_average keeps endpoints sane") {
  std::vector<double> v{1, 2, 3, 4, 5};
  auto out = moving_average(v, 3);
  CHECK(out.size() == v.size());
  CHECK(out[2] == doctest::Approx(3.0));
  CHECK(moving_average(v, 1) == v);
}

#include "latmdp/repr/losses.hpp"
#include "latmdp/repr/trainer.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>

using namespace latmdp;
using namespace latmdp::repr;

TEST_CASE("transition loss kernel: hand values") {
  Mat<double> target(2, 1), pred(2, 1);
  target << 1, 0;
  pred << 0, 0;
  CHECK(transition_loss_value(target, pred) == doctest::Approx(1.0));  // ||(1,0)||

  pred = target;
  CHECK(transition_loss_value(target, pred) == 0.0);
}

TEST_CASE("reward loss kernel: hand values") {
  Vec<double> r(1);
  r << 1.0;
  Mat<double> r_hat(1, 1);
  r_hat << 0.0;
  CHECK(reward_loss_value(r, r_hat) == doctest::Approx(1.0));
  r_hat << 1.0;
  CHECK(reward_loss_value(r, r_hat) == 0.0);
}

TEST_CASE("contrastive loss kernel: hinge cases") {
  Mat<double> neg(2, 1), pred(2, 1);
  pred << 0, 0;

  neg << 5, 0;  // farther than eps: hinge inactive
  CHECK(contrastive_loss_value(neg, pred, 1.0) == 0.0);

  neg << 0, 0;  // collapsed embedding: hinge fully active
  CHECK(contrastive_loss_value(neg, pred, 1.0) == doctest::Approx(1.0));

  neg << 0.4, 0;  // distance 0.4 with eps 1.0
  CHECK(contrastive_loss_value(neg, pred, 1.0) == doctest::Approx(0.6));
}

TEST_CASE("contrastive loss stays within [0, eps] on random input") {
  auto rng = make_rng(42, 0);
  std::normal_distribution<double> g(0.0, 2.0);
  for (int trial = 0; trial < 200; ++trial) {
    const double eps = 0.5 + (trial % 7) * 0.25;
    Mat<double> neg(3, 8), pred(3, 8);
    for (Eigen::Index i = 0; i < neg.size(); ++i) {
      neg.data()[i] = g(rng);
      pred.data()[i] = g(rng);
    }
    const double l = contrastive_loss_value(neg, pred, eps);
    CHECK(l >= 0.0);
    CHECK(l <= eps);
  }
}

TEST_CASE("decoder cross-entropy: hand values") {
  Mat<double> probs(4, 1);
  probs << 0.7, 0.1, 0.1, 0.1;
  CHECK(decoder_loss_value(probs, {0}) == doctest::Approx(-std::log(0.7)));
  CHECK(decoder_loss_value(probs, {0}) == doctest::Approx(0.35667494393873245));

  Mat<double> onehot = Mat<double>::Zero(4, 1);
  onehot(2, 0) = 1.0;
  CHECK(decoder_loss_value(onehot, {2}) == 0.0);

  Mat<double> uniform = Mat<double>::Constant(4, 1, 0.25);
  CHECK(decoder_loss_value(uniform, {1}) == doctest::Approx(std::log(4.0)));
  CHECK(decoder_loss_value(uniform, {1}) == doctest::Approx(1.3862943611198906));
}

TEST_CASE("decoder cross-entropy clamps the log at the guard") {
  Mat<double> probs = Mat<double>::Zero(3, 1);  // log(0) would be -inf
  probs(1, 0) = 1.0;
  const double l = decoder_loss_value(probs, {0});
  CHECK(std::isfinite(l));
  CHECK(l == doctest::Approx(-std::log(kLogClamp)));
}

namespace {

struct TotalFixture {
  nets::ModelBundle<double> bundle;
  ReprBatch<double> batch;
  std::vector<Transition> storage;
  std::vector<Observation> negs;

  TotalFixture(bool use_psi = true) : bundle([&] {
    nets::BundleDims d;
    d.image_h = d.image_w = 8;
    d.n_actions = 3;
    d.dim_s = 4;
    d.dim_a = 2;
    d.use_psi = use_psi;
    return d;
  }()) {
    bundle.init(99);
    auto rng = make_rng(1, 2);
    storage.resize(5);
    negs.resize(5);
    std::vector<const Transition*> ptrs;
    std::vector<const Observation*> nptrs;
    for (int i = 0; i < 5; ++i) {
      auto fill = [&](Observation& o) {
        o.height = o.width = 8;
        o.pixels.resize(8 * 8 * 3);
        for (auto& p : o.pixels) p = static_cast<std::uint8_t>(rng());
      };
      fill(storage[i].o);
      fill(storage[i].o_next);
      fill(negs[i]);
      storage[i].a = {static_cast<int>(rng() % 3), 3};
      storage[i].r = 0.3 * i - 0.5;
    }
    for (auto& t : storage) ptrs.push_back(&t);
    for (auto& o : negs) nptrs.push_back(&o);
    batch = build_repr_batch<double>(ptrs, nptrs, 3, true);
  }

  LossValues eval(const LossWeights& w) {
    return repr_forward_backward(bundle, batch, w, {}, false);
  }
};

}  // namespace

TEST_CASE("total loss: zero weights give zero; unit weights sum the components") {
  TotalFixture fix;
  LossValues zero = fix.eval({0, 0, 0, 0, 1.0});
  CHECK(zero.total == 0.0);

  LossValues unit = fix.eval({1, 1, 1, 1, 1.0});
  CHECK(unit.total ==
        doctest::Approx(unit.L_T + unit.L_R + unit.L_c + unit.L_delta).epsilon(1e-12));

  LossValues weighted = fix.eval({2, 3, 0.5, 0.25, 1.0});
  CHECK(weighted.total == doctest::Approx(2 * weighted.L_T + 3 * weighted.L_R +
                                          0.5 * weighted.L_c + 0.25 * weighted.L_delta));
}

TEST_CASE("D-MDP wiring equals transition plus reward on one-hot actions") {
  TotalFixture fix(/*use_psi=*/false);
  BaselineWiring w = configure_baseline(Baseline::D_MDP, {1, 1, 1, 1, 1.0});
  CHECK(w.weights.w_c == 0.0);
  CHECK(w.weights.w_delta == 0.0);
  CHECK(!w.use_psi);
  LossValues v = fix.eval(w.weights);
  CHECK(v.total == doctest::Approx(v.L_T + v.L_R).epsilon(1e-12));
  CHECK(v.L_c == 0.0);
  CHECK(v.L_delta == 0.0);
}

TEST_CASE("configure_baseline wires the five methods") {
  const LossWeights base{1, 1, 1, 1, 1.0};

  auto ours = configure_baseline(Baseline::OURS, base);
  CHECK(ours.use_psi);
  CHECK(ours.weights.w_T > 0);
  CHECK(ours.weights.w_R > 0);
  CHECK(ours.weights.w_c > 0);
  CHECK(ours.weights.w_delta > 0);

  auto mdph = configure_baseline(Baseline::MDP_H, base);
  CHECK(!mdph.use_psi);
  CHECK(mdph.weights.w_delta == 0.0);
  CHECK(mdph.weights.w_c > 0);

  auto dmdp = configure_baseline(Baseline::D_MDP, base);
  CHECK(!dmdp.use_psi);
  CHECK(dmdp.weights.w_c == 0.0);
  CHECK(dmdp.weights.w_delta == 0.0);

  auto jsae = configure_baseline(Baseline::JSAE, base);
  CHECK(jsae.use_psi);
  CHECK(jsae.weights.w_c == 0.0);
  CHECK(jsae.weights.w_delta > 0);

  // JSAE-C is JSAE plus the contrastive hinge.
  auto jsaec = configure_baseline(Baseline::JSAE_C, base);
  CHECK(jsaec.use_psi);
  CHECK(jsaec.weights.w_c == base.w_c);
  CHECK(jsaec.weights.w_delta == jsae.weights.w_delta);

  CHECK_THROWS(baseline_from_string("bogus"));
}

namespace {

Dataset tiny_grid_dataset(int n, std::uint64_t seed) {
  // 4x4 "grid-like" synthetic dataset on 8x8 images with K=3 actions: the
  // observation encodes a cell with a block of bright pixels.
  Dataset d;
  d.header.env_name = "synthetic";
  d.header.image_height = 8;
  d.header.image_width = 8;
  d.header.n_actions = 3;
  auto rng = make_rng(seed, 0);
  auto render_cell = [&](int cell) {
    Observation o;
    o.height = o.width = 8;
    o.pixels.assign(8 * 8 * 3, 30);
    const int r = cell / 4, c = cell % 4;
    for (int y = r * 2; y < r * 2 + 2; ++y)
      for (int x = c * 2; x < c * 2 + 2; ++x) {
        o.at(y, x, 0) = 255;
        o.at(y, x, 1) = static_cast<std::uint8_t>(50 + 10 * cell);
      }
    return o;
  };
  int cell = 0;
  for (int i = 0; i < n; ++i) {
    Transition t;
    const int a = static_cast<int>(rng() % 3);
    int next = cell + (a == 0 ? 1 : a == 1 ? -1 : 4);
    next = ((next % 16) + 16) % 16;
    t.o = render_cell(cell);
    t.a = {a, 3};
    t.r = cell == 7 ? 1.0 : -0.05;
    t.o_next = render_cell(next);
    t.done = false;
    d.transitions.push_back(std::move(t));
    cell = next;
  }
  d.header.count = d.transitions.size();
  return d;
}

}  // namespace

TEST_CASE("training reduces the transition loss and is bit-deterministic") {
  ReprConfig cfg;
  cfg.baseline = Baseline::OURS;
  cfg.batch_size = 32;
  cfg.epochs = 8;
  cfg.dim_s = 4;
  cfg.dim_a = 2;
  cfg.seed = 5;
  Dataset data = tiny_grid_dataset(128, 3);

  ReprTrainResult a = train_representation(cfg, data);
  REQUIRE(a.curve.size() == 8);
  CHECK(a.curve.back().L_T < a.curve.front().L_T);

  ReprTrainResult b = train_representation(cfg, data);
  for (std::size_t i = 0; i < a.curve.size(); ++i) {
    CHECK(a.curve[i].total == b.curve[i].total);  // bit-identical
    CHECK(a.curve[i].L_T == b.curve[i].L_T);
  }
}

TEST_CASE("training rejects a dataset smaller than the batch") {
  ReprConfig cfg;
  cfg.batch_size = 64;
  Dataset data = tiny_grid_dataset(32, 1);
  CHECK_THROWS(train_representation(cfg, data));
}

TEST_CASE("bundle save/load round-trips through the checkpoint container") {
  namespace fs = std::filesystem;
  ReprConfig cfg;
  cfg.batch_size = 16;
  cfg.epochs = 2;
  cfg.dim_s = 4;
  cfg.dim_a = 2;
  Dataset data = tiny_grid_dataset(64, 9);
  ReprTrainResult res = train_representation(cfg, data);

  const std::string path = (fs::temp_directory_path() / "latmdp_bundle.ckpt").string();
  save_bundle(path, res.bundle, "fp");
  nets::ModelBundle<Real> loaded = load_bundle(path);
  CHECK(loaded.dims.use_psi == res.bundle.dims.use_psi);
  CHECK(loaded.dims.dim_s == 4);
  auto pa = res.bundle.params(), pb = loaded.params();
  for (std::size_t i = 0; i < pa.size(); ++i) CHECK(*pa[i].value == *pb[i].value);
  fs::remove(path);
}

#include "latmdp/dataset.hpp"
#include "latmdp/replay.hpp"
#include "latmdp/types.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>

using namespace latmdp;

namespace {

Observation tiny_obs(std::uint8_t fill, int hw = 4) {
  Observation o;
  o.height = hw;
  o.width = hw;
  o.pixels.assign(static_cast<std::size_t>(hw) * hw * 3, fill);
  return o;
}

Transition make_transition(std::uint8_t tag, int action = 0, int K = 4) {
  Transition t;
  t.o = tiny_obs(tag);
  t.a = {action, K};
  t.r = 0.1 * tag;
  t.o_next = tiny_obs(static_cast<std::uint8_t>(tag + 100));
  t.done = false;
  return t;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("one_hot basics") {
  auto v0 = one_hot<double>({0, 4});
  CHECK(v0.size() == 4);
  CHECK(v0[0] == 1.0);
  CHECK(v0.sum() == 1.0);

  auto v3 = one_hot<double>({3, 4});
  CHECK(v3[3] == 1.0);
  CHECK(v3.head(3).cwiseAbs().sum() == 0.0);

  auto v7 = one_hot<double>({7, 8});
  CHECK(v7.size() == 8);
  CHECK(v7[7] == 1.0);
  CHECK(v7.sum() == 1.0);

  CHECK_THROWS_AS(one_hot<double>({4, 4}), std::out_of_range);
  CHECK_THROWS_AS(one_hot<double>({-1, 4}), std::out_of_range);
}

TEST_CASE("one_hot always sums to one with a single nonzero") {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 200; ++i) {
    const int K = 1 + static_cast<int>(rng() % 12);
    const int a = static_cast<int>(rng() % K);
    auto v = one_hot<float>({a, K});
    CHECK(v.sum() == 1.0f);
    int nonzero = 0;
    for (Eigen::Index j = 0; j < v.size(); ++j) nonzero += v[j] != 0.0f;
    CHECK(nonzero == 1);
  }
}

TEST_CASE("observation normalization stays in [0,1]") {
  Observation o = tiny_obs(255);
  o.pixels[0] = 0;
  auto col = observation_to_column<double>(o);
  CHECK(col.minCoeff() >= 0.0);
  CHECK(col.maxCoeff() <= 1.0);
  CHECK(col[0] == 0.0);
}

TEST_CASE("sample_batch returns all entries when n equals size") {
  ReplayBuffer<Transition> buf(8, 1);
  for (int i = 0; i < 3; ++i) buf.push(make_transition(static_cast<std::uint8_t>(i)));
  auto batch = buf.sample_batch(3);
  std::set<const Transition*> seen(batch.begin(), batch.end());
  CHECK(seen.size() == 3);
}

TEST_CASE("sample_batch without replacement returns distinct entries") {
  ReplayBuffer<Transition> buf(1000, 2);
  for (int i = 0; i < 1000; ++i)
    buf.push(make_transition(static_cast<std::uint8_t>(i % 251)));
  auto batch = buf.sample_batch(256);
  std::set<const Transition*> seen(batch.begin(), batch.end());
  CHECK(batch.size() == 256);
  CHECK(seen.size() == 256);  // distinct buffer slots
}

TEST_CASE("sample_batch is reproducible after reseed") {
  ReplayBuffer<Transition> buf(64, 99);
  for (int i = 0; i < 64; ++i) buf.push(make_transition(static_cast<std::uint8_t>(i)));
  auto first = buf.sample_batch(16);
  auto second = buf.sample_batch(16);
  buf.reseed();
  auto first_again = buf.sample_batch(16);
  auto second_again = buf.sample_batch(16);
  CHECK(first == first_again);
  CHECK(second == second_again);
  CHECK(first != second);  // the stream advances between draws
}

TEST_CASE("sample_batch underfilled buffer errors") {
  ReplayBuffer<Transition> buf(8, 1);
  buf.push(make_transition(1));
  CHECK_THROWS(buf.sample_batch(2));
}

TEST_CASE("FIFO eviction keeps the newest entries") {
  ReplayBuffer<int> buf(3, 5);
  for (int i = 0; i < 5; ++i) buf.push(i);
  std::set<int> kept;
  for (std::size_t i = 0; i < buf.size(); ++i) kept.insert(buf[i]);
  CHECK(kept == std::set<int>{2, 3, 4});
}

TEST_CASE("sample_negatives forced choice with two distinct transitions") {
  ReplayBuffer<Transition> buf(8, 3);
  buf.push(make_transition(1));
  buf.push(make_transition(2));
  auto batch = buf.sample_batch(1);
  auto negs = sample_negatives(buf, batch);
  REQUIRE(negs.size() == 1);
  CHECK(*negs[0] != batch[0]->o_next);
}

TEST_CASE("sample_negatives never pairs an observation with its own successor") {
  ReplayBuffer<Transition> buf(512, 4);
  for (int i = 0; i < 400; ++i) buf.push(make_transition(static_cast<std::uint8_t>(i % 97)));
  auto batch = buf.sample_batch(256);
  auto negs = sample_negatives(buf, batch);
  REQUIRE(negs.size() == 256);
  for (std::size_t i = 0; i < 256; ++i) CHECK(*negs[i] != batch[i]->o_next);
}

TEST_CASE("sample_negatives degenerate buffer warns and returns") {
  ReplayBuffer<Transition> buf(8, 5);
  for (int i = 0; i < 4; ++i) buf.push(make_transition(7));  // all identical
  auto batch = buf.sample_batch(2);
  auto negs = sample_negatives(buf, batch);  // warn-and-return, no throw
  CHECK(negs.size() == 2);
}

TEST_CASE("sample_negatives requires more entries than the batch") {
  ReplayBuffer<Transition> buf(8, 6);
  buf.push(make_transition(1));
  buf.push(make_transition(2));
  auto batch = buf.sample_batch(2);
  CHECK_THROWS(sample_negatives(buf, batch));
}

TEST_CASE("dataset round-trips bit-exactly") {
  namespace fs = std::filesystem;
  const std::string dir = (fs::temp_directory_path() / "latmdp_dataset_test").string();
  fs::remove_all(dir);

  std::vector<Transition> transitions;
  std::mt19937_64 rng(11);
  for (int i = 0; i < 20; ++i) {
    Transition t;
    t.o = tiny_obs(0);
    t.o_next = tiny_obs(0);
    for (auto& p : t.o.pixels) p = static_cast<std::uint8_t>(rng());
    for (auto& p : t.o_next.pixels) p = static_cast<std::uint8_t>(rng());
    t.a = {static_cast<int>(rng() % 4), 4};
    t.r = std::uniform_real_distribution<double>(-1, 1)(rng);
    t.done = rng() % 2;
    transitions.push_back(std::move(t));
  }
  DatasetHeader header;
  header.env_name = "grid";
  header.image_height = 4;
  header.image_width = 4;
  header.n_actions = 4;
  header.count = transitions.size();
  save_dataset(dir, header, transitions);

  Dataset loaded = load_dataset(dir);
  REQUIRE(loaded.transitions.size() == transitions.size());
  for (std::size_t i = 0; i < transitions.size(); ++i) {
    CHECK(loaded.transitions[i].o == transitions[i].o);
    CHECK(loaded.transitions[i].o_next == transitions[i].o_next);
    CHECK(loaded.transitions[i].a.index == transitions[i].a.index);
    CHECK(loaded.transitions[i].r == transitions[i].r);  // bit-exact f64
    CHECK(loaded.transitions[i].done == transitions[i].done);
  }

  // Re-saving the loaded dataset reproduces the binary byte for byte.
  const std::string dir2 = dir + "_resave";
  fs::remove_all(dir2);
  save_dataset(dir2, loaded.header, loaded.transitions);
  CHECK(read_file(dir + "/transitions.bin") == read_file(dir2 + "/transitions.bin"));
  fs::remove_all(dir);
  fs::remove_all(dir2);
}

TEST_CASE("empty dataset rejected") {
  DatasetHeader header;
  header.image_height = 4;
  header.image_width = 4;
  CHECK_THROWS(save_dataset("/tmp/latmdp_empty_ds", header, {}));
}

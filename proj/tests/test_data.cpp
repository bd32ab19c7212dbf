#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <set>

#include "fedsim/data.hpp"
#include "fedsim/errors.hpp"
#include "fedsim/metrics.hpp"
#include "fedsim/rng.hpp"
#include "test_support.hpp"

using namespace fedsim;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir() {
  fs::path dir = fs::temp_directory_path() / "fedsim_test_data";
  fs::create_directories(dir);
  return dir;
}

void write_bytes(const fs::path& path, const std::vector<unsigned char>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

// 2 images of 2x3 pixels, labels 3 and 1.
// images: 00 00 08 03 | 00 00 00 02 | 00 00 00 02 | 00 00 00 03 | 6 + 6 pixel bytes
// labels: 00 00 08 01 | 00 00 00 02 | 03 01
const std::vector<unsigned char> kImages = {0x00, 0x00, 0x08, 0x03, 0x00, 0x00, 0x00, 0x02, 0x00, 0x00,
                                            0x00, 0x02, 0x00, 0x00, 0x00, 0x03, 0x00, 0xff, 0x33, 0x66,
                                            0x99, 0xcc, 0x01, 0x02, 0x03, 0x04, 0x05, 0x06};
const std::vector<unsigned char> kLabels = {0x00, 0x00, 0x08, 0x01, 0x00, 0x00, 0x00, 0x02, 0x03, 0x01};

Dataset labels_only(std::size_t classes, std::size_t per_class) {
  Dataset d;
  d.sample_shape = {1};
  d.num_classes = classes;
  for (std::size_t c = 0; c < classes; ++c)
    for (std::size_t i = 0; i < per_class; ++i) d.labels.push_back(static_cast<int>(c));
  d.inputs.assign(d.labels.size(), 0.0);
  return d;
}

// Full-batch gradient descent on a linear model; returns the trained model.
ModelParams train_linear(const Dataset& d, int steps) {
  ArchDescriptor arch(d.sample_shape, {DenseLayer{d.sample_size(), d.num_classes}}, d.num_classes);
  ModelParams p = init_model(arch, 0);
  OptState opt = make_opt_state(p, {0.1, 0.9, 0.0});
  Tensor x = as_tensor(d);
  for (int s = 0; s < steps; ++s) {
    auto fwd = forward(p, x);
    auto ce = softmax_cross_entropy(fwd.logits, d.labels);
    sgd_step(p, backward(p, fwd.activations, ce.dlogits), opt);
  }
  return p;
}

void check_exact_partition(const Dataset& d, const std::vector<Shard>& shards, std::size_t m) {
  REQUIRE(shards.size() == m);
  std::vector<int> seen(d.size(), 0);
  for (std::size_t j = 0; j < shards.size(); ++j) {
    CHECK(shards[j].owner == static_cast<int>(j));
    CHECK(!shards[j].indices.empty());
    CHECK(std::is_sorted(shards[j].indices.begin(), shards[j].indices.end()));
    for (std::size_t i : shards[j].indices) ++seen[i];
  }
  CHECK(std::all_of(seen.begin(), seen.end(), [](int s) { return s == 1; }));
}

// Mean pairwise total-variation distance between client label distributions.
double mean_pairwise_tv(const Dataset& d, const std::vector<Shard>& shards) {
  std::vector<std::vector<double>> dist;
  for (const auto& s : shards) dist.push_back(alpha_weights(class_counts(s, d)).alpha);
  double sum = 0.0;
  int pairs = 0;
  for (std::size_t a = 0; a < dist.size(); ++a)
    for (std::size_t b = a + 1; b < dist.size(); ++b) {
      double tv = 0.0;
      for (std::size_t c = 0; c < d.num_classes; ++c) tv += std::abs(dist[a][c] - dist[b][c]);
      sum += tv / 2.0;
      ++pairs;
    }
  return sum / pairs;
}

}  // namespace

TEST_CASE("load_idx") {
  const fs::path dir = scratch_dir();
  write_bytes(dir / "img", kImages);
  write_bytes(dir / "lbl", kLabels);

  SUBCASE("hand-built fixture") {
    Dataset d = load_idx(dir / "img", dir / "lbl");
    CHECK(d.size() == 2);
    CHECK(d.sample_shape == Shape{1, 2, 3});
    CHECK(d.num_classes == 4);
    CHECK(d.labels == std::vector<int>{3, 1});
    const unsigned char px[] = {0x00, 0xff, 0x33, 0x66, 0x99, 0xcc, 1, 2, 3, 4, 5, 6};
    for (std::size_t i = 0; i < 12; ++i) CHECK(d.inputs[i] == px[i] / 255.0);
    CHECK(load_idx(dir / "img", dir / "lbl", 10).num_classes == 10);
  }
  SUBCASE("truncated image file") {
    auto cut = kImages;
    cut.pop_back();
    write_bytes(dir / "img_cut", cut);
    try {
      load_idx(dir / "img_cut", dir / "lbl");
      FAIL("expected DataError");
    } catch (const DataError& e) {
      const std::string msg = e.what();
      CHECK(msg.find("28") != std::string::npos);
      CHECK(msg.find("27") != std::string::npos);
    }
  }
  SUBCASE("bad magic") {
    auto bad = kImages;
    bad[3] = 0x01;
    write_bytes(dir / "img_bad", bad);
    try {
      load_idx(dir / "img_bad", dir / "lbl");
      FAIL("expected DataError");
    } catch (const DataError& e) {
      CHECK(std::string(e.what()).find("magic") != std::string::npos);
    }
  }
  SUBCASE("count mismatch") {
    auto one = std::vector<unsigned char>{0x00, 0x00, 0x08, 0x01, 0x00, 0x00, 0x00, 0x01, 0x03};
    write_bytes(dir / "lbl_one", one);
    CHECK_THROWS_AS(load_idx(dir / "img", dir / "lbl_one"), DataError);
  }
  SUBCASE("missing file") {
    CHECK_THROWS_AS(load_idx(dir / "does_not_exist", dir / "lbl"), DataError);
  }
}

TEST_CASE("bundled digits") {
  const fs::path dir = fs::path(FEDSIM_DATA_DIR) / "digits";
  Dataset train = load_idx(dir / "train-images-idx3-ubyte", dir / "train-labels-idx1-ubyte");
  Dataset test = load_idx(dir / "test-images-idx3-ubyte", dir / "test-labels-idx1-ubyte");
  CHECK(train.size() == 1498);
  CHECK(test.size() == 299);
  CHECK(train.num_classes == 10);
  CHECK(train.sample_shape == Shape{1, 8, 8});
  CHECK_NOTHROW(validate_dataset(train));
  for (double v : train.inputs) {
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }
}

TEST_CASE("generate_synthetic") {
  SUBCASE("deterministic") {
    auto a = generate_synthetic(3, 10, 4, 2.0, 5);
    auto b = generate_synthetic(3, 10, 4, 2.0, 5);
    CHECK(a.inputs == b.inputs);
    CHECK(a.labels == b.labels);
    CHECK(generate_synthetic(3, 10, 4, 2.0, 6).inputs != a.inputs);
  }
  SUBCASE("well separated classes are linearly separable") {
    auto d = generate_synthetic(2, 50, 2, 10.0, 1);
    CHECK(accuracy(train_linear(d, 200), d) >= 0.99);
  }
  SUBCASE("zero separation is at chance") {
    auto train = generate_synthetic(4, 250, 2, 0.0, 2);
    auto test = generate_synthetic(4, 250, 2, 0.0, 3);
    const double acc = accuracy(train_linear(train, 200), test);
    CHECK(acc >= 0.15);
    CHECK(acc <= 0.35);
  }
  SUBCASE("fewer dimensions than classes") {
    auto d = generate_synthetic(6, 40, 2, 8.0, 4);
    CHECK(accuracy(train_linear(d, 300), d) >= 0.9);
  }
  SUBCASE("bad arguments") {
    CHECK_THROWS_AS(generate_synthetic(1, 10, 2, 1.0, 0), DataError);
    CHECK_THROWS_AS(generate_synthetic(2, 0, 2, 1.0, 0), DataError);
  }
}

TEST_CASE("dirichlet_partition exactness") {
  Rng rng(2024);
  const double betas[] = {0.05, 0.1, 0.5, 1.0, 5.0, 100.0};
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t classes = 2 + uniform_index(rng, 9);
    const std::size_t per_class = 1 + uniform_index(rng, 40);
    Dataset d = labels_only(classes, per_class);
    const std::size_t m = 2 + uniform_index(rng, std::min<std::size_t>(d.size() - 1, 30));
    const double beta = betas[uniform_index(rng, 6)];
    const std::uint64_t seed = rng();
    CAPTURE(classes);
    CAPTURE(per_class);
    CAPTURE(m);
    CAPTURE(beta);
    auto shards = dirichlet_partition(d, m, beta, seed);
    check_exact_partition(d, shards, m);
    auto again = dirichlet_partition(d, m, beta, seed);
    for (std::size_t j = 0; j < m; ++j) CHECK(again[j].indices == shards[j].indices);
  }
}

TEST_CASE("dirichlet_partition errors") {
  Dataset d = labels_only(2, 2);
  CHECK_THROWS_AS(dirichlet_partition(d, 5, 0.5, 0), DataError);
  CHECK_THROWS_AS(dirichlet_partition(d, 1, 0.5, 0), DataError);
  CHECK_THROWS_AS(dirichlet_partition(d, 2, 0.0, 0), DataError);
  CHECK_THROWS_AS(dirichlet_partition(d, 2, -1.0, 0), DataError);
}

TEST_CASE("dirichlet_partition with large beta is near uniform") {
  Dataset d = labels_only(10, 1000);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    auto shards = dirichlet_partition(d, 4, 1000.0, seed);
    for (const auto& s : shards) {
      for (double a : alpha_weights(class_counts(s, d)).alpha) CHECK(std::abs(a - 0.1) <= 0.05);
    }
  }
}

TEST_CASE("dirichlet_partition skew grows as beta shrinks") {
  Dataset d = labels_only(10, 100);
  SUBCASE("minority-class count") {
    auto minority = [&](double beta, std::uint64_t seed) {
      auto shards = dirichlet_partition(d, 20, beta, seed);
      double total = 0.0;
      for (const auto& s : shards) {
        auto cc = class_counts(s, d);
        for (std::size_t c : cc.counts) total += static_cast<double>(c) < 0.01 * static_cast<double>(cc.total);
      }
      return total / 20.0;
    };
    double skewed = 0.0, flat = 0.0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      skewed += minority(0.1, seed);
      flat += minority(1000.0, seed);
    }
    CHECK(skewed > flat);
  }
  SUBCASE("pairwise total variation, rank test") {
    std::vector<double> tv01, tv05, tv5;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      tv01.push_back(mean_pairwise_tv(d, dirichlet_partition(d, 20, 0.1, seed)));
      tv05.push_back(mean_pairwise_tv(d, dirichlet_partition(d, 20, 0.5, seed)));
      tv5.push_back(mean_pairwise_tv(d, dirichlet_partition(d, 20, 5.0, seed)));
    }
    CHECK(testing::mann_whitney_z(tv01, tv05) > testing::kOneSidedZ05);
    CHECK(testing::mann_whitney_z(tv05, tv5) > testing::kOneSidedZ05);
  }
}

TEST_CASE("class_counts") {
  Dataset d = labels_only(3, 0);
  d.labels = {0, 0, 1};
  d.inputs = {0, 0, 0};
  Shard all{0, {0, 1, 2}};
  auto cc = class_counts(all, d);
  CHECK(cc.counts == std::vector<std::size_t>{2, 1, 0});
  CHECK(cc.total == 3);
  CHECK(class_counts(Shard{0, {2}}, d).counts == std::vector<std::size_t>{0, 1, 0});
  CHECK(class_counts(whole_dataset_shard(d), d) == cc);
  CHECK_THROWS_AS(class_counts(Shard{0, {3}}, d), DataError);
}

TEST_CASE("alpha_weights") {
  CHECK(alpha_weights({{90, 10, 0}, 100}).alpha == std::vector<double>{0.9, 0.1, 0.0});
  auto uniform = alpha_weights({{5, 5, 5, 5}, 20}).alpha;
  for (double a : uniform) CHECK(a == 0.25);
  CHECK(alpha_weights({{1, 0, 0}, 1}).alpha == std::vector<double>{1.0, 0.0, 0.0});
  CHECK_THROWS_AS(alpha_weights({{0, 0}, 0}), DataError);

  Dataset d = labels_only(7, 13);
  for (const auto& s : dirichlet_partition(d, 6, 0.3, 9)) {
    auto a = alpha_weights(class_counts(s, d)).alpha;
    double sum = 0.0;
    for (double v : a) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
      sum += v;
    }
    CHECK(std::abs(sum - 1.0) <= 1e-12);
  }
}

TEST_CASE("make_batch") {
  auto d = generate_synthetic(3, 4, 5, 1.0, 0);
  std::vector<std::size_t> idx{2, 7};
  Batch b = make_batch(d, idx);
  CHECK(b.inputs.shape == Shape{2, 5});
  CHECK(b.labels == std::vector<int>{d.labels[2], d.labels[7]});
  for (std::size_t k = 0; k < 5; ++k) CHECK(b.inputs.data[5 + k] == d.sample(7)[k]);
}

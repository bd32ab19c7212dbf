#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "fedsim/config.hpp"
#include "fedsim/errors.hpp"

using namespace fedsim;
namespace fs = std::filesystem;

namespace {

// Returns the ConfigError thrown by parsing `text`; fails the test otherwise.
ConfigError parse_error(const std::string& text) {
  try {
    parse_config_text(text);
  } catch (const ConfigError& e) {
    return e;
  }
  FAIL("expected ConfigError for: " << text);
  return ConfigError("unreachable");
}

}  // namespace

TEST_CASE("empty config gives the defaults") {
  const ExperimentConfig c = parse_config_text("");
  CHECK(c == ExperimentConfig{});
  CHECK(c.sgd.lr == 0.01);
  CHECK(c.sgd.momentum == 0.9);
  CHECK(c.sgd.weight_decay == 1e-5);
  CHECK(c.batch_size == 64);
  CHECK(c.local_epochs == 10);
  CHECK(c.mu == 0.5);
  CHECK(c.num_clients == 20);
  CHECK(c.sample_fraction == 0.2);
  CHECK(parse_config_text("# only a comment\n\n; another\n") == c);
}

TEST_CASE("parsing") {
  const auto c = parse_config_text(R"(
rounds = 7   # trailing comment
[experiment]
gamma = 0.5
target_accuracy = 0.8
record_time = true
[optimizer]
lr = 0.1
[method]
method = fedprox
mu = 0.25
[data]
source = idx
train_images = "imgs/train"
train_labels = lbl
test_images = /abs/test
test_labels = lbl2
)",
                                   "/base");
  CHECK(c.rounds == 7);
  CHECK(c.sample_fraction == 0.5);
  CHECK(c.target_accuracy == 0.8);
  CHECK(c.record_time);
  CHECK(c.sgd.lr == 0.1);
  CHECK(c.method == MethodKind::kFedProx);
  CHECK(c.mu == 0.25);
  CHECK(c.data.kind == DataSource::Kind::kIdx);
  CHECK(c.data.train_images == fs::path("/base/imgs/train"));
  CHECK(c.data.train_labels == fs::path("/base/lbl"));
  CHECK(c.data.test_images == fs::path("/abs/test"));
}

TEST_CASE("errors name the key and line") {
  SUBCASE("out-of-range gamma") {
    auto e = parse_error("[experiment]\ngamma = 1.5\n");
    CHECK(e.key() == "gamma");
    CHECK(e.line() == 2);
    CHECK(std::string(e.what()).find("gamma") != std::string::npos);
  }
  SUBCASE("unknown key") {
    auto e = parse_error("[experiment]\nround = 5\n");
    CHECK(e.key() == "round");
    CHECK(e.line() == 2);
  }
  SUBCASE("key in the wrong section") {
    auto e = parse_error("[optimizer]\nrounds = 5\n");
    CHECK(e.key() == "rounds");
    CHECK(std::string(e.what()).find("[experiment]") != std::string::npos);
  }
  SUBCASE("duplicate key") {
    auto e = parse_error("lr = 0.1\n[optimizer]\nlr = 0.2\n");
    CHECK(e.line() == 3);
  }
  SUBCASE("bad number") {
    auto e = parse_error("[experiment]\n\nrounds = ten\n");
    CHECK(e.key() == "rounds");
    CHECK(e.line() == 3);
  }
  SUBCASE("misc") {
    CHECK(parse_error("[training]\n").line() == 1);
    CHECK(parse_error("rounds 5\n").line() == 1);
    CHECK(parse_error("[experiment\n").line() == 1);
    CHECK(parse_error("method = fedrs\n").key() == "method");
    CHECK(parse_error("source = cifar\n").key() == "source");
    CHECK(parse_error("record_time = maybe\n").key() == "record_time");
    CHECK(parse_error("lr = 0\n").key() == "lr");
    CHECK(parse_error("source = idx\n").key() == "train_images");
  }
}

TEST_CASE("round trip") {
  ExperimentConfig c;
  c.rounds = 13;
  c.sample_fraction = 0.35;
  c.beta = 0.1;
  c.sgd = {0.013, 0.8, 3e-4};
  c.method = MethodKind::kFedAvg;
  c.seed = 18446744073709551615ull;
  c.target_accuracy = 0.72;
  c.threads = 3;
  c.data.separation = 1.0 / 3.0;
  CHECK(parse_config_text(serialize_config(c)) == c);

  ExperimentConfig idx;
  idx.data.kind = DataSource::Kind::kIdx;
  idx.data.train_images = "/d/a b/train";
  idx.data.train_labels = "/d/tl";
  idx.data.test_images = "/d/ti";
  idx.data.test_labels = "/d/tl2";
  CHECK(parse_config_text(serialize_config(idx)) == idx);

  // defaulting is idempotent
  const auto once = parse_config_text("");
  CHECK(parse_config_text(serialize_config(once)) == once);
  CHECK(serialize_config(parse_config_text(serialize_config(once))) == serialize_config(once));
}

TEST_CASE("parse_config resolves paths against the file") {
  const fs::path dir = fs::temp_directory_path() / "fedsim_test_config";
  fs::create_directories(dir);
  {
    std::ofstream out(dir / "c.ini");
    out << "[data]\nsource = idx\ntrain_images = a\ntrain_labels = b\ntest_images = c\ntest_labels = d\n";
  }
  auto c = parse_config(dir / "c.ini");
  CHECK(c.data.train_images == dir / "a");
  CHECK_THROWS_AS(parse_config(dir / "missing.ini"), ConfigError);
}

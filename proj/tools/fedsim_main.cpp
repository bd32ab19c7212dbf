#include <cstdlib>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fedsim/config.hpp"
#include "fedsim/errors.hpp"
#include "fedsim/registry.hpp"
#include "fedsim/runner.hpp"

namespace {

// "1x28x28" -> {1, 28, 28}; "20" -> {20}
fedsim::Shape parse_shape(const std::string& text) {
  fedsim::Shape shape;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, 'x')) shape.push_back(std::stoul(part));
  return shape;
}

std::string default_out_dir() {
  if (const char* env = std::getenv("FEDSIM_OUT_DIR"); env != nullptr && *env != '\0') return env;
  return "runs";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Federated label-skew simulator: FedAvg, FedProx and FedBalance"};
  app.require_subcommand(1);

  std::string config_path;
  int seeds = 1;
  std::string out_dir = default_out_dir();
  int threads = 0;
  auto* run_cmd = app.add_subcommand("run", "Run an experiment for one or more seeds");
  run_cmd->add_option("--config", config_path, "Experiment config file")->required()->check(CLI::ExistingFile);
  run_cmd->add_option("--seeds", seeds, "Number of consecutive seeds starting at the config seed")
      ->check(CLI::PositiveNumber);
  run_cmd->add_option("--out", out_dir, "Output directory (default: $FEDSIM_OUT_DIR or ./runs)");
  run_cmd->add_option("--threads", threads, "Override the config's worker thread count")
      ->check(CLI::PositiveNumber);

  std::string inspect_config;
  auto* inspect_cmd = app.add_subcommand("inspect-partition", "Print per-client class counts");
  inspect_cmd->add_option("--config", inspect_config, "Experiment config file")
      ->required()
      ->check(CLI::ExistingFile);

  std::vector<std::string> arch_names;
  std::string input = "1x28x28";
  std::size_t classes = 10;
  auto* macs_cmd = app.add_subcommand("macs", "Multiply-accumulates per single-sample forward pass");
  macs_cmd->add_option("arch", arch_names, "Registry names or a+b ensembles (default: all)");
  macs_cmd->add_option("--input", input, "Input shape, e.g. 1x28x28 or 20");
  macs_cmd->add_option("--classes", classes, "Number of classes")->check(CLI::PositiveNumber);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run_cmd) {
      fedsim::ExperimentConfig config = fedsim::parse_config(config_path);
      if (threads > 0) config.threads = threads;
      const auto outcome = fedsim::run(config, seeds, out_dir, std::cout);
      return outcome.ok() ? 0 : 1;
    }
    if (*inspect_cmd) {
      fedsim::inspect_partition(fedsim::parse_config(inspect_config), std::cout);
      return 0;
    }
    if (*macs_cmd) {
      if (arch_names.empty()) {
        arch_names = fedsim::registry_names();
        arch_names.emplace_back("cnn-small+mlp-weak");
      }
      fedsim::print_macs(fedsim::macs_table(arch_names, parse_shape(input), classes), std::cout);
      return 0;
    }
  } catch (const fedsim::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

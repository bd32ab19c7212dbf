#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "fedsim/data.hpp"
#include "fedsim/engine.hpp"
#include "fedsim/metrics.hpp"

namespace fedsim {

inline constexpr const char* kCsvHeader =
    "round,global_acc,mean_per_class_acc,ci_low,ci_high,kl,elapsed_s";

/// One row per record, reals at 6 significant digits, absent KL as an empty field.
void write_history_csv(std::ostream& out, const std::vector<RoundRecord>& history);
std::vector<RoundRecord> read_history_csv(std::istream& in);

struct Datasets {
  Dataset train;
  Dataset test;
};

/// Synthetic data is drawn from the config seed; IDX files share one class count.
Datasets load_datasets(const ExperimentConfig& config);

struct SeedOutcome {
  std::uint64_t seed = 0;
  std::filesystem::path csv;
  bool completed = false;
  std::string error;
  double final_accuracy = 0.0;
  std::vector<RoundRecord> history;
};

struct RunOutcome {
  std::vector<SeedOutcome> seeds;
  double final_accuracy_mean = 0.0;
  double final_accuracy_std = 0.0;  // sample std, 0 for a single seed

  bool ok() const;
};

std::filesystem::path csv_name(const ExperimentConfig& config, std::uint64_t seed);

/// Runs seeds config.seed, config.seed + 1, ... and writes into `out_dir`:
/// config.ini (the exact re-runnable snapshot), manifest.json (written before
/// the first round and rewritten as seeds finish), one CSV per seed and
/// summary.csv. A failed seed is recorded in the manifest and the remaining
/// seeds still run.
RunOutcome run(const ExperimentConfig& config, int num_seeds, const std::filesystem::path& out_dir,
               std::ostream& log);

/// Per-client class-count table with a totals row, followed by the alpha vectors.
void inspect_partition(const ExperimentConfig& config, std::ostream& out);

/// Per-client shards exactly as run_experiment builds them.
std::vector<Shard> partition_for(const ExperimentConfig& config, const Dataset& train);

struct MacsRow {
  std::string name;
  std::uint64_t macs = 0;
  std::uint64_t base_macs = 0;  // first component; equals macs for single archs
  bool composite = false;
};

/// Names are registry keys or `a+b+...` ensembles of them.
std::vector<MacsRow> macs_table(const std::vector<std::string>& names, const Shape& input_shape,
                                std::size_t num_classes);
void print_macs(const std::vector<MacsRow>& rows, std::ostream& out);

}  // namespace fedsim

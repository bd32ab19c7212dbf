#include "fedsim/runner.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "fedsim/config.hpp"
#include "fedsim/errors.hpp"
#include "fedsim/registry.hpp"

#ifndef FEDSIM_VERSION
#define FEDSIM_VERSION "unknown"
#endif

namespace fedsim {

namespace {

std::string g6(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
}

}  // namespace

void write_history_csv(std::ostream& out, const std::vector<RoundRecord>& history) {
  out << kCsvHeader << "\n";
  for (const auto& r : history) {
    out << r.round << "," << g6(r.global_accuracy) << "," << g6(r.mean_per_class_acc) << ","
        << g6(r.per_class_acc_ci95.low) << "," << g6(r.per_class_acc_ci95.high) << ","
        << (r.kl_local_vs_ensemble ? g6(*r.kl_local_vs_ensemble) : std::string()) << ","
        << g6(r.elapsed_seconds) << "\n";
  }
}

std::vector<RoundRecord> read_history_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) {
    throw DataError("metrics CSV: missing or unexpected header");
  }
  std::vector<RoundRecord> out;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = split_csv(line);
    if (f.size() != 7) {
      throw DataError("metrics CSV line " + std::to_string(line_no) + ": expected 7 fields");
    }
    try {
      RoundRecord r;
      r.round = std::stoi(f[0]);
      r.global_accuracy = std::stod(f[1]);
      r.mean_per_class_acc = std::stod(f[2]);
      r.per_class_acc_ci95 = {std::stod(f[3]), std::stod(f[4])};
      if (!f[5].empty()) r.kl_local_vs_ensemble = std::stod(f[5]);
      r.elapsed_seconds = std::stod(f[6]);
      out.push_back(r);
    } catch (const std::logic_error&) {
      throw DataError("metrics CSV line " + std::to_string(line_no) + ": malformed number");
    }
  }
  return out;
}

Datasets load_datasets(const ExperimentConfig& config) {
  const auto& d = config.data;
  if (d.kind == DataSource::Kind::kSynthetic) {
    return {generate_synthetic(d.classes, d.per_class, d.dim, d.separation,
                               derive_seed(config.seed, Stream::kSynthetic)),
            generate_synthetic(d.classes, d.test_per_class, d.dim, d.separation,
                               derive_seed(config.seed, Stream::kSyntheticTest))};
  }
  Datasets out{load_idx(d.train_images, d.train_labels), load_idx(d.test_images, d.test_labels)};
  const std::size_t classes = std::max(out.train.num_classes, out.test.num_classes);
  out.train.num_classes = classes;
  out.test.num_classes = classes;
  return out;
}

bool RunOutcome::ok() const {
  if (seeds.empty()) return false;
  for (const auto& s : seeds) {
    if (!s.completed) return false;
  }
  return true;
}

std::filesystem::path csv_name(const ExperimentConfig& config, std::uint64_t seed) {
  return std::string(method_name(config.method)) + "_seed" + std::to_string(seed) + ".csv";
}

RunOutcome run(const ExperimentConfig& config, int num_seeds, const std::filesystem::path& out_dir,
               std::ostream& log) {
  validate(config);
  if (num_seeds < 1) throw ConfigError("--seeds must be >= 1", "seeds");
  std::filesystem::create_directories(out_dir);

  const std::string snapshot = serialize_config(config);
  write_text(out_dir / "config.ini", snapshot);

  nlohmann::json manifest;
  manifest["artifact_version"] = FEDSIM_VERSION;
  manifest["config_file"] = "config.ini";
  manifest["config"] = snapshot;
  manifest["output_dir"] = std::filesystem::absolute(out_dir).string();
  manifest["started_at"] = utc_now();
  manifest["finished_at"] = nullptr;
  manifest["status"] = "running";
  manifest["seeds"] = nlohmann::json::array();
  RunOutcome outcome;
  for (int k = 0; k < num_seeds; ++k) {
    SeedOutcome s;
    s.seed = config.seed + static_cast<std::uint64_t>(k);
    s.csv = csv_name(config, s.seed);
    manifest["seeds"].push_back(
        {{"seed", s.seed}, {"csv", s.csv.string()}, {"status", "pending"}, {"error", nullptr}});
    outcome.seeds.push_back(std::move(s));
  }
  auto save_manifest = [&] { write_text(out_dir / "manifest.json", manifest.dump(2) + "\n"); };
  save_manifest();

  for (std::size_t k = 0; k < outcome.seeds.size(); ++k) {
    auto& s = outcome.seeds[k];
    auto& entry = manifest["seeds"][k];
    entry["status"] = "running";
    save_manifest();
    ExperimentConfig seeded = config;
    seeded.seed = s.seed;
    try {
      const Datasets data = load_datasets(seeded);
      ExperimentResult result = run_experiment(seeded, data.train, data.test);
      std::ostringstream csv;
      write_history_csv(csv, result.history);
      write_text(out_dir / s.csv, csv.str());
      s.history = std::move(result.history);
      s.final_accuracy = s.history.empty() ? accuracy(result.final_model, data.test)
                                           : s.history.back().global_accuracy;
      s.completed = true;
      entry["status"] = "complete";
      entry["final_accuracy"] = s.final_accuracy;
      log << method_name(config.method) << " seed " << s.seed << ": final accuracy "
          << g6(s.final_accuracy) << "\n";
    } catch (const std::exception& e) {
      s.error = e.what();
      entry["status"] = "failed";
      entry["error"] = s.error;
      log << method_name(config.method) << " seed " << s.seed << " failed: " << s.error << "\n";
    }
    save_manifest();
  }

  std::vector<double> finals;
  for (const auto& s : outcome.seeds) {
    if (s.completed) finals.push_back(s.final_accuracy);
  }
  if (!finals.empty()) {
    double sum = 0.0;
    for (double v : finals) sum += v;
    outcome.final_accuracy_mean = sum / static_cast<double>(finals.size());
    if (finals.size() > 1) {
      double ss = 0.0;
      for (double v : finals) ss += (v - outcome.final_accuracy_mean) * (v - outcome.final_accuracy_mean);
      outcome.final_accuracy_std = std::sqrt(ss / static_cast<double>(finals.size() - 1));
    }
  }

  std::ostringstream summary;
  summary << "method,seeds,completed,final_acc_mean,final_acc_std\n"
          << method_name(config.method) << "," << outcome.seeds.size() << "," << finals.size()
          << "," << g6(outcome.final_accuracy_mean) << "," << g6(outcome.final_accuracy_std)
          << "\n";
  write_text(out_dir / "summary.csv", summary.str());
  log << "summary: " << method_name(config.method) << " final accuracy "
      << g6(outcome.final_accuracy_mean) << " +/- " << g6(outcome.final_accuracy_std) << " over "
      << finals.size() << " seed(s)\n";

  manifest["finished_at"] = utc_now();
  manifest["status"] = outcome.ok() ? "complete" : "failed";
  save_manifest();
  return outcome;
}

std::vector<Shard> partition_for(const ExperimentConfig& config, const Dataset& train) {
  if (config.num_clients == 1) return {whole_dataset_shard(train)};
  return dirichlet_partition(train, static_cast<std::size_t>(config.num_clients), config.beta,
                             derive_seed(config.seed, Stream::kPartition));
}

void inspect_partition(const ExperimentConfig& config, std::ostream& out) {
  validate(config);
  const Datasets data = load_datasets(config);
  const auto shards = partition_for(config, data.train);
  const std::size_t classes = data.train.num_classes;

  out << std::setw(8) << "client";
  for (std::size_t c = 0; c < classes; ++c) out << std::setw(7) << ("c" + std::to_string(c));
  out << std::setw(8) << "total" << "\n";
  std::vector<std::size_t> totals(classes, 0);
  std::size_t grand = 0;
  std::vector<ClassCounts> counts;
  for (const auto& shard : shards) {
    counts.push_back(class_counts(shard, data.train));
    out << std::setw(8) << shard.owner;
    for (std::size_t c = 0; c < classes; ++c) {
      out << std::setw(7) << counts.back().counts[c];
      totals[c] += counts.back().counts[c];
    }
    out << std::setw(8) << counts.back().total << "\n";
    grand += counts.back().total;
  }
  out << std::setw(8) << "total";
  for (std::size_t c = 0; c < classes; ++c) out << std::setw(7) << totals[c];
  out << std::setw(8) << grand << "\n\nalpha\n";
  for (std::size_t j = 0; j < shards.size(); ++j) {
    const auto alpha = alpha_weights(counts[j]);
    out << std::setw(8) << shards[j].owner;
    for (double a : alpha.alpha) out << std::setw(7) << std::fixed << std::setprecision(3) << a;
    out << "\n";
  }
  out.unsetf(std::ios::floatfield);
}

std::vector<MacsRow> macs_table(const std::vector<std::string>& names, const Shape& input_shape,
                                std::size_t num_classes) {
  std::vector<MacsRow> rows;
  for (const auto& name : names) {
    MacsRow row;
    row.name = name;
    std::size_t start = 0;
    bool first = true;
    while (start <= name.size()) {
      const std::size_t plus = name.find('+', start);
      const std::string part =
          name.substr(start, plus == std::string::npos ? std::string::npos : plus - start);
      const std::uint64_t m = count_macs(make_arch(part, input_shape, num_classes));
      row.macs += m;
      if (first) row.base_macs = m;
      else row.composite = true;
      first = false;
      if (plus == std::string::npos) break;
      start = plus + 1;
    }
    rows.push_back(row);
  }
  return rows;
}

void print_macs(const std::vector<MacsRow>& rows, std::ostream& out) {
  out << std::left << std::setw(24) << "arch" << std::right << std::setw(14) << "macs"
      << std::setw(12) << "overhead" << "\n";
  for (const auto& r : rows) {
    out << std::left << std::setw(24) << r.name << std::right << std::setw(14) << r.macs;
    if (r.composite) {
      const double pct = 100.0 * static_cast<double>(r.macs - r.base_macs) /
                         static_cast<double>(r.base_macs);
      std::ostringstream p;
      p << std::fixed << std::setprecision(2) << pct << "%";
      out << std::setw(12) << p.str();
    }
    out << "\n";
  }
}

}  // namespace fedsim

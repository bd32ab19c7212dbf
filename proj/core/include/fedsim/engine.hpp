#pragma once

// Round-based federated training: client sampling, local training of the
// shared model (and, for FedBalance, each client's private weak learner),
// and sample-count-weighted aggregation of the shared model only.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fedsim/data.hpp"
#include "fedsim/methods.hpp"
#include "fedsim/metrics.hpp"
#include "fedsim/nn.hpp"
#include "fedsim/rng.hpp"

namespace fedsim {

/// Where the train/test data come from.
struct DataSource {
  enum class Kind { kSynthetic, kIdx };
  Kind kind = Kind::kSynthetic;

  // synthetic Gaussian classes
  std::size_t classes = 10;
  std::size_t per_class = 100;
  std::size_t test_per_class = 50;
  std::size_t dim = 20;
  double separation = 3.0;

  // IDX files
  std::filesystem::path train_images;
  std::filesystem::path train_labels;
  std::filesystem::path test_images;
  std::filesystem::path test_labels;

  bool operator==(const DataSource&) const = default;
};

struct ExperimentConfig {
  int rounds = 50;
  int local_epochs = 10;
  int num_clients = 20;
  double sample_fraction = 0.2;
  double beta = 0.1;
  int batch_size = 64;
  SgdHyper sgd;
  MethodKind method = MethodKind::kFedBalance;
  double mu = 0.5;
  std::string model_arch = "cnn-small";
  std::string weak_arch = "mlp-weak";
  std::uint64_t seed = 0;
  int eval_every = 1;
  std::optional<double> target_accuracy;
  int threads = 1;
  bool record_time = false;
  DataSource data;

  bool operator==(const ExperimentConfig&) const = default;
};

/// Throws ConfigError naming the first offending key.
void validate(const ExperimentConfig& config);

/// MethodSpec for `config.method`; the weak learner is built from the registry.
MethodSpec resolve_method(const ExperimentConfig& config, const Shape& input_shape,
                          std::size_t num_classes);

struct ClientState {
  int id = 0;
  Shard shard;
  ClassCounts counts;
  AlphaWeights alpha;
  std::optional<ModelParams> psi;  // private weak learner, FedBalance only
  std::optional<OptState> psi_opt;
  std::optional<OptState> phi_opt;  // created on first participation
  Rng rng;
};

struct ServerState {
  ModelParams global_model;
  int round = 0;
};

/// What a client returns to the server. Holds no weak-learner state.
struct LocalUpdate {
  int client = 0;
  ModelParams phi;
  std::size_t num_samples = 0;
  std::vector<double> epoch_losses;
  std::size_t steps = 0;
  std::optional<double> mean_kl;
};

/// round(gamma * M), at least 1.
std::size_t sample_size(int num_clients, double gamma);

/// Sorted ids drawn uniformly without replacement.
std::vector<int> sample_clients(int num_clients, double gamma, Rng& round_rng);

/// E epochs of mini-batch SGD over the client's shard starting from a copy of
/// `global_phi`. Updates the client's weak learner and optimizer buffers in
/// place. Throws TrainingError on a non-finite loss.
LocalUpdate local_train(ClientState& client, const ModelParams& global_phi,
                        const MethodSpec& method, const ExperimentConfig& config,
                        const Dataset& train, int round);

/// Weighted by samples: sum_i (n_i / sum_j n_j) * phi_i.
ModelParams aggregate(std::span<const LocalUpdate> updates);

/// Builds one ClientState per shard; FedBalance clients get a freshly
/// initialised weak learner.
std::vector<ClientState> make_clients(const std::vector<Shard>& shards, const Dataset& train,
                                      const MethodSpec& method, const ExperimentConfig& config);

/// Test-only observation points.
struct ExperimentHooks {
  std::function<void(const ServerState&, std::span<const int> sampled)> on_round_start;
  std::function<void(const ServerState&, std::span<const LocalUpdate>)> on_aggregate;
};

struct ExperimentResult {
  std::vector<RoundRecord> history;
  ModelParams final_model;
};

ExperimentResult run_experiment(const ExperimentConfig& config, const ArchDescriptor& phi_arch,
                                const MethodSpec& method, const Dataset& train,
                                const Dataset& test, const ExperimentHooks& hooks = {});

/// Resolves both architectures from the registry by name.
ExperimentResult run_experiment(const ExperimentConfig& config, const Dataset& train,
                                const Dataset& test, const ExperimentHooks& hooks = {});

}  // namespace fedsim

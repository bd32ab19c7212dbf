#include "fedsim/engine.hpp"

#include <chrono>
#include <cmath>
#include <exception>
#include <numeric>
#include <thread>

#include "fedsim/errors.hpp"
#include "fedsim/registry.hpp"

namespace fedsim {

void validate(const ExperimentConfig& c) {
  auto require = [](bool ok, const char* key, const std::string& what) {
    if (!ok) throw ConfigError(std::string(key) + ": " + what, key);
  };
  require(c.rounds >= 0, "rounds", "must be >= 0");
  require(c.local_epochs >= 1, "local_epochs", "must be >= 1");
  require(c.num_clients >= 1, "num_clients", "must be >= 1");
  require(c.sample_fraction > 0.0 && c.sample_fraction <= 1.0, "gamma", "must lie in (0, 1]");
  require(c.beta > 0.0 && std::isfinite(c.beta), "beta", "must be positive");
  require(c.batch_size >= 1, "batch_size", "must be >= 1");
  require(c.sgd.lr > 0.0 && std::isfinite(c.sgd.lr), "lr", "must be positive");
  require(c.sgd.momentum >= 0.0 && c.sgd.momentum < 1.0, "momentum", "must lie in [0, 1)");
  require(c.sgd.weight_decay >= 0.0, "weight_decay", "must be >= 0");
  require(c.mu >= 0.0, "mu", "must be >= 0");
  require(c.eval_every >= 1, "eval_every", "must be >= 1");
  require(c.threads >= 1, "threads", "must be >= 1");
  require(!c.target_accuracy || (*c.target_accuracy >= 0.0 && *c.target_accuracy <= 1.0),
          "target_accuracy", "must lie in [0, 1]");
  require(sample_size(c.num_clients, c.sample_fraction) >= 1, "gamma",
          "selects no clients");
  if (c.data.kind == DataSource::Kind::kSynthetic) {
    require(c.data.classes >= 2, "classes", "must be >= 2");
    require(c.data.per_class >= 1, "per_class", "must be >= 1");
    require(c.data.test_per_class >= 1, "test_per_class", "must be >= 1");
    require(c.data.dim >= 1, "dim", "must be >= 1");
  } else {
    require(!c.data.train_images.empty(), "train_images", "path required");
    require(!c.data.train_labels.empty(), "train_labels", "path required");
    require(!c.data.test_images.empty(), "test_images", "path required");
    require(!c.data.test_labels.empty(), "test_labels", "path required");
  }
}

MethodSpec resolve_method(const ExperimentConfig& config, const Shape& input_shape,
                          std::size_t num_classes) {
  switch (config.method) {
    case MethodKind::kFedAvg:
      return MethodSpec::fedavg();
    case MethodKind::kFedProx:
      return MethodSpec::fedprox(config.mu);
    case MethodKind::kFedBalance:
      return MethodSpec::fedbalance(make_arch(config.weak_arch, input_shape, num_classes));
  }
  throw ConfigError("unknown method", "method");
}

std::size_t sample_size(int num_clients, double gamma) {
  const auto n = static_cast<std::size_t>(std::llround(gamma * num_clients));
  return std::clamp<std::size_t>(n, 1, static_cast<std::size_t>(num_clients));
}

std::vector<int> sample_clients(int num_clients, double gamma, Rng& round_rng) {
  const std::size_t k = sample_size(num_clients, gamma);
  std::vector<int> ids(static_cast<std::size_t>(num_clients));
  std::iota(ids.begin(), ids.end(), 0);
  // Partial Fisher-Yates: the first k slots are a uniform k-subset.
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + uniform_index(round_rng, ids.size() - i);
    std::swap(ids[i], ids[j]);
  }
  ids.resize(k);
  std::sort(ids.begin(), ids.end());
  return ids;
}

LocalUpdate local_train(ClientState& client, const ModelParams& global_phi,
                        const MethodSpec& method, const ExperimentConfig& config,
                        const Dataset& train, int round) {
  if (client.shard.indices.empty()) {
    throw TrainingError("client " + std::to_string(client.id) + " has no data", round, client.id);
  }
  LocalUpdate up{client.id, global_phi, client.shard.indices.size(), {}, 0, std::nullopt};
  if (!client.phi_opt) client.phi_opt = make_opt_state(up.phi, config.sgd);
  ModelParams* psi = client.psi ? &*client.psi : nullptr;
  if (method.kind == MethodKind::kFedBalance && psi == nullptr) {
    throw TrainingError("fedbalance client without a weak learner", round, client.id);
  }

  std::vector<std::size_t> order;
  const std::size_t n = client.shard.indices.size();
  const std::size_t batch_size = static_cast<std::size_t>(config.batch_size);
  double kl_sum = 0.0;
  std::size_t kl_batches = 0;
  try {
    for (int epoch = 0; epoch < config.local_epochs; ++epoch) {
      // each epoch is a fresh permutation of the (sorted) shard
      order = client.shard.indices;
      shuffle(order, client.rng);
      double loss_sum = 0.0;
      for (std::size_t start = 0; start < n; start += batch_size) {
        const std::size_t len = std::min(batch_size, n - start);
        Batch batch = make_batch(train, std::span<const std::size_t>(order).subspan(start, len));
        StepGradients g = local_loss_step(method, up.phi, psi, client.alpha, global_phi, batch);
        if (!std::isfinite(g.loss)) {
          throw TrainingError("local training diverged (round " + std::to_string(round) +
                                  ", client " + std::to_string(client.id) + ")",
                              round, client.id);
        }
        sgd_step(up.phi, g.grad_phi, *client.phi_opt);
        if (g.grad_psi) sgd_step(*psi, *g.grad_psi, *client.psi_opt);
        if (g.kl_local_vs_fused) {
          kl_sum += *g.kl_local_vs_fused;
          ++kl_batches;
        }
        loss_sum += g.loss * static_cast<double>(len);
        ++up.steps;
      }
      up.epoch_losses.push_back(loss_sum / static_cast<double>(n));
    }
  } catch (const TrainingError&) {
    throw;
  } catch (const Error& e) {
    throw TrainingError(std::string(e.what()) + " (round " + std::to_string(round) + ", client " +
                            std::to_string(client.id) + ")",
                        round, client.id);
  }
  if (kl_batches > 0) up.mean_kl = kl_sum / static_cast<double>(kl_batches);
  return up;
}

ModelParams aggregate(std::span<const LocalUpdate> updates) {
  if (updates.empty()) throw ShapeError("aggregate: no updates");
  std::size_t total = 0;
  for (const auto& u : updates) {
    if (!(u.phi.arch == updates.front().phi.arch) || u.phi.size() != updates.front().phi.size()) {
      throw ShapeError("aggregate: updates differ in architecture");
    }
    if (u.num_samples == 0) throw ShapeError("aggregate: update with zero samples");
    total += u.num_samples;
  }
  ModelParams out(updates.front().phi.arch);
  for (const auto& u : updates) {
    const double w = static_cast<double>(u.num_samples) / static_cast<double>(total);
    for (std::size_t i = 0; i < out.size(); ++i) out.values[i] += w * u.phi.values[i];
  }
  return out;
}

std::vector<ClientState> make_clients(const std::vector<Shard>& shards, const Dataset& train,
                                      const MethodSpec& method, const ExperimentConfig& config) {
  std::vector<ClientState> clients;
  clients.reserve(shards.size());
  for (const auto& shard : shards) {
    ClientState c;
    c.id = shard.owner;
    c.shard = shard;
    c.counts = class_counts(shard, train);
    c.alpha = alpha_weights(c.counts);
    c.rng = make_rng(config.seed, Stream::kClientShuffle, static_cast<std::uint64_t>(c.id));
    if (method.kind == MethodKind::kFedBalance) {
      c.psi = init_model(*method.weak_arch,
                         derive_seed(config.seed, Stream::kInitWeak, static_cast<std::uint64_t>(c.id)));
      c.psi_opt = make_opt_state(*c.psi, config.sgd);
    }
    clients.push_back(std::move(c));
  }
  return clients;
}

namespace {

void train_sampled(std::vector<ClientState>& clients, std::span<const int> sampled,
                   const ModelParams& global, const MethodSpec& method,
                   const ExperimentConfig& config, const Dataset& train, int round,
                   std::vector<LocalUpdate>& updates) {
  updates.assign(sampled.size(), LocalUpdate{0, global, 0, {}, 0, std::nullopt});
  std::vector<std::exception_ptr> errors(sampled.size());
  auto work = [&](std::size_t k) {
    try {
      updates[k] = local_train(clients[static_cast<std::size_t>(sampled[k])], global, method,
                               config, train, round);
    } catch (...) {
      errors[k] = std::current_exception();
    }
  };
  const std::size_t workers =
      std::min<std::size_t>(static_cast<std::size_t>(config.threads), sampled.size());
  if (workers <= 1) {
    for (std::size_t k = 0; k < sampled.size(); ++k) work(k);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t k = w; k < sampled.size(); k += workers) work(k);
      });
    }
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& config, const ArchDescriptor& phi_arch,
                                const MethodSpec& method, const Dataset& train,
                                const Dataset& test, const ExperimentHooks& hooks) {
  validate(config);
  method.validate();
  validate_dataset(train);
  validate_dataset(test);
  if (phi_arch.input_shape() != train.sample_shape || phi_arch.num_classes() != train.num_classes) {
    throw ShapeError("model " + phi_arch.describe() + " does not fit training data of shape " +
                     shape_string(train.sample_shape));
  }
  if (test.sample_shape != train.sample_shape || test.num_classes != train.num_classes) {
    throw DataError("test set shape or class count differs from the training set");
  }

  const auto start_time = std::chrono::steady_clock::now();
  const auto num_clients = static_cast<std::size_t>(config.num_clients);
  std::vector<Shard> shards =
      num_clients == 1 ? std::vector<Shard>{whole_dataset_shard(train)}
                       : dirichlet_partition(train, num_clients, config.beta,
                                             derive_seed(config.seed, Stream::kPartition));
  std::vector<ClientState> clients = make_clients(shards, train, method, config);

  ServerState server{init_model(phi_arch, derive_seed(config.seed, Stream::kInitGlobal)), 0};
  ExperimentResult result{{}, server.global_model};
  std::vector<LocalUpdate> updates;

  for (int r = 1; r <= config.rounds; ++r) {
    server.round = r;
    Rng round_rng = make_rng(config.seed, Stream::kSampling, static_cast<std::uint64_t>(r));
    const std::vector<int> sampled =
        sample_clients(config.num_clients, config.sample_fraction, round_rng);
    if (hooks.on_round_start) hooks.on_round_start(server, sampled);

    train_sampled(clients, sampled, server.global_model, method, config, train, r, updates);
    server.global_model = aggregate(updates);
    if (hooks.on_aggregate) hooks.on_aggregate(server, updates);

    if (r % config.eval_every == 0 || r == config.rounds) {
      RoundRecord rec;
      rec.round = r;
      rec.global_accuracy = accuracy(server.global_model, test);
      std::vector<ModelParams> locals;
      locals.reserve(updates.size());
      for (const auto& u : updates) locals.push_back(u.phi);
      const MeanWithInterval pc = mean_per_class_accuracy(locals, test);
      rec.mean_per_class_acc = pc.mean;
      rec.per_class_acc_ci95 = pc.ci95;
      rec.kl_local_vs_ensemble = updates.front().mean_kl;
      if (config.record_time) {
        rec.elapsed_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start_time).count();
      }
      result.history.push_back(rec);
    }
  }
  result.final_model = server.global_model;
  return result;
}

ExperimentResult run_experiment(const ExperimentConfig& config, const Dataset& train,
                                const Dataset& test, const ExperimentHooks& hooks) {
  const ArchDescriptor phi = make_arch(config.model_arch, train.sample_shape, train.num_classes);
  const MethodSpec method = resolve_method(config, train.sample_shape, train.num_classes);
  return run_experiment(config, phi, method, train, test, hooks);
}

}  // namespace fedsim

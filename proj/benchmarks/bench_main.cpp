#include <benchmark/benchmark.h>

#include <numeric>

#include "fedsim/engine.hpp"
#include "fedsim/methods.hpp"
#include "fedsim/registry.hpp"

using namespace fedsim;

namespace {

Batch random_batch(const Shape& shape, std::size_t n, std::size_t classes) {
  Rng rng(1);
  Batch b;
  b.inputs.shape = {n};
  b.inputs.shape.insert(b.inputs.shape.end(), shape.begin(), shape.end());
  b.inputs.data.resize(n * shape_size(shape));
  for (double& v : b.inputs.data) v = uniform_real(rng, 0.0, 1.0);
  for (std::size_t i = 0; i < n; ++i) b.labels.push_back(static_cast<int>(i % classes));
  return b;
}

void BM_Forward(benchmark::State& state, const char* name) {
  const auto arch = make_arch(name, {1, 28, 28}, 10);
  const auto params = init_model(arch, 3);
  const auto batch = random_batch(arch.input_shape(), static_cast<std::size_t>(state.range(0)), 10);
  for (auto _ : state) benchmark::DoNotOptimize(forward(params, batch).logits.data.data());
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_ForwardBackward(benchmark::State& state, const char* name) {
  const auto arch = make_arch(name, {1, 28, 28}, 10);
  const auto params = init_model(arch, 3);
  const auto batch = random_batch(arch.input_shape(), static_cast<std::size_t>(state.range(0)), 10);
  for (auto _ : state) {
    auto fwd = forward(params, batch);
    auto ce = softmax_cross_entropy(fwd.logits, batch.labels);
    benchmark::DoNotOptimize(backward(params, fwd.activations, ce.dlogits).data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_FedBalanceStep(benchmark::State& state) {
  const auto phi_arch = make_arch("cnn-small", {1, 28, 28}, 10);
  const auto psi_arch = make_arch("mlp-weak", {1, 28, 28}, 10);
  const auto phi = init_model(phi_arch, 3);
  const auto psi = init_model(psi_arch, 4);
  const auto method = MethodSpec::fedbalance(psi_arch);
  const AlphaWeights alpha{std::vector<double>(10, 0.1)};
  const auto batch = random_batch(phi_arch.input_shape(), 64, 10);
  for (auto _ : state) benchmark::DoNotOptimize(local_loss_step(method, phi, &psi, alpha, phi, batch).loss);
  state.SetItemsProcessed(state.iterations() * 64);
}

void BM_LocalTrainEpoch(benchmark::State& state) {
  const std::size_t n = 600;
  const auto batch = random_batch({1, 28, 28}, n, 10);
  Dataset data{{1, 28, 28}, batch.inputs.data, batch.labels, 10};
  ExperimentConfig c;
  c.local_epochs = 1;
  c.model_arch = "cnn-small";
  const auto arch = make_arch(c.model_arch, data.sample_shape, 10);
  const auto global = init_model(arch, 5);
  const auto method = MethodSpec::fedavg();
  auto clients = make_clients({whole_dataset_shard(data)}, data, method, c);
  for (auto _ : state) benchmark::DoNotOptimize(local_train(clients[0], global, method, c, data, 1).steps);
  state.SetItemsProcessed(state.iterations() * static_cast<long>(n));
}

}  // namespace

BENCHMARK_CAPTURE(BM_Forward, cnn_small, "cnn-small")->Arg(64);
BENCHMARK_CAPTURE(BM_Forward, mlp_weak, "mlp-weak")->Arg(64);
BENCHMARK_CAPTURE(BM_ForwardBackward, cnn_small, "cnn-small")->Arg(1)->Arg(64);
BENCHMARK_CAPTURE(BM_ForwardBackward, mlp_weak, "mlp-weak")->Arg(64);
BENCHMARK(BM_FedBalanceStep);
BENCHMARK(BM_LocalTrainEpoch)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();

#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fedsim/data.hpp"
#include "fedsim/nn.hpp"

namespace fedsim {

enum class MethodKind { kFedAvg, kFedProx, kFedBalance };

std::string_view method_name(MethodKind kind);
MethodKind parse_method(std::string_view name);  // throws ConfigError

/// Local objective selector. `mu` is set exactly for FedProx; `weak_arch`
/// exactly for FedBalance.
struct MethodSpec {
  MethodKind kind = MethodKind::kFedAvg;
  std::optional<double> mu;
  std::optional<ArchDescriptor> weak_arch;

  static MethodSpec fedavg();
  static MethodSpec fedprox(double mu);
  static MethodSpec fedbalance(ArchDescriptor weak_arch);

  void validate() const;
};

struct LossResult {
  double loss = 0.0;
  Matrix dlogits_phi;
  std::optional<Matrix> dlogits_psi;
};

/// phi[b][c] + alpha[c] * psi[b][c].
Matrix fused_logits(const Matrix& phi_logits, const Matrix& psi_logits, const AlphaWeights& alpha);

/// Cross-entropy of the fused logits. d/d psi is the fused gradient scaled
/// per class by alpha; d/d phi is the fused gradient itself.
LossResult fedbalance_loss(const Matrix& phi_logits, const Matrix& psi_logits,
                           const AlphaWeights& alpha, std::span<const int> labels);

struct ProxPenalty {
  double penalty = 0.0;
  std::vector<double> grad;
};

/// (mu / 2) * ||local - global||^2 and its gradient mu * (local - global).
ProxPenalty fedprox_penalty(const ModelParams& local, const ModelParams& global_snapshot, double mu);

struct StepGradients {
  double loss = 0.0;
  std::vector<double> grad_phi;
  std::optional<std::vector<double>> grad_psi;
  /// KL(softmax(phi) || softmax(fused)) averaged over the batch; FedBalance only.
  std::optional<double> kl_local_vs_fused;
};

/// Loss and parameter gradients of one local mini-batch under `method`.
/// `psi` is required for FedBalance and ignored otherwise; `global_snapshot`
/// is only read by FedProx.
StepGradients local_loss_step(const MethodSpec& method, const ModelParams& phi,
                              const ModelParams* psi, const AlphaWeights& alpha,
                              const ModelParams& global_snapshot, const Batch& batch);

}  // namespace fedsim

#include "fedsim/methods.hpp"

#include "fedsim/errors.hpp"
#include "fedsim/metrics.hpp"

namespace fedsim {

std::string_view method_name(MethodKind kind) {
  switch (kind) {
    case MethodKind::kFedAvg:
      return "fedavg";
    case MethodKind::kFedProx:
      return "fedprox";
    case MethodKind::kFedBalance:
      return "fedbalance";
  }
  return "unknown";
}

MethodKind parse_method(std::string_view name) {
  if (name == "fedavg") return MethodKind::kFedAvg;
  if (name == "fedprox") return MethodKind::kFedProx;
  if (name == "fedbalance") return MethodKind::kFedBalance;
  throw ConfigError("unknown method '" + std::string(name) + "'", "method");
}

MethodSpec MethodSpec::fedavg() { return {}; }

MethodSpec MethodSpec::fedprox(double mu) { return {MethodKind::kFedProx, mu, std::nullopt}; }

MethodSpec MethodSpec::fedbalance(ArchDescriptor weak_arch) {
  return {MethodKind::kFedBalance, std::nullopt, std::move(weak_arch)};
}

void MethodSpec::validate() const {
  if (mu.has_value() != (kind == MethodKind::kFedProx)) {
    throw ConfigError("mu must be set exactly for fedprox", "mu");
  }
  if (mu && !(*mu >= 0.0)) throw ConfigError("mu must be non-negative", "mu");
  if (weak_arch.has_value() != (kind == MethodKind::kFedBalance)) {
    throw ConfigError("weak_arch must be set exactly for fedbalance", "weak_arch");
  }
}

Matrix fused_logits(const Matrix& phi_logits, const Matrix& psi_logits, const AlphaWeights& alpha) {
  if (phi_logits.rows != psi_logits.rows || phi_logits.cols != psi_logits.cols) {
    throw ShapeError("fused_logits: phi and psi logits differ in shape");
  }
  if (alpha.alpha.size() != phi_logits.cols) {
    throw ShapeError("fused_logits: alpha has " + std::to_string(alpha.alpha.size()) +
                     " entries for " + std::to_string(phi_logits.cols) + " classes");
  }
  Matrix out(phi_logits.rows, phi_logits.cols);
  for (std::size_t r = 0; r < out.rows; ++r) {
    for (std::size_t c = 0; c < out.cols; ++c) {
      out(r, c) = phi_logits(r, c) + alpha.alpha[c] * psi_logits(r, c);
    }
  }
  return out;
}

LossResult fedbalance_loss(const Matrix& phi_logits, const Matrix& psi_logits,
                           const AlphaWeights& alpha, std::span<const int> labels) {
  const Matrix fused = fused_logits(phi_logits, psi_logits, alpha);
  CrossEntropy ce = softmax_cross_entropy(fused, labels);
  Matrix dpsi = ce.dlogits;
  for (std::size_t r = 0; r < dpsi.rows; ++r) {
    for (std::size_t c = 0; c < dpsi.cols; ++c) dpsi(r, c) *= alpha.alpha[c];
  }
  return LossResult{ce.loss, std::move(ce.dlogits), std::move(dpsi)};
}

ProxPenalty fedprox_penalty(const ModelParams& local, const ModelParams& global_snapshot, double mu) {
  if (local.size() != global_snapshot.size() || !(local.arch == global_snapshot.arch)) {
    throw ShapeError("fedprox_penalty: local and global models differ in architecture");
  }
  ProxPenalty p;
  p.grad.resize(local.size());
  double sq = 0.0;
  for (std::size_t i = 0; i < local.size(); ++i) {
    const double d = local.values[i] - global_snapshot.values[i];
    sq += d * d;
    p.grad[i] = mu * d;
  }
  p.penalty = 0.5 * mu * sq;
  return p;
}

StepGradients local_loss_step(const MethodSpec& method, const ModelParams& phi,
                              const ModelParams* psi, const AlphaWeights& alpha,
                              const ModelParams& global_snapshot, const Batch& batch) {
  StepGradients out;
  ForwardResult phi_fwd = forward(phi, batch);
  switch (method.kind) {
    case MethodKind::kFedAvg: {
      CrossEntropy ce = softmax_cross_entropy(phi_fwd.logits, batch.labels);
      out.loss = ce.loss;
      out.grad_phi = backward(phi, phi_fwd.activations, ce.dlogits);
      break;
    }
    case MethodKind::kFedProx: {
      CrossEntropy ce = softmax_cross_entropy(phi_fwd.logits, batch.labels);
      out.grad_phi = backward(phi, phi_fwd.activations, ce.dlogits);
      ProxPenalty prox = fedprox_penalty(phi, global_snapshot, method.mu.value_or(0.0));
      out.loss = ce.loss + prox.penalty;
      for (std::size_t i = 0; i < out.grad_phi.size(); ++i) out.grad_phi[i] += prox.grad[i];
      break;
    }
    case MethodKind::kFedBalance: {
      if (psi == nullptr) throw ShapeError("fedbalance step needs the private weak learner");
      ForwardResult psi_fwd = forward(*psi, batch);
      LossResult lr = fedbalance_loss(phi_fwd.logits, psi_fwd.logits, alpha, batch.labels);
      out.loss = lr.loss;
      out.grad_phi = backward(phi, phi_fwd.activations, lr.dlogits_phi);
      out.grad_psi = backward(*psi, psi_fwd.activations, *lr.dlogits_psi);
      out.kl_local_vs_fused =
          kl_divergence(softmax(phi_fwd.logits),
                        softmax(fused_logits(phi_fwd.logits, psi_fwd.logits, alpha)));
      break;
    }
  }
  return out;
}

}  // namespace fedsim

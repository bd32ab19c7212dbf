#pragma once

#include <optional>
#include <span>
#include <vector>

#include "fedsim/data.hpp"
#include "fedsim/nn.hpp"

namespace fedsim {

struct ConfidenceInterval {
  double low = 0.0;
  double high = 0.0;
  double width() const { return high - low; }
  bool operator==(const ConfidenceInterval&) const = default;
};

/// One evaluated round of an experiment.
struct RoundRecord {
  int round = 0;
  double global_accuracy = 0.0;
  double mean_per_class_acc = 0.0;
  ConfidenceInterval per_class_acc_ci95;
  std::optional<double> kl_local_vs_ensemble;
  double elapsed_seconds = 0.0;

  bool operator==(const RoundRecord&) const = default;
};

/// Predicted class per row; ties resolve to the lowest class index.
std::vector<int> argmax_rows(const Matrix& logits);

std::vector<int> predict(const ModelParams& model, const Dataset& data);

double accuracy(const ModelParams& model, const Dataset& test);

/// Entry c is the accuracy among test samples of class c. Throws DataError
/// when a class has no test samples.
std::vector<double> per_class_accuracy(const ModelParams& model, const Dataset& test);

struct MeanWithInterval {
  double mean = 0.0;
  ConfidenceInterval ci95;
};

/// Mean and normal-approximation 95% interval over the pooled
/// (model, class) per-class accuracies. Each model's per-class vector
/// averages to its mean per-class accuracy.
MeanWithInterval mean_per_class_accuracy(std::span<const ModelParams> models, const Dataset& test);
MeanWithInterval mean_with_ci95(std::span<const double> values);

/// Row-mean of sum_c p log(p / q); q is clamped below at 1e-12 and terms
/// with p == 0 contribute nothing. Rows must sum to 1 within 1e-6.
double kl_divergence(const Matrix& p, const Matrix& q);

/// Round of the first record reaching `target` global accuracy.
std::optional<int> rounds_to_target(std::span<const RoundRecord> history, double target);

}  // namespace fedsim

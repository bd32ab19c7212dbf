#include "fedsim/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "fedsim/errors.hpp"

namespace fedsim {

namespace {

constexpr std::size_t kEvalChunk = 256;
constexpr double kQClamp = 1e-12;
constexpr double kZ95 = 1.959963984540054;

}  // namespace

std::vector<int> argmax_rows(const Matrix& logits) {
  std::vector<int> out(logits.rows);
  for (std::size_t r = 0; r < logits.rows; ++r) {
    auto row = logits.row(r);
    // max_element returns the first maximum.
    out[r] = static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin());
  }
  return out;
}

std::vector<int> predict(const ModelParams& model, const Dataset& data) {
  std::vector<int> preds;
  preds.reserve(data.size());
  std::vector<std::size_t> idx;
  for (std::size_t start = 0; start < data.size(); start += kEvalChunk) {
    const std::size_t end = std::min(data.size(), start + kEvalChunk);
    idx.resize(end - start);
    for (std::size_t i = start; i < end; ++i) idx[i - start] = i;
    Batch b = make_batch(data, idx);
    auto chunk = argmax_rows(forward(model, b.inputs).logits);
    preds.insert(preds.end(), chunk.begin(), chunk.end());
  }
  return preds;
}

double accuracy(const ModelParams& model, const Dataset& test) {
  if (test.size() == 0) throw DataError("accuracy: empty test set");
  const auto preds = predict(model, test);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) correct += preds[i] == test.labels[i];
  return static_cast<double>(correct) / static_cast<double>(test.size());
}

std::vector<double> per_class_accuracy(const ModelParams& model, const Dataset& test) {
  const auto preds = predict(model, test);
  std::vector<std::size_t> correct(test.num_classes, 0), seen(test.num_classes, 0);
  for (std::size_t i = 0; i < preds.size(); ++i) {
    ++seen[test.labels[i]];
    correct[test.labels[i]] += preds[i] == test.labels[i];
  }
  std::vector<double> acc(test.num_classes);
  for (std::size_t c = 0; c < acc.size(); ++c) {
    if (seen[c] == 0) {
      throw DataError("per_class_accuracy: class " + std::to_string(c) + " absent from test set");
    }
    acc[c] = static_cast<double>(correct[c]) / static_cast<double>(seen[c]);
  }
  return acc;
}

MeanWithInterval mean_with_ci95(std::span<const double> values) {
  MeanWithInterval out;
  if (values.empty()) return out;
  double sum = 0.0;
  for (double v : values) sum += v;
  out.mean = sum / static_cast<double>(values.size());
  double half = 0.0;
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - out.mean) * (v - out.mean);
    const double sd = std::sqrt(ss / static_cast<double>(values.size() - 1));
    half = kZ95 * sd / std::sqrt(static_cast<double>(values.size()));
  }
  out.ci95 = {out.mean - half, out.mean + half};
  return out;
}

MeanWithInterval mean_per_class_accuracy(std::span<const ModelParams> models, const Dataset& test) {
  if (models.empty()) throw DataError("mean_per_class_accuracy: no models");
  std::vector<double> pooled;
  pooled.reserve(models.size() * test.num_classes);
  for (const auto& m : models) {
    auto v = per_class_accuracy(m, test);
    pooled.insert(pooled.end(), v.begin(), v.end());
  }
  return mean_with_ci95(pooled);
}

double kl_divergence(const Matrix& p, const Matrix& q) {
  if (p.rows != q.rows || p.cols != q.cols || p.rows == 0) {
    throw ShapeError("kl_divergence: p and q must be non-empty and equally shaped");
  }
  double total = 0.0;
  for (std::size_t r = 0; r < p.rows; ++r) {
    double psum = 0.0, qsum = 0.0, row = 0.0;
    for (std::size_t c = 0; c < p.cols; ++c) {
      psum += p(r, c);
      qsum += q(r, c);
      if (p(r, c) > 0.0) row += p(r, c) * std::log(p(r, c) / std::max(q(r, c), kQClamp));
    }
    if (std::abs(psum - 1.0) > 1e-6 || std::abs(qsum - 1.0) > 1e-6) {
      throw ShapeError("kl_divergence: row " + std::to_string(r) + " is not a distribution");
    }
    total += row;
  }
  return total / static_cast<double>(p.rows);
}

std::optional<int> rounds_to_target(std::span<const RoundRecord> history, double target) {
  for (const auto& rec : history) {
    if (rec.global_accuracy >= target) return rec.round;
  }
  return std::nullopt;
}

}  // namespace fedsim

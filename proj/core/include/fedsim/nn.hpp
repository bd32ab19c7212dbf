#pragma once

// Small feed-forward network engine: a fixed menu of layers with
// hand-written backward passes, double precision throughout.

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace fedsim {

/// (features) or (channels, height, width).
using Shape = std::vector<std::size_t>;

std::size_t shape_size(const Shape& shape);
std::string shape_string(const Shape& shape);

struct DenseLayer {
  std::size_t in = 0;
  std::size_t out = 0;
  bool operator==(const DenseLayer&) const = default;
};

struct ReluLayer {
  bool operator==(const ReluLayer&) const = default;
};

/// Stride 1, zero "same" padding of kernel / 2 on each side; kernel must be odd.
struct Conv2dLayer {
  std::size_t in_channels = 0;
  std::size_t out_channels = 0;
  std::size_t kernel = 3;
  bool operator==(const Conv2dLayer&) const = default;
};

/// 2x2 window, stride 2; odd trailing rows/columns are dropped.
struct MaxPool2x2Layer {
  bool operator==(const MaxPool2x2Layer&) const = default;
};

struct FlattenLayer {
  bool operator==(const FlattenLayer&) const = default;
};

using LayerSpec = std::variant<DenseLayer, ReluLayer, Conv2dLayer, MaxPool2x2Layer, FlattenLayer>;

std::string layer_name(const LayerSpec& layer);

/// Immutable network architecture. Construction validates every adjacent
/// shape pair and that the last layer emits exactly `num_classes` values;
/// violations throw ShapeError. Copies share the validated layout.
class ArchDescriptor {
 public:
  struct LayerInfo {
    LayerSpec spec;
    Shape input_shape;
    Shape output_shape;
    std::size_t param_offset = 0;
    std::size_t weight_count = 0;
    std::size_t bias_count = 0;
  };

  ArchDescriptor(Shape input_shape, std::vector<LayerSpec> layers, std::size_t num_classes);

  const Shape& input_shape() const { return impl_->input_shape; }
  std::size_t input_size() const { return impl_->input_size; }
  std::size_t num_classes() const { return impl_->num_classes; }
  std::size_t param_count() const { return impl_->param_count; }
  std::size_t num_layers() const { return impl_->layers.size(); }
  const LayerInfo& layer(std::size_t i) const { return impl_->layers.at(i); }
  std::span<const LayerInfo> layers() const { return impl_->layers; }

  std::string describe() const;

  bool operator==(const ArchDescriptor& other) const;

 private:
  struct Impl {
    Shape input_shape;
    std::size_t input_size = 0;
    std::size_t num_classes = 0;
    std::size_t param_count = 0;
    std::vector<LayerInfo> layers;
  };
  std::shared_ptr<const Impl> impl_;
};

/// Flat, layer-major parameter vector. For each parametrised layer the
/// weights come first (dense: [out][in], conv: [out][in][k][k]) followed by
/// the biases.
struct ModelParams {
  ArchDescriptor arch;
  std::vector<double> values;

  ModelParams(ArchDescriptor a, std::vector<double> v);
  explicit ModelParams(ArchDescriptor a);  // all zeros

  std::span<double> weights(std::size_t layer);
  std::span<const double> weights(std::size_t layer) const;
  std::span<double> biases(std::size_t layer);
  std::span<const double> biases(std::size_t layer) const;

  std::size_t size() const { return values.size(); }
};

/// Per-layer view of a ModelParams; layers without parameters are empty.
struct LayerParams {
  std::vector<double> weights;
  std::vector<double> biases;
  bool operator==(const LayerParams&) const = default;
};

std::vector<LayerParams> unflatten(const ModelParams& params);
ModelParams flatten(const ArchDescriptor& arch, const std::vector<LayerParams>& layers);

/// Dense row-major tensor whose leading dimension is the batch.
struct Tensor {
  Shape shape;
  std::vector<double> data;

  std::size_t batch() const { return shape.empty() ? 0 : shape.front(); }
  std::size_t sample_size() const;
};

struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
  std::span<double> row(std::size_t r) { return {data.data() + r * cols, cols}; }
  std::span<const double> row(std::size_t r) const { return {data.data() + r * cols, cols}; }

  bool operator==(const Matrix&) const = default;
};

struct Batch {
  Tensor inputs;
  std::vector<int> labels;

  std::size_t size() const { return labels.size(); }
};

/// Checks batch size >= 1, matching input/label counts and labels in [0, num_classes).
void validate_batch(const Batch& batch, std::size_t num_classes);

/// Layer inputs retained by forward() for the matching backward() call.
struct Activations {
  ArchDescriptor arch;
  std::uint64_t params_fingerprint = 0;
  std::size_t batch_size = 0;
  std::vector<std::vector<double>> layer_inputs;
  std::vector<std::vector<std::uint32_t>> pool_argmax;  // per layer, empty unless max-pool
};

struct ForwardResult {
  Matrix logits;  // batch x num_classes, pre-softmax
  Activations activations;
};

ModelParams init_model(const ArchDescriptor& arch, std::uint64_t seed);

ForwardResult forward(const ModelParams& params, const Tensor& inputs);
ForwardResult forward(const ModelParams& params, const Batch& batch);

/// Gradient of the scalar loss w.r.t. every parameter, given d loss / d logits.
std::vector<double> backward(const ModelParams& params, const Activations& activations,
                             const Matrix& dlogits);

Matrix softmax(const Matrix& logits);

struct CrossEntropy {
  double loss = 0.0;  // batch mean
  Matrix dlogits;
};

CrossEntropy softmax_cross_entropy(const Matrix& logits, std::span<const int> labels);

struct SgdHyper {
  double lr = 0.01;
  double momentum = 0.9;
  double weight_decay = 1e-5;
  bool operator==(const SgdHyper&) const = default;
};

struct OptState {
  std::vector<double> momentum_buffer;
  SgdHyper hyper;
};

OptState make_opt_state(const ModelParams& params, const SgdHyper& hyper);

/// buffer <- momentum * buffer + (grad + weight_decay * params);
/// params <- params - lr * buffer.
void sgd_step(ModelParams& params, std::span<const double> grad, OptState& opt);

/// Multiply-accumulates of one single-sample forward pass.
std::uint64_t count_macs(const ArchDescriptor& arch);

std::uint64_t fingerprint(std::span<const double> values);

}  // namespace fedsim

#include "fedsim/nn.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <sstream>

#include "fedsim/errors.hpp"
#include "fedsim/rng.hpp"

namespace fedsim {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void check_finite(std::span<const double> values, std::size_t layer, const LayerSpec& spec) {
  for (double v : values) {
    if (!std::isfinite(v)) {
      throw NumericError("non-finite activation after layer " + std::to_string(layer) + " (" +
                         layer_name(spec) + ")");
    }
  }
}

void dense_forward(const DenseLayer& l, std::span<const double> w, std::span<const double> b,
                   const double* in, double* out, std::size_t batch) {
  for (std::size_t n = 0; n < batch; ++n) {
    const double* x = in + n * l.in;
    double* y = out + n * l.out;
    for (std::size_t o = 0; o < l.out; ++o) {
      const double* wrow = w.data() + o * l.in;
      double acc = b[o];
      for (std::size_t i = 0; i < l.in; ++i) acc += wrow[i] * x[i];
      y[o] = acc;
    }
  }
}

void dense_backward(const DenseLayer& l, std::span<const double> w, const double* in,
                    const double* dout, double* dw, double* db, double* din, std::size_t batch) {
  for (std::size_t n = 0; n < batch; ++n) {
    const double* x = in + n * l.in;
    const double* g = dout + n * l.out;
    double* dx = din ? din + n * l.in : nullptr;
    for (std::size_t o = 0; o < l.out; ++o) {
      const double go = g[o];
      if (go == 0.0) continue;
      db[o] += go;
      double* dwrow = dw + o * l.in;
      const double* wrow = w.data() + o * l.in;
      for (std::size_t i = 0; i < l.in; ++i) dwrow[i] += go * x[i];
      if (dx) {
        for (std::size_t i = 0; i < l.in; ++i) dx[i] += go * wrow[i];
      }
    }
  }
}

struct ConvGeometry {
  std::size_t cin, cout, k, h, w, pad;
};

// Valid output range [lo, hi) along one axis for kernel offset `k_off`.
inline void axis_range(std::size_t k_off, std::size_t pad, std::size_t extent, std::size_t& lo,
                       std::size_t& hi) {
  // input index = out + k_off - pad must lie in [0, extent)
  lo = k_off < pad ? pad - k_off : 0;
  std::size_t shift = k_off > pad ? k_off - pad : 0;
  hi = extent > shift ? extent - shift : 0;
  if (hi < lo) hi = lo;
}

void conv_forward(const ConvGeometry& g, std::span<const double> w, std::span<const double> b,
                  const double* in, double* out, std::size_t batch) {
  const std::size_t plane = g.h * g.w;
  for (std::size_t n = 0; n < batch; ++n) {
    const double* x = in + n * g.cin * plane;
    double* y = out + n * g.cout * plane;
    for (std::size_t co = 0; co < g.cout; ++co) {
      double* yp = y + co * plane;
      std::fill(yp, yp + plane, b[co]);
      for (std::size_t ci = 0; ci < g.cin; ++ci) {
        const double* xp = x + ci * plane;
        for (std::size_t ky = 0; ky < g.k; ++ky) {
          std::size_t y_lo, y_hi;
          axis_range(ky, g.pad, g.h, y_lo, y_hi);
          for (std::size_t kx = 0; kx < g.k; ++kx) {
            std::size_t x_lo, x_hi;
            axis_range(kx, g.pad, g.w, x_lo, x_hi);
            const double wv = w[((co * g.cin + ci) * g.k + ky) * g.k + kx];
            const std::size_t span = x_hi - x_lo;
            for (std::size_t oy = y_lo; oy < y_hi; ++oy) {
              const double* xrow = xp + (oy + ky - g.pad) * g.w + (x_lo + kx - g.pad);
              double* yrow = yp + oy * g.w + x_lo;
              for (std::size_t j = 0; j < span; ++j) yrow[j] += wv * xrow[j];
            }
          }
        }
      }
    }
  }
}

void conv_backward(const ConvGeometry& g, std::span<const double> w, const double* in,
                   const double* dout, double* dw, double* db, double* din, std::size_t batch) {
  const std::size_t plane = g.h * g.w;
  for (std::size_t n = 0; n < batch; ++n) {
    const double* x = in + n * g.cin * plane;
    const double* gy = dout + n * g.cout * plane;
    double* dx = din ? din + n * g.cin * plane : nullptr;
    for (std::size_t co = 0; co < g.cout; ++co) {
      const double* gp = gy + co * plane;
      double bsum = 0.0;
      for (std::size_t i = 0; i < plane; ++i) bsum += gp[i];
      db[co] += bsum;
      for (std::size_t ci = 0; ci < g.cin; ++ci) {
        const double* xp = x + ci * plane;
        double* dxp = dx ? dx + ci * plane : nullptr;
        for (std::size_t ky = 0; ky < g.k; ++ky) {
          std::size_t y_lo, y_hi;
          axis_range(ky, g.pad, g.h, y_lo, y_hi);
          for (std::size_t kx = 0; kx < g.k; ++kx) {
            std::size_t x_lo, x_hi;
            axis_range(kx, g.pad, g.w, x_lo, x_hi);
            const std::size_t widx = ((co * g.cin + ci) * g.k + ky) * g.k + kx;
            const double wv = w[widx];
            const std::size_t span = x_hi - x_lo;
            double acc = 0.0;
            for (std::size_t oy = y_lo; oy < y_hi; ++oy) {
              const std::size_t in_off = (oy + ky - g.pad) * g.w + (x_lo + kx - g.pad);
              const double* xrow = xp + in_off;
              const double* grow = gp + oy * g.w + x_lo;
              for (std::size_t j = 0; j < span; ++j) acc += grow[j] * xrow[j];
              if (dxp) {
                double* dxrow = dxp + in_off;
                for (std::size_t j = 0; j < span; ++j) dxrow[j] += wv * grow[j];
              }
            }
            dw[widx] += acc;
          }
        }
      }
    }
  }
}

void pool_forward(const Shape& in_shape, const double* in, double* out, std::uint32_t* argmax,
                  std::size_t batch) {
  const std::size_t c = in_shape[0], h = in_shape[1], w = in_shape[2];
  const std::size_t oh = h / 2, ow = w / 2;
  for (std::size_t n = 0; n < batch; ++n) {
    for (std::size_t ch = 0; ch < c; ++ch) {
      const double* xp = in + (n * c + ch) * h * w;
      const std::size_t out_base = (n * c + ch) * oh * ow;
      for (std::size_t oy = 0; oy < oh; ++oy) {
        for (std::size_t ox = 0; ox < ow; ++ox) {
          std::size_t best = (2 * oy) * w + 2 * ox;
          for (std::size_t dy = 0; dy < 2; ++dy) {
            for (std::size_t dx = 0; dx < 2; ++dx) {
              std::size_t idx = (2 * oy + dy) * w + 2 * ox + dx;
              if (xp[idx] > xp[best]) best = idx;
            }
          }
          out[out_base + oy * ow + ox] = xp[best];
          argmax[out_base + oy * ow + ox] = static_cast<std::uint32_t>(best);
        }
      }
    }
  }
}

}  // namespace

std::size_t shape_size(const Shape& shape) {
  if (shape.empty()) return 0;
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

std::string shape_string(const Shape& shape) {
  std::string s = "(";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(shape[i]);
  }
  return s + ")";
}

std::string layer_name(const LayerSpec& layer) {
  return std::visit(
      Overloaded{
          [](const DenseLayer& l) {
            return "dense(" + std::to_string(l.in) + "->" + std::to_string(l.out) + ")";
          },
          [](const ReluLayer&) { return std::string("relu"); },
          [](const Conv2dLayer& l) {
            return "conv2d(" + std::to_string(l.in_channels) + "->" +
                   std::to_string(l.out_channels) + "," + std::to_string(l.kernel) + ")";
          },
          [](const MaxPool2x2Layer&) { return std::string("maxpool2x2"); },
          [](const FlattenLayer&) { return std::string("flatten"); },
      },
      layer);
}

ArchDescriptor::ArchDescriptor(Shape input_shape, std::vector<LayerSpec> layers,
                               std::size_t num_classes) {
  auto impl = std::make_shared<Impl>();
  if (input_shape.size() != 1 && input_shape.size() != 3) {
    throw ShapeError("input shape must be (features) or (channels,height,width), got " +
                     shape_string(input_shape));
  }
  if (shape_size(input_shape) == 0) throw ShapeError("input shape has a zero dimension");
  if (num_classes == 0) throw ShapeError("num_classes must be positive");
  if (layers.empty()) throw ShapeError("architecture has no layers");

  impl->input_shape = input_shape;
  impl->input_size = shape_size(input_shape);
  impl->num_classes = num_classes;

  Shape current = input_shape;
  std::size_t offset = 0;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    LayerInfo info;
    info.spec = layers[i];
    info.input_shape = current;
    info.param_offset = offset;
    auto fail = [&](const std::string& why) {
      throw ShapeError("layer " + std::to_string(i) + " (" + layer_name(layers[i]) + "): " + why +
                       ", input shape " + shape_string(current));
    };
    std::visit(Overloaded{
                   [&](const DenseLayer& l) {
                     if (current.size() != 1) fail("dense expects a flat input");
                     if (l.in != current[0]) fail("input width mismatch");
                     if (l.out == 0) fail("zero output width");
                     info.weight_count = l.in * l.out;
                     info.bias_count = l.out;
                     current = {l.out};
                   },
                   [&](const ReluLayer&) {},
                   [&](const Conv2dLayer& l) {
                     if (current.size() != 3) fail("conv2d expects (channels,height,width)");
                     if (l.in_channels != current[0]) fail("channel mismatch");
                     if (l.kernel == 0 || l.kernel % 2 == 0) fail("kernel must be odd");
                     if (l.out_channels == 0) fail("zero output channels");
                     info.weight_count = l.out_channels * l.in_channels * l.kernel * l.kernel;
                     info.bias_count = l.out_channels;
                     current = {l.out_channels, current[1], current[2]};
                   },
                   [&](const MaxPool2x2Layer&) {
                     if (current.size() != 3) fail("maxpool2x2 expects (channels,height,width)");
                     if (current[1] < 2 || current[2] < 2) fail("spatial extent below 2");
                     current = {current[0], current[1] / 2, current[2] / 2};
                   },
                   [&](const FlattenLayer&) { current = {shape_size(current)}; },
               },
               layers[i]);
    info.output_shape = current;
    offset += info.weight_count + info.bias_count;
    impl->layers.push_back(std::move(info));
  }
  if (current.size() != 1 || current[0] != num_classes) {
    throw ShapeError("final layer emits " + shape_string(current) + " but num_classes is " +
                     std::to_string(num_classes));
  }
  impl->param_count = offset;
  impl_ = std::move(impl);
}

std::string ArchDescriptor::describe() const {
  std::ostringstream os;
  os << "input" << shape_string(input_shape());
  for (const auto& l : layers()) os << " " << layer_name(l.spec);
  return os.str();
}

bool ArchDescriptor::operator==(const ArchDescriptor& other) const {
  if (impl_ == other.impl_) return true;
  if (input_shape() != other.input_shape() || num_classes() != other.num_classes() ||
      num_layers() != other.num_layers()) {
    return false;
  }
  for (std::size_t i = 0; i < num_layers(); ++i) {
    if (!(layer(i).spec == other.layer(i).spec)) return false;
  }
  return true;
}

ModelParams::ModelParams(ArchDescriptor a, std::vector<double> v)
    : arch(std::move(a)), values(std::move(v)) {
  if (values.size() != arch.param_count()) {
    throw ShapeError("parameter vector has " + std::to_string(values.size()) +
                     " entries, architecture needs " + std::to_string(arch.param_count()));
  }
}

ModelParams::ModelParams(ArchDescriptor a) : arch(std::move(a)), values(arch.param_count(), 0.0) {}

std::span<double> ModelParams::weights(std::size_t layer) {
  const auto& l = arch.layer(layer);
  return {values.data() + l.param_offset, l.weight_count};
}
std::span<const double> ModelParams::weights(std::size_t layer) const {
  const auto& l = arch.layer(layer);
  return {values.data() + l.param_offset, l.weight_count};
}
std::span<double> ModelParams::biases(std::size_t layer) {
  const auto& l = arch.layer(layer);
  return {values.data() + l.param_offset + l.weight_count, l.bias_count};
}
std::span<const double> ModelParams::biases(std::size_t layer) const {
  const auto& l = arch.layer(layer);
  return {values.data() + l.param_offset + l.weight_count, l.bias_count};
}

std::vector<LayerParams> unflatten(const ModelParams& params) {
  std::vector<LayerParams> out(params.arch.num_layers());
  for (std::size_t i = 0; i < out.size(); ++i) {
    auto w = params.weights(i);
    auto b = params.biases(i);
    out[i].weights.assign(w.begin(), w.end());
    out[i].biases.assign(b.begin(), b.end());
  }
  return out;
}

ModelParams flatten(const ArchDescriptor& arch, const std::vector<LayerParams>& layers) {
  if (layers.size() != arch.num_layers()) throw ShapeError("layer count mismatch in flatten");
  ModelParams params(arch);
  for (std::size_t i = 0; i < layers.size(); ++i) {
    auto w = params.weights(i);
    auto b = params.biases(i);
    if (layers[i].weights.size() != w.size() || layers[i].biases.size() != b.size()) {
      throw ShapeError("layer " + std::to_string(i) + " parameter count mismatch in flatten");
    }
    std::copy(layers[i].weights.begin(), layers[i].weights.end(), w.begin());
    std::copy(layers[i].biases.begin(), layers[i].biases.end(), b.begin());
  }
  return params;
}

std::size_t Tensor::sample_size() const {
  if (shape.size() < 2) return 0;
  std::size_t n = 1;
  for (std::size_t i = 1; i < shape.size(); ++i) n *= shape[i];
  return n;
}

void validate_batch(const Batch& batch, std::size_t num_classes) {
  if (batch.size() == 0) throw ShapeError("empty batch");
  if (batch.inputs.batch() != batch.size()) {
    throw ShapeError("batch has " + std::to_string(batch.inputs.batch()) + " inputs but " +
                     std::to_string(batch.size()) + " labels");
  }
  for (int y : batch.labels) {
    if (y < 0 || static_cast<std::size_t>(y) >= num_classes) {
      throw ShapeError("label " + std::to_string(y) + " outside [0, " +
                       std::to_string(num_classes) + ")");
    }
  }
}

ModelParams init_model(const ArchDescriptor& arch, std::uint64_t seed) {
  ModelParams params(arch);
  Rng rng(seed);
  for (std::size_t i = 0; i < arch.num_layers(); ++i) {
    const auto& info = arch.layer(i);
    if (info.weight_count == 0) continue;
    std::size_t fan_in = std::visit(
        Overloaded{
            [](const DenseLayer& l) { return l.in; },
            [](const Conv2dLayer& l) { return l.in_channels * l.kernel * l.kernel; },
            [](const auto&) { return std::size_t{1}; },
        },
        info.spec);
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (double& w : params.weights(i)) w = uniform_real(rng, -bound, bound);
  }
  return params;
}

std::uint64_t fingerprint(std::span<const double> values) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  const auto* bytes = reinterpret_cast<const unsigned char*>(values.data());
  for (std::size_t i = 0; i < values.size_bytes(); ++i) {
    h ^= bytes[i];
    h *= 0x100000001b3ULL;
  }
  return h ^ values.size();
}

ForwardResult forward(const ModelParams& params, const Tensor& inputs) {
  const auto& arch = params.arch;
  if (params.values.size() != arch.param_count()) throw ShapeError("parameter length mismatch");
  if (inputs.shape.size() != arch.input_shape().size() + 1 ||
      !std::equal(arch.input_shape().begin(), arch.input_shape().end(),
                  inputs.shape.begin() + 1)) {
    throw ShapeError("input tensor " + shape_string(inputs.shape) +
                     " does not match architecture input " + shape_string(arch.input_shape()));
  }
  const std::size_t batch = inputs.batch();
  if (batch == 0) throw ShapeError("empty input batch");
  if (inputs.data.size() != batch * arch.input_size()) {
    throw ShapeError("input tensor data length does not match its shape");
  }

  ForwardResult result{Matrix(), Activations{arch, fingerprint(params.values), batch, {}, {}}};
  auto& acts = result.activations;
  acts.layer_inputs.resize(arch.num_layers());
  acts.pool_argmax.resize(arch.num_layers());

  std::vector<double> current = inputs.data;
  for (std::size_t i = 0; i < arch.num_layers(); ++i) {
    const auto& info = arch.layer(i);
    std::vector<double> next(batch * shape_size(info.output_shape));
    std::visit(Overloaded{
                   [&](const DenseLayer& l) {
                     dense_forward(l, params.weights(i), params.biases(i), current.data(),
                                   next.data(), batch);
                   },
                   [&](const ReluLayer&) {
                     for (std::size_t j = 0; j < current.size(); ++j)
                       next[j] = current[j] > 0.0 ? current[j] : 0.0;
                   },
                   [&](const Conv2dLayer& l) {
                     ConvGeometry g{l.in_channels, l.out_channels, l.kernel,
                                    info.input_shape[1], info.input_shape[2], l.kernel / 2};
                     conv_forward(g, params.weights(i), params.biases(i), current.data(),
                                  next.data(), batch);
                   },
                   [&](const MaxPool2x2Layer&) {
                     acts.pool_argmax[i].resize(next.size());
                     pool_forward(info.input_shape, current.data(), next.data(),
                                  acts.pool_argmax[i].data(), batch);
                   },
                   [&](const FlattenLayer&) { next = current; },
               },
               info.spec);
    check_finite(next, i, info.spec);
    acts.layer_inputs[i] = std::move(current);
    current = std::move(next);
  }

  result.logits.rows = batch;
  result.logits.cols = arch.num_classes();
  result.logits.data = std::move(current);
  return result;
}

ForwardResult forward(const ModelParams& params, const Batch& batch) {
  validate_batch(batch, params.arch.num_classes());
  return forward(params, batch.inputs);
}

std::vector<double> backward(const ModelParams& params, const Activations& acts,
                             const Matrix& dlogits) {
  const auto& arch = params.arch;
  if (!(acts.arch == arch)) throw ShapeError("activations were produced by a different architecture");
  if (acts.layer_inputs.size() != arch.num_layers()) throw ShapeError("activations are incomplete");
  if (acts.params_fingerprint != fingerprint(params.values)) {
    throw ShapeError("stale activations: parameters changed since the forward pass");
  }
  const std::size_t batch = acts.batch_size;
  if (dlogits.rows != batch || dlogits.cols != arch.num_classes()) {
    throw ShapeError("dlogits is " + std::to_string(dlogits.rows) + "x" +
                     std::to_string(dlogits.cols) + ", expected " + std::to_string(batch) + "x" +
                     std::to_string(arch.num_classes()));
  }

  std::vector<double> grad(arch.param_count(), 0.0);
  std::vector<double> upstream = dlogits.data;
  for (std::size_t i = arch.num_layers(); i-- > 0;) {
    const auto& info = arch.layer(i);
    const auto& input = acts.layer_inputs[i];
    if (input.size() != batch * shape_size(info.input_shape)) {
      throw ShapeError("activations for layer " + std::to_string(i) + " have the wrong size");
    }
    // The input gradient of the first layer is never needed.
    const bool need_input_grad = i > 0;
    std::vector<double> down(need_input_grad ? input.size() : 0, 0.0);
    double* dw = grad.data() + info.param_offset;
    double* db = dw + info.weight_count;
    std::visit(Overloaded{
                   [&](const DenseLayer& l) {
                     dense_backward(l, params.weights(i), input.data(), upstream.data(), dw, db,
                                    need_input_grad ? down.data() : nullptr, batch);
                   },
                   [&](const ReluLayer&) {
                     if (!need_input_grad) return;
                     for (std::size_t j = 0; j < input.size(); ++j)
                       down[j] = input[j] > 0.0 ? upstream[j] : 0.0;
                   },
                   [&](const Conv2dLayer& l) {
                     ConvGeometry g{l.in_channels, l.out_channels, l.kernel,
                                    info.input_shape[1], info.input_shape[2], l.kernel / 2};
                     conv_backward(g, params.weights(i), input.data(), upstream.data(), dw, db,
                                   need_input_grad ? down.data() : nullptr, batch);
                   },
                   [&](const MaxPool2x2Layer&) {
                     if (!need_input_grad) return;
                     const auto& arg = acts.pool_argmax[i];
                     if (arg.size() != upstream.size()) throw ShapeError("pool indices mismatch");
                     const std::size_t c = info.input_shape[0];
                     const std::size_t in_plane = info.input_shape[1] * info.input_shape[2];
                     const std::size_t out_plane = shape_size(info.output_shape) / c;
                     for (std::size_t p = 0; p < batch * c; ++p) {
                       for (std::size_t j = 0; j < out_plane; ++j) {
                         down[p * in_plane + arg[p * out_plane + j]] += upstream[p * out_plane + j];
                       }
                     }
                   },
                   [&](const FlattenLayer&) {
                     if (need_input_grad) down = upstream;
                   },
               },
               info.spec);
    upstream = std::move(down);
  }
  return grad;
}

Matrix softmax(const Matrix& logits) {
  Matrix p(logits.rows, logits.cols);
  for (std::size_t r = 0; r < logits.rows; ++r) {
    auto in = logits.row(r);
    auto out = p.row(r);
    const double mx = *std::max_element(in.begin(), in.end());
    double sum = 0.0;
    for (std::size_t c = 0; c < in.size(); ++c) {
      out[c] = std::exp(in[c] - mx);
      sum += out[c];
    }
    for (double& v : out) v /= sum;
  }
  return p;
}

CrossEntropy softmax_cross_entropy(const Matrix& logits, std::span<const int> labels) {
  if (logits.rows == 0 || logits.rows != labels.size()) {
    throw ShapeError("cross-entropy needs one label per logits row");
  }
  CrossEntropy ce;
  ce.dlogits = Matrix(logits.rows, logits.cols);
  const double inv_batch = 1.0 / static_cast<double>(logits.rows);
  double total = 0.0;
  for (std::size_t r = 0; r < logits.rows; ++r) {
    const int y = labels[r];
    if (y < 0 || static_cast<std::size_t>(y) >= logits.cols) {
      throw ShapeError("label " + std::to_string(y) + " out of range");
    }
    auto in = logits.row(r);
    const double mx = *std::max_element(in.begin(), in.end());
    double sum = 0.0;
    for (double v : in) sum += std::exp(v - mx);
    const double log_sum = std::log(sum);
    total += -(in[y] - mx - log_sum);
    auto d = ce.dlogits.row(r);
    for (std::size_t c = 0; c < in.size(); ++c) {
      const double prob = std::exp(in[c] - mx - log_sum);
      d[c] = (prob - (static_cast<int>(c) == y ? 1.0 : 0.0)) * inv_batch;
    }
  }
  ce.loss = total * inv_batch;
  return ce;
}

OptState make_opt_state(const ModelParams& params, const SgdHyper& hyper) {
  return OptState{std::vector<double>(params.size(), 0.0), hyper};
}

void sgd_step(ModelParams& params, std::span<const double> grad, OptState& opt) {
  if (grad.size() != params.size() || opt.momentum_buffer.size() != params.size()) {
    throw ShapeError("sgd_step: gradient, buffer, and parameter lengths differ");
  }
  for (double g : grad) {
    if (!std::isfinite(g)) throw NumericError("sgd_step: non-finite gradient");
  }
  const auto& h = opt.hyper;
  auto& buf = opt.momentum_buffer;
  for (std::size_t i = 0; i < grad.size(); ++i) {
    buf[i] = h.momentum * buf[i] + (grad[i] + h.weight_decay * params.values[i]);
    params.values[i] -= h.lr * buf[i];
  }
}

std::uint64_t count_macs(const ArchDescriptor& arch) {
  std::uint64_t total = 0;
  for (const auto& info : arch.layers()) {
    total += std::visit(
        Overloaded{
            [](const DenseLayer& l) { return std::uint64_t{l.in} * l.out; },
            [&](const Conv2dLayer& l) {
              const std::uint64_t positions = info.output_shape[1] * info.output_shape[2];
              return positions * l.kernel * l.kernel * l.in_channels * l.out_channels;
            },
            [](const auto&) { return std::uint64_t{0}; },
        },
        info.spec);
  }
  return total;
}

}  // namespace fedsim

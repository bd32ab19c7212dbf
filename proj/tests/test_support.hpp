#pragma once

// Independent reference implementations used as test oracles. Nothing in
// here calls the library's forward/backward code paths.

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "fedsim/nn.hpp"

namespace fedsim::testing {

/// Central differences of `loss` w.r.t. every entry of `x`.
inline std::vector<double> numeric_gradient(const std::function<double(const std::vector<double>&)>& loss,
                                            std::vector<double> x, double eps = 1e-4) {
  std::vector<double> g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double orig = x[i];
    x[i] = orig + eps;
    const double up = loss(x);
    x[i] = orig - eps;
    const double down = loss(x);
    x[i] = orig;
    g[i] = (up - down) / (2.0 * eps);
  }
  return g;
}

/// Largest element-wise |a - n| / max(|a|, |n|). Entries where both sides are
/// below `floor` in magnitude are compared absolutely against `floor`
/// (finite differences cannot resolve them relatively).
inline double max_relative_error(const std::vector<double>& analytic,
                                 const std::vector<double>& numeric, double floor = 1e-7) {
  double worst = 0.0;
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    const double a = analytic[i], n = numeric[i];
    const double scale = std::max(std::abs(a), std::abs(n));
    const double err = scale < floor ? std::abs(a - n) / floor * 1e-3 : std::abs(a - n) / scale;
    worst = std::max(worst, err);
  }
  return worst;
}

/// Straight-line forward pass following the documented parameter layout.
/// Returns batch x classes logits, row-major.
/// If `kink_margin` is given it receives the smallest distance of any ReLU
/// input from 0 and of any pool window's max from its runner-up.
inline std::vector<double> reference_forward(const ArchDescriptor& arch,
                                             const std::vector<double>& params,
                                             const std::vector<double>& inputs, std::size_t batch,
                                             double* kink_margin = nullptr) {
  std::vector<double> out;
  double margin = INFINITY;
  for (std::size_t n = 0; n < batch; ++n) {
    Shape shape = arch.input_shape();
    const std::size_t in_size = shape_size(shape);
    std::vector<double> x(inputs.begin() + static_cast<long>(n * in_size),
                          inputs.begin() + static_cast<long>((n + 1) * in_size));
    std::size_t off = 0;
    for (const auto& info : arch.layers()) {
      const LayerSpec& spec = info.spec;
      if (auto* d = std::get_if<DenseLayer>(&spec)) {
        std::vector<double> y(d->out);
        for (std::size_t o = 0; o < d->out; ++o) {
          double s = params[off + d->in * d->out + o];
          for (std::size_t i = 0; i < d->in; ++i) s += params[off + o * d->in + i] * x[i];
          y[o] = s;
        }
        off += d->in * d->out + d->out;
        x = y;
        shape = {d->out};
      } else if (std::holds_alternative<ReluLayer>(spec)) {
        for (double& v : x) {
          margin = std::min(margin, std::abs(v));
          v = std::max(v, 0.0);
        }
      } else if (auto* c = std::get_if<Conv2dLayer>(&spec)) {
        const long H = static_cast<long>(shape[1]), W = static_cast<long>(shape[2]);
        const long K = static_cast<long>(c->kernel), P = K / 2;
        const long CI = static_cast<long>(c->in_channels), CO = static_cast<long>(c->out_channels);
        auto in_at = [&](long ch, long yy, long xx) -> double {
          if (yy < 0 || yy >= H || xx < 0 || xx >= W) return 0.0;
          return x[static_cast<std::size_t>((ch * H + yy) * W + xx)];
        };
        auto w_at = [&](long co, long ci, long ky, long kx) {
          return params[off + static_cast<std::size_t>(((co * CI + ci) * K + ky) * K + kx)];
        };
        const std::size_t bias_off = off + static_cast<std::size_t>(CO * CI * K * K);
        std::vector<double> y(static_cast<std::size_t>(CO * H * W));
        for (long co = 0; co < CO; ++co)
          for (long yy = 0; yy < H; ++yy)
            for (long xx = 0; xx < W; ++xx) {
              double s = params[bias_off + static_cast<std::size_t>(co)];
              for (long ci = 0; ci < CI; ++ci)
                for (long ky = 0; ky < K; ++ky)
                  for (long kx = 0; kx < K; ++kx)
                    s += w_at(co, ci, ky, kx) * in_at(ci, yy + ky - P, xx + kx - P);
              y[static_cast<std::size_t>((co * H + yy) * W + xx)] = s;
            }
        off = bias_off + static_cast<std::size_t>(CO);
        x = y;
        shape = {static_cast<std::size_t>(CO), shape[1], shape[2]};
      } else if (std::holds_alternative<MaxPool2x2Layer>(spec)) {
        const std::size_t C = shape[0], H = shape[1], W = shape[2];
        std::vector<double> y(C * (H / 2) * (W / 2));
        for (std::size_t ch = 0; ch < C; ++ch)
          for (std::size_t yy = 0; yy < H / 2; ++yy)
            for (std::size_t xx = 0; xx < W / 2; ++xx) {
              double m = -INFINITY, second = -INFINITY;
              for (std::size_t dy = 0; dy < 2; ++dy)
                for (std::size_t dx = 0; dx < 2; ++dx) {
                  const double v = x[(ch * H + 2 * yy + dy) * W + 2 * xx + dx];
                  if (v > m) {
                    second = m;
                    m = v;
                  } else {
                    second = std::max(second, v);
                  }
                }
              margin = std::min(margin, m - second);
              y[(ch * (H / 2) + yy) * (W / 2) + xx] = m;
            }
        x = y;
        shape = {C, H / 2, W / 2};
      } else {
        shape = {x.size()};
      }
    }
    out.insert(out.end(), x.begin(), x.end());
  }
  if (kink_margin != nullptr) *kink_margin = margin;
  return out;
}

/// True when no ReLU input or pool tie lies within `margin` of a kink, so
/// central differences of step 1e-4 stay on one smooth piece.
inline bool is_smooth_instance(const ArchDescriptor& arch, const std::vector<double>& params,
                               const std::vector<double>& inputs, std::size_t batch,
                               double margin = 1e-3) {
  double m = 0.0;
  reference_forward(arch, params, inputs, batch, &m);
  return m >= margin;
}

/// Mean softmax cross-entropy computed directly from its definition.
inline double reference_cross_entropy(const std::vector<double>& logits, std::size_t classes,
                                      const std::vector<int>& labels) {
  double total = 0.0;
  for (std::size_t r = 0; r < labels.size(); ++r) {
    double mx = -INFINITY;
    for (std::size_t c = 0; c < classes; ++c) mx = std::max(mx, logits[r * classes + c]);
    double s = 0.0;
    for (std::size_t c = 0; c < classes; ++c) s += std::exp(logits[r * classes + c] - mx);
    total += -(logits[r * classes + static_cast<std::size_t>(labels[r])] - mx - std::log(s));
  }
  return total / static_cast<double>(labels.size());
}

inline Tensor random_tensor(const Shape& sample_shape, std::size_t batch, std::mt19937_64& rng,
                            double lo = -1.0, double hi = 1.0) {
  Tensor t;
  t.shape.push_back(batch);
  t.shape.insert(t.shape.end(), sample_shape.begin(), sample_shape.end());
  std::uniform_real_distribution<double> u(lo, hi);
  t.data.resize(batch * shape_size(sample_shape));
  for (double& v : t.data) v = u(rng);
  return t;
}

inline std::vector<int> random_labels(std::size_t n, std::size_t classes, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> u(0, static_cast<int>(classes) - 1);
  std::vector<int> y(n);
  for (int& v : y) v = u(rng);
  return y;
}

/// One-sided Mann-Whitney U test of "a tends to exceed b" (normal
/// approximation, ties count half). Returns the z statistic.
inline double mann_whitney_z(const std::vector<double>& a, const std::vector<double>& b) {
  double u = 0.0;
  for (double x : a)
    for (double y : b) u += x > y ? 1.0 : (x == y ? 0.5 : 0.0);
  const double n1 = static_cast<double>(a.size()), n2 = static_cast<double>(b.size());
  return (u - n1 * n2 / 2.0) / std::sqrt(n1 * n2 * (n1 + n2 + 1.0) / 12.0);
}

/// Upper 5% point of the standard normal.
inline constexpr double kOneSidedZ05 = 1.6448536269514722;

}  // namespace fedsim::testing

#pragma once

#include <cstdint>
#include <cstring>
#include <functional>
#include <istream>
#include <ostream>
#include <utility>

#include "fgsfrql/common.hpp"
#include "fgsfrql/rng.hpp"

// Minimal dense feed-forward engine: tanh hidden layers, affine output.
// tanh is C-infinity, which keeps every loss built on these nets twice
// continuously differentiable in the parameters.

namespace fgsfrql {

struct NetLayout {
  std::vector<int> widths;  // input, hidden..., output

  NetLayout() = default;
  NetLayout(std::initializer_list<int> w) : widths(w) {}
  explicit NetLayout(std::vector<int> w) : widths(std::move(w)) {}

  void check() const {
    if (widths.size() < 2) throw ConfigError("net layout needs at least input and output widths");
    for (int w : widths)
      if (w <= 0) throw ConfigError("net layout widths must be positive");
  }

  int num_layers() const { return static_cast<int>(widths.size()) - 1; }
  int input_width() const { return widths.front(); }
  int output_width() const { return widths.back(); }

  // per layer: fan_out x fan_in weights (row-major), then fan_out biases
  int param_count() const {
    int n = 0;
    for (size_t l = 1; l < widths.size(); ++l) n += (widths[l - 1] + 1) * widths[l];
    return n;
  }

  bool operator==(const NetLayout& o) const { return widths == o.widths; }
};

struct ParamVector {
  NetLayout layout;
  Vec values;
};

struct NetGradient {
  NetLayout layout;
  Vec values;
};

namespace detail {

inline void require_congruent(const NetLayout& a, const NetLayout& b, const char* what) {
  if (!(a == b)) throw ShapeError(std::string(what) + ": layout mismatch");
}

inline void require_input_width(const NetLayout& layout, const Vec& input) {
  if (static_cast<int>(input.size()) != layout.input_width())
    throw ShapeError("net input width mismatch");
}

}  // namespace detail

// Zero-mean uniform weights scaled by 1/sqrt(fan_in); biases zero.
inline ParamVector net_init(const NetLayout& layout, uint64_t seed) {
  layout.check();
  ParamVector p{layout, Vec(static_cast<size_t>(layout.param_count()), 0.0)};
  Rng rng(seed);
  size_t off = 0;
  for (int l = 1; l <= layout.num_layers(); ++l) {
    const int fan_in = layout.widths[l - 1];
    const int fan_out = layout.widths[l];
    const double scale = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (int i = 0; i < fan_out * fan_in; ++i) p.values[off++] = rng.uniform(-scale, scale);
    off += static_cast<size_t>(fan_out);  // biases stay zero
  }
  return p;
}

inline Vec net_forward(const ParamVector& params, const Vec& input) {
  detail::require_input_width(params.layout, input);
  const auto& widths = params.layout.widths;
  Vec h = input;
  size_t off = 0;
  for (int l = 1; l < static_cast<int>(widths.size()); ++l) {
    const int fan_in = widths[l - 1];
    const int fan_out = widths[l];
    Vec z(static_cast<size_t>(fan_out));
    for (int o = 0; o < fan_out; ++o) {
      const double* w = params.values.data() + off + static_cast<size_t>(o) * fan_in;
      double acc = params.values[off + static_cast<size_t>(fan_out) * fan_in + o];
      for (int i = 0; i < fan_in; ++i) acc += w[i] * h[i];
      z[o] = acc;
    }
    off += static_cast<size_t>(fan_in + 1) * fan_out;
    if (l + 1 < static_cast<int>(widths.size()))
      for (double& v : z) v = std::tanh(v);
    h = std::move(z);
  }
  return h;
}

// Exact gradient of <output_cotangent, net_forward(params, input)> w.r.t. params.
inline NetGradient net_backward(const ParamVector& params, const Vec& input,
                                const Vec& output_cotangent) {
  detail::require_input_width(params.layout, input);
  if (static_cast<int>(output_cotangent.size()) != params.layout.output_width())
    throw ShapeError("net cotangent width mismatch");

  const auto& widths = params.layout.widths;
  const int layers = params.layout.num_layers();

  // forward pass, keeping activations of every layer
  std::vector<Vec> acts(static_cast<size_t>(layers) + 1);
  std::vector<size_t> offsets(static_cast<size_t>(layers));
  acts[0] = input;
  size_t off = 0;
  for (int l = 1; l <= layers; ++l) {
    const int fan_in = widths[l - 1];
    const int fan_out = widths[l];
    offsets[l - 1] = off;
    Vec z(static_cast<size_t>(fan_out));
    const Vec& prev = acts[l - 1];
    for (int o = 0; o < fan_out; ++o) {
      const double* w = params.values.data() + off + static_cast<size_t>(o) * fan_in;
      double acc = params.values[off + static_cast<size_t>(fan_out) * fan_in + o];
      for (int i = 0; i < fan_in; ++i) acc += w[i] * prev[i];
      z[o] = acc;
    }
    off += static_cast<size_t>(fan_in + 1) * fan_out;
    if (l < layers)
      for (double& v : z) v = std::tanh(v);
    acts[l] = std::move(z);
  }

  NetGradient g{params.layout, Vec(params.values.size(), 0.0)};
  Vec delta = output_cotangent;  // output layer is affine
  for (int l = layers; l >= 1; --l) {
    const int fan_in = widths[l - 1];
    const int fan_out = widths[l];
    const size_t base = offsets[l - 1];
    const Vec& prev = acts[l - 1];
    for (int o = 0; o < fan_out; ++o) {
      double* gw = g.values.data() + base + static_cast<size_t>(o) * fan_in;
      const double d = delta[o];
      for (int i = 0; i < fan_in; ++i) gw[i] += d * prev[i];
      g.values[base + static_cast<size_t>(fan_out) * fan_in + o] += d;
    }
    if (l > 1) {
      Vec prev_delta(static_cast<size_t>(fan_in), 0.0);
      for (int o = 0; o < fan_out; ++o) {
        const double* w = params.values.data() + base + static_cast<size_t>(o) * fan_in;
        const double d = delta[o];
        for (int i = 0; i < fan_in; ++i) prev_delta[i] += w[i] * d;
      }
      // tanh'(z) = 1 - tanh(z)^2, and prev holds tanh(z)
      for (int i = 0; i < fan_in; ++i) prev_delta[i] *= 1.0 - prev[i] * prev[i];
      delta = std::move(prev_delta);
    }
  }
  return g;
}

// Central differences per coordinate; the reference oracle for every
// analytic gradient in this library.
inline NetGradient finite_diff_grad(const std::function<double(const ParamVector&)>& loss,
                                    const ParamVector& params, double eps) {
  if (!(eps > 0.0)) throw ConfigError("finite_diff_grad: eps must be positive");
  NetGradient g{params.layout, Vec(params.values.size(), 0.0)};
  ParamVector probe = params;
  for (size_t i = 0; i < params.values.size(); ++i) {
    const double orig = params.values[i];
    probe.values[i] = orig + eps;
    const double hi = loss(probe);
    probe.values[i] = orig - eps;
    const double lo = loss(probe);
    probe.values[i] = orig;
    if (!std::isfinite(hi) || !std::isfinite(lo))
      throw NumericError("finite_diff_grad: non-finite loss evaluation");
    g.values[i] = (hi - lo) / (2.0 * eps);
  }
  return g;
}

inline ParamVector sgd_step(const ParamVector& params, const NetGradient& grad, double alpha) {
  detail::require_congruent(params.layout, grad.layout, "sgd_step");
  if (params.values.size() != grad.values.size()) throw ShapeError("sgd_step: length mismatch");
  ParamVector out = params;
  for (size_t i = 0; i < out.values.size(); ++i) out.values[i] -= alpha * grad.values[i];
  if (!all_finite(out.values)) throw NumericError("sgd_step: non-finite parameter values");
  return out;
}

// --- checkpoint encoding: u32 width count, u32 widths, f64 values (little-endian) ---

namespace detail {

inline void put_u32(std::ostream& os, uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
  os.write(reinterpret_cast<const char*>(b), 4);
}

inline uint32_t get_u32(std::istream& is) {
  unsigned char b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  if (!is) throw UsageError("truncated stream while reading u32");
  uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(b[i]) << (8 * i);
  return v;
}

inline void put_f64(std::ostream& os, double d) {
  uint64_t v;
  std::memcpy(&v, &d, 8);
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
  os.write(reinterpret_cast<const char*>(b), 8);
}

inline double get_f64(std::istream& is) {
  unsigned char b[8];
  is.read(reinterpret_cast<char*>(b), 8);
  if (!is) throw UsageError("truncated stream while reading f64");
  uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(b[i]) << (8 * i);
  double d;
  std::memcpy(&d, &v, 8);
  return d;
}

}  // namespace detail

inline void save_params(std::ostream& os, const ParamVector& p) {
  detail::put_u32(os, static_cast<uint32_t>(p.layout.widths.size()));
  for (int w : p.layout.widths) detail::put_u32(os, static_cast<uint32_t>(w));
  for (double v : p.values) detail::put_f64(os, v);
}

inline ParamVector load_params(std::istream& is) {
  const uint32_t n = detail::get_u32(is);
  NetLayout layout;
  layout.widths.resize(n);
  for (uint32_t i = 0; i < n; ++i) layout.widths[i] = static_cast<int>(detail::get_u32(is));
  layout.check();
  ParamVector p{layout, Vec(static_cast<size_t>(layout.param_count()))};
  for (double& v : p.values) v = detail::get_f64(is);
  return p;
}

}  // namespace fgsfrql

// SPDX-License-Identifier: Apache-2.0
#include "dmqca/ops.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "conv.hpp"
#include "dmqca/errors.hpp"

namespace dmqca {

namespace {

using detail::Node;

Tensor& parent_grad(Node& self, std::size_t i) { return self.parents[i]->ensure_grad(); }
bool parent_wants(const Node& self, std::size_t i) { return self.parents[i]->requires_grad; }
const Tensor& parent_value(const Node& self, std::size_t i) { return self.parents[i]->value; }

void require_rank(const Var& x, std::size_t rank, const char* op) {
  if (x.value().rank() != rank)
    throw DimensionError(std::string(op) + ": expected rank " + std::to_string(rank) +
                         " input, got " + shape_str(x.shape()));
}

void require_same_shape(const Var& a, const Var& b, const char* op) {
  if (a.shape() != b.shape())
    throw DimensionError(std::string(op) + ": shape mismatch " + shape_str(a.shape()) + " vs " +
                         shape_str(b.shape()));
}

void require_axis(const Var& x, std::size_t axis, const char* op) {
  if (axis >= x.value().rank())
    throw ArgumentError(std::string(op) + ": axis " + std::to_string(axis) +
                        " out of range for shape " + shape_str(x.shape()));
}

// Splits a shape around `axis` into (outer, length, inner) extents.
struct AxisView {
  std::size_t outer = 1, length = 1, inner = 1;
};

AxisView axis_view(const Shape& shape, std::size_t axis) {
  AxisView v;
  for (std::size_t i = 0; i < axis; ++i) v.outer *= shape[i];
  v.length = shape[axis];
  for (std::size_t i = axis + 1; i < shape.size(); ++i) v.inner *= shape[i];
  return v;
}

template <class F, class DF>
Var unary(const Var& x, F f, DF df) {
  const Tensor& xv = x.value();
  Tensor out(xv.shape());
  for (std::size_t i = 0; i < xv.size(); ++i) out[i] = f(xv[i]);
  return Var::from_op(std::move(out), {x}, [df](Node& self) {
    const Tensor& xv = parent_value(self, 0);
    Tensor& g = parent_grad(self, 0);
    const Tensor& go = self.grad;
    for (std::size_t i = 0; i < go.size(); ++i) g[i] += go[i] * df(xv[i], self.value[i]);
  });
}

Var conv_impl(const Var& input, const Var& kernel, detail::ConvGeometry g, Shape out_shape_prefix) {
  g.resolve();
  Shape out_shape = std::move(out_shape_prefix);
  Tensor out(out_shape);
  detail::conv_forward(g, input.value().data(), kernel.value().data(), out.data());
  return Var::from_op(std::move(out), {input, kernel}, [g](Node& self) {
    const Tensor& in = parent_value(self, 0);
    const Tensor& k = parent_value(self, 1);
    if (parent_wants(self, 0))
      detail::conv_backward_input(g, self.grad.data(), k.data(), parent_grad(self, 0).data());
    if (parent_wants(self, 1))
      detail::conv_backward_kernel(g, self.grad.data(), in.data(), parent_grad(self, 1).data());
  });
}

}  // namespace

Var conv3d(const Var& input, const Var& kernel, Triple stride, Triple padding) {
  require_rank(input, 4, "conv3d");
  require_rank(kernel, 5, "conv3d kernel");
  const Shape& is = input.shape();
  const Shape& ks = kernel.shape();
  if (is[0] != ks[1])
    throw DimensionError("conv3d: input has " + std::to_string(is[0]) +
                         " channels but kernel expects " + std::to_string(ks[1]));
  detail::ConvGeometry g;
  g.in_channels = is[0];
  g.out_channels = ks[0];
  g.in = {is[1], is[2], is[3]};
  g.kernel = {ks[2], ks[3], ks[4]};
  g.stride = stride;
  g.pad = padding;
  g.resolve();
  return conv_impl(input, kernel, g, Shape{g.out_channels, g.out[0], g.out[1], g.out[2]});
}

Var conv2d(const Var& input, const Var& kernel, Pair stride, Pair padding, Pair dilation) {
  require_rank(input, 3, "conv2d");
  require_rank(kernel, 4, "conv2d kernel");
  if (dilation[0] < 1 || dilation[1] < 1) throw ArgumentError("conv2d: dilation must be >= 1");
  const Shape& is = input.shape();
  const Shape& ks = kernel.shape();
  if (is[0] != ks[1])
    throw DimensionError("conv2d: input has " + std::to_string(is[0]) +
                         " channels but kernel expects " + std::to_string(ks[1]));
  detail::ConvGeometry g;
  g.in_channels = is[0];
  g.out_channels = ks[0];
  g.in = {1, is[1], is[2]};
  g.kernel = {1, ks[2], ks[3]};
  g.stride = {1, stride[0], stride[1]};
  g.pad = {0, padding[0], padding[1]};
  g.dilation = {1, dilation[0], dilation[1]};
  g.resolve();
  return conv_impl(input, kernel, g, Shape{g.out_channels, g.out[1], g.out[2]});
}

Var add_channel_bias(const Var& x, const Var& bias) {
  const Shape& xs = x.shape();
  if (xs.empty() || bias.value().rank() != 1 || bias.shape()[0] != xs[0])
    throw DimensionError("add_channel_bias: bias " + shape_str(bias.shape()) +
                         " does not match input " + shape_str(xs));
  const std::size_t C = xs[0];
  const std::size_t inner = x.value().size() / C;
  Tensor out = x.value();
  const Tensor& b = bias.value();
  for (std::size_t c = 0; c < C; ++c)
    for (std::size_t i = 0; i < inner; ++i) out[c * inner + i] += b[c];
  return Var::from_op(std::move(out), {x, bias}, [C, inner](Node& self) {
    const Tensor& go = self.grad;
    if (parent_wants(self, 0)) {
      Tensor& g = parent_grad(self, 0);
      for (std::size_t i = 0; i < go.size(); ++i) g[i] += go[i];
    }
    if (parent_wants(self, 1)) {
      Tensor& gb = parent_grad(self, 1);
      for (std::size_t c = 0; c < C; ++c) {
        double acc = 0.0;
        for (std::size_t i = 0; i < inner; ++i) acc += go[c * inner + i];
        gb[c] += acc;
      }
    }
  });
}

Var pad_channels(const Var& x, std::size_t channels) {
  const Shape& xs = x.shape();
  if (xs.empty() || channels < xs[0])
    throw DimensionError("pad_channels: cannot shrink " + shape_str(xs) + " to " +
                         std::to_string(channels) + " channels");
  if (channels == xs[0]) return x;
  Shape os = xs;
  os[0] = channels;
  Tensor out(os, 0.0);
  const std::size_t n = x.value().size();
  std::copy_n(x.value().data(), n, out.data());
  return Var::from_op(std::move(out), {x}, [n](Node& self) {
    Tensor& g = parent_grad(self, 0);
    for (std::size_t i = 0; i < n; ++i) g[i] += self.grad[i];
  });
}

Var matmul(const Var& a, const Var& b) {
  require_rank(a, 2, "matmul");
  require_rank(b, 2, "matmul");
  const std::size_t m = a.shape()[0], k = a.shape()[1], n = b.shape()[1];
  if (b.shape()[0] != k)
    throw DimensionError("matmul: inner dimensions differ, " + shape_str(a.shape()) + " x " +
                         shape_str(b.shape()));
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  Tensor out(Shape{m, n}, 0.0);
  // i-k-j order: every out[i][j] still accumulates over k ascending from +0.
  for (std::size_t i = 0; i < m; ++i) {
    double* orow = out.data() + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double s = av[i * k + p];
      const double* brow = bv.data() + p * n;
      for (std::size_t j = 0; j < n; ++j) orow[j] += s * brow[j];
    }
  }
  return Var::from_op(std::move(out), {a, b}, [m, k, n](Node& self) {
    const Tensor& av = parent_value(self, 0);
    const Tensor& bv = parent_value(self, 1);
    const Tensor& go = self.grad;
    if (parent_wants(self, 0)) {
      Tensor& ga = parent_grad(self, 0);  // go * b^T
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t p = 0; p < k; ++p) {
          double acc = 0.0;
          for (std::size_t j = 0; j < n; ++j) acc += go[i * n + j] * bv[p * n + j];
          ga[i * k + p] += acc;
        }
    }
    if (parent_wants(self, 1)) {
      Tensor& gb = parent_grad(self, 1);  // a^T * go
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t p = 0; p < k; ++p) {
          const double s = av[i * k + p];
          for (std::size_t j = 0; j < n; ++j) gb[p * n + j] += s * go[i * n + j];
        }
    }
  });
}

Var matvec(const Var& a, const Var& x) {
  require_rank(a, 2, "matvec");
  require_rank(x, 1, "matvec");
  const std::size_t m = a.shape()[0], k = a.shape()[1];
  if (x.shape()[0] != k)
    throw DimensionError("matvec: " + shape_str(a.shape()) + " x " + shape_str(x.shape()));
  const Tensor& av = a.value();
  const Tensor& xv = x.value();
  Tensor out(Shape{m}, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    double acc = 0.0;
    const double* row = av.data() + i * k;
    for (std::size_t p = 0; p < k; ++p) acc += row[p] * xv[p];
    out[i] = acc;
  }
  return Var::from_op(std::move(out), {a, x}, [m, k](Node& self) {
    const Tensor& av = parent_value(self, 0);
    const Tensor& xv = parent_value(self, 1);
    const Tensor& go = self.grad;
    if (parent_wants(self, 0)) {
      Tensor& ga = parent_grad(self, 0);
      for (std::size_t i = 0; i < m; ++i) {
        const double g = go[i];
        if (g == 0.0) continue;
        double* row = ga.data() + i * k;
        for (std::size_t p = 0; p < k; ++p) row[p] += g * xv[p];
      }
    }
    if (parent_wants(self, 1)) {
      Tensor& gx = parent_grad(self, 1);
      for (std::size_t i = 0; i < m; ++i) {
        const double g = go[i];
        const double* row = av.data() + i * k;
        for (std::size_t p = 0; p < k; ++p) gx[p] += g * row[p];
      }
    }
  });
}

Var transpose(const Var& a) {
  require_rank(a, 2, "transpose");
  const std::size_t m = a.shape()[0], n = a.shape()[1];
  const Tensor& av = a.value();
  Tensor out(Shape{n, m});
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) out[j * m + i] = av[i * n + j];
  return Var::from_op(std::move(out), {a}, [m, n](Node& self) {
    Tensor& g = parent_grad(self, 0);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) g[i * n + j] += self.grad[j * m + i];
  });
}

Var one_by_one_conv(const Var& x, const Var& weight) {
  require_rank(x, 2, "one_by_one_conv");
  require_rank(weight, 2, "one_by_one_conv weight");
  if (weight.shape()[1] != x.shape()[0])
    throw DimensionError("one_by_one_conv: weight " + shape_str(weight.shape()) +
                         " incompatible with feature map " + shape_str(x.shape()));
  return matmul(weight, x);
}

Var softmax(const Var& x, std::size_t axis) {
  require_axis(x, axis, "softmax");
  const Tensor& xv = x.value();
  for (double v : xv.values())
    if (std::isnan(v)) throw NumericError("softmax: NaN input");
  const AxisView av = axis_view(xv.shape(), axis);
  Tensor out(xv.shape());
  for (std::size_t o = 0; o < av.outer; ++o)
    for (std::size_t in = 0; in < av.inner; ++in) {
      const std::size_t base = o * av.length * av.inner + in;
      double mx = xv[base];
      for (std::size_t l = 1; l < av.length; ++l) mx = std::max(mx, xv[base + l * av.inner]);
      double total = 0.0;
      for (std::size_t l = 0; l < av.length; ++l) {
        const double e = std::exp(xv[base + l * av.inner] - mx);
        out[base + l * av.inner] = e;
        total += e;
      }
      for (std::size_t l = 0; l < av.length; ++l) out[base + l * av.inner] /= total;
    }
  return Var::from_op(std::move(out), {x}, [av](Node& self) {
    Tensor& g = parent_grad(self, 0);
    const Tensor& y = self.value;
    const Tensor& go = self.grad;
    for (std::size_t o = 0; o < av.outer; ++o)
      for (std::size_t in = 0; in < av.inner; ++in) {
        const std::size_t base = o * av.length * av.inner + in;
        double dot = 0.0;
        for (std::size_t l = 0; l < av.length; ++l) {
          const std::size_t i = base + l * av.inner;
          dot += go[i] * y[i];
        }
        for (std::size_t l = 0; l < av.length; ++l) {
          const std::size_t i = base + l * av.inner;
          g[i] += y[i] * (go[i] - dot);
        }
      }
  });
}

Var leaky_relu(const Var& x, double slope) {
  return unary(
      x, [slope](double v) { return v >= 0.0 ? v : slope * v; },
      [slope](double v, double) { return v >= 0.0 ? 1.0 : slope; });
}

Var tanh(const Var& x) {
  return unary(
      x, [](double v) { return std::tanh(v); }, [](double, double y) { return 1.0 - y * y; });
}

Var abs(const Var& x) {
  return unary(
      x, [](double v) { return std::abs(v); },
      [](double v, double) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); });
}

Var maxpool2d(const Var& x, std::size_t window, std::size_t stride) {
  require_rank(x, 3, "maxpool2d");
  if (window < 1 || stride < 1) throw ArgumentError("maxpool2d: window and stride must be >= 1");
  const std::size_t C = x.shape()[0], H = x.shape()[1], W = x.shape()[2];
  if (window > H || window > W)
    throw DimensionError("maxpool2d: window " + std::to_string(window) + " larger than input " +
                         shape_str(x.shape()));
  const std::size_t Ho = (H - window) / stride + 1, Wo = (W - window) / stride + 1;
  const Tensor& xv = x.value();
  Tensor out(Shape{C, Ho, Wo});
  std::vector<std::size_t> argmax(out.size());
  for (std::size_t c = 0; c < C; ++c)
    for (std::size_t i = 0; i < Ho; ++i)
      for (std::size_t j = 0; j < Wo; ++j) {
        std::size_t best = c * H * W + (i * stride) * W + j * stride;
        for (std::size_t a = 0; a < window; ++a)
          for (std::size_t b = 0; b < window; ++b) {
            const std::size_t idx = c * H * W + (i * stride + a) * W + (j * stride + b);
            if (xv[idx] > xv[best]) best = idx;
          }
        const std::size_t o = (c * Ho + i) * Wo + j;
        out[o] = xv[best];
        argmax[o] = best;
      }
  return Var::from_op(std::move(out), {x}, [argmax = std::move(argmax)](Node& self) {
    Tensor& g = parent_grad(self, 0);
    for (std::size_t o = 0; o < argmax.size(); ++o) g[argmax[o]] += self.grad[o];
  });
}

Var mean_columns(const Var& x) {
  require_rank(x, 2, "mean_columns");
  const std::size_t F = x.shape()[0], R = x.shape()[1];
  const Tensor& xv = x.value();
  Tensor out(Shape{F});
  for (std::size_t f = 0; f < F; ++f) {
    double acc = 0.0;
    for (std::size_t r = 0; r < R; ++r) acc += xv[f * R + r];
    out[f] = acc / static_cast<double>(R);
  }
  return Var::from_op(std::move(out), {x}, [F, R](Node& self) {
    Tensor& g = parent_grad(self, 0);
    for (std::size_t f = 0; f < F; ++f) {
      const double share = self.grad[f] / static_cast<double>(R);
      for (std::size_t r = 0; r < R; ++r) g[f * R + r] += share;
    }
  });
}

Var concat(std::span<const Var> xs, std::size_t axis) {
  if (xs.empty()) throw ArgumentError("concat: no inputs");
  require_axis(xs[0], axis, "concat");
  Shape out_shape = xs[0].shape();
  std::size_t total = 0;
  for (const auto& x : xs) {
    const Shape& s = x.shape();
    if (s.size() != out_shape.size())
      throw DimensionError("concat: rank mismatch " + shape_str(s) + " vs " + shape_str(out_shape));
    for (std::size_t d = 0; d < s.size(); ++d)
      if (d != axis && s[d] != out_shape[d])
        throw DimensionError("concat: extent mismatch " + shape_str(s) + " vs " +
                             shape_str(out_shape));
    total += s[axis];
  }
  out_shape[axis] = total;
  const AxisView ov = axis_view(out_shape, axis);
  Tensor out(out_shape);
  std::vector<std::size_t> offsets;
  std::size_t offset = 0;
  for (const auto& x : xs) {
    const AxisView xv = axis_view(x.shape(), axis);
    const Tensor& v = x.value();
    const std::size_t chunk = xv.length * xv.inner;
    for (std::size_t o = 0; o < ov.outer; ++o)
      std::copy_n(v.data() + o * chunk, chunk, out.data() + o * ov.length * ov.inner + offset * ov.inner);
    offsets.push_back(offset);
    offset += xv.length;
  }
  std::vector<Var> parents(xs.begin(), xs.end());
  std::vector<std::size_t> lengths;
  for (const auto& x : xs) lengths.push_back(x.shape()[axis]);
  return Var::from_op(std::move(out), std::move(parents),
                      [ov, offsets, lengths](Node& self) {
                        for (std::size_t p = 0; p < offsets.size(); ++p) {
                          if (!parent_wants(self, p)) continue;
                          Tensor& g = parent_grad(self, p);
                          const std::size_t chunk = lengths[p] * ov.inner;
                          for (std::size_t o = 0; o < ov.outer; ++o) {
                            const double* src = self.grad.data() + o * ov.length * ov.inner +
                                                offsets[p] * ov.inner;
                            double* dst = g.data() + o * chunk;
                            for (std::size_t i = 0; i < chunk; ++i) dst[i] += src[i];
                          }
                        }
                      });
}

std::vector<Var> split(const Var& x, std::size_t axis, std::span<const std::size_t> sizes) {
  require_axis(x, axis, "split");
  std::size_t total = 0;
  for (auto s : sizes) total += s;
  if (total != x.shape()[axis])
    throw DimensionError("split: sizes sum to " + std::to_string(total) + " but axis extent is " +
                         std::to_string(x.shape()[axis]));
  const AxisView xv = axis_view(x.shape(), axis);
  std::vector<Var> parts;
  std::size_t offset = 0;
  for (auto len : sizes) {
    Shape s = x.shape();
    s[axis] = len;
    Tensor part(s);
    const std::size_t chunk = len * xv.inner;
    for (std::size_t o = 0; o < xv.outer; ++o)
      std::copy_n(x.value().data() + o * xv.length * xv.inner + offset * xv.inner, chunk,
                  part.data() + o * chunk);
    parts.push_back(Var::from_op(std::move(part), {x}, [xv, offset, chunk](Node& self) {
      Tensor& g = parent_grad(self, 0);
      for (std::size_t o = 0; o < xv.outer; ++o) {
        double* dst = g.data() + o * xv.length * xv.inner + offset * xv.inner;
        const double* src = self.grad.data() + o * chunk;
        for (std::size_t i = 0; i < chunk; ++i) dst[i] += src[i];
      }
    }));
    offset += len;
  }
  return parts;
}

Var stack_columns(std::span<const Var> columns) {
  if (columns.empty()) throw ArgumentError("stack_columns: no inputs");
  std::vector<Var> cols;
  cols.reserve(columns.size());
  for (const auto& c : columns) {
    require_rank(c, 1, "stack_columns");
    cols.push_back(reshape(c, Shape{c.shape()[0], 1}));
  }
  return concat(cols, 1);
}

Var reshape(const Var& x, Shape shape) {
  Tensor out = x.value().reshaped(std::move(shape));
  return Var::from_op(std::move(out), {x}, [](Node& self) {
    Tensor& g = parent_grad(self, 0);
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
  });
}

Var take_frame(const Var& x, std::size_t t) {
  require_rank(x, 4, "take_frame");
  const std::size_t C = x.shape()[0], T = x.shape()[1], M = x.shape()[2] * x.shape()[3];
  if (t >= T) throw ArgumentError("take_frame: frame " + std::to_string(t) + " out of range");
  Tensor out(Shape{C, M});
  const Tensor& xv = x.value();
  for (std::size_t c = 0; c < C; ++c) std::copy_n(xv.data() + (c * T + t) * M, M, out.data() + c * M);
  return Var::from_op(std::move(out), {x}, [C, T, M, t](Node& self) {
    Tensor& g = parent_grad(self, 0);
    for (std::size_t c = 0; c < C; ++c) {
      double* dst = g.data() + (c * T + t) * M;
      const double* src = self.grad.data() + c * M;
      for (std::size_t i = 0; i < M; ++i) dst[i] += src[i];
    }
  });
}

Var add(const Var& a, const Var& b) {
  require_same_shape(a, b, "add");
  Tensor out = a.value();
  const Tensor& bv = b.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += bv[i];
  return Var::from_op(std::move(out), {a, b}, [](Node& self) {
    for (std::size_t p = 0; p < 2; ++p) {
      if (!parent_wants(self, p)) continue;
      Tensor& g = parent_grad(self, p);
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
    }
  });
}

Var sub(const Var& a, const Var& b) {
  require_same_shape(a, b, "sub");
  Tensor out = a.value();
  const Tensor& bv = b.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= bv[i];
  return Var::from_op(std::move(out), {a, b}, [](Node& self) {
    if (parent_wants(self, 0)) {
      Tensor& g = parent_grad(self, 0);
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
    }
    if (parent_wants(self, 1)) {
      Tensor& g = parent_grad(self, 1);
      for (std::size_t i = 0; i < g.size(); ++i) g[i] -= self.grad[i];
    }
  });
}

Var mul(const Var& a, const Var& b) {
  require_same_shape(a, b, "mul");
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  Tensor out(av.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] * bv[i];
  return Var::from_op(std::move(out), {a, b}, [](Node& self) {
    const Tensor& av = parent_value(self, 0);
    const Tensor& bv = parent_value(self, 1);
    if (parent_wants(self, 0)) {
      Tensor& g = parent_grad(self, 0);
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * bv[i];
    }
    if (parent_wants(self, 1)) {
      Tensor& g = parent_grad(self, 1);
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * av[i];
    }
  });
}

Var scale(const Var& x, double factor) {
  Tensor out = x.value();
  for (auto& v : out.values()) v *= factor;
  return Var::from_op(std::move(out), {x}, [factor](Node& self) {
    Tensor& g = parent_grad(self, 0);
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * factor;
  });
}

Var scale_by(const Var& x, const Var& factor) {
  if (factor.value().size() != 1)
    throw DimensionError("scale_by: factor must have a single element, got " +
                         shape_str(factor.shape()));
  const Tensor& xv = x.value();
  const double f = factor.value()[0];
  Tensor out(xv.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = f * xv[i];
  return Var::from_op(std::move(out), {x, factor}, [f](Node& self) {
    const Tensor& xv = parent_value(self, 0);
    if (parent_wants(self, 0)) {
      Tensor& g = parent_grad(self, 0);
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * f;
    }
    if (parent_wants(self, 1)) {
      double acc = 0.0;
      for (std::size_t i = 0; i < xv.size(); ++i) acc += self.grad[i] * xv[i];
      parent_grad(self, 1)[0] += acc;
    }
  });
}

Var sum(const Var& x) {
  double acc = 0.0;
  for (double v : x.value().values()) acc += v;
  return Var::from_op(Tensor::scalar(acc), {x}, [](Node& self) {
    Tensor& g = parent_grad(self, 0);
    const double go = self.grad[0];
    for (auto& v : g.values()) v += go;
  });
}

Var mean(const Var& x) { return scale(sum(x), 1.0 / static_cast<double>(x.value().size())); }

Var sum_squares(const Var& x) {
  const Tensor& xv = x.value();
  double acc = 0.0;
  for (double v : xv.values()) acc += v * v;
  return Var::from_op(Tensor::scalar(acc), {x}, [](Node& self) {
    const Tensor& xv = parent_value(self, 0);
    Tensor& g = parent_grad(self, 0);
    const double go = self.grad[0];
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += 2.0 * xv[i] * go;
  });
}

}  // namespace dmqca

// SPDX-License-Identifier: Apache-2.0
#include "conv.hpp"

#include <cstring>
#include <string>
#include <vector>

#include "dmqca/errors.hpp"

namespace dmqca::detail {

void ConvGeometry::resolve() {
  for (std::size_t d = 0; d < 3; ++d) {
    if (stride[d] < 1) throw ArgumentError("convolution stride must be >= 1");
    if (dilation[d] < 1) throw ArgumentError("convolution dilation must be >= 1");
    const std::size_t effective = (kernel[d] - 1) * dilation[d] + 1;
    const std::size_t padded = in[d] + 2 * pad[d];
    if (kernel[d] < 1 || effective > padded)
      throw DimensionError("effective kernel extent " + std::to_string(effective) +
                           " exceeds padded input extent " + std::to_string(padded));
    out[d] = (padded - effective) / stride[d] + 1;
  }
}

namespace {

// Output indices p with 0 <= p*s + k*d - pad < n, clipped to [0, out).
struct Range {
  std::size_t lo;
  std::size_t hi;
};

inline Range valid_range(std::size_t n, std::size_t out, std::size_t s, std::size_t tap,
                         std::size_t pad) {
  const long long offset = static_cast<long long>(tap) - static_cast<long long>(pad);
  long long lo = 0;
  if (offset < 0) lo = (-offset + static_cast<long long>(s) - 1) / static_cast<long long>(s);
  const long long last_in = static_cast<long long>(n) - 1 - offset;
  if (last_in < 0) return {0, 0};
  long long hi = last_in / static_cast<long long>(s) + 1;
  if (hi > static_cast<long long>(out)) hi = static_cast<long long>(out);
  if (lo >= hi) return {0, 0};
  return {static_cast<std::size_t>(lo), static_cast<std::size_t>(hi)};
}

struct TapRanges {
  Range r[3];
  long long off[3];
  bool empty() const { return r[0].lo >= r[0].hi || r[1].lo >= r[1].hi || r[2].lo >= r[2].hi; }
};

inline TapRanges tap_ranges(const ConvGeometry& g, std::size_t a, std::size_t b, std::size_t c) {
  const std::size_t taps[3] = {a, b, c};
  TapRanges tr{};
  for (int d = 0; d < 3; ++d) {
    const std::size_t tap = taps[d] * g.dilation[d];
    tr.r[d] = valid_range(g.in[d], g.out[d], g.stride[d], tap, g.pad[d]);
    tr.off[d] = static_cast<long long>(tap) - static_cast<long long>(g.pad[d]);
  }
  return tr;
}

// Input column of the first valid output column.
inline std::size_t first_col(const TapRanges& tr, std::size_t wlo, std::size_t sW) {
  return static_cast<std::size_t>(static_cast<long long>(wlo * sW) + tr.off[2]);
}

}  // namespace

namespace {

constexpr std::size_t kMr = 4;
constexpr std::size_t kLanes = 8;
constexpr std::size_t kNr = 2 * kLanes;

typedef double Lanes __attribute__((vector_size(kLanes * sizeof(double))));

inline Lanes load(const double* p) {
  Lanes v;
  std::memcpy(&v, p, sizeof v);
  return v;
}

inline void store(double* p, Lanes v) { std::memcpy(p, &v, sizeof v); }

// c[i, j] = sum over k ascending of a[i, k] * b[k, j], starting from +0.0.
// a is [m, kk] with row stride lda, b is [kk, n] with row stride ldb.
void gemm(std::size_t m, std::size_t n, std::size_t kk, const double* a, std::size_t lda,
          const double* b, std::size_t ldb, double* c, std::size_t ldc) {
  std::size_t i = 0;
  for (; i + kMr <= m; i += kMr) {
    const double* a0 = a + i * lda;
    const double* a1 = a0 + lda;
    const double* a2 = a1 + lda;
    const double* a3 = a2 + lda;
    std::size_t j = 0;
    for (; j + kNr <= n; j += kNr) {
      Lanes c00{}, c01{}, c10{}, c11{}, c20{}, c21{}, c30{}, c31{};
      const double* bp = b + j;
      for (std::size_t k = 0; k < kk; ++k, bp += ldb) {
        const Lanes b0 = load(bp);
        const Lanes b1 = load(bp + kLanes);
        c00 += a0[k] * b0;
        c01 += a0[k] * b1;
        c10 += a1[k] * b0;
        c11 += a1[k] * b1;
        c20 += a2[k] * b0;
        c21 += a2[k] * b1;
        c30 += a3[k] * b0;
        c31 += a3[k] * b1;
      }
      double* cp = c + i * ldc + j;
      store(cp, c00);
      store(cp + kLanes, c01);
      store(cp + ldc, c10);
      store(cp + ldc + kLanes, c11);
      store(cp + 2 * ldc, c20);
      store(cp + 2 * ldc + kLanes, c21);
      store(cp + 3 * ldc, c30);
      store(cp + 3 * ldc + kLanes, c31);
    }
    for (; j + kLanes <= n; j += kLanes) {
      Lanes c0{}, c1{}, c2{}, c3{};
      const double* bp = b + j;
      for (std::size_t k = 0; k < kk; ++k, bp += ldb) {
        const Lanes bv = load(bp);
        c0 += a0[k] * bv;
        c1 += a1[k] * bv;
        c2 += a2[k] * bv;
        c3 += a3[k] * bv;
      }
      double* cp = c + i * ldc + j;
      store(cp, c0);
      store(cp + ldc, c1);
      store(cp + 2 * ldc, c2);
      store(cp + 3 * ldc, c3);
    }
    for (; j < n; ++j) {
      double c0 = 0.0, c1 = 0.0, c2 = 0.0, c3 = 0.0;
      const double* bp = b + j;
      for (std::size_t k = 0; k < kk; ++k, bp += ldb) {
        c0 += a0[k] * *bp;
        c1 += a1[k] * *bp;
        c2 += a2[k] * *bp;
        c3 += a3[k] * *bp;
      }
      c[i * ldc + j] = c0;
      c[(i + 1) * ldc + j] = c1;
      c[(i + 2) * ldc + j] = c2;
      c[(i + 3) * ldc + j] = c3;
    }
  }
  for (; i < m; ++i) {
    double* crow = c + i * ldc;
    for (std::size_t j = 0; j < n; ++j) crow[j] = 0.0;
    for (std::size_t k = 0; k < kk; ++k) {
      const double av = a[i * lda + k];
      const double* brow = b + k * ldb;
      for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

void transpose_into(std::size_t rows, std::size_t cols, const double* src, double* dst) {
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) dst[c * rows + r] = src[r * cols + c];
}

// Visits every in-bounds (row r of the column matrix, output position p, input
// offset) triple, with r ordered (c_in, kt, kh, kw).
template <typename F>
void for_each_tap(const ConvGeometry& g, F&& f) {
  const std::size_t in_vol = g.in_volume();
  const std::size_t kvol = g.kernel_volume();
  const std::size_t H = g.in[1], W = g.in[2];
  const std::size_t Ho = g.out[1], Wo = g.out[2];
  const std::size_t sT = g.stride[0], sH = g.stride[1], sW = g.stride[2];
  for (std::size_t ci = 0; ci < g.in_channels; ++ci)
    for (std::size_t a = 0; a < g.kernel[0]; ++a)
      for (std::size_t b = 0; b < g.kernel[1]; ++b)
        for (std::size_t c = 0; c < g.kernel[2]; ++c) {
          const std::size_t r = ci * kvol + (a * g.kernel[1] + b) * g.kernel[2] + c;
          const TapRanges tr = tap_ranges(g, a, b, c);
          if (tr.empty()) continue;
          for (std::size_t t = tr.r[0].lo; t < tr.r[0].hi; ++t) {
            const std::size_t ti =
                static_cast<std::size_t>(static_cast<long long>(t * sT) + tr.off[0]);
            for (std::size_t h = tr.r[1].lo; h < tr.r[1].hi; ++h) {
              const std::size_t hi =
                  static_cast<std::size_t>(static_cast<long long>(h * sH) + tr.off[1]);
              const std::size_t wlo = tr.r[2].lo;
              f(r, (t * Ho + h) * Wo + wlo, ci * in_vol + (ti * H + hi) * W + first_col(tr, wlo, sW),
                tr.r[2].hi - wlo, sW);
            }
          }
        }
}

std::vector<double> im2col(const ConvGeometry& g, const double* input) {
  const std::size_t P = g.out_volume();
  std::vector<double> col(g.in_channels * g.kernel_volume() * P, 0.0);
  for_each_tap(g, [&](std::size_t r, std::size_t p, std::size_t src, std::size_t n,
                      std::size_t sW) {
    double* dst = col.data() + r * P + p;
    const double* in = input + src;
    if (sW == 1) {
      for (std::size_t x = 0; x < n; ++x) dst[x] = in[x];
    } else {
      for (std::size_t x = 0; x < n; ++x) dst[x] = in[x * sW];
    }
  });
  return col;
}

}  // namespace

void conv_forward(const ConvGeometry& g, const double* input, const double* kernel,
                  double* output) {
  const std::size_t R = g.in_channels * g.kernel_volume();
  const std::size_t P = g.out_volume();
  const std::vector<double> col = im2col(g, input);
  gemm(g.out_channels, P, R, kernel, R, col.data(), P, output, P);
}

void conv_backward_input(const ConvGeometry& g, const double* grad_out, const double* kernel,
                         double* grad_in) {
  const std::size_t R = g.in_channels * g.kernel_volume();
  const std::size_t P = g.out_volume();
  std::vector<double> kt(R * g.out_channels);
  transpose_into(g.out_channels, R, kernel, kt.data());
  std::vector<double> dcol(R * P);
  gemm(R, P, g.out_channels, kt.data(), g.out_channels, grad_out, P, dcol.data(), P);
  for_each_tap(g, [&](std::size_t r, std::size_t p, std::size_t dst, std::size_t n,
                      std::size_t sW) {
    const double* src = dcol.data() + r * P + p;
    double* gi = grad_in + dst;
    for (std::size_t x = 0; x < n; ++x) gi[x * sW] += src[x];
  });
}

void conv_backward_kernel(const ConvGeometry& g, const double* grad_out, const double* input,
                          double* grad_kernel) {
  const std::size_t R = g.in_channels * g.kernel_volume();
  const std::size_t P = g.out_volume();
  const std::vector<double> col = im2col(g, input);
  std::vector<double> colt(P * R);
  transpose_into(R, P, col.data(), colt.data());
  std::vector<double> dk(g.out_channels * R);
  gemm(g.out_channels, R, P, grad_out, P, colt.data(), R, dk.data(), R);
  for (std::size_t i = 0; i < dk.size(); ++i) grad_kernel[i] += dk[i];
}

}  // namespace dmqca::detail

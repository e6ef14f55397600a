// SPDX-License-Identifier: Apache-2.0
//
// Direct 3-D correlation with stride, zero padding and dilation. conv2d is
// the T = 1, kT = 1 special case. Each output element accumulates its taps
// in (c_in, kt, kh, kw) order starting from +0.0.

#pragma once

#include <array>
#include <cstddef>

namespace dmqca::detail {

struct ConvGeometry {
  std::size_t in_channels = 0;
  std::size_t out_channels = 0;
  std::array<std::size_t, 3> in{};      // T, H, W
  std::array<std::size_t, 3> kernel{};  // kT, kH, kW
  std::array<std::size_t, 3> stride{1, 1, 1};
  std::array<std::size_t, 3> pad{0, 0, 0};
  std::array<std::size_t, 3> dilation{1, 1, 1};
  std::array<std::size_t, 3> out{};

  /// Validates and fills `out`; throws DimensionError / ArgumentError.
  void resolve();
  std::size_t in_volume() const { return in[0] * in[1] * in[2]; }
  std::size_t out_volume() const { return out[0] * out[1] * out[2]; }
  std::size_t kernel_volume() const { return kernel[0] * kernel[1] * kernel[2]; }
};

void conv_forward(const ConvGeometry& g, const double* input, const double* kernel,
                  double* output);
void conv_backward_input(const ConvGeometry& g, const double* grad_out, const double* kernel,
                         double* grad_in);
void conv_backward_kernel(const ConvGeometry& g, const double* grad_out, const double* input,
                          double* grad_kernel);

}  // namespace dmqca::detail

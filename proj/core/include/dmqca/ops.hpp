// SPDX-License-Identifier: Apache-2.0
//
// Differentiable operators. All functions are pure: they read their inputs
// and return a fresh Var whose backward closure (if any input requires a
// gradient) accumulates into the inputs.

#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "dmqca/autodiff.hpp"

namespace dmqca {

using Triple = std::array<std::size_t, 3>;
using Pair = std::array<std::size_t, 2>;

inline constexpr double kDefaultLeakySlope = 0.2;

/// input [C_in, T, H, W], kernel [C_out, C_in, kT, kH, kW] -> [C_out, T', H', W'].
Var conv3d(const Var& input, const Var& kernel, Triple stride, Triple padding);

/// input [C_in, H, W], kernel [C_out, C_in, kH, kW] -> [C_out, H', W'].
Var conv2d(const Var& input, const Var& kernel, Pair stride, Pair padding,
           Pair dilation = {1, 1});

/// Adds bias[c] to every element of channel c of x [C, ...].
Var add_channel_bias(const Var& x, const Var& bias);

/// Zero-extends the channel axis of x [C, ...] to `channels` >= C.
Var pad_channels(const Var& x, std::size_t channels);

/// [m, k] x [k, n] -> [m, n]; each entry sums over k in ascending order.
Var matmul(const Var& a, const Var& b);
/// [m, k] x [k] -> [m].
Var matvec(const Var& a, const Var& x);
Var transpose(const Var& a);
/// 1x1 convolution over a [C, M] feature map: weight [C', C] -> [C', M].
Var one_by_one_conv(const Var& x, const Var& weight);

/// Max-subtracted softmax along `axis`.
Var softmax(const Var& x, std::size_t axis);
Var leaky_relu(const Var& x, double slope = kDefaultLeakySlope);
Var tanh(const Var& x);
Var abs(const Var& x);

/// Non-overlapping-or-strided max pooling on [C, H, W]. Ties go to the
/// first maximal element in row-major window order.
Var maxpool2d(const Var& x, std::size_t window, std::size_t stride);
/// Mean over the last axis of x [F, R] -> [F].
Var mean_columns(const Var& x);

Var concat(std::span<const Var> xs, std::size_t axis);
std::vector<Var> split(const Var& x, std::size_t axis, std::span<const std::size_t> sizes);
/// Stacks equally shaped vectors [F] as columns of [F, n].
Var stack_columns(std::span<const Var> columns);

Var reshape(const Var& x, Shape shape);
/// Frame t of x [C, T, H, W] as a [C, H*W] feature map.
Var take_frame(const Var& x, std::size_t t);

Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
Var scale(const Var& x, double factor);
/// x scaled by a single-element Var (e.g. a learned gate).
Var scale_by(const Var& x, const Var& factor);

Var sum(const Var& x);
Var mean(const Var& x);
/// Squared L2 norm, sum of x_i^2.
Var sum_squares(const Var& x);

}  // namespace dmqca

// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <random>

#include "dmqca/errors.hpp"
#include "dmqca/gradcheck.hpp"
#include "dmqca/gradcheck_suite.hpp"
#include "dmqca/ops.hpp"

using namespace dmqca;

TEST(Gradients, SumGivesOnes) {
  std::mt19937_64 rng(1);
  Var x = Var::parameter(Tensor::uniform({3, 4}, -1, 1, rng));
  backward(sum(x));
  for (double g : x.grad().values()) EXPECT_EQ(g, 1.0);
}

TEST(Gradients, SumOfSquaresGivesTwiceInput) {
  std::mt19937_64 rng(2);
  Var x = Var::parameter(Tensor::uniform({5}, -1, 1, rng));
  backward(sum_squares(x));
  for (std::size_t i = 0; i < 5; ++i) EXPECT_DOUBLE_EQ(x.grad()[i], 2.0 * x.value()[i]);
  EXPECT_LT(finite_diff_check([](const Var& v) { return sum_squares(v); }, x.value()), 1e-6);
}

TEST(Gradients, ConstantFunctionHasZeroGradient) {
  std::mt19937_64 rng(3);
  const Tensor x = Tensor::uniform({4}, -1, 1, rng);
  const Var c = Var::constant(Tensor::scalar(2.5));
  EXPECT_EQ(finite_diff_check([&](const Var& v) { return add(scale(sum(v), 0.0), c); }, x), 0.0);
}

TEST(Gradients, Conv3dSoftmaxComposition) {
  std::mt19937_64 rng(4);
  const Tensor x = Tensor::uniform({2, 3, 4, 4}, -1, 1, rng);
  const Var k = Var::constant(Tensor::uniform({2, 2, 2, 2, 2}, -1, 1, rng));
  const Var w = Var::constant(Tensor::uniform({2, 2, 3, 3}, -1, 1, rng));
  auto f = [&](const Var& v) {
    const Var y = conv3d(v, k, {1, 1, 1}, {0, 0, 0});
    return sum(mul(softmax(reshape(y, {2, 18}), 1), reshape(w, {2, 18})));
  };
  EXPECT_LT(finite_diff_check(f, x), 1e-4);
}

TEST(Gradients, SuiteSmoke) {
  GradSuiteOptions options;
  options.configurations = 3;
  options.seed = 17;
  for (const auto& r : run_gradcheck_suite(options)) {
    EXPECT_TRUE(r.passed) << r.name << " max rel err " << r.max_relative_error;
    EXPECT_EQ(r.configurations, 3u) << r.name;
  }
}

TEST(Gradients, SuiteRejectsUnknownName) {
  EXPECT_THROW(run_gradcheck_suite({}, {"no_such_operator"}), ArgumentError);
}

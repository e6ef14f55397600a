// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include "dmqca/errors.hpp"
#include "dmqca/ops.hpp"

using namespace dmqca;

TEST(Autodiff, GradientShapeMatchesValue) {
  Var x = Var::parameter(Tensor({2, 3}, 1.0));
  EXPECT_EQ(x.grad().shape(), x.value().shape());
  backward(sum(mul(x, x)));
  EXPECT_EQ(x.grad().shape(), x.value().shape());
}

TEST(Autodiff, GradientsAccumulateUntilZeroed) {
  Var x = Var::parameter(Tensor({3}, 2.0));
  backward(sum(x));
  backward(sum(x));
  for (double g : x.grad().values()) EXPECT_EQ(g, 2.0);
  x.zero_grad();
  for (double g : x.grad().values()) EXPECT_EQ(g, 0.0);
}

TEST(Autodiff, SharedSubexpressionCountsTwice) {
  Var x = Var::parameter(Tensor::scalar(3.0));
  const Var y = mul(x, x);
  backward(add(y, y));
  EXPECT_EQ(x.grad().item(), 12.0);
}

TEST(Autodiff, NonScalarRootRejected) {
  Var x = Var::parameter(Tensor({3}, 1.0));
  EXPECT_THROW(backward(scale(x, 2.0)), ContractError);
}

TEST(Autodiff, ConstantsReceiveNoGraph) {
  const Var c = Var::constant(Tensor({2}, 1.0));
  const Var y = sum(scale(c, 2.0));
  EXPECT_FALSE(y.requires_grad());
}

TEST(Autodiff, NoGradGuardSuppressesRecording) {
  Var x = Var::parameter(Tensor({2}, 1.0));
  {
    NoGradGuard guard;
    EXPECT_FALSE(grad_enabled());
    EXPECT_FALSE(sum(x).requires_grad());
  }
  EXPECT_TRUE(grad_enabled());
  EXPECT_TRUE(sum(x).requires_grad());
}

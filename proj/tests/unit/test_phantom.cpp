// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "dmqca/errors.hpp"
#include "dmqca/phantom.hpp"

using namespace dmqca;

TEST(ComputeRvd, Examples) {
  EXPECT_NEAR(compute_rvd(2.0, 4.0, 1.0, 3.0), 2.5, 1e-12);
  EXPECT_EQ(compute_rvd(3.0, 3.0, 1.7, 8.2), 3.0);
  EXPECT_NEAR(compute_rvd(2.0, 4.0, 1e-12, 3.0), 2.0, 1e-11);
}

TEST(ComputeRvd, Properties) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> d(0.5, 10.0);
  for (int i = 0; i < 200; ++i) {
    const double r1 = d(rng), r2 = d(rng), l1 = d(rng), l2 = d(rng);
    const double rvd = compute_rvd(r1, r2, l1, l2);
    EXPECT_GE(rvd, std::min(r1, r2) - 1e-12);
    EXPECT_LE(rvd, std::max(r1, r2) + 1e-12);
    EXPECT_NEAR(compute_rvd(r2, r1, l2, l1), rvd, 1e-12);
  }
}

TEST(ComputeRvd, NonPositiveLengthsRejected) {
  EXPECT_THROW(compute_rvd(2.0, 3.0, 0.0, 1.0), ArgumentError);
  EXPECT_THROW(compute_rvd(2.0, 3.0, 1.0, -1.0), ArgumentError);
  EXPECT_THROW(compute_rvd(0.0, 3.0, 1.0, 1.0), ArgumentError);
}

namespace {

StenosisSpec sampled(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return sample_spec(rng, {}, PhantomSize::desk());
}

}  // namespace

TEST(DiameterProfile, Trapezoid) {
  const StenosisSpec spec = sampled(2);
  const double start = spec.lesion_center - spec.ll1, end = spec.lesion_center + spec.ll2;
  EXPECT_DOUBLE_EQ(diameter_profile(spec, spec.lesion_center), spec.mld);
  EXPECT_DOUBLE_EQ(diameter_profile(spec, start), spec.rvd1);
  EXPECT_DOUBLE_EQ(diameter_profile(spec, end), spec.rvd2);
  EXPECT_NEAR(diameter_profile(spec, start + spec.ll1 / 2), (spec.rvd1 + spec.mld) / 2, 1e-12);
  EXPECT_NEAR(diameter_profile(spec, spec.lesion_center + spec.ll2 / 2), (spec.rvd2 + spec.mld) / 2, 1e-12);
  EXPECT_DOUBLE_EQ(diameter_profile(spec, 0.0), spec.rvd1);
}

TEST(DiameterProfile, ContinuousAndBoundedBelowByMld) {
  const StenosisSpec spec = sampled(3);
  const double length = Centerline(spec.control_points).length();
  double prev = diameter_profile(spec, 0.0);
  for (double s = 0.01; s <= length; s += 0.01) {
    const double d = diameter_profile(spec, s);
    EXPECT_LT(std::abs(d - prev), 0.01) << "at s = " << s;
    EXPECT_GE(d, spec.mld - 1e-12);
    prev = d;
  }
}

TEST(DiameterProfile, OutOfRangeRejected) {
  const StenosisSpec spec = sampled(4);
  EXPECT_THROW(diameter_profile(spec, -0.1), ArgumentError);
  EXPECT_THROW(diameter_profile(spec, Centerline(spec.control_points).length() + 0.1), ArgumentError);
}

TEST(Phantom, SampledSpecsAreValidAndInRange) {
  const PhantomRanges ranges;
  std::mt19937_64 rng(5);
  for (int i = 0; i < 100; ++i) {
    const StenosisSpec spec = sample_spec(rng, ranges, PhantomSize::desk());
    EXPECT_NO_THROW(spec.validate());
    EXPECT_GE(spec.rvd1, 2.0);
    EXPECT_LE(spec.rvd1, 4.5);
    EXPECT_GE(spec.mld, 0.5 * std::min(spec.rvd1, spec.rvd2) - 1e-12);
    EXPECT_LE(spec.mld, 0.9 * std::min(spec.rvd1, spec.rvd2) + 1e-12);
    const IndexVector label = spec.label();
    EXPECT_EQ(label[2], compute_rvd(spec.rvd1, spec.rvd2, spec.ll1, spec.ll2));
    EXPECT_GE(spec.contrast_arrival_frame, 1u);
    EXPECT_LE(spec.contrast_arrival_frame, 3u);
  }
}

TEST(Phantom, BenchmarkRangesDeepenStenoses) {
  const PhantomRanges b = PhantomRanges::benchmark();
  EXPECT_EQ(b.mld_fraction, (std::array<double, 2>{0.3, 0.7}));
  EXPECT_EQ(b.rvd, PhantomRanges{}.rvd);
  EXPECT_NO_THROW(b.validate());
}

TEST(Phantom, InvalidRangesAndSpecsRejected) {
  PhantomRanges r;
  r.mld_fraction = {0.5, 1.0};
  EXPECT_THROW(r.validate(), ArgumentError);
  r = {};
  r.noise_sigma = -1.0;
  EXPECT_THROW(r.validate(), ArgumentError);
  StenosisSpec spec = sampled(6);
  spec.mld = spec.rvd1 + 1.0;
  EXPECT_THROW(spec.validate(), ArgumentError);
}

TEST(Phantom, RenderedSampleShapesAndRange) {
  const PhantomSize size = PhantomSize::desk();
  const StenosisSpec spec = sampled(7);
  const Sample s = render_sample(spec, size, 7, "x");
  EXPECT_EQ(s.main_view.shape(), (Shape{4, 64, 64}));
  EXPECT_EQ(s.support_view.shape(), (Shape{4, 64, 64}));
  EXPECT_EQ(s.keyframe.shape(), (Shape{64, 64}));
  for (double v : s.main_view.values()) {
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
  }
  for (std::size_t i = 0; i < s.keyframe.size(); ++i) EXPECT_EQ(s.keyframe[i], s.main_view[3 * 64 * 64 + i]);
  const IndexVector label = spec.label();
  for (std::size_t k = 0; k < 6; ++k) EXPECT_EQ(s.label[k], label[k]);
}

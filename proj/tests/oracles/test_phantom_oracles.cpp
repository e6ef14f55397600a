// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "dmqca/phantom.hpp"

using namespace dmqca;

namespace {

struct Point {
  double x, y;
};

// Relative depth 1 - I / background, bilinear between pixel centres.
double relative_dip(const StenosisSpec& spec, const Tensor& frame, Point p) {
  const std::size_t H = frame.extent(0), W = frame.extent(1);
  const double fx = p.x - 0.5, fy = p.y - 0.5;
  const double x0 = std::floor(fx), y0 = std::floor(fy);
  double acc = 0.0;
  for (int dy = 0; dy < 2; ++dy)
    for (int dx = 0; dx < 2; ++dx) {
      const long q = static_cast<long>(x0) + dx, r = static_cast<long>(y0) + dy;
      if (q < 0 || r < 0 || q >= static_cast<long>(W) || r >= static_cast<long>(H)) return 0.0;
      const double wgt = (dx ? fx - x0 : 1.0 - (fx - x0)) * (dy ? fy - y0 : 1.0 - (fy - y0));
      const double bg = background_intensity(spec, q + 0.5, r + 0.5, H, W);
      acc += wgt * (1.0 - frame.at({static_cast<std::size_t>(r), static_cast<std::size_t>(q)}) / bg);
    }
  return acc;
}

// Full width at half of the tube depth, in pixels, across the centreline at
// the narrowest point.
double measured_lumen_width(const StenosisSpec& spec, const Tensor& frame) {
  const std::size_t H = frame.extent(0), W = frame.extent(1);
  const Centerline line(spec.control_points);
  auto at = [&](double s) {
    const auto c = project(spec, spec.main_view, line.point_at(s), H, W);
    return Point{c[0], c[1]};
  };
  const Point c = at(spec.lesion_center);
  const Point a = at(spec.lesion_center - 0.25), b = at(spec.lesion_center + 0.25);
  const double tx = b.x - a.x, ty = b.y - a.y, tn = std::hypot(tx, ty);
  const Point n{-ty / tn, tx / tn};

  const double step = 0.01, reach = 8.0;
  std::vector<double> t_values, dips;
  for (double t = -reach; t <= reach; t += step) {
    t_values.push_back(t);
    dips.push_back(relative_dip(spec, frame, {c.x + t * n.x, c.y + t * n.y}));
  }
  const std::size_t peak = std::max_element(dips.begin(), dips.end()) - dips.begin();
  const double half = dips[peak] / 2.0;
  auto crossing = [&](long dir) {
    for (long i = static_cast<long>(peak); i + dir >= 0 && i + dir < static_cast<long>(dips.size()); i += dir)
      if (dips[i + dir] < half) {
        const double f = (dips[i] - half) / (dips[i] - dips[i + dir]);
        return t_values[i] + f * (t_values[i + dir] - t_values[i]);
      }
    return t_values[dir < 0 ? 0 : dips.size() - 1];
  };
  return crossing(1) - crossing(-1);
}

}  // namespace

TEST(PhantomWidthOracle, NoiseFreeLumenWidthMatchesMld) {
  const PhantomSize size = PhantomSize::desk();
  PhantomRanges ranges;
  ranges.noise_sigma = 0.0;
  ranges.orientation_spread_deg = 60.0;
  ranges.center_jitter = 0.1;
  std::mt19937_64 rng(21);
  int within = 0;
  const int trials = 60;
  for (int i = 0; i < trials; ++i) {
    const StenosisSpec spec = sample_spec(rng, ranges, size);
    const Tensor seq = render_sequence(spec, spec.main_view, size.frames, size.height, size.width, 1);
    ASSERT_LE(spec.contrast_arrival_frame, size.frames - 1);
    Tensor last({size.height, size.width});
    std::copy_n(seq.data() + (size.frames - 1) * last.size(), last.size(), last.data());
    const double width = measured_lumen_width(spec, last);
    const double expected = spec.mld / spec.mm_per_pixel;
    if (std::abs(width - expected) <= 1.0) ++within;
    else
      ADD_FAILURE() << "spec " << i << ": measured " << width << " px, MLD " << expected << " px";
  }
  EXPECT_EQ(within, trials);
}

TEST(PhantomWidthOracle, WideLesionAtCanonicalPose) {
  const PhantomSize size = PhantomSize::desk();
  PhantomRanges ranges;
  ranges.noise_sigma = 0.0;
  std::mt19937_64 rng(5);
  StenosisSpec spec = sample_spec(rng, ranges, size);
  spec.rvd1 = spec.rvd2 = 4.4;
  spec.mld = 3.6;
  const Tensor seq = render_sequence(spec, spec.main_view, size.frames, size.height, size.width, 1);
  Tensor last({size.height, size.width});
  std::copy_n(seq.data() + (size.frames - 1) * last.size(), last.size(), last.data());
  EXPECT_NEAR(measured_lumen_width(spec, last), spec.mld / spec.mm_per_pixel, 1.0);
}

TEST(PhantomFrameZero, NoiseFreeFrameIsPureBackground) {
  const PhantomSize size = PhantomSize::desk();
  PhantomRanges ranges;
  ranges.noise_sigma = 0.0;
  std::mt19937_64 rng(8);
  for (int i = 0; i < 10; ++i) {
    const StenosisSpec spec = sample_spec(rng, ranges, size);
    ASSERT_GE(spec.contrast_arrival_frame, 1u);
    const Tensor seq = render_sequence(spec, spec.main_view, size.frames, size.height, size.width, 3);
    for (std::size_t r = 0; r < size.height; ++r)
      for (std::size_t q = 0; q < size.width; ++q)
        ASSERT_DOUBLE_EQ(seq.at({0, r, q}), background_intensity(spec, q + 0.5, r + 0.5, size.height, size.width));
  }
}

// With noise, pixels under the vessel footprint in frame 0 fall below
// background - 3 sigma no more often than pure Gaussian noise would.
TEST(PhantomFrameZero, NoVesselDarkerThanThreeSigma) {
  const PhantomSize size = PhantomSize::desk();
  PhantomRanges ranges;
  ranges.noise_sigma = 0.02;
  std::mt19937_64 rng(9);
  std::size_t footprint = 0, dark = 0;
  for (int i = 0; i < 20; ++i) {
    StenosisSpec spec = sample_spec(rng, ranges, size);
    const Tensor noisy = render_sequence(spec, spec.main_view, size.frames, size.height, size.width, 100 + i);
    spec.noise_sigma = 0.0;
    const Tensor clean = render_sequence(spec, spec.main_view, size.frames, size.height, size.width, 100 + i);
    const std::size_t last = size.frames - 1;
    for (std::size_t r = 0; r < size.height; ++r)
      for (std::size_t q = 0; q < size.width; ++q) {
        const double bg = background_intensity(spec, q + 0.5, r + 0.5, size.height, size.width);
        if (clean.at({last, r, q}) > bg - 0.05) continue;
        ++footprint;
        if (noisy.at({0, r, q}) < bg - 3.0 * ranges.noise_sigma) ++dark;
      }
  }
  ASSERT_GT(footprint, 500u);
  const double p = 0.00135;
  const double bound = footprint * p + 5.0 * std::sqrt(footprint * p * (1 - p)) + 1.0;
  EXPECT_LE(static_cast<double>(dark), bound) << dark << " of " << footprint << " footprint pixels";
}

TEST(PhantomSeeds, SameGeometryDifferentNoise) {
  const PhantomSize size = PhantomSize::desk();
  PhantomRanges ranges;
  ranges.noise_sigma = 0.02;
  std::mt19937_64 rng(10);
  StenosisSpec spec = sample_spec(rng, ranges, size);
  const Tensor a = render_sequence(spec, spec.main_view, size.frames, size.height, size.width, 1);
  const Tensor b = render_sequence(spec, spec.main_view, size.frames, size.height, size.width, 2);
  EXPECT_NE(a, b);
  spec.noise_sigma = 0.0;
  EXPECT_EQ(render_sequence(spec, spec.main_view, size.frames, size.height, size.width, 1),
            render_sequence(spec, spec.main_view, size.frames, size.height, size.width, 2));
  // Noise residuals have the configured spread.
  const Tensor clean = render_sequence(spec, spec.main_view, size.frames, size.height, size.width, 1);
  double ss = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) ss += (a[i] - clean[i]) * (a[i] - clean[i]);
  EXPECT_NEAR(std::sqrt(ss / a.size()), 0.02, 0.001);
}

// SPDX-License-Identifier: Apache-2.0
//
// Synthetic angiography phantom. A single vessel follows a cubic Bezier
// centreline in 3-D; its diameter profile is an isosceles-trapezoid
// stenosis (RVD1 tapering to MLD over LL1, widening to RVD2 over LL2).
// Sequences are orthographic projections from two C-arm poses with an
// advancing contrast front, a linear illumination gradient and Gaussian
// noise. Labels are exact.

#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <vector>

#include "dmqca/sample.hpp"
#include "dmqca/tensor.hpp"

namespace dmqca {

struct Vec3 {
  double x = 0.0, y = 0.0, z = 0.0;
};

/// C-arm pose: rotation about the patient's vertical axis (LAO/RAO) then
/// about the horizontal axis (CRA/CAU), in degrees.
struct Viewpoint {
  double primary_deg = 0.0;
  double secondary_deg = 0.0;
};

struct StenosisSpec {
  double rvd1 = 3.0;  // mm
  double rvd2 = 3.0;
  double mld = 1.5;
  double ll1 = 5.0;
  double ll2 = 5.0;
  /// Arclength (mm) of the narrowest point along the centreline.
  double lesion_center = 20.0;
  std::array<Vec3, 4> control_points{};
  Viewpoint main_view;
  Viewpoint support_view;
  double mm_per_pixel = 0.6;
  double noise_sigma = 0.02;
  std::size_t contrast_arrival_frame = 2;
  /// Illumination change across the full image width / height.
  std::array<double, 2> illumination_gradient{0.0, 0.0};

  void validate() const;
  /// (RVD1, RVD2, RVD, MLD, LL1, LL2).
  IndexVector label() const;
};

/// Length-weighted reference diameter (RVD2*LL1 + RVD1*LL2) / (LL1 + LL2).
double compute_rvd(double rvd1, double rvd2, double ll1, double ll2);

/// Arclength-parameterised cubic Bezier.
class Centerline {
 public:
  explicit Centerline(const std::array<Vec3, 4>& control_points);
  double length() const { return arclength_.back(); }
  Vec3 point_at(double s) const;

 private:
  std::array<Vec3, 4> cp_;
  std::vector<double> arclength_;  // at uniform parameter steps
};

/// Diameter (mm) at arclength s; throws ArgumentError outside [0, length].
double diameter_profile(const StenosisSpec& spec, double s);
/// Same profile without the centreline range check.
double trapezoid_diameter(const StenosisSpec& spec, double s);

/// Continuous image coordinates (column, row) of a 3-D point; pixel (r, c)
/// covers [c, c+1) x [r, r+1).
std::array<double, 2> project(const StenosisSpec& spec, const Viewpoint& view, const Vec3& p,
                              std::size_t height, std::size_t width);

/// Noise-free background intensity at continuous image coordinates.
double background_intensity(const StenosisSpec& spec, double col, double row,
                            std::size_t height, std::size_t width);

/// Renders [T, H, W] frames in [0, 1]. The seed drives only the noise.
Tensor render_sequence(const StenosisSpec& spec, const Viewpoint& view, std::size_t frames,
                       std::size_t height, std::size_t width, std::uint64_t seed);

struct PhantomSize {
  std::size_t frames = 4;
  std::size_t height = 64;
  std::size_t width = 64;
  /// Field of view (mm) covered by the image width.
  double field_of_view_mm = 38.4;

  static PhantomSize desk() { return {}; }
  static PhantomSize paper() { return {10, 256, 256, 38.4}; }
  double mm_per_pixel() const { return field_of_view_mm / static_cast<double>(width); }
};

struct PhantomRanges {
  std::array<double, 2> rvd{2.0, 4.5};
  /// MLD as a fraction of min(RVD1, RVD2).
  std::array<double, 2> mld_fraction{0.5, 0.9};
  std::array<double, 2> lesion_length{2.0, 12.0};
  double noise_sigma = 0.005;
  /// Half-width of the in-plane vessel direction around horizontal, degrees.
  double orientation_spread_deg = 0.0;
  /// Lesion-centre offset from the image centre, as a fraction of the field of view.
  double center_jitter = 0.0;

  /// Learnability benchmark: defaults with deeper stenoses, MLD in
  /// [0.3, 0.7] * min(RVD1, RVD2).
  static PhantomRanges benchmark();
  void validate() const;
};

/// Draws a spec whose lesion projects inside the image in both views.
/// Throws GenerationError if no valid pose is found.
StenosisSpec sample_spec(std::mt19937_64& rng, const PhantomRanges& ranges,
                         const PhantomSize& size);

/// Renders both views and the keyframe (last main-view frame) for a spec.
Sample render_sample(const StenosisSpec& spec, const PhantomSize& size, std::uint64_t seed,
                     std::string id);

/// Per-sample seed used by dataset generation for sample `index`.
std::uint64_t sample_seed(std::uint64_t global_seed, std::size_t index);

}  // namespace dmqca

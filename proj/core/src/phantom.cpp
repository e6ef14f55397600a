// SPDX-License-Identifier: Apache-2.0
#include "dmqca/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "dmqca/errors.hpp"

namespace dmqca {

namespace {

constexpr std::size_t kArclengthSteps = 4096;
// Tube appearance: dip = kContrast * (1 - exp(-kAttenuation * chord_mm)).
constexpr double kContrast = 0.7;
constexpr double kAttenuation = 0.5;
constexpr double kBaseIntensity = 0.85;

Vec3 bezier(const std::array<Vec3, 4>& cp, double u) {
  const double a = (1 - u) * (1 - u) * (1 - u);
  const double b = 3 * (1 - u) * (1 - u) * u;
  const double c = 3 * (1 - u) * u * u;
  const double d = u * u * u;
  return {a * cp[0].x + b * cp[1].x + c * cp[2].x + d * cp[3].x,
          a * cp[0].y + b * cp[1].y + c * cp[2].y + d * cp[3].y,
          a * cp[0].z + b * cp[1].z + c * cp[2].z + d * cp[3].z};
}

double distance(const Vec3& a, const Vec3& b) {
  return std::sqrt((a.x - b.x) * (a.x - b.x) + (a.y - b.y) * (a.y - b.y) + (a.z - b.z) * (a.z - b.z));
}

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

double compute_rvd(double rvd1, double rvd2, double ll1, double ll2) {
  if (!(ll1 > 0.0) || !(ll2 > 0.0))
    throw ArgumentError("compute_rvd: lesion lengths must be positive");
  if (!(rvd1 > 0.0) || !(rvd2 > 0.0))
    throw ArgumentError("compute_rvd: reference diameters must be positive");
  // Same weighted mean as (RVD2*LL1 + RVD1*LL2) / (LL1 + LL2), exact when RVD1 == RVD2.
  return rvd1 + (rvd2 - rvd1) * (ll1 / (ll1 + ll2));
}

void StenosisSpec::validate() const {
  if (!(rvd1 > 0.0 && rvd2 > 0.0)) throw ArgumentError("stenosis: RVD1 and RVD2 must be positive");
  if (!(mld > 0.0 && mld < std::min(rvd1, rvd2)))
    throw ArgumentError("stenosis: MLD must lie in (0, min(RVD1, RVD2))");
  if (!(ll1 > 0.0 && ll2 > 0.0)) throw ArgumentError("stenosis: LL1 and LL2 must be positive");
  if (!(mm_per_pixel > 0.0)) throw ArgumentError("stenosis: mm_per_pixel must be positive");
  if (!(noise_sigma >= 0.0)) throw ArgumentError("stenosis: noise level must be >= 0");
  const double length = Centerline(control_points).length();
  if (lesion_center - ll1 < 0.0 || lesion_center + ll2 > length)
    throw ArgumentError("stenosis: lesion extends beyond the centreline");
}

IndexVector StenosisSpec::label() const {
  return {rvd1, rvd2, compute_rvd(rvd1, rvd2, ll1, ll2), mld, ll1, ll2};
}

Centerline::Centerline(const std::array<Vec3, 4>& control_points) : cp_(control_points) {
  arclength_.resize(kArclengthSteps + 1);
  arclength_[0] = 0.0;
  Vec3 prev = bezier(cp_, 0.0);
  for (std::size_t i = 1; i <= kArclengthSteps; ++i) {
    const Vec3 p = bezier(cp_, static_cast<double>(i) / kArclengthSteps);
    arclength_[i] = arclength_[i - 1] + distance(prev, p);
    prev = p;
  }
}

Vec3 Centerline::point_at(double s) const {
  s = std::clamp(s, 0.0, length());
  const auto it = std::lower_bound(arclength_.begin(), arclength_.end(), s);
  std::size_t hi = static_cast<std::size_t>(it - arclength_.begin());
  if (hi == 0) return cp_[0];
  const std::size_t lo = hi - 1;
  const double span = arclength_[hi] - arclength_[lo];
  const double frac = span > 0.0 ? (s - arclength_[lo]) / span : 0.0;
  const double u = (static_cast<double>(lo) + frac) / kArclengthSteps;
  return bezier(cp_, u);
}

double trapezoid_diameter(const StenosisSpec& spec, double s) {
  const double start = spec.lesion_center - spec.ll1;
  const double end = spec.lesion_center + spec.ll2;
  if (s <= start) return spec.rvd1;
  if (s >= end) return spec.rvd2;
  if (s <= spec.lesion_center) {
    const double f = (s - start) / spec.ll1;
    return spec.rvd1 + f * (spec.mld - spec.rvd1);
  }
  const double f = (s - spec.lesion_center) / spec.ll2;
  return spec.mld + f * (spec.rvd2 - spec.mld);
}

double diameter_profile(const StenosisSpec& spec, double s) {
  const double length = Centerline(spec.control_points).length();
  if (!(s >= 0.0 && s <= length))
    throw ArgumentError("diameter_profile: arclength " + std::to_string(s) +
                        " outside vessel extent [0, " + std::to_string(length) + "]");
  return trapezoid_diameter(spec, s);
}

std::array<double, 2> project(const StenosisSpec& spec, const Viewpoint& view, const Vec3& p,
                              std::size_t height, std::size_t width) {
  const double a = view.primary_deg * std::numbers::pi / 180.0;
  const double b = view.secondary_deg * std::numbers::pi / 180.0;
  const double x1 = std::cos(a) * p.x + std::sin(a) * p.z;
  const double y1 = p.y;
  const double z1 = -std::sin(a) * p.x + std::cos(a) * p.z;
  const double x2 = x1;
  const double y2 = std::cos(b) * y1 - std::sin(b) * z1;
  return {static_cast<double>(width) / 2.0 + x2 / spec.mm_per_pixel,
          static_cast<double>(height) / 2.0 - y2 / spec.mm_per_pixel};
}

double background_intensity(const StenosisSpec& spec, double col, double row,
                            std::size_t height, std::size_t width) {
  return kBaseIntensity +
         spec.illumination_gradient[0] * (col / static_cast<double>(width) - 0.5) +
         spec.illumination_gradient[1] * (row / static_cast<double>(height) - 0.5);
}

Tensor render_sequence(const StenosisSpec& spec, const Viewpoint& view, std::size_t frames,
                       std::size_t height, std::size_t width, std::uint64_t seed) {
  if (frames < 1 || height < 1 || width < 1)
    throw ArgumentError("render_sequence: frames, height and width must be >= 1");
  spec.validate();
  const Centerline line(spec.control_points);
  const double length = line.length();
  const double mmpp = spec.mm_per_pixel;

  // Nearest centreline sample for every pixel near the vessel.
  const double ds = mmpp / 4.0;
  const std::size_t n = static_cast<std::size_t>(std::ceil(length / ds)) + 1;
  const double max_radius_px = std::max(spec.rvd1, spec.rvd2) / 2.0 / mmpp;
  const long reach = static_cast<long>(std::ceil(max_radius_px)) + 2;
  const std::size_t pixels = height * width;
  std::vector<double> best_d2(pixels, std::numeric_limits<double>::infinity());
  std::vector<double> best_s(pixels, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    const double s = std::min(static_cast<double>(k) * ds, length);
    const auto c = project(spec, view, line.point_at(s), height, width);
    const long c0 = static_cast<long>(std::floor(c[0])) - reach;
    const long r0 = static_cast<long>(std::floor(c[1])) - reach;
    for (long r = std::max(0L, r0); r <= std::min<long>(static_cast<long>(height) - 1, r0 + 2 * reach); ++r)
      for (long q = std::max(0L, c0); q <= std::min<long>(static_cast<long>(width) - 1, c0 + 2 * reach); ++q) {
        const double dx = static_cast<double>(q) + 0.5 - c[0];
        const double dy = static_cast<double>(r) + 0.5 - c[1];
        const double d2 = dx * dx + dy * dy;
        const std::size_t idx = static_cast<std::size_t>(r) * width + static_cast<std::size_t>(q);
        if (d2 < best_d2[idx]) {
          best_d2[idx] = d2;
          best_s[idx] = s;
        }
      }
  }

  // Depth-integrated attenuation through the tube at each pixel.
  std::vector<double> dip(pixels, 0.0);
  for (std::size_t i = 0; i < pixels; ++i) {
    if (!std::isfinite(best_d2[i])) continue;
    const double r_mm = trapezoid_diameter(spec, best_s[i]) / 2.0;
    const double d_mm = std::sqrt(best_d2[i]) * mmpp;
    if (d_mm >= r_mm) continue;
    const double chord = 2.0 * std::sqrt(r_mm * r_mm - d_mm * d_mm);
    dip[i] = kContrast * (1.0 - std::exp(-kAttenuation * chord));
  }

  Tensor out({frames, height, width});
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  const std::size_t arrival = spec.contrast_arrival_frame;
  for (std::size_t t = 0; t < frames; ++t) {
    const double front = t >= arrival ? std::numeric_limits<double>::infinity()
                                      : length * static_cast<double>(t) / static_cast<double>(arrival);
    double* frame = out.data() + t * pixels;
    for (std::size_t r = 0; r < height; ++r)
      for (std::size_t q = 0; q < width; ++q) {
        const std::size_t idx = r * width + q;
        const double bg = background_intensity(spec, static_cast<double>(q) + 0.5,
                                                static_cast<double>(r) + 0.5, height, width);
        const double opacity = best_s[idx] < front ? dip[idx] : 0.0;
        const double value = bg * (1.0 - opacity) + spec.noise_sigma * noise(rng);
        frame[idx] = std::clamp(value, 0.0, 1.0);
      }
  }
  return out;
}

PhantomRanges PhantomRanges::benchmark() {
  PhantomRanges r;
  r.mld_fraction = {0.3, 0.7};
  return r;
}

void PhantomRanges::validate() const {
  if (!(rvd[0] > 0.0 && rvd[0] <= rvd[1])) throw ArgumentError("phantom: invalid RVD range");
  if (!(mld_fraction[0] > 0.0 && mld_fraction[0] <= mld_fraction[1] && mld_fraction[1] < 1.0))
    throw ArgumentError("phantom: MLD fraction range must lie in (0, 1)");
  if (!(lesion_length[0] > 0.0 && lesion_length[0] <= lesion_length[1]))
    throw ArgumentError("phantom: invalid lesion length range");
  if (!(noise_sigma >= 0.0)) throw ArgumentError("phantom: noise level must be >= 0");
  if (!(orientation_spread_deg >= 0.0 && orientation_spread_deg <= 90.0))
    throw ArgumentError("phantom: orientation spread must lie in [0, 90] degrees");
  if (!(center_jitter >= 0.0 && center_jitter <= 0.25))
    throw ArgumentError("phantom: centre jitter must lie in [0, 0.25]");
}

StenosisSpec sample_spec(std::mt19937_64& rng, const PhantomRanges& ranges,
                         const PhantomSize& size) {
  ranges.validate();
  StenosisSpec spec;
  spec.rvd1 = uniform(rng, ranges.rvd[0], ranges.rvd[1]);
  spec.rvd2 = uniform(rng, ranges.rvd[0], ranges.rvd[1]);
  spec.mld = uniform(rng, ranges.mld_fraction[0], ranges.mld_fraction[1]) *
             std::min(spec.rvd1, spec.rvd2);
  spec.ll1 = uniform(rng, ranges.lesion_length[0], ranges.lesion_length[1]);
  spec.ll2 = uniform(rng, ranges.lesion_length[0], ranges.lesion_length[1]);
  spec.mm_per_pixel = size.mm_per_pixel();
  spec.noise_sigma = ranges.noise_sigma;
  spec.contrast_arrival_frame =
      size.frames < 2
          ? 0
          : std::uniform_int_distribution<std::size_t>(std::max<std::size_t>(1, size.frames / 2),
                                                       size.frames - 1)(rng);
  spec.illumination_gradient = {uniform(rng, -0.08, 0.08), uniform(rng, -0.08, 0.08)};

  const double fov = size.field_of_view_mm;
  const double margin_mm = 3.0;
  const double radius_px = std::max(spec.rvd1, spec.rvd2) / 2.0 / spec.mm_per_pixel;
  for (int attempt = 0; attempt < 200; ++attempt) {
    const double chord = 1.2 * fov;
    const double spread = ranges.orientation_spread_deg * std::numbers::pi / 180.0;
    const double theta = uniform(rng, -spread, spread);
    const Vec3 dir{std::cos(theta), std::sin(theta), 0.0};
    const Vec3 normal{-std::sin(theta), std::cos(theta), 0.0};
    const double bend1 = uniform(rng, -0.1, 0.1) * fov;
    const double bend2 = uniform(rng, -0.1, 0.1) * fov;
    const double lift1 = uniform(rng, -0.12, 0.12) * fov;
    const double lift2 = uniform(rng, -0.12, 0.12) * fov;
    std::array<Vec3, 4> cp{};
    const double along[4] = {-0.5, -1.0 / 6.0, 1.0 / 6.0, 0.5};
    const double side[4] = {0.0, bend1, bend2, 0.0};
    const double lift[4] = {0.0, lift1, lift2, 0.0};
    for (int i = 0; i < 4; ++i)
      cp[i] = {dir.x * along[i] * chord + normal.x * side[i],
               dir.y * along[i] * chord + normal.y * side[i], lift[i]};
    const Centerline line(cp);
    const double length = line.length();
    const double lo = spec.ll1 + margin_mm;
    const double hi = length - spec.ll2 - margin_mm;
    if (lo >= hi) continue;
    spec.lesion_center = uniform(rng, lo, hi);

    // Shift so the lesion centre sits near the image centre.
    const Vec3 centre = line.point_at(spec.lesion_center);
    const double jitter = ranges.center_jitter;
    const Vec3 target{uniform(rng, -jitter, jitter) * fov, uniform(rng, -jitter, jitter) * fov,
                      0.0};
    for (auto& p : cp) {
      p.x += target.x - centre.x;
      p.y += target.y - centre.y;
      p.z += target.z - centre.z;
    }
    spec.control_points = cp;
    spec.main_view = {uniform(rng, -15.0, 15.0), uniform(rng, -10.0, 10.0)};
    const double sign = uniform(rng, 0.0, 1.0) < 0.5 ? -1.0 : 1.0;
    spec.support_view = {sign * uniform(rng, 30.0, 45.0), uniform(rng, -20.0, 20.0)};

    const Centerline shifted(cp);
    bool inside = true;
    for (const Viewpoint* view : {&spec.main_view, &spec.support_view}) {
      for (double s = spec.lesion_center - spec.ll1 - margin_mm;
           s <= spec.lesion_center + spec.ll2 + margin_mm && inside; s += 0.25) {
        const auto c = project(spec, *view, shifted.point_at(s), size.height, size.width);
        const double pad = radius_px + 2.0;
        inside = c[0] >= pad && c[0] <= static_cast<double>(size.width) - pad && c[1] >= pad &&
                 c[1] <= static_cast<double>(size.height) - pad;
      }
    }
    if (inside) {
      spec.validate();
      return spec;
    }
  }
  throw GenerationError("could not place the lesion inside the image after 200 poses");
}

Sample render_sample(const StenosisSpec& spec, const PhantomSize& size, std::uint64_t seed,
                     std::string id) {
  Sample s;
  s.id = std::move(id);
  s.main_view = render_sequence(spec, spec.main_view, size.frames, size.height, size.width,
                                splitmix64(seed ^ 0x1ULL));
  s.support_view = render_sequence(spec, spec.support_view, size.frames, size.height, size.width,
                                   splitmix64(seed ^ 0x2ULL));
  const std::size_t last = size.frames - 1;
  Tensor key({size.height, size.width});
  std::copy_n(s.main_view.data() + last * size.height * size.width, key.size(), key.data());
  s.keyframe = std::move(key);
  const IndexVector label = spec.label();
  s.label = Tensor({kNumIndices}, std::vector<double>(label.begin(), label.end()));
  return s;
}

std::uint64_t sample_seed(std::uint64_t global_seed, std::size_t index) {
  return global_seed + static_cast<std::uint64_t>(index);
}

}  // namespace dmqca

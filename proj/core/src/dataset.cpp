// SPDX-License-Identifier: Apache-2.0
#include "dmqca/dataset.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <iterator>
#include <nlohmann/json.hpp>
#include <sstream>

#include "dmqca/errors.hpp"

namespace dmqca {

using nlohmann::json;

namespace {

constexpr char kFrameMagic[4] = {'D', 'M', 'Q', 'F'};

void put_u32(std::vector<unsigned char>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<unsigned char>(v >> (8 * i)));
}

std::uint32_t get_u32(const std::vector<unsigned char>& in, std::size_t pos) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(in[pos + i]) << (8 * i);
  return v;
}

json vec3_json(const Vec3& v) { return json::array({v.x, v.y, v.z}); }
Vec3 vec3_from(const json& j) { return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()}; }

json spec_json(const StenosisSpec& s) {
  json cps = json::array();
  for (const auto& p : s.control_points) cps.push_back(vec3_json(p));
  return {{"rvd1", s.rvd1},
          {"rvd2", s.rvd2},
          {"mld", s.mld},
          {"ll1", s.ll1},
          {"ll2", s.ll2},
          {"lesion_center", s.lesion_center},
          {"control_points", cps},
          {"main_view", {s.main_view.primary_deg, s.main_view.secondary_deg}},
          {"support_view", {s.support_view.primary_deg, s.support_view.secondary_deg}},
          {"mm_per_pixel", s.mm_per_pixel},
          {"noise_sigma", s.noise_sigma},
          {"contrast_arrival_frame", s.contrast_arrival_frame},
          {"illumination_gradient", s.illumination_gradient}};
}

StenosisSpec spec_from(const json& j) {
  StenosisSpec s;
  s.rvd1 = j.at("rvd1").get<double>();
  s.rvd2 = j.at("rvd2").get<double>();
  s.mld = j.at("mld").get<double>();
  s.ll1 = j.at("ll1").get<double>();
  s.ll2 = j.at("ll2").get<double>();
  s.lesion_center = j.at("lesion_center").get<double>();
  for (std::size_t i = 0; i < 4; ++i) s.control_points[i] = vec3_from(j.at("control_points").at(i));
  s.main_view = {j.at("main_view").at(0).get<double>(), j.at("main_view").at(1).get<double>()};
  s.support_view = {j.at("support_view").at(0).get<double>(),
                    j.at("support_view").at(1).get<double>()};
  s.mm_per_pixel = j.at("mm_per_pixel").get<double>();
  s.noise_sigma = j.at("noise_sigma").get<double>();
  s.contrast_arrival_frame = j.at("contrast_arrival_frame").get<std::size_t>();
  s.illumination_gradient = j.at("illumination_gradient").get<std::array<double, 2>>();
  return s;
}

}  // namespace

void write_frames(const std::filesystem::path& path, const Tensor& frames) {
  if (frames.rank() != 3) throw DimensionError("write_frames: expected [T, H, W]");
  std::vector<unsigned char> bytes(kFrameMagic, kFrameMagic + 4);
  for (auto e : frames.shape()) put_u32(bytes, static_cast<std::uint32_t>(e));
  bytes.reserve(bytes.size() + 4 * frames.size());
  for (double v : frames.values()) put_u32(bytes, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing " + path.string());
}

Tensor read_frames(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  const std::vector<unsigned char> bytes{std::istreambuf_iterator<char>(in),
                                         std::istreambuf_iterator<char>()};
  if (bytes.size() < 16 || std::memcmp(bytes.data(), kFrameMagic, 4) != 0)
    throw IntegrityError(path.string() + " is not a DMQF frame file");
  const Shape shape{get_u32(bytes, 4), get_u32(bytes, 8), get_u32(bytes, 12)};
  for (auto e : shape)
    if (e == 0) throw IntegrityError(path.string() + " has a zero extent");
  const std::size_t n = shape_numel(shape);
  if (bytes.size() != 16 + 4 * n)
    throw IntegrityError(path.string() + " has " + std::to_string(bytes.size()) +
                         " bytes, expected " + std::to_string(16 + 4 * n));
  std::vector<double> data(n);
  for (std::size_t i = 0; i < n; ++i)
    data[i] = static_cast<double>(std::bit_cast<float>(get_u32(bytes, 16 + 4 * i)));
  return Tensor(shape, std::move(data));
}

void write_manifest(const std::filesystem::path& path, const Manifest& m) {
  json samples = json::array();
  for (const auto& e : m.samples)
    samples.push_back({{"id", e.id},
                       {"spec", spec_json(e.spec)},
                       {"label", e.label},
                       {"files",
                        {{"main", e.main_file},
                         {"support", e.support_file},
                         {"keyframe", e.keyframe_file}}}});
  const json j = {{"schema_version", m.schema_version},
                  {"seed", m.seed},
                  {"size",
                   {{"frames", m.size.frames},
                    {"height", m.size.height},
                    {"width", m.size.width},
                    {"field_of_view_mm", m.size.field_of_view_mm}}},
                  {"ranges",
                   {{"rvd", m.ranges.rvd},
                    {"mld_fraction", m.ranges.mld_fraction},
                    {"lesion_length", m.ranges.lesion_length},
                    {"noise_sigma", m.ranges.noise_sigma},
                    {"orientation_spread_deg", m.ranges.orientation_spread_deg},
                    {"center_jitter", m.ranges.center_jitter}}},
                  {"label_order", kIndexNames},
                  {"samples", samples}};
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << j.dump(2) << "\n";
  if (!out) throw IoError("failed writing " + path.string());
}

Manifest read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw IntegrityError("malformed manifest " + path.string() + ": " + e.what());
  }
  try {
    Manifest m;
    m.schema_version = j.at("schema_version").get<int>();
    if (m.schema_version != kManifestSchemaVersion)
      throw IntegrityError("unsupported manifest schema version " + std::to_string(m.schema_version));
    m.seed = j.at("seed").get<std::uint64_t>();
    const json& size = j.at("size");
    m.size = {size.at("frames").get<std::size_t>(), size.at("height").get<std::size_t>(),
              size.at("width").get<std::size_t>(), size.at("field_of_view_mm").get<double>()};
    const json& ranges = j.at("ranges");
    m.ranges.rvd = ranges.at("rvd").get<std::array<double, 2>>();
    m.ranges.mld_fraction = ranges.at("mld_fraction").get<std::array<double, 2>>();
    m.ranges.lesion_length = ranges.at("lesion_length").get<std::array<double, 2>>();
    m.ranges.noise_sigma = ranges.at("noise_sigma").get<double>();
    m.ranges.orientation_spread_deg = ranges.at("orientation_spread_deg").get<double>();
    m.ranges.center_jitter = ranges.at("center_jitter").get<double>();
    for (const auto& s : j.at("samples")) {
      ManifestEntry e;
      e.id = s.at("id").get<std::string>();
      e.spec = spec_from(s.at("spec"));
      e.label = s.at("label").get<IndexVector>();
      e.main_file = s.at("files").at("main").get<std::string>();
      e.support_file = s.at("files").at("support").get<std::string>();
      e.keyframe_file = s.at("files").at("keyframe").get<std::string>();
      m.samples.push_back(std::move(e));
    }
    return m;
  } catch (const json::exception& e) {
    throw IntegrityError("malformed manifest " + path.string() + ": " + e.what());
  }
}

Manifest generate_dataset(std::size_t n, std::uint64_t seed, const PhantomRanges& ranges,
                          const PhantomSize& size, const std::filesystem::path& out_dir) {
  if (n < 1) throw ArgumentError("generate_dataset: n must be >= 1");
  ranges.validate();
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec || !std::filesystem::is_directory(out_dir))
    throw IoError("cannot create dataset directory " + out_dir.string());

  Manifest m;
  m.seed = seed;
  m.size = size;
  m.ranges = ranges;
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint64_t s = sample_seed(seed, i);
    std::mt19937_64 rng(s);
    const StenosisSpec spec = sample_spec(rng, ranges, size);
    std::ostringstream id;
    id << "s" << std::setw(4) << std::setfill('0') << i;
    const Sample sample = render_sample(spec, size, s, id.str());
    ManifestEntry e;
    e.id = sample.id;
    e.spec = spec;
    e.label = sample.label_array();
    e.main_file = e.id + "_main.dmqf";
    e.support_file = e.id + "_support.dmqf";
    e.keyframe_file = e.id + "_key.dmqf";
    write_frames(out_dir / e.main_file, sample.main_view);
    write_frames(out_dir / e.support_file, sample.support_view);
    write_frames(out_dir / e.keyframe_file,
                 sample.keyframe.reshaped({1, size.height, size.width}));
    m.samples.push_back(std::move(e));
  }
  write_manifest(out_dir / "manifest.json", m);
  return m;
}

Dataset load_dataset(const std::filesystem::path& dir) {
  Dataset d;
  d.manifest = read_manifest(dir / "manifest.json");
  const PhantomSize& size = d.manifest.size;
  for (const auto& e : d.manifest.samples) {
    Sample s;
    s.id = e.id;
    s.main_view = read_frames(dir / e.main_file);
    s.support_view = read_frames(dir / e.support_file);
    const Tensor key = read_frames(dir / e.keyframe_file);
    const Shape seq{size.frames, size.height, size.width};
    if (s.main_view.shape() != seq || s.support_view.shape() != seq ||
        key.shape() != Shape{1, size.height, size.width})
      throw IntegrityError("sample " + e.id + " does not match the manifest dimensions");
    s.keyframe = key.reshaped({size.height, size.width});
    s.label = Tensor({kNumIndices}, std::vector<double>(e.label.begin(), e.label.end()));
    d.samples.push_back(std::move(s));
  }
  return d;
}

}  // namespace dmqca

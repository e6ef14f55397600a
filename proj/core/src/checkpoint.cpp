// SPDX-License-Identifier: Apache-2.0
#include "dmqca/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <map>

#include "dmqca/errors.hpp"

namespace dmqca {

namespace {

constexpr char kMagic[4] = {'D', 'M', 'Q', 'C'};

std::uint64_t fnv1a(const std::vector<unsigned char>& bytes, std::size_t n) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::size_t i = 0; i < n; ++i) {
    h ^= bytes[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

class Writer {
 public:
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) bytes_.push_back(static_cast<unsigned char>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) bytes_.push_back(static_cast<unsigned char>(v >> (8 * i)));
  }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
  void raw(const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    bytes_.insert(bytes_.end(), p, p + n);
  }
  std::vector<unsigned char>& bytes() { return bytes_; }

 private:
  std::vector<unsigned char> bytes_;
};

class Reader {
 public:
  explicit Reader(const std::vector<unsigned char>& bytes, std::size_t limit)
      : bytes_(bytes), limit_(limit) {}
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes_[pos_ + i]) << (8 * i);
    pos_ += 8;
    return v;
  }
  float f32() { return std::bit_cast<float>(u32()); }
  std::string str(std::size_t n) {
    need(n);
    std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), n);
    pos_ += n;
    return s;
  }
  std::size_t pos() const { return pos_; }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > limit_) throw IntegrityError("checkpoint is truncated");
  }
  const std::vector<unsigned char>& bytes_;
  std::size_t limit_;
  std::size_t pos_ = 0;
};

std::vector<unsigned char> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

struct Record {
  Shape shape;
  std::vector<float> values;
};

struct Parsed {
  CheckpointInfo info;
  std::map<std::string, Record> records;
};

Parsed parse(const std::vector<unsigned char>& bytes) {
  if (bytes.size() < sizeof(kMagic) || std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0) {
    if (bytes.size() < sizeof(kMagic)) throw IntegrityError("checkpoint is truncated");
    throw IntegrityError("not a checkpoint file (bad magic)");
  }
  if (bytes.size() < sizeof(kMagic) + 8) throw IntegrityError("checkpoint is truncated");
  const std::size_t body = bytes.size() - 8;
  std::uint64_t stored = 0;
  for (int i = 0; i < 8; ++i) stored |= static_cast<std::uint64_t>(bytes[body + i]) << (8 * i);
  if (stored != fnv1a(bytes, body))
    throw IntegrityError("checkpoint checksum mismatch (truncated or corrupt file)");
  Reader r(bytes, body);
  r.str(sizeof(kMagic));
  Parsed out;
  out.info.version = r.u32();
  if (out.info.version != kCheckpointVersion)
    throw FingerprintError("checkpoint format version " + std::to_string(out.info.version) +
                           " is not supported (expected " + std::to_string(kCheckpointVersion) + ")");
  out.info.fingerprint = r.u64();
  const std::uint32_t count = r.u32();
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::uint32_t name_len = r.u32();
    std::string name = r.str(name_len);
    const std::uint32_t rank = r.u32();
    Record rec;
    for (std::uint32_t d = 0; d < rank; ++d) rec.shape.push_back(r.u32());
    const std::size_t n = shape_numel(rec.shape);
    if (n > (body - r.pos()) / 4) throw IntegrityError("checkpoint is truncated");
    rec.values.resize(n);
    for (auto& v : rec.values) v = r.f32();
    out.info.names.push_back(name);
    if (!out.records.emplace(std::move(name), std::move(rec)).second)
      throw IntegrityError("checkpoint has duplicate record names");
  }
  if (r.pos() != body) throw IntegrityError("checkpoint has trailing bytes");
  return out;
}

}  // namespace

void save_checkpoint(const DmqcaParams& params, const ModelConfig& model,
                     const AblationConfig& ablation, const std::filesystem::path& path) {
  Writer w;
  w.raw(kMagic, sizeof(kMagic));
  w.u32(kCheckpointVersion);
  w.u64(config_fingerprint(model.resolved(), ablation));
  const ParameterList list = params.parameters();
  w.u32(static_cast<std::uint32_t>(list.size()));
  for (const auto& p : list) {
    w.u32(static_cast<std::uint32_t>(p.name.size()));
    w.raw(p.name.data(), p.name.size());
    const Tensor& t = p.var.value();
    w.u32(static_cast<std::uint32_t>(t.rank()));
    for (auto e : t.shape()) w.u32(static_cast<std::uint32_t>(e));
    for (double v : t.values()) w.f32(static_cast<float>(v));
  }
  w.u64(fnv1a(w.bytes(), w.bytes().size()));

  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write checkpoint " + path.string());
  out.write(reinterpret_cast<const char*>(w.bytes().data()),
            static_cast<std::streamsize>(w.bytes().size()));
  if (!out) throw IoError("failed writing checkpoint " + path.string());
}

CheckpointInfo inspect_checkpoint(const std::filesystem::path& path) {
  return parse(read_file(path)).info;
}

DmqcaParams load_checkpoint(const std::filesystem::path& path, const ModelConfig& model,
                            const AblationConfig& ablation) {
  const Parsed parsed = parse(read_file(path));
  const ModelConfig cfg = model.resolved();
  if (parsed.info.fingerprint != config_fingerprint(cfg, ablation))
    throw FingerprintError("checkpoint " + path.string() +
                           " was written for a different model or ablation configuration");
  DmqcaParams params = DmqcaParams::init(cfg, ablation, 0);
  const ParameterList list = params.parameters();
  if (list.size() != parsed.records.size())
    throw FingerprintError("checkpoint parameter set does not match the configuration");
  for (const auto& p : list) {
    const auto it = parsed.records.find(p.name);
    if (it == parsed.records.end())
      throw FingerprintError("checkpoint is missing parameter " + p.name);
    if (it->second.shape != p.var.shape())
      throw FingerprintError("checkpoint parameter " + p.name + " has shape " +
                             shape_str(it->second.shape) + ", expected " + shape_str(p.var.shape()));
    Var v = p.var;
    Tensor& t = v.mutable_value();
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = static_cast<double>(it->second.values[i]);
  }
  return params;
}

void round_to_stored_precision(DmqcaParams& params) {
  for (auto& p : params.parameters()) {
    Var v = p.var;
    for (auto& x : v.mutable_value().values()) x = static_cast<double>(static_cast<float>(x));
  }
}

}  // namespace dmqca

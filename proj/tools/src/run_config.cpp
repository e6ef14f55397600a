// SPDX-License-Identifier: Apache-2.0
#include "run_config.hpp"

#include <fstream>
#include <set>

#include "dmqca/errors.hpp"

namespace dmqca::cli {
namespace {

using nlohmann::json;

void check_object(const json& j, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
}

void check_keys(const json& j, const std::string& where, const std::set<std::string>& allowed) {
  check_object(j, where);
  for (const auto& item : j.items())
    if (!allowed.count(item.key())) throw ConfigError("unknown key '" + where + "." + item.key() + "'");
}

std::string path_of(const std::string& where, const char* key) { return where + "." + key; }

void read(const json& j, const std::string& where, const char* key, double& out) {
  if (!j.contains(key)) return;
  const json& v = j.at(key);
  if (!v.is_number()) throw ConfigError(path_of(where, key) + ": expected a number");
  out = v.get<double>();
}

void read(const json& j, const std::string& where, const char* key, std::size_t& out) {
  if (!j.contains(key)) return;
  const json& v = j.at(key);
  if (!v.is_number_unsigned()) throw ConfigError(path_of(where, key) + ": expected a non-negative integer");
  out = v.get<std::size_t>();
}

void read(const json& j, const std::string& where, const char* key, bool& out) {
  if (!j.contains(key)) return;
  const json& v = j.at(key);
  if (!v.is_boolean()) throw ConfigError(path_of(where, key) + ": expected true or false");
  out = v.get<bool>();
}

void read(const json& j, const std::string& where, const char* key, std::string& out) {
  if (!j.contains(key)) return;
  const json& v = j.at(key);
  if (!v.is_string()) throw ConfigError(path_of(where, key) + ": expected a string");
  out = v.get<std::string>();
}

void read(const json& j, const std::string& where, const char* key, std::filesystem::path& out) {
  std::string s = out.string();
  read(j, where, key, s);
  out = s;
}

template <typename T, std::size_t N>
void read(const json& j, const std::string& where, const char* key, std::array<T, N>& out) {
  if (!j.contains(key)) return;
  const json& v = j.at(key);
  if (!v.is_array() || v.size() != N)
    throw ConfigError(path_of(where, key) + ": expected an array of " + std::to_string(N));
  for (std::size_t i = 0; i < N; ++i) {
    json item = {{"x", v[i]}};
    read(item, path_of(where, key) + "[" + std::to_string(i) + "]", "x", out[i]);
  }
}

void read(const json& j, const std::string& where, const char* key, std::vector<std::string>& out) {
  if (!j.contains(key)) return;
  const json& v = j.at(key);
  if (!v.is_array()) throw ConfigError(path_of(where, key) + ": expected an array of strings");
  out.clear();
  for (const auto& item : v) {
    if (!item.is_string()) throw ConfigError(path_of(where, key) + ": expected an array of strings");
    out.push_back(item.get<std::string>());
  }
}

void read_kernels(const json& j, const std::string& where, std::array<Triple, kViewConvStages>& out) {
  if (!j.contains("kernels")) return;
  const json& v = j.at("kernels");
  if (!v.is_array() || v.size() != kViewConvStages)
    throw ConfigError(where + ".kernels: expected " + std::to_string(kViewConvStages) + " [kt, kh, kw] triples");
  for (std::size_t s = 0; s < kViewConvStages; ++s) {
    std::array<std::size_t, 3> k{};
    json item = {{"k", v[s]}};
    read(item, where + ".kernels[" + std::to_string(s) + "]", "k", k);
    out[s] = Triple{k[0], k[1], k[2]};
  }
}

void parse_data(const json& j, DataSection& d) {
  check_keys(j, "data", {"dir", "n", "seed", "size"});
  read(j, "data", "dir", d.dir);
  read(j, "data", "n", d.n);
  read(j, "data", "seed", d.seed);
  read(j, "data", "size", d.size);
}

void parse_phantom(const json& j, PhantomRanges& p) {
  check_keys(j, "phantom", {"rvd", "mld_fraction", "lesion_length", "noise_sigma",
                            "orientation_spread_deg", "center_jitter"});
  read(j, "phantom", "rvd", p.rvd);
  read(j, "phantom", "mld_fraction", p.mld_fraction);
  read(j, "phantom", "lesion_length", p.lesion_length);
  read(j, "phantom", "noise_sigma", p.noise_sigma);
  read(j, "phantom", "orientation_spread_deg", p.orientation_spread_deg);
  read(j, "phantom", "center_jitter", p.center_jitter);
}

void parse_model(const json& j, ModelConfig& m) {
  check_keys(j, "model", {"filters", "kernels", "attention_dim", "keyframe_widths",
                          "keyframe_dilations", "hidden_units", "leaky_slope", "input_offset",
                          "input_scale"});
  read(j, "model", "filters", m.view.filters);
  read_kernels(j, "model", m.view.kernels);
  read(j, "model", "attention_dim", m.view.attention_dim);
  read(j, "model", "keyframe_widths", m.keyframe.widths);
  read(j, "model", "keyframe_dilations", m.keyframe.dilations);
  read(j, "model", "hidden_units", m.hidden_units);
  read(j, "model", "leaky_slope", m.leaky_slope);
  read(j, "model", "input_offset", m.input_offset);
  read(j, "model", "input_scale", m.input_scale);
}

void parse_train(const json& j, TrainConfig& t) {
  check_keys(j, "train", {"learning_rate", "lr_decay", "lambda", "epochs", "batch_size", "seed",
                          "beta1", "beta2", "adam_epsilon", "normalize_labels",
                          "init_output_bias"});
  read(j, "train", "learning_rate", t.learning_rate);
  read(j, "train", "lr_decay", t.lr_decay);
  read(j, "train", "lambda", t.lambda);
  read(j, "train", "epochs", t.epochs);
  read(j, "train", "batch_size", t.batch_size);
  read(j, "train", "seed", t.seed);
  read(j, "train", "beta1", t.beta1);
  read(j, "train", "beta2", t.beta2);
  read(j, "train", "adam_epsilon", t.adam_epsilon);
  read(j, "train", "normalize_labels", t.normalize_labels);
  read(j, "train", "init_output_bias", t.init_output_bias);
}

void parse_ablation(const json& j, RunConfig& cfg) {
  if (j.is_string()) {
    cfg.ablation_name = j.get<std::string>();
    try {
      cfg.ablation = AblationConfig::from_name(cfg.ablation_name);
    } catch (const ArgumentError& e) {
      throw ConfigError(std::string("ablation: ") + e.what());
    }
    return;
  }
  check_keys(j, "ablation", {"use_main", "use_support", "use_keyframe", "use_self_attention",
                             "use_context_attention"});
  AblationConfig a;
  read(j, "ablation", "use_main", a.use_main);
  read(j, "ablation", "use_support", a.use_support);
  read(j, "ablation", "use_keyframe", a.use_keyframe);
  read(j, "ablation", "use_self_attention", a.use_self_attention);
  read(j, "ablation", "use_context_attention", a.use_context_attention);
  cfg.ablation = a;
  cfg.ablation_name = "custom";
  for (const auto& name : AblationConfig::names())
    if (AblationConfig::from_name(name) == a) cfg.ablation_name = name;
}

void parse_crossval(const json& j, CrossvalSection& c) {
  check_keys(j, "crossval", {"folds", "seed", "methods", "out"});
  read(j, "crossval", "folds", c.folds);
  read(j, "crossval", "seed", c.seed);
  read(j, "crossval", "methods", c.methods);
  read(j, "crossval", "out", c.out);
}

}  // namespace

PhantomSize size_from_name(const std::string& name) {
  if (name == "desk") return PhantomSize::desk();
  if (name == "paper") return PhantomSize::paper();
  throw ConfigError("unknown size '" + name + "'; expected desk or paper");
}

PhantomSize RunConfig::phantom_size() const { return size_from_name(data.size); }

void RunConfig::validate() const {
  try {
    if (data.n < 1) throw ArgumentError("data.n must be >= 1");
    phantom_size();
    phantom.validate();
    static_cast<void>(model.resolved());
    train.validate();
    ablation.validate();
    if (crossval.folds < 2) throw ArgumentError("crossval.folds must be >= 2");
    for (const auto& m : crossval.methods)
      if (m != "Mean") AblationConfig::from_name(m);
  } catch (const ArgumentError& e) {
    throw ConfigError(e.what());
  } catch (const DimensionError& e) {
    throw ConfigError(e.what());
  }
}

RunConfig parse_run_config(const json& j) {
  check_keys(j, "config", {"data", "phantom", "model", "train", "ablation", "crossval"});
  RunConfig cfg;
  if (j.contains("data")) parse_data(j.at("data"), cfg.data);
  const PhantomSize size = cfg.phantom_size();
  cfg.model = size.width == PhantomSize::paper().width ? ModelConfig::paper_scale() : ModelConfig::desk();
  if (j.contains("phantom")) parse_phantom(j.at("phantom"), cfg.phantom);
  if (j.contains("model")) parse_model(j.at("model"), cfg.model);
  if (j.contains("train")) parse_train(j.at("train"), cfg.train);
  if (j.contains("ablation")) parse_ablation(j.at("ablation"), cfg);
  if (j.contains("crossval")) parse_crossval(j.at("crossval"), cfg.crossval);
  cfg.validate();
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return parse_run_config(j);
}

namespace {

json ablation_json(const RunConfig& cfg) {
  if (cfg.ablation_name != "custom") return cfg.ablation_name;
  return {{"use_main", cfg.ablation.use_main},
          {"use_support", cfg.ablation.use_support},
          {"use_keyframe", cfg.ablation.use_keyframe},
          {"use_self_attention", cfg.ablation.use_self_attention},
          {"use_context_attention", cfg.ablation.use_context_attention}};
}

}  // namespace

json to_json(const RunConfig& cfg) {
  json kernels = json::array();
  for (const auto& k : cfg.model.view.kernels) kernels.push_back({k[0], k[1], k[2]});
  return {
      {"data", {{"dir", cfg.data.dir.string()}, {"n", cfg.data.n}, {"seed", cfg.data.seed}, {"size", cfg.data.size}}},
      {"phantom",
       {{"rvd", cfg.phantom.rvd},
        {"mld_fraction", cfg.phantom.mld_fraction},
        {"lesion_length", cfg.phantom.lesion_length},
        {"noise_sigma", cfg.phantom.noise_sigma},
        {"orientation_spread_deg", cfg.phantom.orientation_spread_deg},
        {"center_jitter", cfg.phantom.center_jitter}}},
      {"model",
       {{"filters", cfg.model.view.filters},
        {"kernels", kernels},
        {"attention_dim", cfg.model.view.attention_dim},
        {"keyframe_widths", cfg.model.keyframe.widths},
        {"keyframe_dilations", cfg.model.keyframe.dilations},
        {"hidden_units", cfg.model.hidden_units},
        {"leaky_slope", cfg.model.leaky_slope},
        {"input_offset", cfg.model.input_offset},
        {"input_scale", cfg.model.input_scale}}},
      {"train",
       {{"learning_rate", cfg.train.learning_rate},
        {"lr_decay", cfg.train.lr_decay},
        {"lambda", cfg.train.lambda},
        {"epochs", cfg.train.epochs},
        {"batch_size", cfg.train.batch_size},
        {"seed", cfg.train.seed},
        {"beta1", cfg.train.beta1},
        {"beta2", cfg.train.beta2},
        {"adam_epsilon", cfg.train.adam_epsilon},
        {"normalize_labels", cfg.train.normalize_labels},
        {"init_output_bias", cfg.train.init_output_bias}}},
      {"ablation", ablation_json(cfg)},
      {"crossval",
       {{"folds", cfg.crossval.folds},
        {"seed", cfg.crossval.seed},
        {"methods", cfg.crossval.methods},
        {"out", cfg.crossval.out.string()}}}};
}

}  // namespace dmqca::cli

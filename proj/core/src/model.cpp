// SPDX-License-Identifier: Apache-2.0
#include "dmqca/model.hpp"

#include <cmath>
#include <nlohmann/json.hpp>

#include "dmqca/errors.hpp"
#include "dmqca/ops.hpp"

namespace dmqca {

IndexVector Sample::label_array() const {
  if (label.size() != kNumIndices) throw DimensionError("sample label must have 6 entries");
  IndexVector out{};
  for (std::size_t k = 0; k < kNumIndices; ++k) out[k] = label[k];
  return out;
}

ModelConfig ModelConfig::desk() { return ModelConfig{}.resolved(); }

ModelConfig ModelConfig::paper_scale() {
  ModelConfig cfg;
  cfg.view.frames = 10;
  cfg.view.height = cfg.view.width = 256;
  cfg.view.filters = {16, 32, 64, 128, 256};
  cfg.keyframe.height = cfg.keyframe.width = 256;
  cfg.keyframe.widths = {16, 16, 32, 32, 64, 64};
  return cfg.resolved();
}

ModelConfig ModelConfig::resolved() const {
  ModelConfig out = *this;
  out.view.leaky_slope = leaky_slope;
  out.keyframe.leaky_slope = leaky_slope;
  out.keyframe.feature_dim = view.feature_dim();
  out.validate();
  return out;
}

void ModelConfig::validate() const {
  view.validate();
  keyframe.validate();
  if (keyframe.feature_dim != view.feature_dim())
    throw DimensionError("keyframe feature size must equal the view feature size");
  if (hidden_units < 1) throw DimensionError("regression head needs at least one hidden unit");
  if (!std::isfinite(input_offset) || !std::isfinite(input_scale) || input_scale == 0.0)
    throw ArgumentError("input map needs a finite offset and a finite nonzero scale");
}

std::size_t AblationConfig::enabled_branches() const {
  return static_cast<std::size_t>(use_main) + static_cast<std::size_t>(use_support) +
         static_cast<std::size_t>(use_keyframe);
}

void AblationConfig::validate() const {
  if (enabled_branches() == 0) throw ArgumentError("ablation must enable at least one branch");
}

const std::vector<std::string>& AblationConfig::names() {
  static const std::vector<std::string> kNames{"Ours",     "Ours-SelfAtt", "Main", "Main-ConAtt",
                                               "Main+Key", "Sup+Key",      "Key"};
  return kNames;
}

AblationConfig AblationConfig::from_name(const std::string& name) {
  AblationConfig a;
  if (name == "Ours") return a;
  if (name == "Ours-SelfAtt") {
    a.use_self_attention = false;
    return a;
  }
  if (name == "Main" || name == "Main-ConAtt") {
    a.use_support = a.use_keyframe = false;
    a.use_context_attention = name == "Main";
    return a;
  }
  if (name == "Main+Key") {
    a.use_support = false;
    return a;
  }
  if (name == "Sup+Key") {
    a.use_main = false;
    return a;
  }
  if (name == "Key") {
    a.use_main = a.use_support = false;
    return a;
  }
  std::string valid;
  for (const auto& n : names()) valid += (valid.empty() ? "" : ", ") + n;
  throw ArgumentError("unknown ablation '" + name + "'; valid names: " + valid);
}

std::string canonical_config_text(const ModelConfig& model, const AblationConfig& ablation) {
  nlohmann::json j;
  j["view"] = {{"frames", model.view.frames},
               {"height", model.view.height},
               {"width", model.view.width},
               {"filters", model.view.filters},
               {"kernels", model.view.kernels},
               {"attention_dim", model.view.resolved_attention_dim()}};
  j["keyframe"] = {{"height", model.keyframe.height},
                   {"width", model.keyframe.width},
                   {"widths", model.keyframe.widths},
                   {"dilations", model.keyframe.dilations},
                   {"feature_dim", model.keyframe.feature_dim}};
  j["hidden_units"] = model.hidden_units;
  j["leaky_slope"] = model.leaky_slope;
  j["input"] = {{"offset", model.input_offset}, {"scale", model.input_scale}};
  j["ablation"] = {{"use_main", ablation.use_main},
                   {"use_support", ablation.use_support},
                   {"use_keyframe", ablation.use_keyframe},
                   {"use_self_attention", ablation.use_self_attention},
                   {"use_context_attention", ablation.use_context_attention}};
  return j.dump();
}

std::uint64_t config_fingerprint(const ModelConfig& model, const AblationConfig& ablation) {
  // FNV-1a, 64-bit.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : canonical_config_text(model, ablation)) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

DmqcaParams DmqcaParams::init(const ModelConfig& cfg_in, const AblationConfig& ablation,
                              std::uint64_t seed) {
  const ModelConfig cfg = cfg_in.resolved();
  ablation.validate();
  std::mt19937_64 rng(seed);
  const EncoderOptions options{ablation.use_self_attention, ablation.use_context_attention};
  DmqcaParams p;
  if (ablation.use_main) p.main_view = ViewEncoderParams::init(cfg.view, options, rng);
  if (ablation.use_support) p.support_view = ViewEncoderParams::init(cfg.view, options, rng);
  if (ablation.use_keyframe) p.keyframe = KeyframeEncoderParams::init(cfg.keyframe, rng);

  const std::size_t in = ablation.enabled_branches() * cfg.feature_dim();
  const double gain = std::sqrt(2.0 / (1.0 + cfg.leaky_slope * cfg.leaky_slope));
  const double b1 = gain * std::sqrt(3.0 / static_cast<double>(in));
  p.hidden_weight = Var::parameter(Tensor::uniform({cfg.hidden_units, in}, -b1, b1, rng));
  p.hidden_bias = Var::parameter(Tensor({cfg.hidden_units}, 0.0));
  const double bo = std::sqrt(6.0 / static_cast<double>(cfg.hidden_units + kNumIndices));
  p.output_weight = Var::parameter(Tensor::uniform({kNumIndices, cfg.hidden_units}, -bo, bo, rng));
  p.output_bias = Var::parameter(Tensor({kNumIndices}, 0.0));
  p.label_offset = Var::constant(Tensor({kNumIndices}, 0.0));
  p.label_scale = Var::constant(Tensor({kNumIndices}, 1.0));
  return p;
}

ParameterList DmqcaParams::parameters() const {
  ParameterList out;
  if (main_view) main_view->collect("main", out);
  if (support_view) support_view->collect("support", out);
  if (keyframe) keyframe->collect("keyframe", out);
  out.push_back({"head.fc1.weight", hidden_weight, true, true});
  out.push_back({"head.fc1.bias", hidden_bias, false, true});
  out.push_back({"head.fc2.weight", output_weight, true, true});
  out.push_back({"head.fc2.bias", output_bias, false, true});
  out.push_back({"head.label_offset", label_offset, false, false});
  out.push_back({"head.label_scale", label_scale, false, false});
  return out;
}

ParameterList DmqcaParams::trainable() const {
  ParameterList out;
  for (auto& p : parameters())
    if (p.trainable) out.push_back(p);
  return out;
}

Var regression_head(const Var& features, const DmqcaParams& params, double slope) {
  Var h = leaky_relu(add(matvec(params.hidden_weight, features), params.hidden_bias), slope);
  Var y = leaky_relu(add(matvec(params.output_weight, h), params.output_bias), slope);
  return add(params.label_offset, mul(params.label_scale, y));
}

Tensor prepare_input(const Tensor& pixels, const ModelConfig& cfg) {
  Tensor out = pixels;
  for (double& v : out.values()) v = cfg.input_scale * (v - cfg.input_offset);
  return out;
}

Var forward(const Sample& sample, const DmqcaParams& params, const ModelConfig& cfg,
            const AblationConfig& ablation) {
  ablation.validate();
  const EncoderOptions options{ablation.use_self_attention, ablation.use_context_attention};
  std::vector<Var> features;
  if (ablation.use_main) {
    if (!params.main_view) throw ArgumentError("forward: main-view parameters missing");
    features.push_back(encode_view(prepare_input(sample.main_view, cfg), cfg.view, *params.main_view, options));
  }
  if (ablation.use_support) {
    if (!params.support_view) throw ArgumentError("forward: support-view parameters missing");
    features.push_back(encode_view(prepare_input(sample.support_view, cfg), cfg.view, *params.support_view, options));
  }
  if (ablation.use_keyframe) {
    if (!params.keyframe) throw ArgumentError("forward: keyframe parameters missing");
    features.push_back(encode_keyframe(prepare_input(sample.keyframe, cfg), cfg.keyframe, *params.keyframe));
  }
  const Var joined = features.size() == 1 ? features.front() : concat(features, 0);
  if (joined.shape()[0] != params.hidden_weight.shape()[1])
    throw DimensionError("forward: regression input width " + std::to_string(joined.shape()[0]) +
                         " does not match head " + shape_str(params.hidden_weight.shape()));
  return regression_head(joined, params, cfg.leaky_slope);
}

Var qca_loss(std::span<const Var> predictions, std::span<const Tensor> labels,
             const ParameterList& parameters, double lambda) {
  if (predictions.empty()) throw ArgumentError("qca_loss: need at least one prediction");
  if (predictions.size() != labels.size())
    throw DimensionError("qca_loss: predictions and labels differ in count");
  if (lambda < 0.0) throw ArgumentError("qca_loss: lambda must be >= 0");
  Var total;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    if (predictions[i].shape() != labels[i].shape())
      throw DimensionError("qca_loss: prediction " + shape_str(predictions[i].shape()) +
                           " vs label " + shape_str(labels[i].shape()));
    for (double v : predictions[i].value().values())
      if (std::isnan(v)) throw NumericError("qca_loss: NaN prediction");
    for (double v : labels[i].values())
      if (std::isnan(v)) throw NumericError("qca_loss: NaN label");
    Var term = sum(abs(sub(predictions[i], Var::constant(labels[i]))));
    total = total.defined() ? add(total, term) : term;
  }
  const double count = static_cast<double>(predictions.size() * predictions[0].value().size());
  Var loss = scale(total, 1.0 / count);
  if (lambda > 0.0) {
    Var reg;
    for (const auto& p : parameters) {
      if (!p.regularized || !p.trainable) continue;
      Var term = sum_squares(p.var);
      reg = reg.defined() ? add(reg, term) : term;
    }
    if (reg.defined()) loss = add(loss, scale(reg, lambda));
  }
  return loss;
}

}  // namespace dmqca

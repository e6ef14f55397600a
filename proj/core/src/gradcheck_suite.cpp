// SPDX-License-Identifier: Apache-2.0
#include "dmqca/gradcheck_suite.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <random>

#include "dmqca/encoders.hpp"
#include "dmqca/errors.hpp"
#include "dmqca/gradcheck.hpp"
#include "dmqca/model.hpp"
#include "dmqca/ops.hpp"

namespace dmqca {
namespace {

using Rng = std::mt19937_64;
using Fn = std::function<Var(const Var&)>;

constexpr std::size_t kEntriesPerTensor = 16;

std::size_t pick(Rng& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

Tensor random(Shape shape, Rng& rng) { return Tensor::uniform(std::move(shape), -1.0, 1.0, rng); }

/// Uniform magnitudes in [0.1, 1] with random signs.
Tensor off_zero(Shape shape, Rng& rng) {
  Tensor t = Tensor::uniform(std::move(shape), 0.1, 1.0, rng);
  std::bernoulli_distribution flip(0.5);
  for (double& v : t.values())
    if (flip(rng)) v = -v;
  return t;
}

/// Scalar objective sum(y * R) with R fixed by `seed`.
Var weigh(const Var& y, std::uint64_t seed) {
  Rng rng(seed);
  return sum(mul(y, Var::constant(random(y.shape(), rng))));
}

struct Checker {
  double tolerance;
  std::uint64_t seed;

  GradCheckOptions options() const {
    GradCheckOptions o;
    o.epsilon = 1e-5;
    o.max_entries = kEntriesPerTensor;
    o.seed = seed;
    o.retry_epsilons = {1e-6, 1e-7, 1e-4};
    o.retry_above = tolerance * 1e-2;
    return o;
  }

  double input(const Fn& f, const Tensor& x) const {
    return finite_diff_check([&](const Var& v) { return weigh(f(v), seed); }, x, options());
  }

  double param(const std::function<Var()>& loss, Var& p) const {
    return finite_diff_check_param(loss, p, options());
  }

  double params(const std::function<Var()>& loss, const ParameterList& list) const {
    double worst = 0.0;
    for (const auto& np : list) {
      if (!np.trainable) continue;
      Var v = np.var;
      worst = std::max(worst, param(loss, v));
    }
    return worst;
  }
};

using Case = std::function<double(Rng&, const Checker&)>;

struct NamedCase {
  const char* name;
  Case run;
};

void randomize(const ParameterList& list, Rng& rng, double scale) {
  for (const auto& np : list) {
    if (!np.trainable) continue;
    Tensor& t = np.var.node()->value;
    for (double& v : t.values()) v = scale * std::uniform_real_distribution<double>(-1.0, 1.0)(rng);
  }
}

double binary(const Checker& c, const Fn& f_a, const Tensor& a, const Fn& f_b, const Tensor& b) {
  return std::max(c.input(f_a, a), c.input(f_b, b));
}

std::vector<NamedCase> cases() {
  std::vector<NamedCase> out;
  out.push_back({"conv3d", [](Rng& rng, const Checker& c) {
    const std::size_t ci = pick(rng, 1, 3), co = pick(rng, 1, 3);
    Triple in{pick(rng, 1, 4), pick(rng, 2, 6), pick(rng, 2, 6)};
    Triple k{}, s{}, p{};
    for (int d = 0; d < 3; ++d) {
      p[d] = pick(rng, 0, 1);
      k[d] = pick(rng, 1, std::min<std::size_t>(3, in[d] + 2 * p[d]));
      s[d] = pick(rng, 1, 2);
    }
    const Tensor x = random({ci, in[0], in[1], in[2]}, rng);
    const Tensor w = random({co, ci, k[0], k[1], k[2]}, rng);
    return binary(
        c, [&](const Var& v) { return conv3d(v, Var::constant(w), s, p); }, x,
        [&](const Var& v) { return conv3d(Var::constant(x), v, s, p); }, w);
  }});
  out.push_back({"conv2d", [](Rng& rng, const Checker& c) {
    const std::size_t ci = pick(rng, 1, 3), co = pick(rng, 1, 3);
    Pair in{pick(rng, 3, 8), pick(rng, 3, 8)}, k{}, s{}, p{}, dil{};
    for (int d = 0; d < 2; ++d) {
      p[d] = pick(rng, 0, 2);
      dil[d] = pick(rng, 1, 3);
      k[d] = pick(rng, 1, 3);
      while (k[d] > 1 && (k[d] - 1) * dil[d] + 1 > in[d] + 2 * p[d]) --k[d];
      s[d] = pick(rng, 1, 2);
    }
    const Tensor x = random({ci, in[0], in[1]}, rng);
    const Tensor w = random({co, ci, k[0], k[1]}, rng);
    return binary(
        c, [&](const Var& v) { return conv2d(v, Var::constant(w), s, p, dil); }, x,
        [&](const Var& v) { return conv2d(Var::constant(x), v, s, p, dil); }, w);
  }});
  out.push_back({"add_channel_bias", [](Rng& rng, const Checker& c) {
    const std::size_t ch = pick(rng, 1, 4);
    const Tensor x = random({ch, pick(rng, 1, 3), pick(rng, 1, 4)}, rng);
    const Tensor b = random({ch}, rng);
    return binary(
        c, [&](const Var& v) { return add_channel_bias(v, Var::constant(b)); }, x,
        [&](const Var& v) { return add_channel_bias(Var::constant(x), v); }, b);
  }});
  out.push_back({"pad_channels", [](Rng& rng, const Checker& c) {
    const std::size_t ch = pick(rng, 1, 3);
    const std::size_t target = ch + pick(rng, 0, 3);
    return c.input([&](const Var& v) { return pad_channels(v, target); },
                   random({ch, pick(rng, 1, 4), pick(rng, 1, 4)}, rng));
  }});
  out.push_back({"matmul", [](Rng& rng, const Checker& c) {
    const std::size_t m = pick(rng, 1, 5), k = pick(rng, 1, 5), n = pick(rng, 1, 5);
    const Tensor a = random({m, k}, rng), b = random({k, n}, rng);
    return binary(
        c, [&](const Var& v) { return matmul(v, Var::constant(b)); }, a,
        [&](const Var& v) { return matmul(Var::constant(a), v); }, b);
  }});
  out.push_back({"matvec", [](Rng& rng, const Checker& c) {
    const std::size_t m = pick(rng, 1, 5), k = pick(rng, 1, 5);
    const Tensor a = random({m, k}, rng), x = random({k}, rng);
    return binary(
        c, [&](const Var& v) { return matvec(v, Var::constant(x)); }, a,
        [&](const Var& v) { return matvec(Var::constant(a), v); }, x);
  }});
  out.push_back({"transpose", [](Rng& rng, const Checker& c) {
    return c.input([](const Var& v) { return transpose(v); },
                   random({pick(rng, 1, 5), pick(rng, 1, 5)}, rng));
  }});
  out.push_back({"one_by_one_conv", [](Rng& rng, const Checker& c) {
    const std::size_t ch = pick(rng, 1, 4), m = pick(rng, 1, 6), co = pick(rng, 1, 4);
    const Tensor x = random({ch, m}, rng), w = random({co, ch}, rng);
    return binary(
        c, [&](const Var& v) { return one_by_one_conv(v, Var::constant(w)); }, x,
        [&](const Var& v) { return one_by_one_conv(Var::constant(x), v); }, w);
  }});
  out.push_back({"softmax", [](Rng& rng, const Checker& c) {
    const std::size_t axis = pick(rng, 0, 1);
    Tensor x = random({pick(rng, 1, 5), pick(rng, 1, 5)}, rng);
    for (double& v : x.values()) v *= 3.0;
    return c.input([axis](const Var& v) { return softmax(v, axis); }, x);
  }});
  out.push_back({"leaky_relu", [](Rng& rng, const Checker& c) {
    const double slope = std::uniform_real_distribution<double>(0.0, 0.5)(rng);
    return c.input([slope](const Var& v) { return leaky_relu(v, slope); },
                   off_zero({pick(rng, 1, 4), pick(rng, 1, 4)}, rng));
  }});
  out.push_back({"tanh", [](Rng& rng, const Checker& c) {
    Tensor x = random({pick(rng, 1, 4), pick(rng, 1, 4)}, rng);
    for (double& v : x.values()) v *= 2.0;
    return c.input([](const Var& v) { return tanh(v); }, x);
  }});
  out.push_back({"abs", [](Rng& rng, const Checker& c) {
    return c.input([](const Var& v) { return abs(v); }, off_zero({pick(rng, 1, 4), pick(rng, 1, 4)}, rng));
  }});
  out.push_back({"maxpool2d", [](Rng& rng, const Checker& c) {
    const std::size_t window = pick(rng, 1, 3);
    const std::size_t stride = pick(rng, 1, window);
    const Shape shape{pick(rng, 1, 3), window + pick(rng, 0, 4), window + pick(rng, 0, 4)};
    // Distinct values spaced well beyond the step size.
    Tensor x(shape);
    std::vector<double> levels(x.size());
    std::iota(levels.begin(), levels.end(), 0.0);
    std::shuffle(levels.begin(), levels.end(), rng);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = 0.05 * levels[i];
    return c.input([window, stride](const Var& v) { return maxpool2d(v, window, stride); }, x);
  }});
  out.push_back({"mean_columns", [](Rng& rng, const Checker& c) {
    return c.input([](const Var& v) { return mean_columns(v); },
                   random({pick(rng, 1, 5), pick(rng, 1, 5)}, rng));
  }});
  out.push_back({"concat", [](Rng& rng, const Checker& c) {
    const std::size_t axis = pick(rng, 0, 1);
    const std::size_t parts = pick(rng, 1, 3);
    const std::size_t fixed = pick(rng, 1, 4);
    std::vector<Tensor> xs;
    for (std::size_t i = 0; i < parts; ++i) {
      const std::size_t e = pick(rng, 1, 3);
      xs.push_back(random(axis == 0 ? Shape{e, fixed} : Shape{fixed, e}, rng));
    }
    double worst = 0.0;
    for (std::size_t i = 0; i < parts; ++i) {
      worst = std::max(worst, c.input(
                                  [&](const Var& v) {
                                    std::vector<Var> vs;
                                    for (std::size_t j = 0; j < parts; ++j)
                                      vs.push_back(j == i ? v : Var::constant(xs[j]));
                                    return concat(vs, axis);
                                  },
                                  xs[i]));
    }
    return worst;
  }});
  out.push_back({"split", [](Rng& rng, const Checker& c) {
    const std::size_t axis = pick(rng, 0, 1);
    std::vector<std::size_t> sizes(pick(rng, 1, 3));
    for (auto& s : sizes) s = pick(rng, 1, 3);
    const std::size_t total = std::accumulate(sizes.begin(), sizes.end(), std::size_t{0});
    const std::size_t other = pick(rng, 1, 4);
    const Tensor x = random(axis == 0 ? Shape{total, other} : Shape{other, total}, rng);
    return c.input(
        [&](const Var& v) {
          const auto parts = split(v, axis, sizes);
          Var acc = weigh(parts[0], 11);
          for (std::size_t i = 1; i < parts.size(); ++i) acc = add(acc, weigh(parts[i], 11 + i));
          return acc;
        },
        x);
  }});
  out.push_back({"stack_columns", [](Rng& rng, const Checker& c) {
    const std::size_t f = pick(rng, 1, 4), n = pick(rng, 1, 4);
    std::vector<Tensor> cols;
    for (std::size_t i = 0; i < n; ++i) cols.push_back(random({f}, rng));
    const std::size_t which = pick(rng, 0, n - 1);
    return c.input(
        [&](const Var& v) {
          std::vector<Var> vs;
          for (std::size_t j = 0; j < n; ++j) vs.push_back(j == which ? v : Var::constant(cols[j]));
          return stack_columns(vs);
        },
        cols[which]);
  }});
  out.push_back({"reshape", [](Rng& rng, const Checker& c) {
    const std::size_t a = pick(rng, 1, 4), b = pick(rng, 1, 4);
    return c.input([a, b](const Var& v) { return reshape(v, {b, a}); }, random({a, b}, rng));
  }});
  out.push_back({"take_frame", [](Rng& rng, const Checker& c) {
    const std::size_t t = pick(rng, 1, 4);
    const std::size_t which = pick(rng, 0, t - 1);
    return c.input([which](const Var& v) { return take_frame(v, which); },
                   random({pick(rng, 1, 3), t, pick(rng, 1, 3), pick(rng, 1, 3)}, rng));
  }});
  out.push_back({"elementwise", [](Rng& rng, const Checker& c) {
    const Shape shape{pick(rng, 1, 4), pick(rng, 1, 4)};
    const Tensor a = random(shape, rng), b = random(shape, rng);
    const double k = std::uniform_real_distribution<double>(-2.0, 2.0)(rng);
    double worst = 0.0;
    worst = std::max(worst, binary(
                                c, [&](const Var& v) { return add(v, Var::constant(b)); }, a,
                                [&](const Var& v) { return add(Var::constant(a), v); }, b));
    worst = std::max(worst, binary(
                                c, [&](const Var& v) { return sub(v, Var::constant(b)); }, a,
                                [&](const Var& v) { return sub(Var::constant(a), v); }, b));
    worst = std::max(worst, binary(
                                c, [&](const Var& v) { return mul(v, Var::constant(b)); }, a,
                                [&](const Var& v) { return mul(Var::constant(a), v); }, b));
    worst = std::max(worst, c.input([k](const Var& v) { return scale(v, k); }, a));
    return worst;
  }});
  out.push_back({"scale_by", [](Rng& rng, const Checker& c) {
    const Tensor x = random({pick(rng, 1, 4), pick(rng, 1, 4)}, rng);
    const Tensor g = Tensor::scalar(std::uniform_real_distribution<double>(-1.0, 1.0)(rng));
    return binary(
        c, [&](const Var& v) { return scale_by(v, Var::constant(g)); }, x,
        [&](const Var& v) { return scale_by(Var::constant(x), v); }, g);
  }});
  out.push_back({"reductions", [](Rng& rng, const Checker& c) {
    const Tensor x = random({pick(rng, 1, 4), pick(rng, 1, 4)}, rng);
    return std::max({c.input([](const Var& v) { return sum(v); }, x),
                     c.input([](const Var& v) { return mean(v); }, x),
                     c.input([](const Var& v) { return sum_squares(v); }, x)});
  }});
  out.push_back({"self_attention", [](Rng& rng, const Checker& c) {
    const std::size_t ch = pick(rng, 1, 10), m = pick(rng, 1, 6);
    SelfAttentionParams p = SelfAttentionParams::init(ch, rng);
    p.gamma.mutable_value()[0] = std::uniform_real_distribution<double>(0.3, 1.0)(rng);
    Var x = Var::parameter(random({ch, m}, rng));
    const auto loss = [&] { return weigh(self_attention(x, p), c.seed); };
    return std::max({c.param(loss, x), c.param(loss, p.query), c.param(loss, p.key),
                     c.param(loss, p.value), c.param(loss, p.gamma)});
  }});
  out.push_back({"context_attention", [](Rng& rng, const Checker& c) {
    const std::size_t f = pick(rng, 1, 5), r = pick(rng, 1, 6), a = pick(rng, 1, 4);
    ContextAttentionParams p = ContextAttentionParams::init(f, a, rng);
    p.bias.mutable_value() = random({a}, rng);
    Var items = Var::parameter(random({f, r}, rng));
    const auto loss = [&] { return weigh(context_attention(items, p).summary, c.seed); };
    return std::max({c.param(loss, items), c.param(loss, p.weight), c.param(loss, p.bias),
                     c.param(loss, p.context)});
  }});
  out.push_back({"residual_unit", [](Rng& rng, const Checker& c) {
    const std::size_t ci = pick(rng, 1, 2), co = ci + pick(rng, 0, 2);
    const std::size_t dilation = pick(rng, 1, 3);
    ResidualUnitParams p{Var::parameter(random({co, ci, 3, 3}, rng)),
                         Var::parameter(random({co}, rng)),
                         Var::parameter(random({co, co, 3, 3}, rng)),
                         Var::parameter(random({co}, rng))};
    Var x = Var::parameter(random({ci, pick(rng, 3, 7), pick(rng, 3, 7)}, rng));
    const auto loss = [&] { return weigh(residual_unit(x, p, dilation, 0.2), c.seed); };
    return std::max({c.param(loss, x), c.param(loss, p.conv1), c.param(loss, p.bias1),
                     c.param(loss, p.conv2), c.param(loss, p.bias2)});
  }});
  out.push_back({"dilated_residual_block", [](Rng& rng, const Checker& c) {
    const std::size_t ci = pick(rng, 1, 2), co = ci + pick(rng, 0, 1);
    const std::size_t dilation = pick(rng, 1, 2);
    DilatedResidualBlockParams p;
    std::size_t in = ci;
    for (auto& u : p.units) {
      u = {Var::parameter(random({co, in, 3, 3}, rng)), Var::parameter(random({co}, rng)),
           Var::parameter(random({co, co, 3, 3}, rng)), Var::parameter(random({co}, rng))};
      in = co;
    }
    Var x = Var::parameter(random({ci, 2 * pick(rng, 2, 4), 2 * pick(rng, 2, 4)}, rng));
    const auto loss = [&] { return weigh(dilated_residual_block(x, p, dilation, 0.2), c.seed); };
    double worst = c.param(loss, x);
    for (auto& u : p.units)
      worst = std::max({worst, c.param(loss, u.conv1), c.param(loss, u.bias1),
                        c.param(loss, u.conv2), c.param(loss, u.bias2)});
    return worst;
  }});
  out.push_back({"view_encoder", [](Rng& rng, const Checker& c) {
    ViewEncoderConfig cfg;
    cfg.frames = pick(rng, 1, 3);
    cfg.height = cfg.width = 32;
    cfg.filters = {pick(rng, 1, 2), 2, 2, 3, pick(rng, 3, 4)};
    cfg.attention_dim = pick(rng, 0, 3);
    cfg.validate();
    const EncoderOptions options{pick(rng, 0, 1) == 1, pick(rng, 0, 1) == 1};
    ViewEncoderParams p = ViewEncoderParams::init(cfg, options, rng);
    ParameterList list;
    p.collect("view", list);
    randomize(list, rng, 0.5);
    const Tensor frames = Tensor::uniform({cfg.frames, cfg.height, cfg.width}, 0.0, 1.0, rng);
    return c.params([&] { return weigh(encode_view(frames, cfg, p, options), c.seed); }, list);
  }});
  out.push_back({"keyframe_encoder", [](Rng& rng, const Checker& c) {
    KeyframeEncoderConfig cfg;
    cfg.widths = {1, 1, pick(rng, 1, 2), 2, 2, 2};
    cfg.feature_dim = pick(rng, 1, 3);
    cfg.validate();
    KeyframeEncoderParams p = KeyframeEncoderParams::init(cfg, rng);
    ParameterList list;
    p.collect("keyframe", list);
    randomize(list, rng, 0.5);
    const Tensor image = Tensor::uniform({cfg.height, cfg.width}, 0.0, 1.0, rng);
    return c.params([&] { return weigh(encode_keyframe(image, cfg, p), c.seed); }, list);
  }});
  out.push_back({"dmqca_loss", [](Rng& rng, const Checker& c) {
    ModelConfig cfg = ModelConfig::desk();
    cfg.view.frames = pick(rng, 1, 2);
    cfg.view.height = cfg.view.width = 32;
    cfg.view.filters = {1, 2, 2, 2, 3};
    cfg.keyframe.widths = {1, 1, 1, 2, 2, 2};
    cfg.hidden_units = pick(rng, 2, 5);
    cfg = cfg.resolved();
    const auto& names = AblationConfig::names();
    const AblationConfig ablation = AblationConfig::from_name(names[pick(rng, 0, names.size() - 1)]);
    DmqcaParams params = DmqcaParams::init(cfg, ablation, rng());
    const ParameterList list = params.parameters();
    randomize(list, rng, 0.5);
    std::vector<Sample> batch(pick(rng, 1, 2));
    std::vector<Tensor> labels;
    for (auto& s : batch) {
      s.main_view = Tensor::uniform({cfg.view.frames, 32, 32}, 0.0, 1.0, rng);
      s.support_view = Tensor::uniform({cfg.view.frames, 32, 32}, 0.0, 1.0, rng);
      s.keyframe = Tensor::uniform({cfg.keyframe.height, cfg.keyframe.width}, 0.0, 1.0, rng);
      s.label = Tensor::uniform({kNumIndices}, -0.5, 0.5, rng);
      labels.push_back(s.label);
    }
    const auto loss = [&] {
      std::vector<Var> preds;
      for (const auto& s : batch) preds.push_back(forward(s, params, cfg, ablation));
      return qca_loss(preds, labels, list, 1e-3);
    };
    return c.params(loss, list);
  }});
  return out;
}

}  // namespace

std::vector<std::string> gradcheck_suite_names() {
  std::vector<std::string> names;
  for (const auto& c : cases()) names.emplace_back(c.name);
  return names;
}

std::vector<GradCheckResult> run_gradcheck_suite(const GradSuiteOptions& options,
                                                 const std::vector<std::string>& only) {
  if (options.configurations < 1) throw ArgumentError("gradcheck: need at least one configuration");
  const auto all = cases();
  for (const auto& name : only) {
    if (std::none_of(all.begin(), all.end(), [&](const NamedCase& c) { return name == c.name; }))
      throw ArgumentError("gradcheck: unknown check '" + name + "'");
  }
  std::vector<GradCheckResult> results;
  for (std::size_t i = 0; i < all.size(); ++i) {
    const NamedCase& nc = all[i];
    if (!only.empty() && std::find(only.begin(), only.end(), nc.name) == only.end()) continue;
    GradCheckResult r;
    r.name = nc.name;
    r.configurations = options.configurations;
    for (std::size_t k = 0; k < options.configurations; ++k) {
      const std::uint64_t seed = options.seed * 1000003ULL + i * 1009ULL + k;
      Rng rng(seed);
      const Checker checker{options.tolerance, seed};
      r.max_relative_error = std::max(r.max_relative_error, nc.run(rng, checker));
    }
    r.passed = r.max_relative_error < options.tolerance;
    results.push_back(r);
  }
  return results;
}

}  // namespace dmqca

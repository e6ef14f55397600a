// SPDX-License-Identifier: Apache-2.0
#include <benchmark/benchmark.h>

#include <random>

#include "dmqca/encoders.hpp"
#include "dmqca/ops.hpp"
#include "dmqca/phantom.hpp"
#include "dmqca/train.hpp"

using namespace dmqca;

namespace {

// First view-encoder layer at desk scale: [1,4,64,64] -> [8,4,32,32].
void BM_Conv3dForward(benchmark::State& state) {
  std::mt19937_64 rng(1);
  const Var x = Var::constant(Tensor::uniform({1, 4, 64, 64}, -1, 1, rng));
  const Var k = Var::constant(Tensor::uniform({8, 1, 3, 3, 3}, -1, 1, rng));
  for (auto _ : state) benchmark::DoNotOptimize(conv3d(x, k, {1, 2, 2}, {1, 1, 1}));
}
BENCHMARK(BM_Conv3dForward)->Unit(benchmark::kMicrosecond);

void BM_Conv3dBackward(benchmark::State& state) {
  std::mt19937_64 rng(2);
  const Tensor xv = Tensor::uniform({8, 4, 32, 32}, -1, 1, rng);
  Var k = Var::parameter(Tensor::uniform({16, 8, 3, 3, 3}, -1, 1, rng));
  for (auto _ : state) {
    Var x = Var::parameter(xv);
    k.zero_grad();
    backward(sum(conv3d(x, k, {1, 2, 2}, {1, 1, 1})));
    benchmark::DoNotOptimize(k.grad().data());
  }
}
BENCHMARK(BM_Conv3dBackward)->Unit(benchmark::kMicrosecond);

void BM_Conv2dDilated(benchmark::State& state) {
  std::mt19937_64 rng(3);
  const Var x = Var::constant(Tensor::uniform({8, 32, 32}, -1, 1, rng));
  const Var k = Var::constant(Tensor::uniform({8, 8, 3, 3}, -1, 1, rng));
  for (auto _ : state) benchmark::DoNotOptimize(conv2d(x, k, {1, 1}, {2, 2}, {2, 2}));
}
BENCHMARK(BM_Conv2dDilated)->Unit(benchmark::kMicrosecond);

void BM_EncodeView(benchmark::State& state) {
  std::mt19937_64 rng(4);
  const ViewEncoderConfig cfg;
  const ViewEncoderParams p = ViewEncoderParams::init(cfg, {}, rng);
  const Tensor frames = Tensor::uniform({4, 64, 64}, -1, 1, rng);
  for (auto _ : state) benchmark::DoNotOptimize(encode_view(frames, cfg, p));
}
BENCHMARK(BM_EncodeView)->Unit(benchmark::kMillisecond);

void BM_EncodeKeyframe(benchmark::State& state) {
  std::mt19937_64 rng(5);
  const KeyframeEncoderConfig cfg;
  const KeyframeEncoderParams p = KeyframeEncoderParams::init(cfg, rng);
  const Tensor image = Tensor::uniform({64, 64}, -1, 1, rng);
  for (auto _ : state) benchmark::DoNotOptimize(encode_keyframe(image, cfg, p));
}
BENCHMARK(BM_EncodeKeyframe)->Unit(benchmark::kMillisecond);

// One Adam step of the full desk model; the argument is the batch size.
void BM_TrainStep(benchmark::State& state) {
  const PhantomSize size = PhantomSize::desk();
  std::mt19937_64 rng(6);
  std::vector<Sample> data;
  for (int i = 0; i < state.range(0); ++i)
    data.push_back(render_sample(sample_spec(rng, {}, size), size, i, std::to_string(i)));
  std::vector<const Sample*> batch;
  for (const auto& s : data) batch.push_back(&s);
  const ModelConfig cfg = ModelConfig::desk();
  DmqcaParams params = DmqcaParams::init(cfg, {}, 1);
  AdamState adam;
  const TrainConfig tc;
  for (auto _ : state) benchmark::DoNotOptimize(train_step(batch, params, adam, tc, cfg, {}, 0));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_TrainStep)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

void BM_RenderSample(benchmark::State& state) {
  const PhantomSize size = PhantomSize::desk();
  std::mt19937_64 rng(7);
  const StenosisSpec spec = sample_spec(rng, {}, size);
  for (auto _ : state) benchmark::DoNotOptimize(render_sample(spec, size, 1, "b"));
}
BENCHMARK(BM_RenderSample)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();

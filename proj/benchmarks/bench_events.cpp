#include <benchmark/benchmark.h>

#include "evcam/eventgen.hpp"
#include "evcam/flow.hpp"
#include "evcam/image.hpp"
#include "evcam/pipeline.hpp"
#include "evcam/snn.hpp"

using namespace evcam;

namespace {

void BM_Exposure(benchmark::State& state) {
  const auto side = static_cast<std::size_t>(state.range(0));
  const Image img = random_image(side, side, 3, 1);
  for (auto _ : state) benchmark::DoNotOptimize(apply_exposure(img, ExposureConfig{0.2f}));
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_Exposure)->Arg(320);

void BM_Sobel(benchmark::State& state) {
  const auto side = static_cast<std::size_t>(state.range(0));
  const Image lum = luminance(random_image(side, side, 3, 2));
  for (auto _ : state) benchmark::DoNotOptimize(sobel(lum));
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_Sobel)->Arg(320);

void BM_RandomFlow(benchmark::State& state) {
  const auto side = static_cast<std::size_t>(state.range(0));
  FlowConfig cfg;
  for (auto _ : state) {
    benchmark::DoNotOptimize(generate_flow(side, side, cfg));
    ++cfg.seed;
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_RandomFlow)->Arg(320);

void BM_SynthesizeEvents(benchmark::State& state) {
  const auto side = static_cast<std::size_t>(state.range(0));
  const Image img = random_image(side, side, 3, 3);
  const EventGenConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(synthesize_events(img, cfg, static_cast<unsigned>(state.range(1))));
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_SynthesizeEvents)->Args({320, 1})->Args({320, 8})->UseRealTime();

void BM_SynthesizePair(benchmark::State& state) {
  const Image img = random_image(500, 375, 3, 4);
  const EventGenConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(synthesize_pair(img, 5.0, cfg, 320, 320));
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_SynthesizePair);

void BM_LifRun(benchmark::State& state) {
  const Tensor in = random_binary({2, kDefaultTimeSteps, 320, 320}, 0.1, 5);
  const LifParams p;
  for (auto _ : state) benchmark::DoNotOptimize(lif_run(in, p));
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_LifRun);

}  // namespace

BENCHMARK_MAIN();

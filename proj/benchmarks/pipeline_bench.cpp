#include <benchmark/benchmark.h>

#include "crossguard/controller.hpp"
#include "crossguard/fusion.hpp"
#include "throughput.hpp"

namespace crossguard {
namespace {

cli::ThroughputConfig config_for(const benchmark::State& state) {
  cli::ThroughputConfig c;
  c.frames = 256;
  c.sources = static_cast<std::size_t>(state.range(0));
  c.detections_per_source = static_cast<std::size_t>(state.range(1));
  return c;
}

void BM_FuseFrame(benchmark::State& state) {
  const auto c = config_for(state);
  const auto pool = cli::make_workload(c);
  std::size_t f = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(fuse_frame(pool[f++ % pool.size()], c.sources));
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_FuseFrame)->Args({3, 20})->Args({5, 30})->Args({1, 5});

void BM_ControllerStep(benchmark::State& state) {
  const ControllerConfig config;
  const BBox roi(200, 150, 440, 330);
  const std::vector<Detection> dets{
      {0, "ensemble", "car", 0.9, BBox(100, 100, 150, 150)},
      {0, "ensemble", "person", 0.6, BBox(300, 200, 320, 260)}};
  CrossingState s;
  std::uint64_t t = 0;
  for (auto _ : state) {
    const TickInput in{(t++ / 50) % 2 ? 0.8 : 0.0, 0.0, dets, roi};
    s = step(s, in, config).state;
    benchmark::DoNotOptimize(s);
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_ControllerStep);

void BM_FuseAndStep(benchmark::State& state) {
  const auto c = config_for(state);
  const auto pool = cli::make_workload(c);
  const ControllerConfig config;
  const BBox roi(200, 150, 440, 330);
  CrossingState s;
  std::size_t f = 0;
  for (auto _ : state) {
    const auto fused = fuse_frame(pool[f % pool.size()], c.sources);
    const TickInput in{(f++ / 50) % 2 ? 0.8 : 0.0, 0.0, detections_of(fused), roi};
    s = step(s, in, config).state;
    benchmark::DoNotOptimize(s);
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_FuseAndStep)->Args({3, 20});

}  // namespace
}  // namespace crossguard

BENCHMARK_MAIN();

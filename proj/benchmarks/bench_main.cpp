#include <benchmark/benchmark.h>

#include "vgmgc/trainer.hpp"

namespace {

vgmgc::MultiViewDataset bench_data(vgmgc::Index n) {
  vgmgc::SbmParams p;
  p.n = n;
  p.seed = 1;
  return vgmgc::generate_sbm(p);
}

void BM_MessagePass(benchmark::State& state) {
  const auto ds = bench_data(state.range(0));
  const auto a = vgmgc::row_normalize(ds.views[0].graph);
  for (auto _ : state) benchmark::DoNotOptimize(vgmgc::message_pass(ds.views[0].features, a, 2));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_MessagePass)->RangeMultiplier(2)->Range(100, 800)->Complexity();

void BM_KMeans(benchmark::State& state) {
  const auto ds = bench_data(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(vgmgc::kmeans(ds.x_global, ds.clusters, 3).inertia);
}
BENCHMARK(BM_KMeans)->Arg(200)->Arg(800);

void BM_TrainEpoch(benchmark::State& state) {
  const auto ds = bench_data(state.range(0));
  vgmgc::RunConfig config;
  auto train = vgmgc::TrainState::init(ds, config);
  for (auto _ : state) benchmark::DoNotOptimize(vgmgc::train_epoch(train, ds, config).losses.total);
}
BENCHMARK(BM_TrainEpoch)->Arg(200)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();

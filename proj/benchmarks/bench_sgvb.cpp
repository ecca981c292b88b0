// SPDX-License-Identifier: Apache-2.0
#include <benchmark/benchmark.h>

#include "nfsgvb/baselines.hpp"
#include "nfsgvb/channel_model.hpp"
#include "nfsgvb/math_kernels.hpp"
#include "nfsgvb/sgvb.hpp"

namespace {

using namespace nfsgvb;

CVec noisy_ula(int n, int l_paths, std::uint64_t seed) {
  const ArrayGeometry geom = ArrayGeometry::ula(n, 100e9);
  SceneConfig sc;
  sc.l_paths = l_paths;
  sc.r_min = 3.0;
  sc.r_max = 90.0;
  const Scene scene = generate_scene(geom, sc, seed);
  return add_noise(synthesize_channel(geom, scene, ChannelMode::Exact), 100.0, l_paths, seed).y;
}

void BM_BesselRatios(benchmark::State& state) {
  const double kappa = static_cast<double>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(bessel_ratios(255, kappa));
}
BENCHMARK(BM_BesselRatios)->Arg(1)->Arg(100)->Arg(100000);

void BM_SgvbSweep(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const ArrayGeometry geom = ArrayGeometry::ula(n, 100e9);
  const SgvbEstimator est(geom, SgvbConfig::defaults_for(geom, 3.0, 90.0, 6));
  EstimatorState st = est.initialize(noisy_ula(n, 6, 7));
  for (auto _ : state) est.sweep(st);
  state.SetComplexityN(n);
}
BENCHMARK(BM_SgvbSweep)->RangeMultiplier(2)->Range(64, 512)->Complexity(benchmark::oNSquared);

void BM_SgvbRun(benchmark::State& state) {
  const ArrayGeometry geom = ArrayGeometry::ula(256, 100e9);
  const SgvbEstimator est(geom, SgvbConfig::defaults_for(geom, 3.0, 90.0, 6));
  const CVec y = noisy_ula(256, 6, 11);
  for (auto _ : state) benchmark::DoNotOptimize(est.run(y));
}
BENCHMARK(BM_SgvbRun)->Unit(benchmark::kMillisecond);

void BM_PSomp(benchmark::State& state) {
  const ArrayGeometry geom = ArrayGeometry::ula(256, 100e9);
  const PolarCodebook cb = build_polar_codebook(geom, 3.0, 90.0, 3 * 256);
  const CVec y = noisy_ula(256, 6, 13);
  for (auto _ : state) benchmark::DoNotOptimize(p_somp(y, cb, 6));
}
BENCHMARK(BM_PSomp)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();

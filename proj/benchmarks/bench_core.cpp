#include <benchmark/benchmark.h>

#include "chordalcov/estimators.hpp"
#include "chordalcov/moments.hpp"
#include "chordalcov/simulate.hpp"

namespace {

using namespace chordalcov;

TreePtr band_tree(int r, int k) { return share(banded_graph(r, k)); }

void BM_BuildJunctionTree(benchmark::State& state) {
  const int r = static_cast<int>(state.range(0));
  const Graph g = banded_graph(r, 4).to_graph();
  for (auto _ : state) benchmark::DoNotOptimize(build_junction_tree(g));
}
BENCHMARK(BM_BuildJunctionTree)->Arg(50)->Arg(102)->Arg(200);

void BM_Completion(benchmark::State& state) {
  const int r = static_cast<int>(state.range(0));
  const TreePtr t = band_tree(r, 4);
  const GMatrix x = project(ar1_template(r, 0.5), t);
  for (auto _ : state) benchmark::DoNotOptimize(complete(x));
}
BENCHMARK(BM_Completion)->Arg(30)->Arg(102)->Arg(200);

void BM_LogdetCompleted(benchmark::State& state) {
  const int r = static_cast<int>(state.range(0));
  const TreePtr t = band_tree(r, 4);
  const GMatrix x = project(ar1_template(r, 0.5), t);
  for (auto _ : state) benchmark::DoNotOptimize(logdet_completed(x));
}
BENCHMARK(BM_LogdetCompleted)->Arg(30)->Arg(102)->Arg(200);

void BM_LayeredMean(benchmark::State& state) {
  const int r = static_cast<int>(state.range(0));
  const TreePtr t = band_tree(r, 4);
  const WpgParams p = WpgParams::hiw(3.0, t, identity_gmatrix(t));
  for (auto _ : state) benchmark::DoNotOptimize(iwpg_mean(p));
}
BENCHMARK(BM_LayeredMean)->Arg(30)->Arg(102);

void BM_GraphicalMle(benchmark::State& state) {
  const int r = static_cast<int>(state.range(0));
  const TreePtr t = band_tree(r, 4);
  const Mat data = sample_data(ar1_template(r, 0.5), 2 * r, 42);
  const Mat S = sample_cov(data);
  for (auto _ : state) benchmark::DoNotOptimize(mle_g(S, t));
}
BENCHMARK(BM_GraphicalMle)->Arg(30)->Arg(102);

void BM_HiwSampleOne(benchmark::State& state) {
  const int r = static_cast<int>(state.range(0));
  const TreePtr t = band_tree(r, 4);
  const GMatrix theta = identity_gmatrix(t);
  Rng rng(7);
  for (auto _ : state) benchmark::DoNotOptimize(hiw_sample_one(3.0, theta, rng));
}
BENCHMARK(BM_HiwSampleOne)->Arg(12)->Arg(30);

}  // namespace

BENCHMARK_MAIN();

#include <benchmark/benchmark.h>

#include "phcollapse/filtration.hpp"
#include "phcollapse/generators.hpp"
#include "phcollapse/persistence.hpp"

namespace {

phc::PointCloud gaussian_cloud(std::size_t n, std::size_t d) {
  return phc::sample_null({phc::NullFamily::standard_gaussian}, n, d, phc::SeedSequence(42));
}

void BM_VrFiltration(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const int max_dim = static_cast<int>(state.range(1));
  const auto dm = phc::pairwise_distances(gaussian_cloud(n, 5));
  for (auto _ : state) benchmark::DoNotOptimize(phc::vr_filtration(dm, max_dim));
}
BENCHMARK(BM_VrFiltration)->Args({50, 2})->Args({100, 2})->Args({50, 3})->Unit(benchmark::kMillisecond);

void BM_DtmFiltration(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto cloud = gaussian_cloud(n, 5);
  for (auto _ : state) benchmark::DoNotOptimize(phc::dtm_filtration(cloud, {}, 2));
}
BENCHMARK(BM_DtmFiltration)->Arg(50)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_Persistence(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const int q_max = static_cast<int>(state.range(1));
  const auto complex = phc::vr_filtration(phc::pairwise_distances(gaussian_cloud(n, 5)), q_max + 1);
  for (auto _ : state) benchmark::DoNotOptimize(phc::compute_persistence(complex, q_max));
}
BENCHMARK(BM_Persistence)->Args({10, 1})->Args({50, 1})->Args({100, 1})->Args({30, 2})->Args({50, 2})
    ->Unit(benchmark::kMillisecond);

void BM_PersistenceBruteforce(benchmark::State& state) {
  const auto complex = phc::vr_filtration(phc::pairwise_distances(gaussian_cloud(8, 3)), 3);
  for (auto _ : state) benchmark::DoNotOptimize(phc::persistence_bruteforce(complex, 2));
}
BENCHMARK(BM_PersistenceBruteforce)->Unit(benchmark::kMillisecond);

void BM_Bottleneck(benchmark::State& state) {
  const auto complex = phc::vr_filtration(phc::pairwise_distances(gaussian_cloud(60, 3)), 1);
  const auto a = phc::compute_persistence(complex, 0);
  auto shifted = a[0];
  for (auto& p : shifted.pairs) p.death += 0.01;
  for (auto _ : state) benchmark::DoNotOptimize(phc::bottleneck_distance(a[0], shifted));
}
BENCHMARK(BM_Bottleneck)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();

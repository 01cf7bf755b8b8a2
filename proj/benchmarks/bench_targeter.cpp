#include <benchmark/benchmark.h>

#include <memory>

#include "subsum/prime_pool.hpp"
#include "subsum/targeter.hpp"

using namespace subsum;

static void BM_CorridorExtract(benchmark::State& state) {
  auto sieve = std::make_shared<Sieve>(10'000'000);
  PoolHandle pool = base_pool(sieve);
  std::uint64_t hint = 3;
  for (auto _ : state) {
    EDeltaSeq seq = extract_edelta(pool, 0.5, hint);
    benchmark::DoNotOptimize(seq.element(64));
    hint = hint % 50'000 + 101;
  }
}
BENCHMARK(BM_CorridorExtract);

static void BM_TargetSubset(benchmark::State& state) {
  auto sieve = std::make_shared<Sieve>(10'000'000);
  PoolHandle pool = base_pool(sieve);
  TargetLimits lim;
  lim.max_element = 10'000'000;
  for (auto _ : state) {
    benchmark::DoNotOptimize(target_subset(pool, 1.0, 0.3, 1e-8, lim));
  }
}
BENCHMARK(BM_TargetSubset);

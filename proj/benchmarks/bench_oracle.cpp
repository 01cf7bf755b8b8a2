#include <benchmark/benchmark.h>

#include <cmath>
#include <memory>
#include <vector>

#include "subsum/prime_pool.hpp"
#include "subsum/verify_oracle.hpp"

using namespace subsum;

static std::vector<double> corridor_magnitudes(std::size_t count) {
  auto sieve = std::make_shared<Sieve>(1'000'000);
  const EDeltaSeq seq = extract_edelta(base_pool(sieve), 1.0, 3);
  std::vector<double> mags;
  for (std::size_t i = 0; i < count; ++i) {
    mags.push_back(std::pow(static_cast<double>(seq.element(i)), -1.0));
  }
  return mags;
}

static void BM_OracleQuery(benchmark::State& state) {
  const auto mags = corridor_magnitudes(static_cast<std::size_t>(state.range(0)));
  double target = 0.05;
  for (auto _ : state) {
    benchmark::DoNotOptimize(brute_subset_oracle(mags, target));
    target += 0.01;
    if (target > 0.9) target = 0.05;
  }
}
BENCHMARK(BM_OracleQuery)->Arg(16)->Arg(20)->Arg(24);

static void BM_Profile(benchmark::State& state) {
  const auto mags = corridor_magnitudes(20);
  for (auto _ : state) {
    benchmark::DoNotOptimize(achievement_profile(mags, 64));
  }
}
BENCHMARK(BM_Profile);

#include <benchmark/benchmark.h>

#include "subsum/sieve.hpp"

using namespace subsum;

static void BM_SieveBuild(benchmark::State& state) {
  const auto limit = static_cast<std::uint64_t>(state.range(0));
  for (auto _ : state) {
    Sieve sieve(limit);
    benchmark::DoNotOptimize(sieve.count_primes_leq(limit));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_SieveBuild)->Range(1 << 16, 1 << 24)->Complexity();

static void BM_PrimeCount(benchmark::State& state) {
  Sieve sieve(10'000'000);
  std::uint64_t n = 17;
  for (auto _ : state) {
    benchmark::DoNotOptimize(sieve.count_primes_leq(3 + (n = n * 48271 % 9'999'990)));
  }
}
BENCHMARK(BM_PrimeCount);

static void BM_NthPrime(benchmark::State& state) {
  Sieve sieve(10'000'000);
  std::uint64_t n = 17;
  for (auto _ : state) {
    benchmark::DoNotOptimize(sieve.nth_prime(n = n * 48271 % 600'000));
  }
}
BENCHMARK(BM_NthPrime);

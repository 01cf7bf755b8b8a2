#include <benchmark/benchmark.h>

#include <memory>
#include <numeric>
#include <vector>

#include "subsum/prime_pool.hpp"
#include "subsum/series_eval.hpp"

using namespace subsum;

static void BM_PhiFinite(benchmark::State& state) {
  std::vector<std::uint64_t> elems(static_cast<std::size_t>(state.range(0)));
  std::iota(elems.begin(), elems.end(), 1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(phi_finite(elems, 0.7));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_PhiFinite)->Range(64, 1 << 16);

static void BM_PhiGenerated(benchmark::State& state) {
  auto sieve = std::make_shared<Sieve>(10'000'000);
  const SetExpr g = SetExpr::generated(extract_edelta(base_pool(sieve), 0.5, 100));
  for (auto _ : state) {
    benchmark::DoNotOptimize(phi(g, 0.75, 1e-8));
  }
}
BENCHMARK(BM_PhiGenerated);

static void BM_PowNeg(benchmark::State& state) {
  std::uint64_t n = 12345;
  for (auto _ : state) {
    benchmark::DoNotOptimize(pow_neg(n = n * 48271 % 99'999'989 + 2, 0.6));
  }
}
BENCHMARK(BM_PowNeg);

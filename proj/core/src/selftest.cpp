#include "subsum/selftest.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>
#include <random>
#include <string>

#include "subsum/errors.hpp"
#include "subsum/prime_pool.hpp"
#include "subsum/series_eval.hpp"
#include "subsum/set_algebra.hpp"
#include "subsum/targeter.hpp"
#include "subsum/verify_oracle.hpp"

namespace subsum {

namespace {

// Exact rational accumulator over __int128; inputs are kept small enough that
// reduced denominators stay far from overflow.
struct Fraction {
  __int128 num = 0;
  __int128 den = 1;

  static __int128 gcd(__int128 a, __int128 b) {
    while (b != 0) {
      const __int128 t = a % b;
      a = b;
      b = t;
    }
    return a < 0 ? -a : a;
  }

  void add_unit(std::uint64_t q) {  // += 1/q
    num = num * static_cast<__int128>(q) + den;
    den = den * static_cast<__int128>(q);
    const __int128 g = gcd(num, den);
    num /= g;
    den /= g;
  }

  bool contained_in(double lo, double hi) const {
    // num/den in [lo, hi] via exact cross multiplication over scaled integers.
    const long double v = static_cast<long double>(num) / static_cast<long double>(den);
    return static_cast<long double>(lo) <= v && v <= static_cast<long double>(hi);
  }
};

SuiteResult sign_rule_suite(SelftestFault fault) {
  SuiteResult res{"sign-rule", true, ""};
  for (std::uint64_t n = 1; n <= 10'000; ++n) {
    for (int g = 1; g <= 10; ++g) {
      const double alpha = g / 10.0;
      Interval t = term(n, alpha);
      if (fault == SelftestFault::kSignFlip) t = -t;
      const bool want_positive = n % 2 == 1;
      const bool is_positive = t.lo > 0.0;
      const bool is_negative = t.hi < 0.0;
      if (want_positive != is_positive || want_positive == is_negative) {
        res.pass = false;
        res.detail = "term(" + std::to_string(n) + ", " + std::to_string(alpha) +
                     ") has the wrong sign";
        return res;
      }
    }
  }
  res.detail = "10000 indices x 10 exponents";
  return res;
}

SuiteResult product_identity_suite() {
  SuiteResult res{"product-identity", true, ""};
  std::mt19937_64 rng(0x5eedu);
  std::uniform_int_distribution<int> size_dist(1, 3);
  std::uniform_int_distribution<std::uint64_t> elem_dist(1, 22);
  int rational_checked = 0;
  for (int trial = 0; trial < 60; ++trial) {
    auto draw_odd_set = [&]() {
      std::vector<std::uint64_t> v;
      const int size = size_dist(rng);
      while (static_cast<int>(v.size()) < size) {
        const std::uint64_t e = 2 * elem_dist(rng) + 1;
        if (std::find(v.begin(), v.end(), e) == v.end()) v.push_back(e);
      }
      std::sort(v.begin(), v.end());
      return v;
    };
    const std::vector<std::uint64_t> av = draw_odd_set();
    const std::vector<std::uint64_t> bv = draw_odd_set();
    const SetExpr a = SetExpr::finite(av);
    const SetExpr b = SetExpr::finite(bv);
    const std::uint64_t bound = av.back() * bv.back() + 1;
    if (!injectivity_check(a, b, bound).ok) continue;
    const SetExpr prod = checked_product(a, b, bound);
    const double alpha = trial % 2 == 0 ? 1.0 : 0.5;
    const Interval direct = phi(SetExpr::product(a, b), alpha, 1e-9);
    const Interval split = phi(a, alpha, 1e-12) * phi(b, alpha, 1e-12);
    const Interval via_witness = phi(prod, alpha, 1e-9);
    const bool overlap = std::max(direct.lo, via_witness.lo) <= std::min(direct.hi, via_witness.hi) &&
                         std::max(split.lo, via_witness.lo) <= std::min(split.hi, via_witness.hi);
    if (!overlap) {
      res.pass = false;
      res.detail = "enclosures disagree on trial " + std::to_string(trial);
      return res;
    }
    if (alpha == 1.0 && rational_checked < 20) {
      Fraction exact;
      for (std::uint64_t x : av) {
        for (std::uint64_t y : bv) exact.add_unit(x * y);
      }
      if (!exact.contained_in(via_witness.lo, via_witness.hi)) {
        res.pass = false;
        res.detail = "exact rational escaped the enclosure on trial " + std::to_string(trial);
        return res;
      }
      ++rational_checked;
    }
  }
  res.detail = "60 random odd pairs, " + std::to_string(rational_checked) + " exact cross-checks";
  return res;
}

SuiteResult tail_soundness_suite() {
  SuiteResult res{"tail-soundness", true, ""};
  auto sieve = std::make_shared<Sieve>(1'000'000);
  const PoolHandle pool = base_pool(sieve);
  const double deltas[] = {0.25, 0.5, 1.0};
  const double alphas[] = {0.25, 0.5, 0.75, 1.0};
  for (double delta : deltas) {
    const EDeltaSeq seq = extract_edelta(pool, delta, 3 + static_cast<std::uint64_t>(delta * 40));
    for (double alpha : alphas) {
      const TailBound tb = tail_bound(seq, 8, alpha);
      double deeper = 0.0;
      for (std::size_t j = 8; j < 68 && seq.element(j) <= 100'000'000; ++j) {
        deeper += std::pow(static_cast<double>(seq.element(j)), -alpha);
      }
      if (deeper > tb.bound) {
        res.pass = false;
        res.detail = "sampled partial sum exceeds the bound at delta " + std::to_string(delta);
        return res;
      }
    }
  }
  res.detail = "3 corridors x 4 exponents";
  return res;
}

SuiteResult greedy_vs_oracle_suite() {
  SuiteResult res{"greedy-vs-oracle", true, ""};
  auto sieve = std::make_shared<Sieve>(1'000'000);
  const PoolHandle pool = base_pool(sieve);
  std::mt19937_64 rng(0xfeedu);
  std::uniform_int_distribution<std::uint64_t> hint_dist(3, 4000);
  for (int trial = 0; trial < 8; ++trial) {
    const double alpha = trial % 2 == 0 ? 1.0 : 0.5;
    const EDeltaSeq seq = extract_edelta(pool, 1.0, hint_dist(rng));
    constexpr std::size_t kCount = 18;
    std::vector<double> mags;
    for (std::size_t i = 0; i < kCount; ++i) {
      mags.push_back(std::pow(static_cast<double>(seq.element(i)), -alpha));
    }
    const double total = std::accumulate(mags.begin(), mags.end(), 0.0);
    const double tol = mags.back();
    GreedyLimits lim;
    lim.max_terms = kCount;
    for (int g = 0; g < 17; ++g) {
      const double x = total * g / 16.0;
      const GreedyResult gr = greedy_interval(seq, alpha, x, tol, lim);
      const OracleResult opt = brute_subset_oracle(mags, x);
      if (gr.status != RunStatus::kConverged ||
          gr.residual.mag() > opt.residual + tol + 1e-12) {
        res.pass = false;
        res.detail = "greedy strayed from the oracle at grid point " + std::to_string(g);
        return res;
      }
    }
  }
  res.detail = "8 pools x 17 grid targets";
  return res;
}

}  // namespace

std::vector<SuiteResult> run_selftest(SelftestFault fault) {
  std::vector<SuiteResult> out;
  out.push_back(sign_rule_suite(fault));
  out.push_back(product_identity_suite());
  out.push_back(tail_soundness_suite());
  out.push_back(greedy_vs_oracle_suite());
  return out;
}

}  // namespace subsum

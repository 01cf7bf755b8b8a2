#include <doctest.h>

#include <cmath>
#include <random>

#include "subsum/errors.hpp"
#include "subsum/series_eval.hpp"
#include "test_util.hpp"

using namespace subsum;

namespace {

EDeltaSeq powers_of_two() {
  return EDeltaSeq::synthetic({2}, [](std::uint64_t a) { return 2 * a; }, 1.0, 1.0,
                              Parity::kEven);
}

bool overlap(Interval a, Interval b) {
  return std::max(a.lo, b.lo) <= std::min(a.hi, b.hi);
}

}  // namespace

TEST_CASE("signed terms") {
  CHECK(term(1, 0.5).contains(1.0));
  CHECK(term(1, 0.5).width() < 1e-15);
  CHECK(term(2, 1.0).contains(-0.5));
  CHECK(term(4, 0.5).contains(-0.5));
  for (std::uint64_t n = 1; n <= 2000; ++n) {
    for (int g = 1; g <= 10; ++g) {
      const Interval t = term(n, g / 10.0);
      if (n % 2 == 1) {
        CHECK(t.lo > 0.0);
      } else {
        CHECK(t.hi < 0.0);
      }
    }
  }
}

TEST_CASE("finite sums") {
  const std::vector<std::uint64_t> one{1};
  const Interval i1 = phi_finite(one, 0.7);
  CHECK(i1.contains(1.0));
  CHECK(i1.width() <= 1e-15);

  const std::vector<std::uint64_t> prod{21, 33, 35, 55};
  const Interval ip = phi_finite(prod, 1.0);
  CHECK(testutil::rational_in(testutil::Rational(48, 385), ip.lo, ip.hi));
  CHECK(ip.width() < 1e-14);

  const Interval empty = phi_finite(std::vector<std::uint64_t>{}, 0.3);
  CHECK(empty.lo == 0.0);
  CHECK(empty.hi == 0.0);
}

TEST_CASE("geometric tail bound") {
  const EDeltaSeq seq = powers_of_two();
  REQUIRE(seq.element(9) == 1024);
  SUBCASE("alpha 1 reproduces the exact geometric tail") {
    const TailBound tb = tail_bound(seq, 9, 1.0);
    CHECK(tb.from_element == 1024);
    CHECK(tb.bound >= std::pow(2.0, -9.0));
    CHECK(tb.bound <= std::pow(2.0, -9.0) * (1 + 1e-12));
  }
  SUBCASE("alpha 0.5 against a deep partial sum") {
    const TailBound tb = tail_bound(seq, 9, 0.5);
    CHECK(tb.bound == doctest::Approx(0.10669).epsilon(1e-3));
    double deep = 0.0;
    for (std::size_t j = 9; j < 59; ++j) {
      deep += std::pow(static_cast<double>(seq.element(j)), -0.5);
    }
    CHECK(deep <= tb.bound);
  }
}

TEST_CASE("tail bounds dominate sampled continuations of prime corridors") {
  PoolHandle pool = base_pool(testutil::shared_sieve());
  std::mt19937_64 rng(31);
  std::uniform_int_distribution<std::uint64_t> hint(3, 30'000);
  const double deltas[] = {0.25, 0.5, 1.0};
  const double alphas[] = {0.25, 0.5, 0.75, 1.0};
  for (int trial = 0; trial < 10; ++trial) {
    const EDeltaSeq seq = extract_edelta(pool, deltas[trial % 3], hint(rng));
    for (double alpha : alphas) {
      const TailBound tb = tail_bound(seq, 6, alpha);
      double deep = 0.0;
      for (std::size_t j = 6; j < 56 && seq.element(j) <= 100'000'000; ++j) {
        deep += std::pow(static_cast<double>(seq.element(j)), -alpha);
      }
      CHECK(deep <= tb.bound);
    }
  }
}

TEST_CASE("structural phi") {
  SUBCASE("witnessed product matches the direct expansion and the exact value") {
    const SetExpr a = SetExpr::finite({3, 5});
    const SetExpr b = SetExpr::finite({7, 11});
    const SetExpr witnessed = checked_product(a, b, 100);
    const Interval via_split = phi(witnessed, 1.0, 1e-10);
    const Interval direct = phi_finite(std::vector<std::uint64_t>{21, 33, 35, 55}, 1.0);
    CHECK(overlap(via_split, direct));
    CHECK(testutil::rational_in(testutil::Rational(48, 385), via_split.lo, via_split.hi));
  }
  SUBCASE("generated even corridor sums to -1") {
    const Interval enc = phi(SetExpr::generated(powers_of_two()), 1.0, 1e-9);
    CHECK(enc.contains(-1.0));
    CHECK(enc.width() <= 1e-9);
  }
  SUBCASE("empty") {
    const Interval enc = phi(SetExpr::empty(), 0.5, 1e-9);
    CHECK(enc.lo == 0.0);
    CHECK(enc.hi == 0.0);
  }
  SUBCASE("width goal unreachable raises capacity with the achieved width") {
    EvalContext ctx;
    ctx.max_terms = 8;
    CHECK_THROWS_AS(phi(SetExpr::generated(powers_of_two()), 0.5, 1e-12, ctx), CapacityError);
  }
}

TEST_CASE("psi") {
  const std::vector<double> alphas{0.5, 1.0};
  const std::vector<double> widths{1e-9, 1e-9};
  SUBCASE("singleton one") {
    const auto v = psi(SetExpr::finite({1}), alphas, widths);
    CHECK(v[0].contains(1.0));
    CHECK(v[1].contains(1.0));
  }
  SUBCASE("empty is exactly zero") {
    const auto v = psi(SetExpr::empty(), alphas, widths);
    for (const Interval& iv : v) {
      CHECK(iv.lo == 0.0);
      CHECK(iv.hi == 0.0);
    }
  }
  SUBCASE("singleton two is negative at both exponents") {
    const auto v = psi(SetExpr::finite({2}), alphas, widths);
    CHECK(v[0].contains(-std::pow(2.0, -0.5)));
    CHECK(v[1].contains(-0.5));
  }
}

TEST_CASE("coordinate-wise interval product") {
  const std::vector<Interval> u{{1, 1}, {2, 2}};
  const std::vector<Interval> v{{3, 3}, {-1, -1}};
  const auto w = coordwise_mul(u, v);
  CHECK(w[0].contains(3.0));
  CHECK(w[1].contains(-2.0));

  const std::vector<Interval> zero{{0, 0}, {0, 0}};
  for (const Interval& iv : coordwise_mul(u, zero)) {
    CHECK(iv.contains(0.0));
    CHECK(iv.mag() < 1e-300);
  }

  const std::vector<Interval> span{{-1, 2}};
  const std::vector<Interval> three{{3, 3}};
  const auto m = coordwise_mul(span, three);
  CHECK(m[0].lo <= -3.0);
  CHECK(m[0].hi >= 6.0);
  CHECK(m[0].lo > -3.0 - 1e-12);

  CHECK_THROWS_AS(coordwise_mul(u, span), InvalidInputError);
}

TEST_CASE("product identity on random odd-support pairs") {
  std::mt19937_64 rng(77);
  std::uniform_int_distribution<int> size(1, 5);
  std::uniform_int_distribution<std::uint64_t> half(1, 60);
  int done = 0;
  while (done < 60) {
    auto draw = [&] {
      std::vector<std::uint64_t> v;
      for (int i = size(rng); i > 0; --i) v.push_back(2 * half(rng) + 1);
      std::sort(v.begin(), v.end());
      v.erase(std::unique(v.begin(), v.end()), v.end());
      return v;
    };
    const auto av = draw();
    const auto bv = draw();
    const SetExpr a = SetExpr::finite(av);
    const SetExpr b = SetExpr::finite(bv);
    const std::uint64_t bound = av.back() * bv.back();
    if (!injectivity_check(a, b, bound).ok) continue;
    ++done;
    const double alpha = done % 2 == 0 ? 1.0 : 0.45;
    const Interval split = phi(a, alpha, 1e-12) * phi(b, alpha, 1e-12);
    const Interval whole = phi(checked_product(a, b, bound), alpha, 1e-10);
    CHECK(overlap(split, whole));
    if (alpha == 1.0) {
      testutil::Rational exact = 0;
      for (auto x : av) {
        for (auto y : bv) exact += testutil::Rational(1, x * y);
      }
      CHECK(testutil::rational_in(exact, whole.lo, whole.hi));
    }
  }
}

TEST_CASE("subadditivity including non-injective products") {
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<int> size(1, 5);
  std::uniform_int_distribution<std::uint64_t> elem(2, 64);
  for (int trial = 0; trial < 40; ++trial) {
    std::vector<std::uint64_t> av, bv;
    for (int i = size(rng); i > 0; --i) av.push_back(elem(rng));
    for (int i = size(rng); i > 0; --i) bv.push_back(elem(rng));
    std::sort(av.begin(), av.end());
    av.erase(std::unique(av.begin(), av.end()), av.end());
    std::sort(bv.begin(), bv.end());
    bv.erase(std::unique(bv.begin(), bv.end()), bv.end());
    const SetExpr a = SetExpr::finite(av);
    const SetExpr b = SetExpr::finite(bv);
    const double alpha = 0.3 + 0.1 * (trial % 8);
    // Magnitude sum over distinct products never exceeds the product of sums.
    const Interval left = phi_abs(SetExpr::product(a, b), alpha, 1e-9);
    const Interval right = phi_abs(a, alpha, 1e-12) * phi_abs(b, alpha, 1e-12);
    CHECK(left.lo <= right.hi + 1e-9);
  }
  // The classic collision case keeps strictness.
  const Interval collide = phi_abs(SetExpr::product(SetExpr::finite({2, 4}),
                                                    SetExpr::finite({4, 8})),
                                   0.5, 1e-9);
  const Interval apart = phi_abs(SetExpr::finite({2, 4}), 0.5, 1e-12) *
                         phi_abs(SetExpr::finite({4, 8}), 0.5, 1e-12);
  CHECK(collide.hi < apart.lo);
}

TEST_CASE("refinement never widens") {
  PoolHandle pool = base_pool(testutil::shared_sieve());
  const SetExpr g = SetExpr::generated(extract_edelta(pool, 0.5, 50));
  // Widths stay above the granularity the exponent affords within the caps.
  double widths[] = {1e-2, 1e-3, 1e-4, 1e-5};
  double prev = 1e9;
  for (double w : widths) {
    const Interval enc = phi(g, 0.75, w);
    CHECK(enc.width() <= w);
    CHECK(enc.width() <= prev + 1e-15);
    prev = enc.width();
  }
}

TEST_CASE("interval algebra identities") {
  const Interval z = Interval::zero();
  const Interval a{0.25, 0.5};
  CHECK((z + a).lo == a.lo);
  CHECK((a * z).hi == 0.0);
  CHECK((a * z).lo == 0.0);
  const Interval padded = pad(a, 0.1);
  CHECK(padded.lo < 0.25 - 0.099);
  CHECK(padded.hi > 0.5 + 0.099);
  const Interval meet = intersect(Interval{0.0, 0.4}, Interval{0.3, 1.0});
  CHECK(meet.lo == 0.3);
  CHECK(meet.hi == 0.4);
  const Interval join = hull(Interval{0.0, 0.4}, Interval{0.6, 1.0});
  CHECK(join.lo == 0.0);
  CHECK(join.hi == 1.0);
  CHECK(Interval{0.1, 0.2}.certified_sign() == 1);
  CHECK(Interval{-0.2, -0.1}.certified_sign() == -1);
  CHECK(Interval{-0.1, 0.1}.certified_sign() == 0);
  CHECK(Interval{-0.5, 0.25}.mag() == 0.5);
  CHECK(Interval{-0.5, 0.25}.mig() == 0.0);
  CHECK(Interval{0.25, 0.5}.mig() == 0.25);
}

TEST_CASE("unwitnessed overlapping union still encloses the set sum") {
  const SetExpr u = SetExpr::union_of(SetExpr::finite({3, 5}), SetExpr::finite({5, 7}));
  const Interval enc = phi(u, 1.0, 0.5);
  // Set semantics: {3, 5, 7} sums to 1/3 + 1/5 + 1/7 = 71/105.
  CHECK(testutil::rational_in(testutil::Rational(71, 105), enc.lo, enc.hi));
  const Interval abs_enc = phi_abs(u, 1.0, 0.5);
  CHECK(testutil::rational_in(testutil::Rational(71, 105), abs_enc.lo, abs_enc.hi));
}

TEST_CASE("extended precision tightens power enclosures") {
  if (!extended_precision_available()) return;
  EvalContext wide;
  EvalContext tight;
  tight.precision = 113;
  for (std::uint64_t n : {7ull, 97ull, 12345ull, 99991ull}) {
    const Interval a = pow_neg(n, 0.3, wide);
    const Interval b = pow_neg(n, 0.3, tight);
    CHECK(b.width() <= a.width());
    CHECK(overlap(a, b));
  }
}

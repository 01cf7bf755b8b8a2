#include <doctest.h>

#include <cmath>
#include <random>

#include "subsum/errors.hpp"
#include "subsum/prime_pool.hpp"
#include "subsum/series_eval.hpp"
#include "subsum/verify_oracle.hpp"
#include "test_util.hpp"

using namespace subsum;

TEST_CASE("verify basics") {
  const std::vector<double> ones;  // default coefficients
  SUBCASE("empty list against the zero target") {
    const std::vector<double> alphas{0.5};
    const std::vector<double> target{0.0};
    const VerifyReport rep = verify({}, alphas, ones, target, 1e-9);
    CHECK(rep.pass);
    CHECK(rep.residual[0] == 0.0);
    CHECK(rep.absolute_sum_total == 0.0);
  }
  SUBCASE("index one sums to one at every exponent") {
    const std::vector<std::uint64_t> idx{1};
    const std::vector<double> alphas{0.5, 1.0};
    const std::vector<double> target{1.0, 1.0};
    const VerifyReport rep = verify(idx, alphas, ones, target, 1e-12);
    CHECK(rep.pass);
    CHECK(rep.absolute_sum_total == doctest::Approx(std::sqrt(2.0)));
  }
  SUBCASE("duplicates are findings, not crashes") {
    const std::vector<std::uint64_t> idx{2, 2};
    const std::vector<double> alphas{1.0};
    const std::vector<double> target{-1.0};
    const VerifyReport rep = verify(idx, alphas, ones, target, 1e-6);
    CHECK_FALSE(rep.pass);
    REQUIRE(rep.duplicates.size() == 1);
    CHECK(rep.duplicates[0] == 2);
  }
  SUBCASE("report serializes") {
    const std::vector<double> alphas{1.0};
    const std::vector<double> target{0.5};
    const VerifyReport rep = verify(std::vector<std::uint64_t>{3, 15}, alphas, ones, target, 1.0);
    const std::string j = rep.to_json();
    CHECK(j.find("\"pass\":true") != std::string::npos);
    CHECK(j.find("\"absolute_sum_total\"") != std::string::npos);
  }
  SUBCASE("coefficients scale the recomputed sums") {
    const std::vector<std::uint64_t> idx{1};
    const std::vector<double> alphas{0.5, 1.0};
    const std::vector<double> coeffs{-3.0, 2.0};
    const std::vector<double> target{-3.0, 2.0};
    const VerifyReport rep = verify(idx, alphas, coeffs, target, 1e-12);
    CHECK(rep.pass);
    CHECK(rep.recomputed[0] == doctest::Approx(-3.0));
    CHECK(rep.recomputed[1] == doctest::Approx(2.0));
  }
}

TEST_CASE("verifier agrees with the enclosure path on random finite sets") {
  std::mt19937_64 rng(42);
  std::uniform_int_distribution<std::uint64_t> elem(1, 100'000);
  std::uniform_int_distribution<int> size(0, 60);
  const std::vector<double> alphas{0.35, 0.8, 1.0};
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<std::uint64_t> idx;
    for (int i = size(rng); i > 0; --i) idx.push_back(elem(rng));
    std::sort(idx.begin(), idx.end());
    idx.erase(std::unique(idx.begin(), idx.end()), idx.end());
    std::vector<double> target(alphas.size(), 0.0);
    const VerifyReport rep = verify(idx, alphas, {}, target, 1e308);
    for (std::size_t i = 0; i < alphas.size(); ++i) {
      const Interval enc = phi_finite(idx, alphas[i]);
      CHECK(rep.recomputed[i] >= enc.lo - rep.slack[i]);
      CHECK(rep.recomputed[i] <= enc.hi + rep.slack[i]);
    }
  }
}

TEST_CASE("subset-sum oracle") {
  SUBCASE("dyadic triple") {
    const std::vector<double> mags{0.5, 0.25, 0.125};
    const OracleResult r = brute_subset_oracle(mags, 0.625);
    CHECK(r.residual == doctest::Approx(0.0));
    CHECK(r.subset == std::vector<std::size_t>{0, 2});
  }
  SUBCASE("single element below half picks the empty set") {
    const std::vector<double> mags{1.0};
    const OracleResult r = brute_subset_oracle(mags, 0.4);
    CHECK(r.residual == doctest::Approx(0.4));
    CHECK(r.subset.empty());
  }
  SUBCASE("size cap") {
    std::vector<double> mags(31, 1.0);
    CHECK_THROWS_AS(brute_subset_oracle(mags, 1.0), CapacityError);
  }
  SUBCASE("spot soundness against random subsets") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> mag(0.01, 1.0);
    std::vector<double> mags;
    for (int i = 0; i < 20; ++i) mags.push_back(mag(rng));
    const double target = 2.34;
    const OracleResult best = brute_subset_oracle(mags, target);
    for (int trial = 0; trial < 1000; ++trial) {
      const std::uint32_t mask = static_cast<std::uint32_t>(rng() & ((1u << 20) - 1));
      double s = 0.0;
      for (int i = 0; i < 20; ++i) {
        if ((mask >> i) & 1) s += mags[i];
      }
      CHECK(best.residual <= std::fabs(s - target) + 1e-12);
    }
  }
}

TEST_CASE("achievement profile") {
  SUBCASE("geometric eight-element pool resolves to the last dyadic step") {
    std::vector<double> mags;
    for (int k = 1; k <= 8; ++k) mags.push_back(std::pow(2.0, -k));
    const AchievementProfile prof = achievement_profile(mags, 64);
    CHECK(prof.max_residual <= std::pow(2.0, -9) + 1e-12);
    CHECK(prof.max_residual >= std::pow(2.0, -9) / 8.0);
    REQUIRE(prof.half_largest_gap.has_value());
    CHECK(*prof.half_largest_gap == doctest::Approx(std::pow(2.0, -9)));
  }
  SUBCASE("single element profiles as a tent") {
    const std::vector<double> mags{1.0};
    const AchievementProfile prof = achievement_profile(mags, 5);
    CHECK(prof.rows[0].residual == doctest::Approx(0.0));
    CHECK(prof.rows[2].residual == doctest::Approx(0.5));
    CHECK(prof.rows[4].residual == doctest::Approx(0.0));
    CHECK(prof.max_residual == doctest::Approx(0.5));
  }
  SUBCASE("prime corridor prefix stays under its granularity") {
    PoolHandle pool = base_pool(testutil::shared_sieve());
    const EDeltaSeq seq = extract_edelta(pool, 1.0, 3);
    std::vector<double> mags;
    for (std::size_t i = 0; i < 16; ++i) {
      mags.push_back(std::pow(static_cast<double>(seq.element(i)), -1.0));
    }
    const AchievementProfile prof = achievement_profile(mags, 64);
    CHECK(prof.max_residual <= mags.back());
    CHECK(prof.last_magnitude == doctest::Approx(mags.back()));
  }
  SUBCASE("degenerate inputs rejected") {
    CHECK_THROWS_AS(achievement_profile({}, 8), InvalidInputError);
    std::vector<double> too_many(25, 0.5);
    CHECK_THROWS_AS(achievement_profile(too_many, 8), CapacityError);
  }
}

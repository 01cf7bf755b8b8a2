#include <doctest.h>

#include <cmath>
#include <functional>

#include "subsum/constructor.hpp"
#include "subsum/errors.hpp"
#include "subsum/series_eval.hpp"
#include "subsum/verify_oracle.hpp"
#include "test_util.hpp"

using namespace subsum;

namespace {

SolveConfig small_config() {
  SolveConfig cfg;
  cfg.sieve_initial = 1'000'000;
  return cfg;
}

}  // namespace

TEST_CASE("budget plan") {
  SolveConfig cfg;
  cfg.tol = 1e-3;
  SUBCASE("one dimension splits the tolerance in half") {
    const BudgetPlan plan = error_budget(cfg, 1, 0);
    CHECK(plan.axis_budget == doctest::Approx(5e-4));
    CHECK(plan.stage_budgets.empty());
    CHECK(plan.final_budget == doctest::Approx(5e-4));
  }
  SUBCASE("stage shares decay geometrically and never exhaust the axis") {
    cfg.budget_split = 0.5;
    const BudgetPlan plan = error_budget(cfg, 3, 3);
    REQUIRE(plan.stage_budgets.size() == 3);
    CHECK(plan.stage_budgets[0] / plan.stage_budgets[1] == doctest::Approx(2.0));
    CHECK(plan.stage_budgets[1] / plan.stage_budgets[2] == doctest::Approx(2.0));
    double total = plan.final_budget;
    for (double b : plan.stage_budgets) total += b;
    CHECK(total == doctest::Approx(plan.axis_budget));
    CHECK(plan.final_budget > 0.0);
    // All axes together stay within tol.
    CHECK(3 * plan.axis_budget <= cfg.tol);
  }
}

TEST_CASE("inductive step trivial branch passes the pool through") {
  auto sieve = testutil::shared_sieve();
  PoolHandle pool = base_pool(sieve);
  const std::vector<double> alphas{0.5, 1.0};
  OrthantPair pair;
  pair.x = {Interval::zero(), Interval{0.2, 0.21}};
  pair.y = {Interval::zero(), Interval{-0.11, -0.1}};
  pair.zero_mask = {true, false};
  const InductiveStepResult r = inductive_step(0, pair, pool, alphas, 1e-4, small_config());
  CHECK(r.trivial);
  CHECK(r.a.kind() == SetExpr::Kind::kEmpty);
  CHECK(r.b.kind() == SetExpr::Kind::kEmpty);
  CHECK(r.c_pool.provenance() == pool.provenance());
  CHECK(r.z1[1].lo == pair.y[1].lo);
  CHECK(r.z2[1].hi == pair.x[1].hi);
}

TEST_CASE("axis solve zero target returns the empty set") {
  auto sieve = testutil::shared_sieve();
  PoolHandle pool = base_pool(sieve);
  const std::vector<double> alphas{0.5, 1.0};
  const AxisOutcome out = axis_solve(0, 0.0, pool, alphas, small_config(), 1e-4);
  CHECK(out.status == RunStatus::kConverged);
  CHECK(out.w.kind() == SetExpr::Kind::kEmpty);
  for (const Interval& iv : out.psi_w) {
    CHECK(iv.lo == 0.0);
    CHECK(iv.hi == 0.0);
  }
}

TEST_CASE("one-dimensional solve scales through the marker") {
  SolveConfig cfg = small_config();
  cfg.tol = 1e-6;
  cfg.max_index = 10'000'000;
  const std::vector<double> alphas{1.0};
  const std::vector<double> coeffs{1.0};

  SUBCASE("positive targets ride odd products of the marker") {
    const SolveReport rep = solve(alphas, coeffs, std::vector<double>{0.2}, cfg);
    REQUIRE(rep.status == SolveStatus::kCertified);
    CHECK(rep.residuals[0].inside(-1e-6, 1e-6));
    for (std::uint64_t n : rep.indices) {
      CHECK(n % 3 == 0);
      CHECK(n % 2 == 1);
    }
    const VerifyReport vr = verify(rep.indices, alphas, coeffs, std::vector<double>{0.2}, 1e-6);
    CHECK(vr.pass);
  }
  SUBCASE("negative targets ride even products") {
    const SolveReport rep = solve(alphas, coeffs, std::vector<double>{-0.1}, cfg);
    REQUIRE(rep.status == SolveStatus::kCertified);
    for (std::uint64_t n : rep.indices) {
      CHECK(n % 2 == 0);
      CHECK(n % 3 == 0);
    }
    const VerifyReport vr = verify(rep.indices, alphas, coeffs, std::vector<double>{-0.1}, 1e-6);
    CHECK(vr.pass);
  }
  SUBCASE("zero target certifies immediately with nothing selected") {
    const SolveReport rep = solve(alphas, coeffs, std::vector<double>{0.0}, cfg);
    CHECK(rep.status == SolveStatus::kCertified);
    CHECK(rep.indices.empty());
    CHECK(rep.residuals[0].lo == 0.0);
    CHECK(rep.residuals[0].hi == 0.0);
  }
}

TEST_CASE("solve input validation") {
  SolveConfig cfg = small_config();
  const std::vector<double> coeffs{1.0, 1.0};
  const std::vector<double> target{1.0, 1.0};
  CHECK_THROWS_AS(solve(std::vector<double>{0.5, 0.5}, coeffs, target, cfg), InvalidInputError);
  CHECK_THROWS_AS(solve(std::vector<double>{0.5, 1.2}, coeffs, target, cfg), InvalidInputError);
  CHECK_THROWS_AS(solve(std::vector<double>{0.5, 1.0}, std::vector<double>{1.0, 0.0}, target, cfg),
                  InvalidInputError);
  SolveConfig tiny = cfg;
  tiny.max_index = 10;
  CHECK_THROWS_AS(solve(std::vector<double>{0.5, 1.0}, coeffs, target, tiny), InvalidInputError);
}

TEST_CASE("infeasible targets exhaust the budget loudly") {
  SolveConfig cfg = small_config();
  cfg.tol = 1e-6;
  cfg.max_index = 100'000;
  cfg.refinement_rounds = 0;
  const SolveReport rep =
      solve(std::vector<double>{1.0}, std::vector<double>{1.0}, std::vector<double>{3.0}, cfg);
  CHECK(rep.status == SolveStatus::kBudgetExhausted);
  CHECK_FALSE(rep.diagnostic.empty());
}

TEST_CASE("two-dimensional solve certifies and honors the marker discipline") {
  SolveConfig cfg = small_config();
  cfg.tol = 5e-3;
  cfg.max_index = 100'000'000;
  const std::vector<double> alphas{0.6, 0.85};
  const std::vector<double> coeffs{1.0, 1.0};
  const std::vector<double> target{0.0, -0.01};
  const SolveReport rep = solve(alphas, coeffs, target, cfg);
  REQUIRE(rep.status == SolveStatus::kCertified);
  for (std::size_t i = 0; i < 2; ++i) CHECK(rep.residuals[i].inside(-cfg.tol, cfg.tol));

  // Stage discipline on the live axis.
  REQUIRE(rep.axes.size() == 2);
  REQUIRE_FALSE(rep.axes[1].stages.empty());
  for (const StageRecord& st : rep.axes[1].stages) {
    CHECK(st.zero_ok);
    CHECK(st.signs_ok);
  }

  // Markers: the second split part carries 5; the first axis is empty.
  for (std::uint64_t n : rep.indices) {
    CHECK(n % 5 == 0);
    CHECK(n % 3 != 0);
  }

  const VerifyReport vr = verify(rep.indices, alphas, coeffs, target, cfg.tol);
  CHECK(vr.pass);

  // Decomposition enclosures and the assembled sums tell one story.
  for (std::size_t i = 0; i < 2; ++i) {
    const Interval direct = phi_finite(rep.indices, alphas[i]);
    CHECK(direct.lo <= rep.axes[1].psi_w[i].hi + 2e-3);
    CHECK(direct.hi >= rep.axes[1].psi_w[i].lo - 2e-3);
  }

  // Product discipline inside the built expression: right factors carry the
  // axis marker in every element, left factors never do.
  std::function<void(const SetExpr&)> walk = [&](const SetExpr& e) {
    if (e.kind() == SetExpr::Kind::kProduct) {
      for (std::uint64_t n : e.right().enumerate(100'000)) CHECK(n % 5 == 0);
      for (std::uint64_t n : e.left().enumerate(100'000)) CHECK(n % 5 != 0);
      walk(e.left());
      walk(e.right());
    } else if (e.kind() == SetExpr::Kind::kUnion) {
      walk(e.left());
      walk(e.right());
    }
  };
  walk(rep.axes[1].w);

  // Stage records survive serialization.
  const std::string rj = rep.to_json();
  CHECK(rj.find("\"stages\"") != std::string::npos);
  CHECK(rj.find("\"zero_ok\": true") != std::string::npos);
}

TEST_CASE("coefficients rescale the certificate") {
  SolveConfig cfg = small_config();
  cfg.tol = 1e-6;
  cfg.max_index = 10'000'000;
  const std::vector<double> alphas{1.0};
  const std::vector<double> coeffs{-2.0};
  const std::vector<double> target{0.3};  // internal target -0.15 rides even products
  const SolveReport rep = solve(alphas, coeffs, target, cfg);
  REQUIRE(rep.status == SolveStatus::kCertified);
  for (std::uint64_t n : rep.indices) CHECK(n % 2 == 0);
  const VerifyReport vr = verify(rep.indices, alphas, coeffs, target, 1e-6);
  CHECK(vr.pass);
}

TEST_CASE("two-dimensional solve with mixed coefficients") {
  SolveConfig cfg = small_config();
  cfg.tol = 5e-3;
  cfg.max_index = 100'000'000;
  const std::vector<double> alphas{0.6, 0.85};
  const std::vector<double> coeffs{2.0, -1.0};
  const std::vector<double> target{0.0, 0.012};  // internal: (0, -0.012)
  const SolveReport rep = solve(alphas, coeffs, target, cfg);
  REQUIRE(rep.status == SolveStatus::kCertified);
  const VerifyReport vr = verify(rep.indices, alphas, coeffs, target, cfg.tol);
  CHECK(vr.pass);
}

TEST_CASE("identical inputs produce byte-identical reports") {
  SolveConfig cfg = small_config();
  cfg.tol = 1e-6;
  cfg.max_index = 10'000'000;
  const std::vector<double> alphas{1.0};
  const std::vector<double> coeffs{1.0};
  const std::vector<double> target{-0.15};
  const SolveReport a = solve(alphas, coeffs, target, cfg);
  const SolveReport b = solve(alphas, coeffs, target, cfg);
  CHECK(a.to_json() == b.to_json());
  CHECK(a.indices == b.indices);
}

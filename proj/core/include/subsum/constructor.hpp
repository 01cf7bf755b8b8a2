#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "subsum/interval.hpp"
#include "subsum/prime_pool.hpp"
#include "subsum/set_algebra.hpp"
#include "subsum/targeter.hpp"

namespace subsum {

struct SolveConfig {
  double tol = 1e-6;                      // per-coordinate final tolerance
  std::uint64_t max_index = 10'000'000;   // emitted indices stay <= max_index
  double budget_split = 0.5;              // geometric stage-share factor
  int precision = 53;                     // mantissa bits for power evaluation
  int refinement_rounds = 2;
  std::uint64_t sieve_initial = 10'000'000;
  std::uint64_t sieve_cap = 2'000'000'000;
  std::uint64_t witness_bound = 1'000'000;  // product/union checks run to this bound
  std::size_t enum_cap = 5'000'000;
  std::size_t max_terms = 1u << 16;
};

struct BudgetPlan {
  double axis_budget = 0.0;
  std::vector<double> stage_budgets;  // stage i (1-based) at [i-1]
  double final_budget = 0.0;          // headroom reserved for the closing product
};

// Geometric split: each axis gets tol/(d+1); stage i gets
// axis * (1 - r) * r^i, the rest stays for the closing product step.
BudgetPlan error_budget(const SolveConfig& cfg, int dim, int stage_count);

// Paired stage vectors: outside zero_mask both enclosures exclude zero with
// opposite certified signs; masked coordinates stay within their budgets.
struct OrthantPair {
  std::vector<Interval> x, y;
  std::vector<bool> zero_mask;
};

struct StageRecord {
  int stage = 0;    // 1-based step index
  int killed = -1;  // coordinate killed at this step (0-based)
  double zero_allowance = 0.0;
  bool zero_ok = true;
  bool signs_ok = true;
  OrthantPair vectors;  // pair after the step
  std::uint64_t cutoff_a = 0, cutoff_b = 0;
  std::size_t a_size = 0, b_size = 0;
};

struct InductiveStepResult {
  SetExpr a, b;        // finite prime selections (empty on the trivial branch)
  PoolHandle c_pool;   // residual pool for the next step
  std::vector<Interval> z1, z2;
  bool trivial = false;
  RunStatus status = RunStatus::kConverged;
  std::string diagnostic;
  std::uint64_t cutoff_a = 0, cutoff_b = 0;
};

// One cancellation step: kills coordinate l of the pair by selecting prime
// sets A (scaled into x) and B (scaled into y) from disjoint thirds of M,
// leaving the third part as the residual pool. If x^l is already a forced
// zero, A and B are empty and M passes through.
InductiveStepResult inductive_step(int l, const OrthantPair& pair, const PoolHandle& m,
                                   std::span<const double> alphas, double zero_allowance,
                                   const SolveConfig& cfg);

struct AxisOutcome {
  int axis = 0;        // coordinate this axis hits (0-based, ascending-exponent order)
  double target = 0.0;
  SetExpr w;
  std::vector<Interval> psi_w;  // decomposition enclosures, one per exponent
  RunStatus status = RunStatus::kConverged;
  std::vector<StageRecord> stages;
  std::string diagnostic;
};

// Builds a set whose signed sums vanish (within budget) at every exponent
// except alphas[k], where they hit x. Requires strictly increasing alphas in
// (0, 1] and the pool marker discipline.
AxisOutcome axis_solve(int k, double x, const PoolHandle& v, std::span<const double> alphas,
                       const SolveConfig& cfg, double axis_budget, double budget_scale = 1.0);

enum class SolveStatus { kCertified, kBudgetExhausted };

struct ResourceUsage {
  std::uint64_t sieve_limit = 0;
  std::size_t emitted = 0;
  int rounds_used = 0;
};

struct SolveReport {
  SolveStatus status = SolveStatus::kBudgetExhausted;
  std::vector<std::uint64_t> indices;
  std::vector<Interval> residuals;  // input coordinate order: achieved - target
  std::vector<Interval> achieved;   // coeff-scaled sums over the indices
  std::vector<AxisOutcome> axes;    // ascending-exponent order
  std::vector<double> alphas, coeffs, target;  // input echo
  double tol = 0.0;
  std::uint64_t max_index = 0;
  ResourceUsage resources;
  std::string diagnostic;
  std::string to_json() const;
};

// Full solve: rejects duplicate exponents, normalizes by the coefficients,
// sorts exponents ascending, splits the base pool into marker-tagged parts,
// runs one axis per coordinate, then certifies the assembled index list
// against the target; failed budgets refine (halved allowances) up to
// refinement_rounds before reporting budget exhaustion.
SolveReport solve(std::span<const double> alphas, std::span<const double> coeffs,
                  std::span<const double> target, const SolveConfig& cfg);

}  // namespace subsum

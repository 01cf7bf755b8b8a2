#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "subsum/interval.hpp"
#include "subsum/prime_pool.hpp"
#include "subsum/series_eval.hpp"
#include "subsum/set_algebra.hpp"

namespace subsum {

enum class RunStatus { kConverged, kCapacity, kPostconditionFailed };

struct GreedyDecision {
  std::uint64_t n = 0;
  double magnitude = 0.0;
  bool accepted = false;
  Interval residual_after;
};

struct GreedyTrace {
  std::vector<GreedyDecision> decisions;
  // One decision per line: {"n":..., "magnitude":..., "accepted":..., "residual":{...}}
  void write_jsonl(std::ostream& os) const;
};

struct KakeyaResult {
  bool ok = true;
  std::size_t violation_index = 0;  // first violating position when !ok
};

// Each magnitude must be covered by the sum of all later magnitudes plus the
// tail credit; magnitudes are given in descending order.
KakeyaResult kakeya_check(std::span<const double> magnitudes_desc, double tail_upper);

struct GreedyLimits {
  std::uint64_t max_element = 1'000'000'000;  // value cap on considered elements
  std::size_t max_terms = 1u << 16;
};

struct GreedyResult {
  SetExpr selected;                      // finite
  std::vector<std::uint64_t> elements;   // the same list, ascending
  Interval residual;                     // x - selected magnitude sum
  RunStatus status = RunStatus::kConverged;
  bool kakeya_ok = true;
  GreedyTrace trace;
  std::string diagnostic;
};

// Scans elements in increasing order; accepts a term iff the residual stays
// >= -tol; stops once the residual enclosure sits inside [-tol, tol]. The
// residual tracks x minus the magnitude sum of accepted terms (equal to the
// signed sum for odd-only pools). Exhausting the truncation first yields a
// capacity status carrying the achieved residual.
GreedyResult greedy_interval(const EDeltaSeq& seq, double alpha, double x, double tol,
                             const GreedyLimits& limits = {}, const EvalContext& ctx = {});

struct TargetLimits {
  std::uint64_t max_element = 1'000'000'000;
  std::size_t max_terms = 1u << 16;
  std::size_t repair_budget = 256;
  std::uint64_t start_hint = 0;
};

struct TargetResult {
  SetExpr selected;  // finite, depth 1
  std::vector<std::uint64_t> elements;
  Interval value;     // magnitude sum of the selection at the target exponent
  Interval residual;  // value - x
  RunStatus status = RunStatus::kConverged;
  bool kakeya_ok = true;
  std::size_t kakeya_repairs = 0;
  Interval corridor_value;            // magnitude sum of the extracted corridor
  std::vector<std::uint64_t> top_up;  // finite top-up set accumulated past the corridor
  GreedyTrace trace;
  std::string diagnostic;
};

// Hits x > 0 at the given exponent with a finite subset of the pool: extracts
// a ratio-1 growth corridor, tops it up with small pool elements until the
// combined mass covers x, repairs the merged truncation until the coverage
// check passes, then runs the greedy.
TargetResult target_subset(const PoolHandle& pool, double alpha, double x, double tol,
                           const TargetLimits& limits = {}, const EvalContext& ctx = {});

struct SeparatedResult {
  TargetResult base;
  std::uint64_t cutoff = 0;   // pool restricted to elements >= cutoff + 1
  Interval at_lower;          // magnitude sum at exponent a
  Interval at_upper;          // magnitude sum at exponent g
  RunStatus status = RunStatus::kConverged;
  std::string diagnostic;
};

// Selects a set with magnitude sums separated across three exponents
// a < b < g (b <= 1): above z at a, within tol of x at b, below y at g.
// The cutoff ceil(max((z/x)^{1/(b-a)}, (x/y)^{1/(g-b)})) + 1 makes the two
// strict inequalities robust; they are re-certified on the selection.
SeparatedResult separated_target_subset(const PoolHandle& pool, double a, double b, double g,
                                        double x, double z, double y, double tol,
                                        const TargetLimits& limits = {},
                                        const EvalContext& ctx = {});

}  // namespace subsum

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "subsum/interval.hpp"
#include "subsum/set_algebra.hpp"

namespace subsum {

struct EvalContext {
  // Mantissa bits for power evaluation. 53 = hardware doubles with a derived
  // rounding allowance; larger values use directed-rounded extended precision.
  int precision = 53;
  // Truncation caps for generated sequences and direct product expansion.
  std::size_t max_terms = 1u << 20;
  std::size_t enum_cap = 5'000'000;
};

// True when the build carries the extended-precision power path.
bool extended_precision_available();

// Enclosure of n^{-alpha} for n >= 1, alpha in (0, 1].
Interval pow_neg(std::uint64_t n, double alpha, const EvalContext& ctx = {});

// Enclosure of the signed term (-1)^{n+1} n^{-alpha}: positive iff n is odd.
Interval term(std::uint64_t n, double alpha, const EvalContext& ctx = {});

// Signed sum over a sorted finite index list, accumulated in ascending order;
// rounding error is folded into the enclosure width.
Interval phi_finite(std::span<const std::uint64_t> elems, double alpha,
                    const EvalContext& ctx = {});

// Magnitude sum over a sorted finite index list.
Interval magnitude_sum_finite(std::span<const std::uint64_t> elems, double alpha,
                              const EvalContext& ctx = {});

// Geometric bound on the magnitude sum of all terms from position `from_index`
// on (inclusive): element(from_index)^{-alpha} / (1 - (1+eps)^{-alpha}).
struct TailBound {
  std::uint64_t from_element = 0;
  double eps = 0.0;
  double alpha = 0.0;
  double bound = 0.0;  // upward-rounded
};

TailBound tail_bound(const EDeltaSeq& seq, std::size_t from_index, double alpha,
                     const EvalContext& ctx = {});

// Structural enclosure of the signed sum over a symbolic set, refined until
// width <= target_width: finite lists sum directly, generated sequences
// truncate against their geometric tail, witnessed products multiply child
// enclosures, witnessed unions add them. Unwitnessed products fall back to
// bounded direct expansion padded by the subadditive tail.
Interval phi(const SetExpr& e, double alpha, double target_width, const EvalContext& ctx = {});

// Magnitude-sum counterpart of phi (always nonnegative).
Interval phi_abs(const SetExpr& e, double alpha, double target_width, const EvalContext& ctx = {});

// Coordinate-wise phi under a shared truncation schedule.
std::vector<Interval> psi(const SetExpr& e, std::span<const double> alphas,
                          std::span<const double> widths, const EvalContext& ctx = {});

std::vector<Interval> coordwise_mul(std::span<const Interval> u, std::span<const Interval> v);

}  // namespace subsum

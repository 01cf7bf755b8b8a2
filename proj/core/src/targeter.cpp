#include "subsum/targeter.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <ostream>

#include "subsum/errors.hpp"

namespace subsum {

namespace {

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void GreedyTrace::write_jsonl(std::ostream& os) const {
  for (const GreedyDecision& d : decisions) {
    os << "{\"n\":" << d.n << ",\"magnitude\":" << fmt_double(d.magnitude)
       << ",\"accepted\":" << (d.accepted ? "true" : "false") << ",\"residual\":{\"lo\":\""
       << fmt_double(d.residual_after.lo) << "\",\"hi\":\"" << fmt_double(d.residual_after.hi)
       << "\"}}\n";
  }
}

KakeyaResult kakeya_check(std::span<const double> magnitudes_desc, double tail_upper) {
  KakeyaResult res;
  // Suffix sums accumulated from the tail credit upward.
  double suffix = tail_upper;
  std::optional<std::size_t> first_bad;
  for (std::size_t i = magnitudes_desc.size(); i-- > 0;) {
    if (magnitudes_desc[i] > suffix) first_bad = i;
    suffix += magnitudes_desc[i];
  }
  if (first_bad.has_value()) {
    res.ok = false;
    res.violation_index = *first_bad;
  }
  return res;
}

namespace {

// Core selection loop over an increasing element stream.
GreedyResult greedy_core(const std::function<std::optional<std::uint64_t>()>& next, double alpha,
                         double x, double tol, const EvalContext& ctx) {
  GreedyResult res;
  Interval residual = Interval::exact(x);
  for (;;) {
    if (residual.inside(-tol, tol)) {
      res.status = RunStatus::kConverged;
      break;
    }
    const std::optional<std::uint64_t> n = next();
    if (!n.has_value()) {
      res.status = RunStatus::kCapacity;
      res.diagnostic = "element stream exhausted with residual [" + fmt_double(residual.lo) +
                       ", " + fmt_double(residual.hi) + "]";
      break;
    }
    const Interval m = pow_neg(*n, alpha, ctx);
    const Interval cand = residual - m;
    const bool accept = cand.lo >= -tol;
    if (accept) {
      residual = cand;
      res.elements.push_back(*n);
    }
    res.trace.decisions.push_back({*n, m.mid(), accept, residual});
  }
  res.residual = residual;
  res.selected = SetExpr::finite(res.elements);
  return res;
}

}  // namespace

GreedyResult greedy_interval(const EDeltaSeq& seq, double alpha, double x, double tol,
                             const GreedyLimits& limits, const EvalContext& ctx) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw InvalidInputError("greedy requires alpha in (0, 1]");
  if (!(tol > 0.0)) throw InvalidInputError("greedy requires tol > 0");
  if (x < 0.0) throw InvalidInputError("greedy target must be >= 0");
  if (!(seq.delta() <= 1.0)) throw InvalidInputError("greedy requires a ratio bound <= 1");

  // Cheap certain-infeasibility rejection: x beyond everything available.
  {
    const std::size_t probe = std::min<std::size_t>(limits.max_terms, 256);
    Interval avail = Interval::zero();
    std::size_t i = 0;
    bool exhausted = false;
    for (; i < probe; ++i) {
      if (avail.lo >= x) break;  // feasibility established
      const std::uint64_t v = seq.element(i);
      if (v > limits.max_element) {
        exhausted = true;
        break;
      }
      avail = avail + pow_neg(v, alpha, ctx);
    }
    if (i > 0 && !exhausted && avail.lo < x) {
      avail = avail + Interval{0.0, tail_bound(seq, i, alpha, ctx).bound};
    }
    if (x > avail.hi + tol) {
      throw InvalidInputError("greedy target " + fmt_double(x) +
                              " exceeds available mass upper bound " + fmt_double(avail.hi));
    }
  }

  std::size_t i = 0;
  auto next = [&]() -> std::optional<std::uint64_t> {
    if (i >= limits.max_terms) return std::nullopt;
    const std::uint64_t v = seq.element(i);
    if (v > limits.max_element) return std::nullopt;
    ++i;
    return v;
  };
  GreedyResult res = greedy_core(next, alpha, x, tol, ctx);

  // Coverage check over the truncation actually scanned, with the tail credit
  // of the continuation.
  std::vector<double> mags;
  mags.reserve(i);
  for (std::size_t j = 0; j < i; ++j) mags.push_back(pow_neg(seq.element(j), alpha, ctx).mid());
  const double tail = i > 0 ? tail_bound(seq, i, alpha, ctx).bound : 0.0;
  res.kakeya_ok = kakeya_check(mags, tail).ok;
  return res;
}

TargetResult target_subset(const PoolHandle& pool, double alpha, double x, double tol,
                           const TargetLimits& limits, const EvalContext& ctx) {
  if (!(x > 0.0)) throw InvalidInputError("target_subset requires x > 0");
  if (!(alpha > 0.0 && alpha <= 1.0)) {
    throw InvalidInputError("target_subset requires alpha in (0, 1]");
  }
  if (!(tol > 0.0)) throw InvalidInputError("target_subset requires tol > 0");

  TargetResult res;

  // Growth corridor through the pool, and its mass y. Only a sound lower
  // bound matters (it gates the top-up), so a fixed prefix plus the tail
  // credit does; the greedy certifies the final residual on its own.
  const std::uint64_t hint = limits.start_hint != 0 ? limits.start_hint : pool.element(0);
  EDeltaSeq corridor = extract_edelta(pool, 1.0, hint);
  Interval y = Interval::zero();
  constexpr std::size_t kCorridorProbe = 48;
  for (std::size_t i = 0; i < kCorridorProbe; ++i) {
    y = y + pow_neg(corridor.element(i), alpha, ctx);
  }
  y = y + Interval{0.0, tail_bound(corridor, kCorridorProbe, alpha, ctx).bound};
  res.corridor_value = y;

  // Top up with pool elements outside the corridor until the combined mass
  // certifiably covers x, keeping the top-up sum strictly below x. Elements
  // enter only below half the corridor mass so no single step overshoots.
  Interval top_sum = Interval::zero();
  std::vector<std::uint64_t> top_up;
  if (!(y.lo >= x)) {
    const double step_cap = std::max(y.lo / 2.0, 1e-300);
    std::size_t idx = 0;
    bool covered = false;
    for (;;) {
      if ((top_sum + y).lo >= x) {
        covered = true;
        break;
      }
      const std::uint64_t q = pool.element(idx++);
      if (q > limits.max_element) break;
      if (idx > (std::size_t{1} << 22)) break;
      const Interval m = pow_neg(q, alpha, ctx);
      if (m.hi >= step_cap) continue;
      if (corridor.contains(q)) continue;
      const Interval cand = top_sum + m;
      if (cand.hi >= x) continue;  // keep the top-up strictly below x
      top_sum = cand;
      top_up.push_back(q);
    }
    if (!covered) {
      res.status = RunStatus::kCapacity;
      res.top_up = std::move(top_up);
      std::vector<std::uint64_t> partial = res.top_up;
      for (std::size_t j = 0; j < corridor.materialized(); ++j) {
        const std::uint64_t v = corridor.element(j);
        if (v <= limits.max_element) partial.push_back(v);
      }
      std::sort(partial.begin(), partial.end());
      res.elements = std::move(partial);
      res.selected = SetExpr::finite(res.elements);
      res.value = magnitude_sum_finite(res.elements, alpha, ctx);
      res.residual = res.value - Interval::exact(x);
      res.diagnostic = "pool exhausted before covering target: reachable mass about " +
                       fmt_double((top_sum + y).lo) + " of " + fmt_double(x);
      return res;
    }
  }
  res.top_up = top_up;

  // Merge the top-up with the corridor, truncated where corridor magnitudes
  // sink well below tol: the greedy converges before that horizon or reports
  // capacity honestly either way.
  const double depth = std::pow(16.0 / std::max(tol, 1e-15), 1.0 / alpha);
  const std::uint64_t horizon = static_cast<std::uint64_t>(
      std::min(static_cast<double>(limits.max_element), std::max(depth, 1e3)));
  std::vector<std::uint64_t> merged = top_up;
  std::size_t corridor_len = 0;
  for (;; ++corridor_len) {
    const std::uint64_t v = corridor.element(corridor_len);
    if (v > horizon) break;
    merged.push_back(v);
  }
  std::sort(merged.begin(), merged.end());
  merged.erase(std::unique(merged.begin(), merged.end()), merged.end());
  const double tail = tail_bound(corridor, corridor_len, alpha, ctx).bound;

  // Coverage check with repair: a violating element is backed by too little
  // later mass, so pull in the smallest free pool elements after it.
  auto magnitudes_of = [&](const std::vector<std::uint64_t>& v) {
    std::vector<double> mags;
    mags.reserve(v.size());
    for (std::uint64_t n : v) mags.push_back(pow_neg(n, alpha, ctx).mid());
    return mags;
  };
  KakeyaResult kk = kakeya_check(magnitudes_of(merged), tail);
  while (!kk.ok && res.kakeya_repairs < limits.repair_budget) {
    const std::size_t j = kk.violation_index;
    const std::uint64_t lo = merged[j];
    const std::uint64_t hi = j + 1 < merged.size() ? merged[j + 1] : limits.max_element;
    std::uint64_t q = pool.next_after(lo);
    while (q < hi && std::binary_search(merged.begin(), merged.end(), q)) {
      q = pool.next_after(q);
    }
    if (q >= hi || q > limits.max_element) break;  // no free element in the gap
    merged.insert(std::upper_bound(merged.begin(), merged.end(), q), q);
    ++res.kakeya_repairs;
    kk = kakeya_check(magnitudes_of(merged), tail);
  }
  res.kakeya_ok = kk.ok;

  std::size_t i = 0;
  auto next = [&]() -> std::optional<std::uint64_t> {
    if (i >= merged.size()) return std::nullopt;
    return merged[i++];
  };
  GreedyResult g = greedy_core(next, alpha, x, tol, ctx);
  res.selected = g.selected;
  res.elements = g.elements;
  res.trace = std::move(g.trace);
  res.status = g.status;
  res.diagnostic = g.diagnostic;
  res.value = magnitude_sum_finite(res.elements, alpha, ctx);
  res.residual = res.value - Interval::exact(x);
  return res;
}

SeparatedResult separated_target_subset(const PoolHandle& pool, double a, double b, double g,
                                        double x, double z, double y, double tol,
                                        const TargetLimits& limits, const EvalContext& ctx) {
  if (!(x > 0.0 && y > 0.0 && z > 0.0)) {
    throw InvalidInputError("separated_target_subset requires x, y, z > 0");
  }
  if (!(0.0 < a && a < b && b < g && b <= 1.0)) {
    throw InvalidInputError("separated_target_subset requires 0 < a < b < g with b <= 1");
  }
  SeparatedResult res;

  const double k_lower = std::pow(z / x, 1.0 / (b - a));
  const double k_upper = std::pow(x / y, 1.0 / (g - b));
  const double k_real = std::max(k_lower, k_upper);
  if (!(k_real < 1e15)) {
    throw CapacityError("separation cutoff " + fmt_double(k_real) + " beyond any reachable pool");
  }
  res.cutoff = static_cast<std::uint64_t>(std::ceil(k_real)) + 1;

  res.base = target_subset(pool.restrict_above(res.cutoff), b, x, tol, limits, ctx);
  if (res.base.status != RunStatus::kConverged) {
    res.status = res.base.status;
    res.diagnostic = res.base.diagnostic;
    return res;
  }

  // Strict separation, certified on the selection itself; one retry at higher
  // precision before conceding.
  for (int attempt = 0; attempt < 2; ++attempt) {
    EvalContext cert = ctx;
    if (attempt == 1) {
#ifdef SUBSUM_HAVE_MPFR
      cert.precision = 113;
#else
      break;
#endif
    }
    res.at_lower = magnitude_sum_finite(res.base.elements, a, cert);
    res.at_upper = magnitude_sum_finite(res.base.elements, g, cert);
    if (res.at_lower.lo > z && res.at_upper.hi < y) {
      res.status = RunStatus::kConverged;
      return res;
    }
  }
  res.status = RunStatus::kPostconditionFailed;
  res.diagnostic = "strict separation not certified: lower " + fmt_double(res.at_lower.lo) +
                   " vs z " + fmt_double(z) + ", upper " + fmt_double(res.at_upper.hi) +
                   " vs y " + fmt_double(y);
  return res;
}

}  // namespace subsum

#include "subsum/series_eval.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "subsum/errors.hpp"

#ifdef SUBSUM_HAVE_MPFR
#include <mpfr.h>
#endif

namespace subsum {

namespace {

constexpr double kEps = 2.220446049250313e-16;  // 2^-52

#ifdef SUBSUM_HAVE_MPFR
Interval pow_neg_mpfr(double base, double alpha, int precision) {
  mpfr_t x, e, r;
  mpfr_init2(x, precision);
  mpfr_init2(e, precision);
  mpfr_init2(r, precision);
  mpfr_set_d(x, base, MPFR_RNDN);   // exact: base is a double
  mpfr_set_d(e, -alpha, MPFR_RNDN); // exact
  mpfr_pow(r, x, e, MPFR_RNDD);
  const double lo = mpfr_get_d(r, MPFR_RNDD);
  mpfr_pow(r, x, e, MPFR_RNDU);
  const double hi = mpfr_get_d(r, MPFR_RNDU);
  mpfr_clear(x);
  mpfr_clear(e);
  mpfr_clear(r);
  return {lo, hi};
}
#endif

// base^{-alpha} for a real base >= 1.
Interval pow_neg_real(double base, double alpha, const EvalContext& ctx) {
  if (base == 1.0 || alpha == 0.0) return Interval::exact(1.0);
  if (ctx.precision > 53) {
#ifdef SUBSUM_HAVE_MPFR
    return pow_neg_mpfr(base, alpha, ctx.precision);
#else
    throw InvalidInputError("precision > 53 requires MPFR support in this build");
#endif
  }
  if (alpha == 1.0) {
    const double t = 1.0 / base;
    return {detail::down(t), detail::up(t)};
  }
  // pow evaluates exp(-alpha*log(base)); a first-order bound on faithful
  // exp/log rounding gives relative error <= (|alpha*log(base)| + 3) eps.
  const double t = std::pow(base, -alpha);
  const double rel = (std::fabs(alpha * std::log(base)) + 3.0) * kEps;
  const double r = t * rel;
  return {detail::down(t - r), detail::up(t + r)};
}

}  // namespace

bool extended_precision_available() {
#ifdef SUBSUM_HAVE_MPFR
  return true;
#else
  return false;
#endif
}

Interval pow_neg(std::uint64_t n, double alpha, const EvalContext& ctx) {
  if (n == 0) throw InvalidInputError("pow_neg requires n >= 1");
  return pow_neg_real(static_cast<double>(n), alpha, ctx);
}

Interval term(std::uint64_t n, double alpha, const EvalContext& ctx) {
  const Interval m = pow_neg(n, alpha, ctx);
  return n % 2 == 1 ? m : -m;
}

Interval phi_finite(std::span<const std::uint64_t> elems, double alpha, const EvalContext& ctx) {
  Interval sum = Interval::zero();
  for (std::uint64_t n : elems) sum = sum + term(n, alpha, ctx);
  return sum;
}

Interval magnitude_sum_finite(std::span<const std::uint64_t> elems, double alpha,
                              const EvalContext& ctx) {
  Interval sum = Interval::zero();
  for (std::uint64_t n : elems) sum = sum + pow_neg(n, alpha, ctx);
  return sum;
}

TailBound tail_bound(const EDeltaSeq& seq, std::size_t from_index, double alpha,
                     const EvalContext& ctx) {
  TailBound tb;
  tb.from_element = seq.element(from_index);
  tb.eps = seq.eps();
  tb.alpha = alpha;
  if (!(tb.eps > 0.0)) throw InvalidInputError("tail_bound requires a positive growth ratio");
  if (!(alpha > 0.0)) throw InvalidInputError("tail_bound requires alpha > 0");
  const Interval head = pow_neg(tb.from_element, alpha, ctx);
  const Interval ratio = pow_neg_real(1.0 + tb.eps, alpha, ctx);  // (1+eps)^{-alpha} < 1
  const double denom_lo = detail::down(1.0 - ratio.hi);
  if (!(denom_lo > 0.0)) {
    throw CapacityError("tail_bound denominator underflow (eps or alpha too small)");
  }
  tb.bound = detail::up(head.hi / denom_lo);
  return tb;
}

namespace {

// Per-evaluation truncation schedule, shared across coordinates so every
// exponent sees the same prefix of each generated sequence.
struct Schedule {
  std::map<const void*, std::size_t> depth;
};

Interval tail_interval(const EDeltaSeq& seq, double bound) {
  switch (seq.parity()) {
    case Parity::kOdd:
      return {0.0, bound};
    case Parity::kEven:
      return {-bound, 0.0};
    case Parity::kMixed:
      return {-bound, bound};
  }
  return {-bound, bound};
}

Interval phi_impl(const SetExpr& e, double alpha, double width, const EvalContext& ctx,
                  Schedule* sched, bool magnitudes);

Interval eval_generated(const SetExpr& e, double alpha, double width, const EvalContext& ctx,
                        Schedule* sched, bool magnitudes) {
  const EDeltaSeq& seq = e.generated_seq();
  const void* key = seq.id();
  // Truncate where the geometric tail meets half the width goal; escalating
  // by value avoids the exponential overshoot an index ladder would take on
  // a geometric sequence.
  const double denom = 1.0 - std::pow(1.0 + seq.eps(), -alpha);
  double value_goal =
      denom > 0.0 ? std::pow(2.0 / (width * denom), 1.0 / alpha) : HUGE_VAL;
  value_goal = std::max(value_goal, static_cast<double>(seq.element(0)) * 2.0);
  if (sched != nullptr) {
    const auto it = sched->depth.find(key);
    if (it != sched->depth.end() && it->second > 0) {
      const std::size_t min_k = std::min(it->second, ctx.max_terms);
      value_goal = std::max(value_goal, static_cast<double>(seq.element(min_k - 1)));
    }
  }

  Interval best{-HUGE_VAL, HUGE_VAL};
  Interval prefix = Interval::zero();
  std::size_t done = 0;
  for (int round = 0; round < 8; ++round) {
    try {
      while (done < ctx.max_terms &&
             static_cast<double>(seq.element(done)) <= value_goal) {
        const std::uint64_t n = seq.element(done);
        prefix = prefix + (magnitudes ? pow_neg(n, alpha, ctx) : term(n, alpha, ctx));
        ++done;
      }
    } catch (const CapacityError&) {
      // Sieve or materialization cap: report what was achieved.
      if (done == 0) throw;
      const TailBound tb = tail_bound(seq, done, alpha, ctx);
      const Interval tail = magnitudes ? Interval{0.0, tb.bound} : tail_interval(seq, tb.bound);
      best = intersect(best, prefix + tail);
      throw CapacityError("phi width goal " + std::to_string(width) +
                          " unreachable before the materialization cap; achieved width " +
                          std::to_string(best.width()));
    }
    const TailBound tb = tail_bound(seq, done, alpha, ctx);
    const Interval tail = magnitudes ? Interval{0.0, tb.bound} : tail_interval(seq, tb.bound);
    best = intersect(best, prefix + tail);
    if (best.width() <= width) {
      if (sched != nullptr) {
        auto& d = sched->depth[key];
        d = std::max(d, done);
      }
      return best;
    }
    if (done >= ctx.max_terms) break;
    value_goal *= 4.0;
  }
  throw CapacityError("phi width goal " + std::to_string(width) +
                      " unreachable at truncation cap; achieved width " +
                      std::to_string(best.width()));
}

Interval eval_product_direct(const SetExpr& e, double alpha, double width, const EvalContext& ctx,
                             Schedule* sched, bool magnitudes) {
  // Bounded expansion of distinct products, padded by the subadditive bound
  // on everything past the expansion bound.
  const Interval labs = phi_impl(e.left(), alpha, width / 8.0, ctx, sched, true);
  const Interval rabs = phi_impl(e.right(), alpha, width / 8.0, ctx, sched, true);
  std::uint64_t bound = 1u << 14;
  Interval best{-HUGE_VAL, HUGE_VAL};
  for (;;) {
    EnumLimits lim{ctx.enum_cap};
    std::vector<std::uint64_t> ls = e.left().enumerate(bound, lim);
    Interval pair_sum = Interval::zero();  // over pairs with product <= bound, with multiplicity
    std::vector<std::uint64_t> distinct;
    if (!ls.empty()) {
      std::vector<std::uint64_t> rs = e.right().enumerate(bound / ls.front(), lim);
      for (std::uint64_t a : ls) {
        const Interval am = pow_neg(a, alpha, ctx);
        for (std::uint64_t b : rs) {
          if (a > bound / b) break;
          pair_sum = pair_sum + am * pow_neg(b, alpha, ctx);
          distinct.push_back(a * b);
        }
      }
      std::sort(distinct.begin(), distinct.end());
      distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    }
    const double pad_up = std::max(0.0, detail::up((labs * rabs).hi - pair_sum.lo));
    const Interval finite_part = magnitudes
                                     ? magnitude_sum_finite(distinct, alpha, ctx)
                                     : phi_finite(distinct, alpha, ctx);
    const Interval enc = magnitudes
                             ? Interval{finite_part.lo, detail::up(finite_part.hi + pad_up)}
                             : pad(finite_part, pad_up);
    best = intersect(best, enc);
    if (best.width() <= width) return best;
    if (bound >= (std::uint64_t{1} << 40)) {
      throw CapacityError("direct product expansion cannot reach width " + std::to_string(width) +
                          "; achieved " + std::to_string(best.width()));
    }
    bound *= 4;
  }
}

Interval phi_impl(const SetExpr& e, double alpha, double width, const EvalContext& ctx,
                  Schedule* sched, bool magnitudes) {
  switch (e.kind()) {
    case SetExpr::Kind::kEmpty:
      return Interval::zero();
    case SetExpr::Kind::kFinite:
      return magnitudes ? magnitude_sum_finite(e.finite_elems(), alpha, ctx)
                        : phi_finite(e.finite_elems(), alpha, ctx);
    case SetExpr::Kind::kGenerated:
      return eval_generated(e, alpha, width, ctx, sched, magnitudes);
    case SetExpr::Kind::kProduct: {
      const auto& w = e.product_witness();
      const bool decomposable =
          w.has_value() && w->injective && (magnitudes || w->sign_compatible);
      if (!decomposable) return eval_product_direct(e, alpha, width, ctx, sched, magnitudes);
      // Split the width goal by the magnitude of the other factor.
      const Interval cl = phi_impl(e.left(), alpha, 0.25, ctx, sched, magnitudes);
      const Interval cr = phi_impl(e.right(), alpha, 0.25, ctx, sched, magnitudes);
      double wl = width / (4.0 * (cr.mag() + 1.0));
      double wr = width / (4.0 * (cl.mag() + 1.0));
      Interval l = cl, r = cr;
      Interval enc = l * r;
      for (int round = 0; round < 24 && enc.width() > width; ++round) {
        l = intersect(l, phi_impl(e.left(), alpha, wl, ctx, sched, magnitudes));
        r = intersect(r, phi_impl(e.right(), alpha, wr, ctx, sched, magnitudes));
        enc = l * r;
        wl *= 0.25;
        wr *= 0.25;
      }
      if (enc.width() > width) {
        throw CapacityError("product width goal " + std::to_string(width) +
                            " unreachable; achieved width " + std::to_string(enc.width()));
      }
      return enc;
    }
    case SetExpr::Kind::kUnion: {
      const auto& w = e.union_witness();
      if (w.has_value() && w->disjoint) {
        const Interval l = phi_impl(e.left(), alpha, width / 2.0, ctx, sched, magnitudes);
        const Interval r = phi_impl(e.right(), alpha, width / 2.0, ctx, sched, magnitudes);
        return l + r;
      }
      // Unwitnessed union: enclose between "fully overlapping" and "disjoint".
      const Interval l = phi_impl(e.left(), alpha, width / 2.0, ctx, sched, magnitudes);
      const Interval r = phi_impl(e.right(), alpha, width / 2.0, ctx, sched, magnitudes);
      if (magnitudes) return {std::max(l.lo, r.lo), detail::up(l.hi + r.hi)};
      const Interval sum = l + r;
      const double overlap = std::min(phi_impl(e.left(), alpha, width, ctx, sched, true).hi,
                                      phi_impl(e.right(), alpha, width, ctx, sched, true).hi);
      return pad(sum, overlap);
    }
  }
  return Interval::zero();
}

}  // namespace

Interval phi(const SetExpr& e, double alpha, double target_width, const EvalContext& ctx) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw InvalidInputError("phi requires alpha in (0, 1]");
  if (!(target_width > 0.0)) throw InvalidInputError("phi requires a positive width goal");
  Schedule sched;
  return phi_impl(e, alpha, target_width, ctx, &sched, false);
}

Interval phi_abs(const SetExpr& e, double alpha, double target_width, const EvalContext& ctx) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw InvalidInputError("phi_abs requires alpha in (0, 1]");
  if (!(target_width > 0.0)) throw InvalidInputError("phi_abs requires a positive width goal");
  Schedule sched;
  return phi_impl(e, alpha, target_width, ctx, &sched, true);
}

std::vector<Interval> psi(const SetExpr& e, std::span<const double> alphas,
                          std::span<const double> widths, const EvalContext& ctx) {
  if (alphas.size() != widths.size()) {
    throw InvalidInputError("psi requires one width goal per exponent");
  }
  Schedule sched;
  std::vector<Interval> out(alphas.size());
  // Two passes under one schedule: the first pass grows the shared truncation
  // depths, the second re-evaluates every coordinate at the final depths.
  for (std::size_t pass = 0; pass < 2; ++pass) {
    for (std::size_t i = 0; i < alphas.size(); ++i) {
      out[i] = phi_impl(e, alphas[i], widths[i], ctx, &sched, false);
    }
  }
  return out;
}

std::vector<Interval> coordwise_mul(std::span<const Interval> u, std::span<const Interval> v) {
  if (u.size() != v.size()) throw InvalidInputError("coordwise_mul requires equal lengths");
  std::vector<Interval> out(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) out[i] = u[i] * v[i];
  return out;
}

}  // namespace subsum

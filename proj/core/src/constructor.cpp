#include "subsum/constructor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <nlohmann/json.hpp>

#include "subsum/errors.hpp"
#include "subsum/series_eval.hpp"

namespace subsum {

using ordered_json = nlohmann::ordered_json;

namespace {

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

ordered_json interval_json(const Interval& iv) {
  return {{"lo", fmt_double(iv.lo)}, {"hi", fmt_double(iv.hi)}};
}

EvalContext eval_context(const SolveConfig& cfg) {
  EvalContext ctx;
  ctx.precision = cfg.precision;
  ctx.max_terms = cfg.max_terms;
  ctx.enum_cap = cfg.enum_cap;
  return ctx;
}

TargetLimits target_limits(const SolveConfig& cfg) {
  TargetLimits lim;
  lim.max_element = cfg.max_index;
  lim.max_terms = cfg.max_terms;
  return lim;
}

// Signed sums of a finite selection at every exponent.
std::vector<Interval> psi_finite(std::span<const std::uint64_t> elems,
                                 std::span<const double> alphas, const EvalContext& ctx) {
  std::vector<Interval> out(alphas.size());
  for (std::size_t i = 0; i < alphas.size(); ++i) out[i] = phi_finite(elems, alphas[i], ctx);
  return out;
}

}  // namespace

BudgetPlan error_budget(const SolveConfig& cfg, int dim, int stage_count) {
  if (dim < 1) throw InvalidInputError("error_budget requires dim >= 1");
  const double r = cfg.budget_split;
  if (!(r > 0.0 && r < 1.0)) throw InvalidInputError("budget_split must lie in (0, 1)");
  BudgetPlan plan;
  plan.axis_budget = cfg.tol / static_cast<double>(dim + 1);
  double used = 0.0;
  double share = 1.0;
  for (int i = 1; i <= stage_count; ++i) {
    share *= r;
    const double b = plan.axis_budget * (1.0 - r) * share;
    plan.stage_budgets.push_back(b);
    used += b;
  }
  plan.final_budget = plan.axis_budget - used;
  return plan;
}

namespace {

BudgetPlan scaled_budget(double axis_budget, double split, int stage_count) {
  BudgetPlan plan;
  plan.axis_budget = axis_budget;
  double used = 0.0;
  double share = 1.0;
  for (int i = 1; i <= stage_count; ++i) {
    share *= split;
    const double b = axis_budget * (1.0 - split) * share;
    plan.stage_budgets.push_back(b);
    used += b;
  }
  plan.final_budget = axis_budget - used;
  return plan;
}

struct RatioBounds {
  double over = 1.0;   // upper bound on max |num| / min |den| (empty range -> 1)
  double under = 1.0;  // lower bound on min |num| / max |den| (empty range -> 1)
};

double live_max_mag(const OrthantPair& pair, const std::vector<Interval>& v, int lo, int hi,
                    bool* any) {
  double m = 0.0;
  for (int i = lo; i < hi; ++i) {
    if (pair.zero_mask[i]) continue;
    *any = true;
    m = std::max(m, v[i].mag());
  }
  return m;
}

double live_min_mig(const OrthantPair& pair, const std::vector<Interval>& v, int lo, int hi) {
  double m = HUGE_VAL;
  for (int i = lo; i < hi; ++i) {
    if (pair.zero_mask[i]) continue;
    m = std::min(m, v[i].mig());
  }
  return m;
}

}  // namespace

InductiveStepResult inductive_step(int l, const OrthantPair& pair, const PoolHandle& m,
                                   std::span<const double> alphas, double zero_allowance,
                                   const SolveConfig& cfg) {
  const int d = static_cast<int>(alphas.size());
  if (l < 0 || l >= d) throw InvalidInputError("inductive_step coordinate out of range");
  const EvalContext ctx = eval_context(cfg);

  InductiveStepResult res{SetExpr::empty(), SetExpr::empty(), m, {}, {}, false,
                          RunStatus::kConverged, {}, 0, 0};

  if (pair.zero_mask[l]) {
    // Forced-zero coordinate: nothing to cancel, the pool passes through and
    // the vectors swap roles.
    res.trivial = true;
    res.z1 = pair.y;
    res.z2 = pair.x;
    return res;
  }

  const Interval xl = pair.x[l];
  const Interval yl = pair.y[l];
  if (!xl.excludes_zero() || !yl.excludes_zero()) {
    res.status = RunStatus::kPostconditionFailed;
    res.diagnostic = "coordinate " + std::to_string(l) + " lost its certified sign";
    return res;
  }

  std::vector<PoolHandle> thirds = m.split(3);

  // Separation thresholds from the live coordinates on each side of l.
  bool any_below = false, any_above = false;
  const double below_y = live_max_mag(pair, pair.y, 0, l, &any_below);
  const double below_x_min = live_min_mig(pair, pair.x, 0, l);
  const double above_y_min = live_min_mig(pair, pair.y, l + 1, d);
  const double above_x = live_max_mag(pair, pair.x, l + 1, d, &any_above);

  const double exp_lower = l == 0 ? alphas[0] / 2.0 : alphas[l - 1];
  const double exp_mid = alphas[l];
  const double exp_upper = l == d - 1 ? 2.0 : alphas[l + 1];

  const double target_a = -yl.mid() / xl.mid();
  const double z_a = (l == 0 || !any_below) ? 1.0 : below_y / below_x_min;
  const double y_a = (l == d - 1 || !any_above) ? 1.0 : above_y_min / above_x;
  const double tol_a = zero_allowance / (2.0 * std::max(xl.mag(), 1e-12));

  const double target_b = -xl.mid() / yl.mid();
  bool dummy = false;
  const double z_b = (l == 0 || !any_below) ? 1.0
                                            : live_max_mag(pair, pair.x, 0, l, &dummy) /
                                                  live_min_mig(pair, pair.y, 0, l);
  const double y_b = (l == d - 1 || !any_above)
                         ? 1.0
                         : live_min_mig(pair, pair.x, l + 1, d) /
                               live_max_mag(pair, pair.y, l + 1, d, &dummy);
  const double tol_b = zero_allowance / (2.0 * std::max(yl.mag(), 1e-12));

  const TargetLimits lim = target_limits(cfg);
  SeparatedResult run_a =
      separated_target_subset(thirds[0], exp_lower, exp_mid, exp_upper, target_a, z_a, y_a,
                              tol_a, lim, ctx);
  if (run_a.status != RunStatus::kConverged) {
    res.status = run_a.status;
    res.diagnostic = "A-selection at exponent " + fmt_double(exp_mid) + " for target " +
                     fmt_double(target_a) + ": " +
                     (run_a.diagnostic.empty() ? run_a.base.diagnostic : run_a.diagnostic);
    return res;
  }
  SeparatedResult run_b =
      separated_target_subset(thirds[1], exp_lower, exp_mid, exp_upper, target_b, z_b, y_b,
                              tol_b, lim, ctx);
  if (run_b.status != RunStatus::kConverged) {
    res.status = run_b.status;
    res.diagnostic = "B-selection at exponent " + fmt_double(exp_mid) + " for target " +
                     fmt_double(target_b) + ": " +
                     (run_b.diagnostic.empty() ? run_b.base.diagnostic : run_b.diagnostic);
    return res;
  }

  res.a = run_a.base.selected;
  res.b = run_b.base.selected;
  res.c_pool = thirds[2];
  res.cutoff_a = run_a.cutoff;
  res.cutoff_b = run_b.cutoff;

  const std::vector<Interval> psi_a = psi_finite(run_a.base.elements, alphas, ctx);
  const std::vector<Interval> psi_b = psi_finite(run_b.base.elements, alphas, ctx);
  res.z1.resize(d);
  res.z2.resize(d);
  for (int i = 0; i < d; ++i) {
    res.z1[i] = psi_a[i] * pair.x[i] + pair.y[i];
    res.z2[i] = psi_b[i] * pair.y[i] + pair.x[i];
  }

  // Certify the step: the killed coordinate within its allowance, every other
  // live coordinate with opposite certified signs.
  if (res.z1[l].mag() > zero_allowance || res.z2[l].mag() > zero_allowance) {
    res.status = RunStatus::kPostconditionFailed;
    res.diagnostic = "killed coordinate " + std::to_string(l) + " exceeds allowance " +
                     fmt_double(zero_allowance) + ": |z1|=" + fmt_double(res.z1[l].mag()) +
                     " |z2|=" + fmt_double(res.z2[l].mag());
    return res;
  }
  for (int i = 0; i < d; ++i) {
    if (i == l || pair.zero_mask[i]) continue;
    const int s1 = res.z1[i].certified_sign();
    const int s2 = res.z2[i].certified_sign();
    if (s1 == 0 || s2 == 0 || s1 == s2) {
      res.status = RunStatus::kPostconditionFailed;
      res.diagnostic = "sign certification failed at coordinate " + std::to_string(i);
      return res;
    }
  }
  return res;
}

AxisOutcome axis_solve(int k, double x, const PoolHandle& v, std::span<const double> alphas,
                       const SolveConfig& cfg, double axis_budget, double budget_scale) {
  const int d = static_cast<int>(alphas.size());
  if (k < 0 || k >= d) throw InvalidInputError("axis index out of range");
  for (int i = 0; i + 1 < d; ++i) {
    if (!(alphas[i] < alphas[i + 1])) {
      throw InvalidInputError("axis_solve requires strictly increasing exponents");
    }
  }
  const EvalContext ctx = eval_context(cfg);

  AxisOutcome out;
  out.axis = k;
  out.target = x;

  if (x == 0.0) {
    out.w = SetExpr::empty();
    out.psi_w.assign(d, Interval::zero());
    return out;
  }

  const std::uint64_t p = v.marker();

  if (d == 1) {
    // One exponent: scale through the marker so the result stays divisible
    // by p; negative targets run through even products 2p*m.
    const double alpha = alphas[0];
    const std::uint64_t factor = x > 0.0 ? p : 2 * p;
    const Interval factor_mag = pow_neg(factor, alpha, ctx);  // factor^{-alpha}
    const double scaled = std::fabs(x) / factor_mag.mid();
    const double tol_axis = axis_budget * budget_scale / factor_mag.hi / 2.0;
    TargetResult run =
        target_subset(v.remove({p}), alpha, scaled, tol_axis, target_limits(cfg), ctx);
    if (run.status != RunStatus::kConverged) {
      out.status = run.status;
      out.diagnostic = "scaled target " + fmt_double(scaled) + " at exponent " +
                       fmt_double(alpha) + ": " + run.diagnostic;
      return out;
    }
    out.w = checked_product(SetExpr::finite({factor}), run.selected,
                            cfg.witness_bound, EnumLimits{cfg.enum_cap});
    out.psi_w = {term(factor, alpha, ctx) * run.value};
    return out;
  }

  // Seed pair: the marker against its even double.
  OrthantPair pair;
  pair.x = psi_finite(std::vector<std::uint64_t>{p}, alphas, ctx);
  pair.y = psi_finite(std::vector<std::uint64_t>{2 * p}, alphas, ctx);
  pair.zero_mask.assign(d, false);
  SetExpr w_plus = SetExpr::finite({p});
  SetExpr w_minus = SetExpr::finite({2 * p});
  PoolHandle m = v.remove({p});

  const BudgetPlan plan = scaled_budget(axis_budget * budget_scale, cfg.budget_split, d - 1);

  int step = 0;
  for (int l = 0; l < d; ++l) {
    if (l == k) continue;
    const double allowance = plan.stage_budgets[step];
    InductiveStepResult isr = inductive_step(l, pair, m, alphas, allowance, cfg);
    if (isr.status != RunStatus::kConverged) {
      out.status = isr.status;
      out.diagnostic = "stage " + std::to_string(step + 1) + ": " + isr.diagnostic;
      return out;
    }
    SetExpr next_plus, next_minus;
    if (isr.trivial) {
      next_plus = w_minus;
      next_minus = w_plus;
    } else {
      const EnumLimits lim{cfg.enum_cap};
      next_plus = checked_union(checked_product(isr.a, w_plus, cfg.witness_bound, lim), w_minus,
                                cfg.witness_bound, lim);
      next_minus = checked_union(checked_product(isr.b, w_minus, cfg.witness_bound, lim), w_plus,
                                 cfg.witness_bound, lim);
    }
    pair.x = isr.z1;
    pair.y = isr.z2;
    pair.zero_mask[l] = true;
    w_plus = next_plus;
    w_minus = next_minus;
    m = isr.c_pool;

    StageRecord rec;
    rec.stage = step + 1;
    rec.killed = l;
    rec.zero_allowance = allowance;
    rec.zero_ok = pair.x[l].mag() <= allowance && pair.y[l].mag() <= allowance;
    rec.signs_ok = true;
    for (int i = 0; i < d; ++i) {
      if (pair.zero_mask[i]) continue;
      const int s1 = pair.x[i].certified_sign();
      const int s2 = pair.y[i].certified_sign();
      rec.signs_ok = rec.signs_ok && s1 != 0 && s2 != 0 && s1 != s2;
    }
    rec.vectors = pair;
    rec.cutoff_a = isr.cutoff_a;
    rec.cutoff_b = isr.cutoff_b;
    rec.a_size = isr.a.kind() == SetExpr::Kind::kFinite ? isr.a.finite_elems().size() : 0;
    rec.b_size = isr.b.kind() == SetExpr::Kind::kFinite ? isr.b.finite_elems().size() : 0;
    out.stages.push_back(std::move(rec));
    ++step;
  }

  // Closing step: match the sign of the target, then scale the chosen branch
  // onto it through one more selection at the k-th exponent.
  const int want = x > 0.0 ? 1 : -1;
  const bool use_plus = pair.x[k].certified_sign() == want;
  const Interval anchor = use_plus ? pair.x[k] : pair.y[k];
  if (anchor.certified_sign() != want) {
    out.status = RunStatus::kPostconditionFailed;
    out.diagnostic = "neither branch carries the target sign on coordinate " + std::to_string(k);
    return out;
  }
  const SetExpr& w_main = use_plus ? w_plus : w_minus;
  const std::vector<Interval>& vec_main = use_plus ? pair.x : pair.y;

  const double k_target = x / anchor.mid();
  const double tol_k = plan.final_budget / (2.0 * anchor.mag());
  TargetResult run_k = target_subset(m, alphas[k], k_target, tol_k, target_limits(cfg), ctx);
  if (run_k.status != RunStatus::kConverged) {
    out.status = run_k.status;
    out.diagnostic = "closing selection for " + fmt_double(k_target) + " at exponent " +
                     fmt_double(alphas[k]) + ": " + run_k.diagnostic;
    return out;
  }

  out.w = checked_product(run_k.selected, w_main, cfg.witness_bound, EnumLimits{cfg.enum_cap});
  const std::vector<Interval> psi_k = psi_finite(run_k.elements, alphas, ctx);
  out.psi_w.resize(d);
  for (int i = 0; i < d; ++i) out.psi_w[i] = psi_k[i] * vec_main[i];
  return out;
}

SolveReport solve(std::span<const double> alphas, std::span<const double> coeffs,
                  std::span<const double> target, const SolveConfig& cfg) {
  const std::size_t d = alphas.size();
  if (d == 0) throw InvalidInputError("solve requires at least one coordinate");
  if (coeffs.size() != d || target.size() != d) {
    throw InvalidInputError("solve requires matching alphas/coeffs/target lengths");
  }
  for (double a : alphas) {
    if (!(a > 0.0 && a <= 1.0)) throw InvalidInputError("exponents must lie in (0, 1]");
  }
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = i + 1; j < d; ++j) {
      if (alphas[i] == alphas[j]) {
        throw InvalidInputError("exponents must be pairwise distinct");
      }
    }
  }
  for (double c : coeffs) {
    if (c == 0.0 || !std::isfinite(c)) throw InvalidInputError("coefficients must be nonzero");
  }
  if (cfg.max_index < 1000) throw InvalidInputError("max_index must be at least 1000");
  if (!(cfg.tol > 0.0)) throw InvalidInputError("tol must be positive");

  SolveReport rep;
  rep.alphas.assign(alphas.begin(), alphas.end());
  rep.coeffs.assign(coeffs.begin(), coeffs.end());
  rep.target.assign(target.begin(), target.end());
  rep.tol = cfg.tol;
  rep.max_index = cfg.max_index;

  // Normalize: divide by the coefficients, order by ascending exponent.
  std::vector<std::size_t> order(d);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return alphas[a] < alphas[b]; });
  std::vector<double> sorted_alphas(d), normalized(d), axis_budgets(d);
  for (std::size_t j = 0; j < d; ++j) {
    const std::size_t i = order[j];
    sorted_alphas[j] = alphas[i];
    normalized[j] = target[i] / coeffs[i];
    axis_budgets[j] = cfg.tol / (static_cast<double>(d + 1) * std::fabs(coeffs[i]));
  }

  auto sieve = std::make_shared<Sieve>(cfg.sieve_initial, cfg.sieve_cap);
  const PoolHandle base = base_pool(sieve);
  const std::vector<PoolHandle> pools = base.split(static_cast<unsigned>(d));
  const EvalContext ctx = eval_context(cfg);

  for (int round = 0; round <= cfg.refinement_rounds; ++round) {
    const double round_scale = std::ldexp(1.0, -round);  // halve every refinement
    rep.resources.rounds_used = round + 1;
    rep.axes.clear();
    bool axes_ok = true;
    std::string axis_diag;
    for (std::size_t j = 0; j < d; ++j) {
      AxisOutcome ax = axis_solve(static_cast<int>(j), normalized[j], pools[j], sorted_alphas,
                                  cfg, axis_budgets[j], round_scale);
      if (ax.status != RunStatus::kConverged) {
        axes_ok = false;
        axis_diag = "axis " + std::to_string(j) + " (exponent " + fmt_double(sorted_alphas[j]) +
                    "): " + ax.diagnostic;
      }
      rep.axes.push_back(std::move(ax));
    }
    if (!axes_ok) {
      rep.diagnostic = axis_diag;
      continue;
    }

    // Assemble and certify the emitted index list. Marker divisibility keeps
    // the per-axis sets disjoint; verify that directly on the enumeration.
    std::vector<std::uint64_t> all;
    bool assembly_ok = true;
    for (std::size_t j = 0; j < d && assembly_ok; ++j) {
      std::vector<std::uint64_t> part =
          rep.axes[j].w.enumerate(cfg.max_index, EnumLimits{cfg.enum_cap});
      const std::uint64_t pj = pools[j].marker();
      for (std::uint64_t n : part) {
        if (n % pj != 0) {
          throw WitnessError("axis " + std::to_string(j) + " emitted " + std::to_string(n) +
                             " not divisible by its marker " + std::to_string(pj));
        }
        for (std::size_t o = 0; o < d; ++o) {
          if (o != j && n % pools[o].marker() == 0) {
            throw WitnessError("axis " + std::to_string(j) + " emitted " + std::to_string(n) +
                               " divisible by foreign marker " +
                               std::to_string(pools[o].marker()));
          }
        }
      }
      all.insert(all.end(), part.begin(), part.end());
    }
    std::sort(all.begin(), all.end());
    for (std::size_t i = 0; i + 1 < all.size(); ++i) {
      if (all[i] == all[i + 1]) {
        throw WitnessError("axis sets overlap at " + std::to_string(all[i]));
      }
    }

    rep.indices = std::move(all);
    rep.achieved.assign(d, Interval::zero());
    rep.residuals.assign(d, Interval::zero());
    bool certified = true;
    for (std::size_t i = 0; i < d; ++i) {
      const Interval sum = phi_finite(rep.indices, alphas[i], ctx);
      rep.achieved[i] = scale(sum, coeffs[i]);
      rep.residuals[i] = rep.achieved[i] - Interval::exact(target[i]);
      certified = certified && rep.residuals[i].inside(-cfg.tol, cfg.tol);
    }
    if (certified) {
      rep.status = SolveStatus::kCertified;
      rep.diagnostic.clear();
      break;
    }
    rep.diagnostic = "assembled residuals exceed tol";
  }

  rep.resources.sieve_limit = sieve->limit();
  rep.resources.emitted = rep.indices.size();
  if (rep.status != SolveStatus::kCertified && rep.diagnostic.empty()) {
    rep.diagnostic = "budget exhausted";
  }
  return rep;
}

std::string SolveReport::to_json() const {
  ordered_json j;
  j["status"] = status == SolveStatus::kCertified ? "certified" : "budget_exhausted";
  j["alphas"] = alphas;
  j["coeffs"] = coeffs;
  j["target"] = target;
  j["tol"] = tol;
  j["max_index"] = max_index;
  ordered_json jres = ordered_json::array();
  for (const Interval& r : residuals) jres.push_back(interval_json(r));
  j["residuals"] = std::move(jres);
  ordered_json jach = ordered_json::array();
  for (const Interval& a : achieved) jach.push_back(interval_json(a));
  j["achieved"] = std::move(jach);
  ordered_json jaxes = ordered_json::array();
  for (const AxisOutcome& ax : axes) {
    ordered_json ja;
    ja["axis"] = ax.axis;
    ja["target"] = fmt_double(ax.target);
    ja["status"] = ax.status == RunStatus::kConverged
                       ? "converged"
                       : (ax.status == RunStatus::kCapacity ? "capacity" : "postcondition_failed");
    ja["diagnostic"] = ax.diagnostic;
    ordered_json jpsi = ordered_json::array();
    for (const Interval& iv : ax.psi_w) jpsi.push_back(interval_json(iv));
    ja["psi"] = std::move(jpsi);
    ordered_json jstages = ordered_json::array();
    for (const StageRecord& st : ax.stages) {
      ordered_json js;
      js["stage"] = st.stage;
      js["killed"] = st.killed;
      js["zero_allowance"] = fmt_double(st.zero_allowance);
      js["zero_ok"] = st.zero_ok;
      js["signs_ok"] = st.signs_ok;
      js["cutoff_a"] = st.cutoff_a;
      js["cutoff_b"] = st.cutoff_b;
      js["a_size"] = st.a_size;
      js["b_size"] = st.b_size;
      ordered_json jx = ordered_json::array(), jy = ordered_json::array();
      for (const Interval& iv : st.vectors.x) jx.push_back(interval_json(iv));
      for (const Interval& iv : st.vectors.y) jy.push_back(interval_json(iv));
      js["x"] = std::move(jx);
      js["y"] = std::move(jy);
      js["zero_mask"] = std::vector<bool>(st.vectors.zero_mask.begin(), st.vectors.zero_mask.end());
      jstages.push_back(std::move(js));
    }
    ja["stages"] = std::move(jstages);
    jaxes.push_back(std::move(ja));
  }
  j["axes"] = std::move(jaxes);
  j["indices_count"] = indices.size();
  j["resources"] = {{"sieve_limit", resources.sieve_limit},
                    {"emitted", resources.emitted},
                    {"rounds_used", resources.rounds_used}};
  j["diagnostic"] = diagnostic;
  return j.dump(2);
}

}  // namespace subsum

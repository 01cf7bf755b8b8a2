#include "subsum/verify_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <nlohmann/json.hpp>

#include "subsum/errors.hpp"

namespace subsum {

using ordered_json = nlohmann::ordered_json;

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct NeumaierSum {
  double sum = 0.0;
  double comp = 0.0;
  double max_partial = 0.0;

  void add(double term) {
    const double t = sum + term;
    if (std::fabs(sum) >= std::fabs(term)) {
      comp += (sum - t) + term;
    } else {
      comp += (term - t) + sum;
    }
    sum = t;
    max_partial = std::max(max_partial, std::fabs(t));
  }

  double value() const { return sum + comp; }
};

}  // namespace

VerifyReport verify(std::span<const std::uint64_t> indices, std::span<const double> alphas,
                    std::span<const double> coeffs, std::span<const double> target, double tol) {
  if (alphas.size() != target.size() || (coeffs.size() != 0 && coeffs.size() != alphas.size())) {
    throw InvalidInputError("verify requires matching alphas/coeffs/target lengths");
  }
  const std::size_t d = alphas.size();
  VerifyReport rep;
  rep.recomputed.resize(d);
  rep.residual.resize(d);
  rep.slack.resize(d);
  rep.pass_coord.resize(d);

  // Duplicate findings are report contents, not precondition crashes.
  std::vector<std::uint64_t> sorted(indices.begin(), indices.end());
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i + 1 < sorted.size(); ++i) {
    if (sorted[i] == sorted[i + 1] &&
        (rep.duplicates.empty() || rep.duplicates.back() != sorted[i])) {
      rep.duplicates.push_back(sorted[i]);
    }
  }

  std::vector<NeumaierSum> sums(d);
  NeumaierSum abs_total;
  for (std::uint64_t n : sorted) {
    double norm_sq = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      const double c = coeffs.empty() ? 1.0 : coeffs[i];
      const double mag = std::pow(static_cast<double>(n), -alphas[i]);
      const double t = (n % 2 == 1 ? 1.0 : -1.0) * c * mag;
      sums[i].add(t);
      norm_sq += t * t;
    }
    abs_total.add(std::sqrt(norm_sq));
  }
  rep.absolute_sum_total = abs_total.value();

  bool all = rep.duplicates.empty();
  for (std::size_t i = 0; i < d; ++i) {
    rep.recomputed[i] = sums[i].value();
    rep.residual[i] = rep.recomputed[i] - target[i];
    rep.slack[i] = static_cast<double>(sorted.size()) * 4.0 * kEps *
                   std::max(sums[i].max_partial, std::fabs(target[i]));
    rep.pass_coord[i] = std::fabs(rep.residual[i]) <= tol + rep.slack[i];
    all = all && rep.pass_coord[i];
  }
  rep.pass = all;
  return rep;
}

std::string VerifyReport::to_json() const {
  ordered_json j;
  j["pass"] = pass;
  auto strs = [](const std::vector<double>& v) {
    std::vector<std::string> out;
    out.reserve(v.size());
    for (double x : v) out.push_back(fmt_double(x));
    return out;
  };
  j["recomputed"] = strs(recomputed);
  j["residual"] = strs(residual);
  j["slack"] = strs(slack);
  j["pass_coord"] = std::vector<bool>(pass_coord.begin(), pass_coord.end());
  j["duplicates"] = duplicates;
  j["absolute_sum_total"] = fmt_double(absolute_sum_total);
  return j.dump();
}

namespace {

// All subset sums of the slice, with their masks, sorted by sum.
std::vector<std::pair<double, std::uint32_t>> half_sums(std::span<const double> mags) {
  const std::size_t n = mags.size();
  std::vector<std::pair<double, std::uint32_t>> out;
  out.reserve(std::size_t{1} << n);
  out.push_back({0.0, 0});
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t cur = out.size();
    for (std::size_t j = 0; j < cur; ++j) {
      out.push_back({out[j].first + mags[i], out[j].second | (1u << i)});
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

struct MitmTables {
  std::vector<std::pair<double, std::uint32_t>> lo, hi;
  std::size_t split = 0;
};

MitmTables build_tables(std::span<const double> mags) {
  MitmTables t;
  t.split = mags.size() / 2;
  t.lo = half_sums(mags.subspan(0, t.split));
  t.hi = half_sums(mags.subspan(t.split));
  return t;
}

// Deterministic: smallest residual, ties broken by the combined mask value.
OracleResult query(const MitmTables& t, std::span<const double> mags, double target) {
  OracleResult best;
  best.residual = std::numeric_limits<double>::infinity();
  std::uint64_t best_mask = ~std::uint64_t{0};
  auto consider = [&](double sum, std::uint64_t mask) {
    const double r = std::fabs(sum - target);
    if (r < best.residual || (r == best.residual && mask < best_mask)) {
      best.residual = r;
      best.achieved = sum;
      best_mask = mask;
    }
  };
  for (const auto& [asum, amask] : t.lo) {
    const double want = target - asum;
    auto it = std::lower_bound(t.hi.begin(), t.hi.end(),
                               std::pair<double, std::uint32_t>{want, 0});
    if (it != t.hi.end()) {
      consider(asum + it->first, amask | (std::uint64_t{it->second} << t.split));
    }
    if (it != t.hi.begin()) {
      const auto& prev = *std::prev(it);
      consider(asum + prev.first, amask | (std::uint64_t{prev.second} << t.split));
    }
  }
  for (std::size_t i = 0; i < mags.size(); ++i) {
    if ((best_mask >> i) & 1) best.subset.push_back(i);
  }
  return best;
}

}  // namespace

OracleResult brute_subset_oracle(std::span<const double> magnitudes, double target) {
  if (magnitudes.size() > 30) {
    throw CapacityError("brute_subset_oracle capped at 30 elements, got " +
                        std::to_string(magnitudes.size()));
  }
  for (double m : magnitudes) {
    if (!(m > 0.0)) throw InvalidInputError("oracle magnitudes must be positive");
  }
  const MitmTables t = build_tables(magnitudes);
  return query(t, magnitudes, target);
}

AchievementProfile achievement_profile(std::span<const double> magnitudes,
                                       std::size_t grid_resolution) {
  if (magnitudes.size() > 24) {
    throw CapacityError("achievement_profile capped at 24 elements, got " +
                        std::to_string(magnitudes.size()));
  }
  if (magnitudes.empty()) throw InvalidInputError("achievement_profile requires elements");
  if (grid_resolution < 2) throw InvalidInputError("achievement_profile requires grid >= 2");
  for (double m : magnitudes) {
    if (!(m > 0.0)) throw InvalidInputError("profile magnitudes must be positive");
  }

  AchievementProfile prof;
  double total = 0.0;
  double last = std::numeric_limits<double>::infinity();
  for (double m : magnitudes) {
    total += m;
    last = std::min(last, m);
  }
  prof.total = total;
  prof.last_magnitude = last;

  const MitmTables t = build_tables(magnitudes);
  prof.rows.reserve(grid_resolution);
  for (std::size_t i = 0; i < grid_resolution; ++i) {
    const double target =
        total * static_cast<double>(i) / static_cast<double>(grid_resolution - 1);
    const OracleResult r = query(t, magnitudes, target);
    prof.rows.push_back({target, r.residual});
    prof.max_residual = std::max(prof.max_residual, r.residual);
  }

  // Exact largest achievable-sum gap: affordable for small inputs only.
  if (magnitudes.size() <= 20) {
    std::vector<double> all;
    all.reserve(std::size_t{1} << magnitudes.size());
    for (const auto& [asum, amask] : t.lo) {
      (void)amask;
      for (const auto& [bsum, bmask] : t.hi) {
        (void)bmask;
        all.push_back(asum + bsum);
      }
    }
    std::sort(all.begin(), all.end());
    double gap = 0.0;
    for (std::size_t i = 0; i + 1 < all.size(); ++i) gap = std::max(gap, all[i + 1] - all[i]);
    prof.half_largest_gap = gap / 2.0;
  }
  return prof;
}

std::string AchievementProfile::to_json() const {
  ordered_json j;
  j["total"] = fmt_double(total);
  j["max_residual"] = fmt_double(max_residual);
  j["last_magnitude"] = fmt_double(last_magnitude);
  if (half_largest_gap.has_value()) {
    j["half_largest_gap"] = fmt_double(*half_largest_gap);
  } else {
    j["half_largest_gap"] = nullptr;
  }
  ordered_json jrows = ordered_json::array();
  for (const ProfileRow& r : rows) {
    jrows.push_back({{"target", fmt_double(r.target)}, {"residual", fmt_double(r.residual)}});
  }
  j["profile"] = std::move(jrows);
  return j.dump();
}

}  // namespace subsum

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace subsum {

// Independent re-summation of an emitted index list. Shares no summation code
// with the enclosure path: plain compensated loops over std::pow values.
struct VerifyReport {
  std::vector<double> recomputed;       // per coordinate
  std::vector<double> residual;         // recomputed - target
  std::vector<double> slack;            // documented rounding slack per coordinate
  std::vector<bool> pass_coord;
  std::vector<std::uint64_t> duplicates;
  double absolute_sum_total = 0.0;      // sum of Euclidean norms of the vector terms
  bool pass = false;
  std::string to_json() const;
};

// Rounding slack: n_terms * 4 * machine-epsilon * max-partial-magnitude.
VerifyReport verify(std::span<const std::uint64_t> indices, std::span<const double> alphas,
                    std::span<const double> coeffs, std::span<const double> target, double tol);

struct OracleResult {
  double residual = 0.0;               // best |subset sum - target|
  double achieved = 0.0;               // the winning subset sum
  std::vector<std::size_t> subset;     // positions into the magnitude list
};

// Exact optimum over all 2^n subsets via meet-in-the-middle; n <= 30.
OracleResult brute_subset_oracle(std::span<const double> magnitudes, double target);

struct ProfileRow {
  double target = 0.0;
  double residual = 0.0;
};

struct AchievementProfile {
  std::vector<ProfileRow> rows;
  double max_residual = 0.0;
  double total = 0.0;
  double last_magnitude = 0.0;              // granularity proxy bound
  std::optional<double> half_largest_gap;   // exact for small inputs
  std::string to_json() const;
};

// Oracle-optimal residual over an evenly spaced target grid in [0, total];
// n <= 24, grid_resolution >= 2.
AchievementProfile achievement_profile(std::span<const double> magnitudes,
                                       std::size_t grid_resolution);

}  // namespace subsum

// Command-line surface: solve, verify, primes, oracle, selftest.
//
// Exit codes: 0 success/certified, 1 input error, 2 capacity or budget
// exhaustion, 3 verification/selftest failure.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "subsum/constructor.hpp"
#include "subsum/errors.hpp"
#include "subsum/prime_pool.hpp"
#include "subsum/selftest.hpp"
#include "subsum/series_eval.hpp"
#include "subsum/verify_oracle.hpp"

namespace {

using subsum::CapacityError;
using subsum::EDeltaError;
using subsum::InvalidInputError;
using subsum::WitnessError;

constexpr int kExitOk = 0;
constexpr int kExitInput = 1;
constexpr int kExitCapacity = 2;
constexpr int kExitVerify = 3;

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_indices_jsonl(const std::string& path, const subsum::SolveReport& rep) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw InvalidInputError("cannot open " + path + " for writing");
  const std::size_t d = rep.alphas.size();
  std::vector<double> partial(d, 0.0);
  for (std::uint64_t n : rep.indices) {
    os << "{\"n\":" << n << ",\"terms\":[";
    for (std::size_t i = 0; i < d; ++i) {
      const double mag = std::pow(static_cast<double>(n), -rep.alphas[i]);
      const double t = (n % 2 == 1 ? 1.0 : -1.0) * rep.coeffs[i] * mag;
      partial[i] += t;
      if (i) os << ",";
      os << fmt_double(t);
    }
    os << "],\"partial\":[";
    for (std::size_t i = 0; i < d; ++i) {
      if (i) os << ",";
      os << fmt_double(partial[i]);
    }
    os << "]}\n";
  }
}

int run_solve(const std::vector<double>& alphas, std::vector<double> coeffs,
              const std::vector<double>& target, const subsum::SolveConfig& cfg,
              const std::string& out_path, const std::string& indices_path) {
  if (coeffs.empty()) coeffs.assign(alphas.size(), 1.0);
  const auto t0 = std::chrono::steady_clock::now();
  const subsum::SolveReport rep = subsum::solve(alphas, coeffs, target, cfg);
  const auto t1 = std::chrono::steady_clock::now();

  if (!out_path.empty()) {
    std::ofstream os(out_path, std::ios::binary);
    if (!os) throw InvalidInputError("cannot open " + out_path + " for writing");
    os << rep.to_json() << "\n";
    // Timing lives outside the deterministic report.
    std::ofstream meta(out_path + ".meta.json", std::ios::binary);
    meta << "{\"wall_seconds\":"
         << std::chrono::duration<double>(t1 - t0).count() << "}\n";
  }
  if (!indices_path.empty()) write_indices_jsonl(indices_path, rep);

  const bool certified = rep.status == subsum::SolveStatus::kCertified;
  std::cout << (certified ? "certified" : "budget_exhausted") << " indices=" << rep.indices.size();
  for (std::size_t i = 0; i < rep.residuals.size(); ++i) {
    std::cout << " r" << i << "=[" << fmt_double(rep.residuals[i].lo) << ","
              << fmt_double(rep.residuals[i].hi) << "]";
  }
  if (!certified && !rep.diagnostic.empty()) std::cout << " diagnostic=" << rep.diagnostic;
  std::cout << "\n";
  return certified ? kExitOk : kExitCapacity;
}

int run_verify(const std::vector<double>& alphas, std::vector<double> coeffs,
               const std::vector<double>& target, double tol, const std::string& jsonl_path) {
  std::ifstream is(jsonl_path);
  if (!is) {
    std::cerr << "cannot open " << jsonl_path << "\n";
    return kExitInput;
  }
  std::vector<std::uint64_t> indices;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.contains("n") || !j["n"].is_number_unsigned()) {
      std::cerr << "malformed record at line " << line_no << "\n";
      return kExitInput;
    }
    indices.push_back(j["n"].get<std::uint64_t>());
  }
  if (coeffs.empty()) coeffs.assign(alphas.size(), 1.0);
  const subsum::VerifyReport rep = subsum::verify(indices, alphas, coeffs, target, tol);
  std::cout << rep.to_json() << "\n";
  return rep.pass ? kExitOk : kExitVerify;
}

std::vector<double> parse_csv_doubles(const std::string& s, std::size_t expected) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(std::stod(item));
  if (expected != 0 && out.size() != expected) {
    throw InvalidInputError("expected " + std::to_string(expected) + " comma-separated values");
  }
  return out;
}

int run_primes(const std::string& gap_scan_arg, const std::string& edelta_arg, unsigned split_d,
               std::uint64_t sieve_cap) {
  auto sieve = std::make_shared<subsum::Sieve>(1'000'000, sieve_cap);
  if (!gap_scan_arg.empty()) {
    const std::vector<double> v = parse_csv_doubles(gap_scan_arg, 4);
    const auto lo = static_cast<std::uint64_t>(v[2]);
    const auto hi = static_cast<std::uint64_t>(v[3]);
    const std::optional<std::uint64_t> failure = subsum::gap_scan(v[0], v[1], lo, hi, *sieve);
    std::cout << "{\"scan\":{\"eps\":" << fmt_double(v[0]) << ",\"delta\":" << fmt_double(v[1])
              << ",\"lo\":" << lo << ",\"hi\":" << hi << "},\"failure\":";
    if (failure.has_value()) {
      const double wlo = static_cast<double>(*failure) * (1.0 + v[0]);
      const double whi = static_cast<double>(*failure) * (1.0 + v[1]);
      std::cout << *failure << ",\"window\":[" << fmt_double(wlo) << "," << fmt_double(whi)
                << "]}\n";
    } else {
      std::cout << "null}\n";
    }
    return kExitOk;
  }
  if (!edelta_arg.empty()) {
    const std::vector<double> v = parse_csv_doubles(edelta_arg, 3);
    const double delta = v[0];
    const auto start = static_cast<std::uint64_t>(v[1]);
    const auto count = static_cast<std::size_t>(v[2]);
    const subsum::PoolHandle pool = subsum::base_pool(sieve);
    const subsum::EDeltaSeq seq = subsum::extract_edelta(pool, delta, start);
    for (std::size_t i = 0; i < count; ++i) {
      std::cout << "{\"i\":" << i << ",\"element\":" << seq.element(i);
      if (i > 0) {
        const double ratio = static_cast<double>(seq.element(i)) /
                             static_cast<double>(seq.element(i - 1));
        std::cout << ",\"ratio\":" << fmt_double(ratio);
      } else {
        std::cout << ",\"ratio\":null";
      }
      std::cout << "}\n";
    }
    return kExitOk;
  }
  if (split_d > 0) {
    const subsum::PoolHandle pool = subsum::base_pool(sieve);
    const std::vector<subsum::PoolHandle> parts = pool.split(split_d);
    for (unsigned j = 0; j < parts.size(); ++j) {
      std::cout << "{\"part\":" << j << ",\"first\":" << parts[j].element(0)
                << ",\"marker\":" << parts[j].marker() << "}\n";
    }
    return kExitOk;
  }
  std::cerr << "primes: one of --gap-scan, --edelta, --split is required\n";
  return kExitInput;
}

int run_oracle(const std::string& pool_file, std::size_t prefix, double alpha, std::size_t grid) {
  std::vector<double> magnitudes;
  if (!pool_file.empty()) {
    std::ifstream is(pool_file);
    if (!is) {
      std::cerr << "cannot open " << pool_file << "\n";
      return kExitInput;
    }
    double m = 0.0;
    while (is >> m) magnitudes.push_back(m);
  } else if (prefix > 0) {
    auto sieve = std::make_shared<subsum::Sieve>(1'000'000);
    const subsum::EDeltaSeq seq = subsum::extract_edelta(subsum::base_pool(sieve), 1.0, 3);
    for (std::size_t i = 0; i < prefix; ++i) {
      magnitudes.push_back(std::pow(static_cast<double>(seq.element(i)), -alpha));
    }
  }
  if (magnitudes.empty()) {
    std::cerr << "oracle: empty pool\n";
    return kExitInput;
  }
  const subsum::AchievementProfile prof = subsum::achievement_profile(magnitudes, grid);
  std::cout << prof.to_json() << "\n";
  return kExitOk;
}

int run_selftest_cmd() {
  subsum::SelftestFault fault = subsum::SelftestFault::kNone;
  if (const char* env = std::getenv("SUBSUM_SELFTEST_FAULT");
      env != nullptr && std::string(env) == "sign-flip") {
    fault = subsum::SelftestFault::kSignFlip;
  }
  const std::vector<subsum::SuiteResult> results = subsum::run_selftest(fault);
  bool all = true;
  for (const subsum::SuiteResult& r : results) {
    std::cout << (r.pass ? "[PASS] " : "[FAIL] ") << r.name;
    if (!r.detail.empty()) std::cout << " (" << r.detail << ")";
    std::cout << "\n";
    all = all && r.pass;
  }
  std::cout << (all ? "selftest passed" : "selftest FAILED") << "\n";
  return all ? kExitOk : kExitVerify;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"certified finite-index targeting of signed power sums"};
  app.require_subcommand(1);
  app.set_config("--config", "", "key=value configuration file (flags take precedence)");

  // solve
  auto* solve_cmd = app.add_subcommand("solve", "select indices hitting a target vector");
  std::vector<double> alphas, coeffs, target;
  subsum::SolveConfig cfg;
  std::string out_path, indices_path;
  solve_cmd->add_option("--alphas", alphas, "exponents in (0,1], comma separated")
      ->required()
      ->delimiter(',');
  solve_cmd->add_option("--coeffs", coeffs, "nonzero coefficients (default all 1)")
      ->delimiter(',');
  solve_cmd->add_option("--target", target, "target vector")->required()->delimiter(',');
  solve_cmd->add_option("--tol", cfg.tol, "per-coordinate tolerance");
  solve_cmd->add_option("--max-index", cfg.max_index, "largest emitted index");
  solve_cmd->add_option("--precision", cfg.precision, "mantissa bits for power evaluation");
  solve_cmd->add_option("--budget-split", cfg.budget_split, "geometric stage budget factor");
  solve_cmd->add_option("--refinement-rounds", cfg.refinement_rounds, "budget refinement cap");
  solve_cmd->add_option("--sieve-cap", cfg.sieve_cap, "sieve hard cap");
  solve_cmd->add_option("--out", out_path, "report JSON path");
  solve_cmd->add_option("--indices", indices_path, "index JSONL path");

  // verify
  auto* verify_cmd = app.add_subcommand("verify", "re-sum an index list against a target");
  std::vector<double> v_alphas, v_coeffs, v_target;
  double v_tol = 1e-6;
  std::string v_jsonl;
  verify_cmd->add_option("--alphas", v_alphas, "exponents")->required()->delimiter(',');
  verify_cmd->add_option("--coeffs", v_coeffs, "coefficients (default all 1)")->delimiter(',');
  verify_cmd->add_option("--target", v_target, "target vector")->required()->delimiter(',');
  verify_cmd->add_option("--tol", v_tol, "tolerance");
  verify_cmd->add_option("jsonl", v_jsonl, "index JSONL file")->required();

  // primes
  auto* primes_cmd = app.add_subcommand("primes", "prime pool diagnostics");
  std::string gap_scan_arg, edelta_arg;
  unsigned split_d = 0;
  std::uint64_t primes_sieve_cap = 2'000'000'000;
  primes_cmd->add_option("--gap-scan", gap_scan_arg, "eps,delta,lo,hi window scan");
  primes_cmd->add_option("--edelta", edelta_arg, "delta,start,count corridor extraction");
  primes_cmd->add_option("--split", split_d, "show the first elements of a d-way split");
  primes_cmd->add_option("--sieve-cap", primes_sieve_cap, "sieve hard cap");

  // oracle
  auto* oracle_cmd = app.add_subcommand("oracle", "achievability profile of a finite pool");
  std::string pool_file;
  std::size_t prefix = 0, grid = 64;
  double o_alpha = 1.0;
  oracle_cmd->add_option("--pool-file", pool_file, "file with one magnitude per line");
  oracle_cmd->add_option("--prefix", prefix, "use the first k corridor primes");
  oracle_cmd->add_option("--alpha", o_alpha, "exponent for --prefix magnitudes");
  oracle_cmd->add_option("--grid", grid, "target grid resolution");

  // selftest
  app.add_subcommand("selftest", "run the embedded invariant suites");

  CLI11_PARSE(app, argc, argv);

  try {
    if (solve_cmd->parsed()) {
      if (!coeffs.empty() && coeffs.size() != alphas.size()) {
        std::cerr << "coeffs must match alphas\n";
        return kExitInput;
      }
      if (target.size() != alphas.size()) {
        std::cerr << "target must match alphas\n";
        return kExitInput;
      }
      return run_solve(alphas, coeffs, target, cfg, out_path, indices_path);
    }
    if (verify_cmd->parsed()) {
      if (v_target.size() != v_alphas.size()) {
        std::cerr << "target must match alphas\n";
        return kExitInput;
      }
      return run_verify(v_alphas, v_coeffs, v_target, v_tol, v_jsonl);
    }
    if (primes_cmd->parsed()) {
      return run_primes(gap_scan_arg, edelta_arg, split_d, primes_sieve_cap);
    }
    if (oracle_cmd->parsed()) {
      return run_oracle(pool_file, prefix, o_alpha, grid);
    }
    return run_selftest_cmd();
  } catch (const InvalidInputError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitInput;
  } catch (const CapacityError& e) {
    std::cerr << "capacity: " << e.what() << "\n";
    return kExitCapacity;
  } catch (const EDeltaError& e) {
    std::cerr << "capacity: " << e.what() << "\n";
    return kExitCapacity;
  } catch (const WitnessError& e) {
    std::cerr << "internal witness failure: " << e.what() << "\n";
    return kExitCapacity;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  }
}

#pragma once

#include <array>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "subsum/sieve.hpp"

namespace testutil {

using Rational = boost::multiprecision::cpp_rational;

// Exact signed sum of (-1)^{n+1} n^{-1} over an index list; alpha = 1 only.
inline Rational exact_unit_fraction_sum(const std::vector<std::uint64_t>& elems) {
  Rational sum = 0;
  for (std::uint64_t n : elems) {
    Rational term(1, n);
    if (n % 2 == 0) term = -term;
    sum += term;
  }
  return sum;
}

inline bool rational_in(const Rational& q, double lo, double hi) {
  return Rational(lo) <= q && q <= Rational(hi);
}

// Shared sieve for test fixtures; grown on demand.
inline std::shared_ptr<subsum::Sieve>& shared_sieve() {
  static std::shared_ptr<subsum::Sieve> s =
      std::make_shared<subsum::Sieve>(1'000'000, 2'000'000'000);
  return s;
}

struct CliResult {
  int exit_code = -1;
  std::string out;
};

inline CliResult run_cli(const std::string& args) {
  CliResult res;
  const std::string cmd = std::string(SUBSUM_CLI_PATH) + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  if (pipe == nullptr) return res;
  std::array<char, 4096> buf{};
  while (std::fgets(buf.data(), buf.size(), pipe) != nullptr) res.out += buf.data();
  const int status = pclose(pipe);
  res.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return res;
}

inline std::string slurp(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

inline std::string temp_path(const std::string& name) {
  const char* dir = std::getenv("TMPDIR");
  return std::string(dir != nullptr ? dir : "/tmp") + "/" + name;
}

}  // namespace testutil

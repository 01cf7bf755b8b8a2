#include <doctest.h>

#include <cstdio>
#include <fstream>

#include <nlohmann/json.hpp>

#include "subsum/series_eval.hpp"
#include "test_util.hpp"

using testutil::run_cli;
using testutil::slurp;
using testutil::temp_path;

TEST_CASE("solve writes certified reports and index lists") {
  const std::string rep_path = temp_path("cli_rep.json");
  const std::string idx_path = temp_path("cli_idx.jsonl");
  const auto r = run_cli("solve --alphas 0.5 --target 0 --out " + rep_path + " --indices " +
                         idx_path);
  CHECK(r.exit_code == 0);
  CHECK(slurp(idx_path).empty());
  const auto rep = nlohmann::json::parse(slurp(rep_path));
  CHECK(rep["status"] == "certified");
  CHECK(rep["indices_count"] == 0);
  // Timing lives in the sibling metadata file, not the report.
  CHECK(slurp(rep_path).find("wall") == std::string::npos);
  CHECK(slurp(rep_path + ".meta.json").find("wall_seconds") != std::string::npos);
}

TEST_CASE("duplicate exponents exit with an input error") {
  const auto r = run_cli("solve --alphas 0.5,0.5 --target 1,1");
  CHECK(r.exit_code == 1);
  CHECK(r.out.find("distinct") != std::string::npos);
}

TEST_CASE("solve then verify round trip") {
  const std::string idx_path = temp_path("cli_rt.jsonl");
  const auto s = run_cli("solve --alphas 1 --target 0.15 --tol 1e-6 --max-index 10000000 "
                         "--indices " + idx_path);
  REQUIRE(s.exit_code == 0);
  const auto v = run_cli("verify --alphas 1 --target 0.15 --tol 1e-6 " + idx_path);
  CHECK(v.exit_code == 0);

  SUBCASE("deleting a record shifts the sum past tolerance") {
    std::vector<std::string> lines;
    {
      std::ifstream is(idx_path);
      std::string line;
      while (std::getline(is, line)) lines.push_back(line);
    }
    REQUIRE(lines.size() > 1);
    const std::string cut_path = temp_path("cli_rt_cut.jsonl");
    {
      std::ofstream os(cut_path);
      for (std::size_t i = 1; i < lines.size(); ++i) os << lines[i] << "\n";
    }
    const auto bad = run_cli("verify --alphas 1 --target 0.15 --tol 1e-6 " + cut_path);
    CHECK(bad.exit_code == 3);
  }
  SUBCASE("duplicating a record is flagged as a duplicate finding") {
    const std::string dup_path = temp_path("cli_rt_dup.jsonl");
    {
      std::ifstream is(idx_path);
      std::string first;
      std::getline(is, first);
      std::ofstream os(dup_path);
      os << first << "\n" << first << "\n";
      std::string line;
      while (std::getline(is, line)) os << line << "\n";
    }
    const auto bad = run_cli("verify --alphas 1 --target 0.15 --tol 1e-6 " + dup_path);
    CHECK(bad.exit_code == 3);
    CHECK(bad.out.find("\"duplicates\":[") != std::string::npos);
  }
  SUBCASE("malformed input is an input error") {
    const std::string junk_path = temp_path("cli_rt_junk.jsonl");
    std::ofstream(junk_path) << "{\"m\":5}\n";
    const auto bad = run_cli("verify --alphas 1 --target 0.15 --tol 1e-6 " + junk_path);
    CHECK(bad.exit_code == 1);
  }
}

TEST_CASE("primes subcommands") {
  SUBCASE("split") {
    const auto r = run_cli("primes --split 3");
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("{\"part\":0,\"first\":3") != std::string::npos);
    CHECK(r.out.find("{\"part\":1,\"first\":5") != std::string::npos);
    CHECK(r.out.find("{\"part\":2,\"first\":7") != std::string::npos);
  }
  SUBCASE("corridor extraction emits verifiable ratios") {
    const auto r = run_cli("primes --edelta 1,3,5");
    CHECK(r.exit_code == 0);
    std::istringstream is(r.out);
    std::string line;
    std::uint64_t prev = 0;
    int rows = 0;
    while (std::getline(is, line)) {
      const auto j = nlohmann::json::parse(line);
      const std::uint64_t e = j["element"].get<std::uint64_t>();
      if (rows > 0) {
        const double ratio = j["ratio"].get<double>();
        CHECK(ratio == doctest::Approx(double(e) / double(prev)));
        CHECK(ratio > 4.0 / 3.0);
        CHECK(ratio <= 2.0);
      }
      prev = e;
      ++rows;
    }
    CHECK(rows == 5);
  }
  SUBCASE("gap scan reports clean ranges as null") {
    const auto r = run_cli("primes --gap-scan 0.05,0.2,100,20000");
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("\"failure\":null") != std::string::npos);
  }
  SUBCASE("no mode is an input error") {
    CHECK(run_cli("primes").exit_code == 1);
  }
}

TEST_CASE("oracle subcommand") {
  SUBCASE("corridor prefix profile") {
    const auto r = run_cli("oracle --prefix 12 --alpha 1 --grid 16");
    CHECK(r.exit_code == 0);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j["profile"].size() == 16);
    const double max_res = std::stod(j["max_residual"].get<std::string>());
    const double last = std::stod(j["last_magnitude"].get<std::string>());
    CHECK(max_res <= last);
  }
  SUBCASE("empty pool file") {
    const std::string p = temp_path("cli_empty_pool.txt");
    std::ofstream(p).flush();
    CHECK(run_cli("oracle --pool-file " + p).exit_code == 1);
  }
}

TEST_CASE("selftest passes clean and fails under the fault hook") {
  const auto ok = run_cli("selftest");
  CHECK(ok.exit_code == 0);
  CHECK(ok.out.find("[PASS] sign-rule") != std::string::npos);

  testutil::CliResult faulty;
  {
    const std::string cmd = std::string("SUBSUM_SELFTEST_FAULT=sign-flip ") + SUBSUM_CLI_PATH +
                            " selftest 2>&1";
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    std::array<char, 4096> buf{};
    while (std::fgets(buf.data(), buf.size(), pipe) != nullptr) faulty.out += buf.data();
    const int status = pclose(pipe);
    faulty.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }
  CHECK(faulty.exit_code == 3);
  CHECK(faulty.out.find("[FAIL] sign-rule") != std::string::npos);
}

TEST_CASE("extended precision flag runs end to end") {
  if (!subsum::extended_precision_available()) return;
  const std::string rep_path = temp_path("cli_prec.json");
  const auto r = run_cli("solve --alphas 1 --target 0.1 --tol 1e-6 --max-index 10000000 "
                         "--precision 113 --out " + rep_path);
  CHECK(r.exit_code == 0);
  CHECK(nlohmann::json::parse(slurp(rep_path))["status"] == "certified");
}

TEST_CASE("config file values are read and flags take precedence") {
  const std::string cfg_path = temp_path("cli_cfg.ini");
  std::ofstream(cfg_path) << "[solve]\ntol=0.25\n";
  const std::string rep_path = temp_path("cli_cfg_rep.json");
  const auto a = run_cli("--config " + cfg_path + " solve --alphas 1 --target 0.01 "
                         "--max-index 10000 --out " + rep_path);
  CHECK(a.exit_code == 0);
  CHECK(nlohmann::json::parse(slurp(rep_path))["tol"].get<double>() == doctest::Approx(0.25));
  const auto b = run_cli("--config " + cfg_path + " solve --alphas 1 --target 0.01 --tol 0.5 "
                         "--max-index 10000 --out " + rep_path);
  CHECK(b.exit_code == 0);
  CHECK(nlohmann::json::parse(slurp(rep_path))["tol"].get<double>() == doctest::Approx(0.5));
}

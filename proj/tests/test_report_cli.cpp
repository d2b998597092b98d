#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "sojourn/report.hpp"

using namespace sojourn;

namespace {

TailEstimate sample_estimate() {
  TailEstimate e;
  e.p_hat = 0.12345678901234567;
  e.se = 0.001234;
  e.ci_lo = 0.11;
  e.ci_hi = 0.13;
  e.replicates = 20000;
  e.hits = 2469;
  e.censored_fraction = 0.0625;
  e.u = 1.0;
  e.x = 0.25;
  e.c = 1.0;
  e.horizon = 30.0;
  e.v = 2.0;
  e.grid = build_grid(30.0, 122880);
  e.seed = 7;
  return e;
}

int run_cli(const std::vector<std::string>& args) {
  std::vector<const char*> argv;
  argv.push_back("sojourn-lab");
  for (const auto& a : args) argv.push_back(a.c_str());
  return sojourn::cli::run(static_cast<int>(argv.size()), argv.data());
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("empty record lists serialize to header-only CSV and empty JSON array") {
  const std::span<const TailEstimate> empty;
  CHECK(to_csv_string(empty) == "u,x,c,T,p_hat,stderr,ci_lo,ci_hi,reps,seed,censored_fraction\n");
  const std::string json = to_json_string(empty);
  CHECK(json.find("\"records\": []") != std::string::npos);
  CHECK(json.find("sojourn-lab/1") != std::string::npos);
}

TEST_CASE("tail estimate CSV row carries the pinned column order") {
  const TailEstimate rec[1] = {sample_estimate()};
  const std::string csv = to_csv_string(rec);
  const std::string row = csv.substr(csv.find('\n') + 1);
  CHECK(row.substr(0, 15) == "1,0.25,1,30,0.1");
}

TEST_CASE("JSON round-trip is exact") {
  const TailEstimate rec[1] = {sample_estimate()};
  const auto parsed = parse_tail_estimates(to_json_string(rec));
  REQUIRE(parsed.size() == 1);
  const TailEstimate& p = parsed[0];
  const TailEstimate& e = rec[0];
  CHECK(p.p_hat == e.p_hat);  // bit-exact float round trip
  CHECK(p.se == e.se);
  CHECK(p.ci_lo == e.ci_lo);
  CHECK(p.ci_hi == e.ci_hi);
  CHECK(p.replicates == e.replicates);
  CHECK(p.hits == e.hits);
  CHECK(p.censored_fraction == e.censored_fraction);
  CHECK(p.u == e.u);
  CHECK(p.x == e.x);
  CHECK(p.c == e.c);
  CHECK(p.horizon == e.horizon);
  CHECK(p.v == e.v);
  CHECK(p.grid == e.grid);
  CHECK(p.seed == e.seed);
}

TEST_CASE("io failures name the path") {
  const TailEstimate rec[1] = {sample_estimate()};
  CHECK_THROWS_WITH_AS(write_report(std::span(rec), "/nonexistent-dir/report.json",
                                    ReportFormat::json),
                       doctest::Contains("/nonexistent-dir/report.json"), std::runtime_error);
}

TEST_CASE("cli rejects unknown subcommands and bad flags with exit 2") {
  CHECK(run_cli({"frobnicate"}) == 2);
  CHECK(run_cli({"tail", "--model", "nonsense:3"}) == 2);
  CHECK(run_cli({"tail", "--model", "brownian", "--c", "1", "--T", "4", "--steps", "64",
                 "--reps", "12"}) == 2);  // reps below the precondition
  CHECK(run_cli({"asymptotic", "--model", "brownian", "--theorem", "9.9"}) == 2);
}

TEST_CASE("cli regime errors exit with 3 and name the theorem") {
  // exact law demanded for a non-Brownian model
  CHECK(run_cli({"asymptotic", "--model", "fbm:0.7", "--theorem", "exact", "--c", "1"}) == 3);
  // finite-horizon theorem with an infinite horizon
  CHECK(run_cli({"asymptotic", "--model", "fbm:0.7", "--theorem", "3.4", "--T", "inf",
                 "--c", "1", "--u", "5"}) == 3);
  // missing constant for a rough fBm
  CHECK(run_cli({"asymptotic", "--model", "fbm:0.3", "--T", "inf", "--c", "1", "--u", "5"}) == 3);
}

TEST_CASE("cli asymptotic evaluates the finite-horizon closed form") {
  const std::string path = "/tmp/sojourn-test-asym.json";
  CHECK(run_cli({"--out", path, "asymptotic", "--theorem", "3.4", "--model", "power-sigma2:1.4",
                 "--T", "1", "--c", "0", "--u", "5", "--x", "1"}) == 0);
  const std::string text = slurp(path);
  CHECK(text.find("thm3.4.iii") != std::string::npos);
  CHECK(text.find("0.49658530379140") != std::string::npos);  // e^{-0.7}
  std::remove(path.c_str());
}

TEST_CASE("cli tail runs a small estimate and writes schema-tagged JSON") {
  const std::string path = "/tmp/sojourn-test-tail.json";
  CHECK(run_cli({"--seed", "7", "--out", path, "tail", "--model", "brownian", "--c", "1", "--u",
                 "0", "--x", "0.25", "--T", "4", "--steps", "1024", "--reps", "2000", "--v",
                 "1"}) == 0);
  const auto parsed = parse_tail_estimates(slurp(path));
  REQUIRE(parsed.size() == 1);
  CHECK(parsed[0].seed == 7);
  CHECK(parsed[0].replicates == 2000);
  CHECK(parsed[0].p_hat > 0.2);
  CHECK(parsed[0].p_hat < 0.6);
  std::remove(path.c_str());
}

TEST_CASE("cli berman ladder output feeds the asymptotic dispatcher") {
  const std::string path = "/tmp/sojourn-test-berman.json";
  CHECK(run_cli({"--seed", "3", "--out", path, "berman", "--process", "fbm:0.3", "--x", "0.5",
                 "--S", "2,4,8", "--step", "0.03125", "--reps", "400"}) == 0);
  const BermanValues values = parse_berman_values(slurp(path));
  REQUIRE(values.size() == 1);
  // estimand key matches what evaluate_asymptotic asks for (fbm:0.3 -> alpha 0.6)
  CHECK(values.count("B[fbm:0.59999999999999998][h=0][x=0.5][limit]") == 1);

  // supplying the file completes the previously failing dispatch
  CHECK(run_cli({"asymptotic", "--model", "fbm:0.3", "--T", "inf", "--c", "1", "--u", "5",
                 "--x", "0.5", "--constants", path}) == 0);
  std::remove(path.c_str());
}

TEST_CASE("cli simulate writes a plot-ready path table") {
  const std::string path = "/tmp/sojourn-test-sim.csv";
  CHECK(run_cli({"--seed", "5", "--out", path, "simulate", "--model", "fbm:0.7", "--T", "2",
                 "--steps", "64", "--paths", "2"}) == 0);
  const std::string text = slurp(path);
  CHECK(text.substr(0, 14) == "t,path0,path1\n");
  CHECK(text.find("\n0,0,0\n") != std::string::npos);  // pinned at the origin

  // identical seed reproduces the draw bit for bit
  const std::string path2 = "/tmp/sojourn-test-sim2.csv";
  CHECK(run_cli({"--seed", "5", "--out", path2, "simulate", "--model", "fbm:0.7", "--T", "2",
                 "--steps", "64", "--paths", "2"}) == 0);
  CHECK(slurp(path2) == text);
  std::remove(path.c_str());
  std::remove(path2.c_str());
}

TEST_CASE("cli validate runs a fast deterministic suite") {
  CHECK(run_cli({"--seed", "7", "validate", "--suite", "quadrature"}) == 0);
  CHECK(run_cli({"--seed", "7", "validate", "--suite", "thm31"}) == 0);
  CHECK(run_cli({"validate", "--suite", "no-such-suite"}) == 2);
}

TEST_CASE("environment seed is the default of last resort") {
  const std::string path = "/tmp/sojourn-test-envseed.json";
  setenv("SOJOURN_LAB_SEED", "991", 1);
  CHECK(run_cli({"--out", path, "tail", "--model", "brownian", "--c", "1", "--u", "0", "--x",
                 "0", "--T", "2", "--steps", "256", "--reps", "500", "--v", "1"}) == 0);
  unsetenv("SOJOURN_LAB_SEED");
  const auto parsed = parse_tail_estimates(slurp(path));
  CHECK(parsed.at(0).seed == 991);
  std::remove(path.c_str());
}

TEST_CASE("cli config file provides defaults that flags override") {
  const std::string cfg = "/tmp/sojourn-test-cfg.ini";
  {
    std::ofstream out(cfg);
    out << "seed=11\nformat=json\n";
  }
  const std::string path = "/tmp/sojourn-test-cfg-out.json";
  CHECK(run_cli({"--config", cfg, "--out", path, "tail", "--model", "brownian", "--c", "1",
                 "--u", "0", "--x", "0", "--T", "2", "--steps", "256", "--reps", "500", "--v",
                 "1"}) == 0);
  auto parsed = parse_tail_estimates(slurp(path));
  CHECK(parsed.at(0).seed == 11);  // from the config file

  CHECK(run_cli({"--config", cfg, "--seed", "12", "--out", path, "tail", "--model", "brownian",
                 "--c", "1", "--u", "0", "--x", "0", "--T", "2", "--steps", "256", "--reps",
                 "500", "--v", "1"}) == 0);
  parsed = parse_tail_estimates(slurp(path));
  CHECK(parsed.at(0).seed == 12);  // flags beat the file
  std::remove(cfg.c_str());
  std::remove(path.c_str());
}

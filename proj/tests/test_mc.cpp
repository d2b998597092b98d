#include <doctest.h>

#include <cmath>

#include "oracle_values.hpp"
#include "sojourn/asymptotics.hpp"
#include "sojourn/errors.hpp"
#include "sojourn/mc.hpp"
#include "sojourn/parallel.hpp"
#include "sojourn/rng.hpp"

using namespace sojourn;

namespace {

SojournProblem brownian_problem(double c, double u, double x, double horizon, double v) {
  SojournProblem p;
  p.model = BrownianDrift{};
  p.c = c;
  p.u = u;
  p.x = x;
  p.horizon = horizon;
  if (v > 0.0) p.scaling = ScalingRule::explicit_v(v);
  return p;
}

}  // namespace

TEST_CASE("wilson interval sanity and coverage") {
  const WilsonInterval ci = wilson_interval(50, 100);
  CHECK(ci.lo < 0.5);
  CHECK(ci.hi > 0.5);
  CHECK(wilson_interval(0, 100).lo == 0.0);
  CHECK(wilson_interval(100, 100).hi == 1.0);

  const double p = 0.137;
  int covered = 0;
  for (int run = 0; run < 100; ++run) {
    CounterRng rng(314, static_cast<std::uint64_t>(run));
    std::uint64_t hits = 0;
    const std::uint64_t n = 1000;
    for (std::uint64_t i = 0; i < n; ++i) hits += rng.uniform() < p ? 1u : 0u;
    const WilsonInterval w = wilson_interval(hits, n);
    covered += (w.lo <= p && p <= w.hi) ? 1 : 0;
  }
  CHECK(covered >= 93);
}

TEST_CASE("tail estimate against the exact Brownian law at desk scale") {
  const GridSpec grid = build_grid(10.0, 10 * 512);
  const auto problem = brownian_problem(1.0, 0.0, 0.25, 10.0, 1.0);
  const TailEstimate est = estimate_tail(problem, grid, 20000, 99);
  const double exact = brownian_sojourn_tail_exact(1.0, 0.0, 0.25);
  CHECK(std::fabs(est.p_hat - exact) <= 3.0 * est.se + 0.03);
  CHECK(est.ci_lo <= est.p_hat);
  CHECK(est.p_hat <= est.ci_hi);
  CHECK(est.hits <= est.replicates);
}

TEST_CASE("degenerate problems") {
  const GridSpec grid = build_grid(4.0, 256);
  // impossible event: x >= v * window
  const TailEstimate zero = estimate_tail(brownian_problem(0.0, 0.0, 5.0, 4.0, 1.0), grid, 200, 1);
  CHECK(zero.p_hat == 0.0);
  CHECK(zero.hits == 0);
  // certain event: level far below every path value
  const TailEstimate one =
      estimate_tail(brownian_problem(0.0, -1e6, 1.0, 4.0, 1.0), grid, 200, 1);
  CHECK(one.p_hat == 1.0);
}

TEST_CASE("precondition failures") {
  const GridSpec grid = build_grid(4.0, 256);
  CHECK_THROWS_AS(estimate_tail(brownian_problem(1.0, 0.0, 0.0, 4.0, 1.0), grid, 50, 1),
                  std::invalid_argument);
  // infinite horizon with c <= 0 is rejected
  CHECK_THROWS_AS(estimate_tail(brownian_problem(0.0, 0.0, 0.0, kInfinity, 1.0), grid, 200, 1),
                  std::invalid_argument);
  // canonical scaling unresolvable for a rho-less self-similar model
  SojournProblem bad;
  bad.model = SelfSimilar{0.7, RvFunction{}, 1.0};
  bad.c = 1.0;
  bad.horizon = kInfinity;
  CHECK_THROWS_AS(estimate_tail(bad, grid, 200, 1), missing_scaling_error);
}

TEST_CASE("determinism across worker-pool sizes") {
  const GridSpec grid = build_grid(6.0, 6 * 256);
  const auto problem = brownian_problem(1.0, 0.5, 0.2, 6.0, 1.0);
  set_max_threads(1);
  const TailEstimate serial = estimate_tail(problem, grid, 4000, 31);
  set_max_threads(4);
  const TailEstimate parallel = estimate_tail(problem, grid, 4000, 31);
  set_max_threads(0);
  CHECK(serial.hits == parallel.hits);
  CHECK(serial.p_hat == parallel.p_hat);  // bit-identical
  CHECK(serial.censored_fraction == parallel.censored_fraction);
}

TEST_CASE("shared-path monotonicity in x is exact") {
  const GridSpec grid = build_grid(8.0, 8 * 256);
  const auto problem = brownian_problem(1.0, 0.3, 0.0, 8.0, 1.0);
  const double xs[4] = {0.0, 0.2, 0.6, 1.4};
  const auto row = estimate_tail_shared(problem, xs, grid, 3000, 17);
  for (int k = 1; k < 4; ++k) CHECK(row[k].p_hat <= row[k - 1].p_hat);
}

TEST_CASE("level sweep shares paths across u (factorization check)") {
  const GridSpec grid = build_grid(20.0, 20 * 1024);
  const auto problem = brownian_problem(1.0, 0.0, 0.0, 20.0, 1.0);
  const double us[2] = {0.0, 1.0};
  const double xs[2] = {0.0, 0.5};
  const auto grid_est = estimate_tail_grid(problem, us, xs, grid, 30000, 7);
  for (int k = 0; k < 2; ++k) {
    const double ratio = grid_est[1][k].p_hat / grid_est[0][k].p_hat;
    CHECK(std::fabs(ratio / oracle::exp_m2 - 1.0) <= 0.12);
  }
}

TEST_CASE("censoring bound: doubling the truncation moves p_hat within noise") {
  const auto problem = brownian_problem(1.0, 2.0, 0.1, kInfinity, 0.0);
  const double h = 1.0 / 256.0;
  const double w5 = truncation_horizon(problem, 5.0);
  const double w10 = truncation_horizon(problem, 10.0);
  CHECK(w5 == doctest::Approx(10.0));
  const GridSpec g5 = build_grid(w5, static_cast<std::size_t>(w5 / h));
  const GridSpec g10 = build_grid(w10, static_cast<std::size_t>(w10 / h));
  const TailEstimate e5 = estimate_tail(problem, g5, 30000, 5);
  const TailEstimate e10 = estimate_tail(problem, g10, 30000, 5);
  CHECK(std::fabs(e5.p_hat - e10.p_hat) <= 3.0 * std::max(e5.se, e10.se));
  CHECK(e5.censored_fraction >= 0.0);
  CHECK(e5.censored_fraction <= 1.0);
}

TEST_CASE("passage law: equal thresholds against the conditional hitting law") {
  const double u = 2.5;
  auto problem = brownian_problem(1.0, u, 0.0, kInfinity, 0.0);
  const double window = truncation_horizon(problem, 5.0);
  const double h = 1.0 / 512.0;
  const GridSpec grid = build_grid(window, static_cast<std::size_t>(window / h));
  const PassageLawEstimate law = estimate_passage_law(problem, 0.0, 0.0, grid, 100000, 23);

  CHECK(law.accepted > 400);
  CHECK(law.atom_hits == 0);  // same threshold: second passage equals the first

  // Exact conditional law of the ruin time at this u: inverse Gaussian with
  // tilted unit drift, mean u and shape u^2. The estimator must match it to
  // sampling accuracy; the limit law sits a known pre-asymptotic KS distance
  // away (0.1162 at u = 2.5, crossing 0.1 only around u = 4).
  const double a_u = std::sqrt(u);
  const auto exact_cdf = [&](double y) {
    const double t = u + a_u * y;
    if (t <= 0.0) return 0.0;
    const double s = std::sqrt(u * u / t);
    return normal_cdf(s * (t / u - 1.0)) + std::exp(2.0 * u) * normal_cdf(-s * (t / u + 1.0));
  };
  const double ks_exact = ks_distance(law.normalized, exact_cdf);
  CHECK(ks_exact <= 0.06);

  const double ks_limit = ks_distance(law.normalized, [](double y) { return normal_cdf(y); });
  CHECK(ks_limit <= 0.1162 + 0.06);
}

TEST_CASE("passage law atom mass matches the closed-form constant ratio") {
  auto problem = brownian_problem(1.0, 2.5, 0.0, kInfinity, 0.0);
  const double window = truncation_horizon(problem, 5.0);
  const double h = 1.0 / 512.0;
  const GridSpec grid = build_grid(window, static_cast<std::size_t>(window / h));
  const PassageLawEstimate law = estimate_passage_law(problem, 0.0, 1.0, grid, 100000, 29);

  const double atom_target = 1.0 - brownian_sojourn_constant(1.0) / brownian_sojourn_constant(0.0);
  const double se = std::sqrt(law.atom_mass * (1.0 - law.atom_mass) /
                              static_cast<double>(law.accepted));
  CHECK(std::fabs(law.atom_mass - atom_target) <= 3.0 * se + 0.05);
}

TEST_CASE("passage law: degenerate conditioning raises") {
  const GridSpec grid = build_grid(2.0, 256);
  auto problem = brownian_problem(1.0, 50.0, 0.0, 2.0, 1.0);
  CHECK_THROWS_AS(estimate_passage_law(problem, 0.0, 0.0, grid, 200, 1),
                  degenerate_conditioning_error);
}

TEST_CASE("finite-horizon passage statistic survival is monotone") {
  auto problem = brownian_problem(0.5, 2.5, 0.0, 1.0, 0.0);
  const GridSpec grid = build_grid(1.0, 2048);
  const PassageLawEstimate law = estimate_passage_law(problem, 0.0, 0.2, grid, 60000, 41);
  REQUIRE(law.normalized.size() > 50);
  // empirical survival at increasing y never increases
  double prev = 1.0;
  for (const double y : {0.0, 0.5, 1.0, 2.0}) {
    const double survival = 1.0 - empirical_cdf(law.normalized, y);
    CHECK(survival <= prev + 1e-12);
    prev = survival;
  }
}

TEST_CASE("convergence study trends toward the asymptotic value") {
  SojournProblem problem = brownian_problem(1.0, 0.0, 0.0, kInfinity, 0.0);
  GridPolicy policy;
  policy.step = 1.0 / 256.0;
  const double ladder[3] = {1.5, 2.0, 2.5};
  const ConvergenceStudy study = convergence_study(problem, ladder, policy, 20000, 3);
  REQUIRE(study.rows.size() == 3);
  for (const auto& row : study.rows) {
    CHECK(row.ratio > 0.5);
    CHECK(row.ratio < 1.5);
    CHECK(row.asymptotic.regime == "thm3.1");
  }

  const double single[1] = {2.0};
  const ConvergenceStudy one = convergence_study(problem, single, policy, 200, 3);
  CHECK(one.rows.size() == 1);
  CHECK(!one.trend_improving);  // no trend with a single row

  SojournProblem bad = problem;
  bad.model = StationaryIncrements{RvFunction::power(2.0)};
  CHECK_THROWS_WITH_AS(convergence_study(bad, single, policy, 200, 3),
                       doctest::Contains("u=2.0"), regime_error);
}

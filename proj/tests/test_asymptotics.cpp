#include <doctest.h>

#include <cmath>

#include "oracle_values.hpp"
#include "sojourn/asymptotics.hpp"
#include "sojourn/errors.hpp"

using namespace sojourn;

TEST_CASE("normal tail against the high-precision reference") {
  const struct {
    double z, psi;
  } cases[] = {{-5, oracle::psi_minus5},
               {-2, oracle::psi_minus2},
               {-1, oracle::psi_minus1},
               {-0.5, oracle::psi_minus_half},
               {0.5, oracle::psi_half},
               {0.7071067811865476, oracle::psi_inv_sqrt2},
               {1, oracle::psi_one},
               {2, oracle::psi_two},
               {3, oracle::psi_three},
               {5, oracle::psi_five},
               {10, oracle::psi_ten},
               {20, oracle::psi_twenty},
               {30, oracle::psi_thirty},
               {37, oracle::psi_37}};
  for (const auto& c : cases)
    CHECK(std::fabs(normal_tail(c.z) / c.psi - 1.0) <= 1e-12);

  CHECK(normal_tail(0.0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(normal_tail(-10.0) + normal_tail(10.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(normal_tail(40.0) >= 0.0);
  CHECK(normal_tail(-40.0) == doctest::Approx(1.0).epsilon(1e-15));
  // subnormal edge: representable only to a couple of ulp
  CHECK(std::fabs(normal_tail(38.0) - oracle::psi_38) <=
        4.0 * std::numeric_limits<double>::denorm_min() * 1e8);
  CHECK_THROWS_AS(normal_tail(std::numeric_limits<double>::quiet_NaN()), std::invalid_argument);
}

TEST_CASE("exact drifted-Brownian sojourn law") {
  CHECK(brownian_sojourn_tail_exact(1, 0, 0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(brownian_sojourn_tail_exact(1, 1, 0) ==
        doctest::Approx(oracle::brownian_c1_u1_x0).epsilon(1e-14));
  CHECK(brownian_sojourn_tail_exact(1, 0, 1) ==
        doctest::Approx(oracle::brownian_c1_u0_x1).epsilon(1e-13));
  CHECK(brownian_sojourn_tail_exact(1, 0, 0.25) ==
        doctest::Approx(oracle::brownian_c1_u0_x025).epsilon(1e-13));
  CHECK(brownian_sojourn_tail_exact(0.5, 2, 3) ==
        doctest::Approx(oracle::brownian_c05_u2_x3).epsilon(1e-13));
  CHECK(brownian_sojourn_tail_exact(1, 0.5, 0.5) ==
        doctest::Approx(oracle::brownian_c1_u05_x05).epsilon(1e-13));

  CHECK_THROWS_AS(brownian_sojourn_tail_exact(0.0, 0, 0), std::invalid_argument);
  CHECK_THROWS_AS(brownian_sojourn_tail_exact(1, -1, 0), std::invalid_argument);
  CHECK_THROWS_AS(brownian_sojourn_tail_exact(1, 0, -1), std::invalid_argument);

  // monotone in u and x; monotone in c for x>0 at u=0
  double prev = 2.0;
  for (const double u : {0.0, 0.5, 1.0, 2.0}) {
    const double p = brownian_sojourn_tail_exact(1, u, 0.5);
    CHECK(p <= prev);
    prev = p;
  }
  prev = 2.0;
  for (const double x : {0.0, 0.5, 1.0, 2.0}) {
    const double p = brownian_sojourn_tail_exact(1, 0.5, x);
    CHECK(p <= prev);
    prev = p;
  }
  prev = 2.0;
  for (const double c : {0.5, 1.0, 2.0}) {
    const double p = brownian_sojourn_tail_exact(c, 0.0, 1.0);
    CHECK(p <= prev);
    prev = p;
  }
}

TEST_CASE("levy root of psi(a) = c a") {
  const LevyExponent brownian{[](double l) { return 0.5 * l * l; }, 0.0};
  const double a = levy_alpha(brownian, 1.0);
  CHECK(a == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(std::fabs(brownian.psi(a) - 1.0 * a) <= 1e-12 * std::max(1.0, a));

  const LevyExponent shifted{[](double l) { return l + 0.5 * l * l; }, 1.0};
  CHECK(levy_alpha(shifted, 2.0) == doctest::Approx(2.0).epsilon(1e-12));

  CHECK_THROWS_AS(levy_alpha(brownian, 0.0), no_solution_error);
  CHECK_THROWS_AS(levy_alpha(shifted, 0.5), no_solution_error);
}

TEST_CASE("factorized tail") {
  CHECK(levy_factorized_tail(3.0, 0.0, 0.42) == doctest::Approx(0.42));
  CHECK(levy_factorized_tail(2.0, 1.0, 1.0) == doctest::Approx(oracle::exp_m2).epsilon(1e-15));
  CHECK(levy_factorized_tail(2.0, kInfinity, 0.9) == 0.0);
  // matches the exact law: e^{-2u} times the u=0 bracket
  CHECK(levy_factorized_tail(2.0, 1.0, brownian_sojourn_tail_exact(1, 0, 0)) ==
        doctest::Approx(brownian_sojourn_tail_exact(1, 1, 0)).epsilon(1e-14));
}

TEST_CASE("closed-form constants") {
  CHECK(zero_process_power_constant(1, 1, 0) == doctest::Approx(1.0));
  CHECK(zero_process_power_constant(0.8, 1.3, 0.5) ==
        doctest::Approx(oracle::zero_power_08_13_05).epsilon(1e-14));
  CHECK(hat_b2_constant(1, 0) == doctest::Approx(oracle::sqrt_2).epsilon(1e-14));
  CHECK(hat_b2_constant(1, 1) == doctest::Approx(oracle::hat_b2_g1_x1).epsilon(1e-14));
  CHECK(hat_b2_constant(0.5, 0.7) == doctest::Approx(oracle::hat_b2_g05_x07).epsilon(1e-14));
  CHECK(brownian_sojourn_constant(0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(brownian_sojourn_constant(0.25) == doctest::Approx(oracle::b1_at_025).epsilon(1e-13));
  CHECK(brownian_sojourn_constant(0.5) == doctest::Approx(oracle::b1_at_05).epsilon(1e-13));
  CHECK(brownian_sojourn_constant(1) == doctest::Approx(oracle::b1_at_1).epsilon(1e-13));
  CHECK(brownian_sojourn_constant(2) == doctest::Approx(oracle::b1_at_2).epsilon(1e-13));
  CHECK(zero_process_halfline_constant(1, 1, 2, 0.5) ==
        doctest::Approx(oracle::exp_m15).epsilon(1e-14));

  // the scaling identity behind the constant: B1(x) equals the exact law at
  // (c=1, u=0, x/2)
  for (const double x : {0.25, 0.5, 1.0, 2.0})
    CHECK(brownian_sojourn_constant(x) ==
          doctest::Approx(brownian_sojourn_tail_exact(1, 0, x / 2)).epsilon(1e-13));

  CHECK_THROWS_AS(zero_process_power_constant(-1, 1, 0), std::invalid_argument);
  CHECK_THROWS_AS(hat_b2_constant(0, 1), std::invalid_argument);
  CHECK_THROWS_AS(brownian_sojourn_constant(-0.1), std::invalid_argument);

  SpecialConstantSpec spec;
  spec.kind = SpecialConstantSpec::Kind::hat_b2;
  spec.gamma = 1;
  spec.x = 0;
  CHECK(special_constant(spec) == doctest::Approx(oracle::sqrt_2));
}

TEST_CASE("half-line branch continuity at y = x/2") {
  for (const double gamma : {0.5, 1.0, 2.0})
    for (const double beta : {0.5, 1.0, 2.0})
      for (const double x : {0.2, 1.0, 2.0}) {
        const double y = 0.5 * x;
        const double from_below = std::exp(-gamma * std::pow(x - y, beta));
        const double at = zero_process_halfline_constant(gamma, beta, x, y);
        CHECK(std::fabs(at - from_below) <= 1e-12);
      }
}

TEST_CASE("theta integral") {
  CHECK(std::fabs(theta_integral(1, 0, kInfinity) - oracle::theta_b1_0_inf) <= 1e-10);
  CHECK(std::fabs(theta_integral(2, -kInfinity, kInfinity) - oracle::theta_b2_full) <= 1e-10);
  CHECK(theta_integral(1.3, 2.0, 2.0) == 0.0);
  CHECK(std::fabs(theta_integral(1.7, 0.3, 2.5) - oracle::theta_b17_03_25) <= 1e-10);
  CHECK(std::fabs(theta_integral(0.8, -1.2, 2.0) - oracle::theta_b08_m12_2) <= 1e-10);
  CHECK(std::fabs(theta_integral(0.5, 0, 1.5) - oracle::theta_b05_0_15) <= 1e-10);
  CHECK_THROWS_AS(theta_integral(1, 2.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(theta_integral(0, 0, 1), std::invalid_argument);
}

TEST_CASE("asymptotic inverse") {
  CHECK(asymptotic_inverse(RvFunction::power(0.5), 0.5, 0.01, 10.0) ==
        doctest::Approx(0.25).epsilon(1e-14));
  CHECK(asymptotic_inverse(RvFunction::power(2.0), 4.0, 0.01, 10.0) ==
        doctest::Approx(2.0).epsilon(1e-14));
  const RvFunction f = RvFunction::from_callable(
      [](double t) { return std::pow(t, 1.4); }, 1.4, 1.4, nullptr, "t^1.4");
  const double t = asymptotic_inverse(f, 3.0, 1e-3, 100.0);
  CHECK(std::fabs(f(t) - 3.0) <= 1e-12 * 3.0);
  CHECK_THROWS_AS(asymptotic_inverse(f, 1e9, 1e-3, 10.0), bracket_error);
}

TEST_CASE("infinite-horizon geometry for the Brownian variance") {
  const InfiniteHorizonGeometry g = infinite_horizon_geometry(RvFunction::power(1.0), 1.0, 4.0);
  CHECK(g.t_star == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(g.A == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(g.B == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(g.m_u == doctest::Approx(4.0).epsilon(1e-9));
  CHECK(g.t_u == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(g.v_u == doctest::Approx(2.0).epsilon(1e-10));
  CHECK(g.phi == doctest::Approx(1.0));
  CHECK(!g.objective_multimodal);

  CHECK_THROWS_AS(infinite_horizon_geometry(RvFunction::power(1.0), 0.0, 4.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(infinite_horizon_geometry(RvFunction::power(2.0), 1.0, 4.0), regime_error);
}

TEST_CASE("infinite-horizon curvature constants for power variances") {
  for (const double H : {0.3, 0.5, 0.7}) {
    const InfiniteHorizonGeometry g =
        infinite_horizon_geometry(RvFunction::power(2.0 * H), 1.0, 10.0);
    const double t_star = H / (1.0 - H);
    CHECK(g.t_star == doctest::Approx(t_star).epsilon(1e-12));
    CHECK(g.A == doctest::Approx(std::pow(t_star, -H) / (1.0 - H)).epsilon(1e-12));
    CHECK(g.B == doctest::Approx(std::pow(t_star, -H - 2.0) * H).epsilon(1e-12));
  }
}

TEST_CASE("local variance expansion around the critical time") {
  // Numerical check of the quadratic contraction of the scaled standard
  // deviation: (1 - sigma*_u(t)) ~ (B/2A)(t - t_u)^2 near t_u, with the gap
  // shrinking as u grows.
  for (const double H : {0.3, 0.5, 0.7}) {
    const RvFunction sigma2 = RvFunction::power(2.0 * H);
    double prev_worst = kInfinity;
    for (const double u : {1e3, 1e4, 1e5}) {
      const InfiniteHorizonGeometry g = infinite_horizon_geometry(sigma2, 1.0, u);
      const double delta = std::log(g.m_u) / g.m_u;
      double worst = 0.0;
      for (int k = -20; k <= 20; ++k) {
        if (k == 0) continue;
        const double t = g.t_u + delta * k / 20.0;
        const double sigma_star = g.m_u * std::sqrt(sigma2(u * t)) / (u * (1.0 + t));
        const double ratio =
            (1.0 - sigma_star) / ((g.B / (2.0 * g.A)) * (t - g.t_u) * (t - g.t_u));
        worst = std::max(worst, std::fabs(ratio - 1.0));
      }
      CHECK(worst < prev_worst + 1e-9);  // contraction improves with u
      if (u == 1e5) CHECK(worst <= 0.05);
      prev_worst = worst;
    }
  }
}

TEST_CASE("finite-horizon geometry") {
  const FiniteHorizonGeometry g = finite_horizon_geometry(RvFunction::power(1.0), 0.0, 1.0, 3.0);
  CHECK(g.m_u == doctest::Approx(3.0).epsilon(1e-13));
  CHECK(g.regime_case == FiniteHorizonCase::balanced);
  CHECK(g.theta == doctest::Approx(1.0));
  CHECK(g.v_u == doctest::Approx(4.5).epsilon(1e-12));
  CHECK(g.sigma_T == doctest::Approx(1.0));
  CHECK(g.sigma_dot_T == doctest::Approx(0.5).epsilon(1e-12));

  CHECK(finite_horizon_geometry(RvFunction::power(1.4), 0.0, 1.0, 3.0).regime_case ==
        FiniteHorizonCase::variance_negligible);
  CHECK(finite_horizon_geometry(RvFunction::power(0.8), 0.0, 1.0, 3.0).regime_case ==
        FiniteHorizonCase::time_negligible);
  CHECK_THROWS_AS(finite_horizon_geometry(RvFunction::power(1.0), 0.0, kInfinity, 3.0),
                  std::invalid_argument);
}

TEST_CASE("local variance contraction near the finite horizon") {
  const double T = 1.0, c = 1.0;
  for (const double H : {0.3, 0.5, 0.7}) {
    const RvFunction sigma2 = RvFunction::power(2.0 * H);
    const FiniteHorizonGeometry g = finite_horizon_geometry(sigma2, c, T, 1e3);
    const double rate = g.sigma_dot_T / g.sigma_T;
    const double delta = std::pow(std::log(g.m_u) / g.m_u, 2.0);
    double worst = 0.0;
    for (int k = 1; k <= 20; ++k) {
      const double t = T - delta * k / 20.0;
      const double sigma_hat = g.m_u * std::sqrt(sigma2(t)) / (1e3 + c * t);
      worst = std::max(worst, std::fabs((1.0 - sigma_hat) / (T - t) - rate));
    }
    CHECK(worst <= 0.05 * rate);
  }
}

TEST_CASE("self-similar geometry") {
  const SelfSimilarGeometry g = self_similar_geometry(0.5, 1.0);
  CHECK(g.t0 == doctest::Approx(1.0));
  CHECK(g.a_hat == doctest::Approx(2.0));
  CHECK(g.b_hat == doctest::Approx(0.5));
  CHECK(self_similar_geometry(0.5, 2.0).t0 == doctest::Approx(0.5));
  CHECK_THROWS_AS(self_similar_geometry(1.0 - 1e-9, 1.0), std::invalid_argument);

  const RvFunction rho = RvFunction::power(1.4, 0.5);
  CHECK(self_similar_geometry(0.7, 1.0, &rho).gamma == doctest::Approx(0.0));
  const RvFunction rho2 = RvFunction::power(2.0, 0.125);
  CHECK(self_similar_geometry(0.7, 1.0, &rho2).gamma == doctest::Approx(8.0));
}

namespace {

SojournProblem brownian_inf(double u, double x) {
  SojournProblem p;
  p.model = BrownianDrift{};
  p.c = 1.0;
  p.u = u;
  p.x = x;
  p.horizon = kInfinity;
  return p;
}

}  // namespace

TEST_CASE("infinite-horizon formula reduces symbolically for Brownian motion") {
  const AsymptoticResult r = evaluate_asymptotic(brownian_inf(4.0, 0.0));
  // constant 1 * sqrt(8 pi), algebraic u v / M = sqrt(u), tail Psi(2 sqrt(u))
  const double expected = std::sqrt(8.0 * 3.141592653589793) * 2.0 * normal_tail(4.0);
  CHECK(r.value == doctest::Approx(expected).epsilon(1e-10));
  CHECK(r.regime == "thm3.1");
  REQUIRE(r.berman_inputs.size() == 1);
  CHECK(r.berman_inputs[0].provenance == "closed-form");
  const double ratio = r.value / brownian_sojourn_tail_exact(1.0, 4.0, 0.0);
  CHECK(ratio == doctest::Approx(0.9466).epsilon(2e-3));
}

TEST_CASE("factorization identity holds to near machine precision") {
  const SojournProblem cases[] = {brownian_inf(4.0, 0.0), brownian_inf(6.0, 1.0)};
  for (const auto& p : cases) {
    const AsymptoticResult r = evaluate_asymptotic(p);
    CHECK(std::fabs(r.value - r.constant_factor * r.algebraic_factor * r.gauss_tail_factor) <=
          1e-14 * std::fabs(r.value));
  }
}

TEST_CASE("finite-horizon case iii closed form") {
  SojournProblem p;
  p.model = Fbm{0.7};
  p.c = 0.0;
  p.u = 5.0;
  p.x = 1.0;
  p.horizon = 1.0;
  const AsymptoticResult r = evaluate_asymptotic(p);
  CHECK(r.regime == "thm3.4.iii");
  CHECK(r.constant_factor == doctest::Approx(oracle::exp_m07).epsilon(1e-13));
  CHECK(r.value == doctest::Approx(oracle::thm34iii_h07_u5).epsilon(1e-12));
}

TEST_CASE("self-similar finite horizon matches the stationary-increments view") {
  for (const double H : {0.6, 0.7, 0.8}) {
    for (const double T : {1.0, 2.0}) {
      SojournProblem si;
      si.model = Fbm{H};
      si.c = 0.5;
      si.u = 5.0;
      si.x = 1.0;
      si.horizon = T;
      SojournProblem ss = si;
      ss.model = SelfSimilar{H, RvFunction::power(2.0 * H, 1.0 / (2.0 * std::pow(T, 2.0 * H))), T};
      const AsymptoticResult a = evaluate_asymptotic(si);
      const AsymptoticResult b = evaluate_asymptotic(ss);
      CHECK(a.regime == "thm3.4.iii");
      CHECK(b.regime == "thm3.7.iii");
      CHECK(std::fabs(a.value / b.value - 1.0) <= 1e-12);
      CHECK(std::fabs(resolve_scaling(si) / resolve_scaling(ss) - 1.0) <= 1e-12);
    }
  }
}

TEST_CASE("self-similar infinite horizon closed cases") {
  // gamma finite: the hat-constant closed form
  SojournProblem p;
  p.c = 1.0;
  p.u = 30.0;
  p.x = 0.8;
  p.horizon = kInfinity;
  const SelfSimilarGeometry geo = self_similar_geometry(0.5, 1.0);
  p.model = SelfSimilar{0.5, RvFunction::power(2.0, 1.0 / (2.0 * geo.t0 * geo.t0)), geo.t0};
  const AsymptoticResult r = evaluate_asymptotic(p);
  CHECK(r.regime == "thm3.6.ii");
  const double gamma = 2.0 * geo.t0 * geo.t0;
  CHECK(r.constant_factor ==
        doctest::Approx(hat_b2_constant(geo.b_hat * gamma / (2.0 * geo.a_hat), p.x))
            .epsilon(1e-12));

  // gamma infinite: pure exponential-square constant
  RvFunction rho_small = RvFunction::power_over_log(2.0, 1.0);
  rho_small.declare_gamma(kInfinity);
  p.model = SelfSimilar{0.5, rho_small, geo.t0};
  const AsymptoticResult r3 = evaluate_asymptotic(p);
  CHECK(r3.regime == "thm3.6.iii");
  CHECK(r3.constant_factor ==
        doctest::Approx(std::exp(-geo.a_hat * geo.b_hat * p.x * p.x / 8.0)).epsilon(1e-12));
}

TEST_CASE("missing constants are named precisely and can be supplied") {
  SojournProblem p;
  p.model = Fbm{0.3};
  p.c = 1.0;
  p.u = 8.0;
  p.x = 0.5;
  p.horizon = kInfinity;

  std::string key;
  try {
    evaluate_asymptotic(p);
    FAIL("expected missing_constant_error");
  } catch (const missing_constant_error& e) {
    key = e.key;
  }
  CHECK(key == pickands_key(0.6, 0.5));

  BermanValues supplied;
  supplied[key] = ConstantValue{0.37, 0.01, "estimated"};
  const AsymptoticResult r = evaluate_asymptotic(p, &supplied);
  REQUIRE(r.berman_inputs.size() == 1);
  CHECK(r.berman_inputs[0].value == doctest::Approx(0.37));
  CHECK(r.berman_inputs[0].provenance == "estimated");

  // balanced finite-horizon case needs the drift-field constant
  SojournProblem q;
  q.model = BrownianDrift{};
  q.c = 0.0;
  q.u = 5.0;
  q.x = 0.5;
  q.horizon = 1.0;
  CHECK_THROWS_AS(evaluate_asymptotic(q), missing_constant_error);
}

TEST_CASE("passage limit laws") {
  // equal thresholds: plain normal law, no atom
  const PassageLawPoint eq = passage_law_infinite({0.42, 0.0}, {0.42, 0.0}, 0.7);
  CHECK(eq.ratio == doctest::Approx(1.0));
  CHECK(eq.atom_mass == doctest::Approx(0.0));
  CHECK(eq.probability == doctest::Approx(normal_cdf(0.7)).epsilon(1e-14));
  CHECK(!eq.inconsistency_warning);

  // total mass at y -> inf equals the ratio
  const PassageLawPoint big = passage_law_infinite({0.5, 0.0}, {0.2, 0.0}, 50.0);
  CHECK(big.probability == doctest::Approx(big.ratio).epsilon(1e-12));

  // a ratio beyond 1 + 3 se trips the warning
  const PassageLawPoint bad = passage_law_infinite({0.2, 0.001}, {0.25, 0.001}, 0.0);
  CHECK(bad.inconsistency_warning);

  // finite-horizon closed-form ratio for the variance-negligible case
  const double gamma = finite_passage_ratio_closed(0.7, 0.0, 1.0);
  CHECK(gamma == doctest::Approx(oracle::exp_m07).epsilon(1e-14));
  const PassageLawPoint fin = passage_law_finite({gamma, 0.0}, 1.0);
  CHECK(fin.probability == doctest::Approx(oracle::exp_m17).epsilon(1e-13));
  CHECK(fin.atom_mass == doctest::Approx(1.0 - gamma).epsilon(1e-13));
  CHECK(passage_law_finite({gamma, 0.0}, -3.0).probability == doctest::Approx(gamma));
}

TEST_CASE("regularly varying tail integral") {
  const RvTailIntegral pure = rv_tail_integral(1.0, RvFunction::power(2.0), 10.0, 1.0, kInfinity);
  CHECK(pure.numeric == doctest::Approx(oracle::sqrt_pi_over_20).epsilon(1e-8));
  CHECK(pure.asymptotic == doctest::Approx(oracle::sqrt_pi_over_20).epsilon(1e-10));

  const RvTailIntegral zero = rv_tail_integral(1.0, RvFunction::power(2.0), 10.0, 1.0, 0.0);
  CHECK(zero.numeric == 0.0);
  CHECK(zero.asymptotic == 0.0);

  const RvTailIntegral slow =
      rv_tail_integral(1.0, RvFunction::power_over_log(2.0, 1.0), 100.0, 1.0, kInfinity);
  CHECK(std::fabs(slow.numeric / slow.asymptotic - 1.0) <= 0.1);
}

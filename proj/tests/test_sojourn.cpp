#include <doctest.h>

#include <cmath>
#include <functional>

#include "sojourn/sojourn.hpp"

using namespace sojourn;

namespace {

SamplePath path_from(const GridSpec& grid, const std::function<double(double)>& f) {
  SamplePath p{grid, std::vector<double>(grid.points()), 0, BrownianDrift{}};
  for (std::size_t i = 0; i < p.values.size(); ++i) p.values[i] = f(grid.time(i));
  return p;
}

}  // namespace

TEST_CASE("sojourn_time on constant paths") {
  const GridSpec grid = build_grid(3.0, 300);
  const double u = 0.7;
  const SamplePath above = path_from(grid, [&](double) { return u + 1.0; });
  CHECK(sojourn_time(above, 0.0, u, 0.0, 3.0) == doctest::Approx(3.0).epsilon(1e-12));
  const SamplePath below = path_from(grid, [&](double) { return u - 1.0; });
  CHECK(sojourn_time(below, 0.0, u, 0.0, 3.0) == 0.0);
}

TEST_CASE("sojourn_time analytic crossing") {
  const GridSpec grid = build_grid(3.0, 300);  // step 0.01
  const SamplePath p = path_from(grid, [](double t) { return 2.0 * t; });
  const double s = sojourn_time(p, 1.0, 1.0, 0.0, 3.0);
  CHECK(std::fabs(s - 2.0) <= 0.01 + 1e-12);  // exceedance on (1, 3]
}

TEST_CASE("sojourn_time window handling and ties") {
  const GridSpec grid = build_grid(1.0, 10);
  const SamplePath p = path_from(grid, [](double) { return 1.0; });
  // ties at exactly u do not count (strict exceedance)
  CHECK(sojourn_time(p, 0.0, 1.0, 0.0, 1.0) == 0.0);
  CHECK(sojourn_time(p, 0.0, 0.999, 0.0, 1.0) == doctest::Approx(1.0));
  CHECK(sojourn_time(p, 0.0, 0.0, 0.2, 0.5) == doctest::Approx(0.3));
  CHECK_THROWS_AS(sojourn_time(p, 0.0, 0.0, 0.0, 2.0), std::invalid_argument);
  CHECK_THROWS_AS(sojourn_time(p, 0.0, 0.0, -0.5, 1.0), std::invalid_argument);
}

TEST_CASE("first_passage on the analytic ramp") {
  const GridSpec grid = build_grid(3.0, 3000);  // step 1e-3
  const double h = grid.step();
  const SamplePath p = path_from(grid, [](double t) { return 2.0 * t; });

  const PassageSample at0 = first_passage(p, 1.0, 1.0, 0.0, 1.0, 3.0);
  CHECK(!at0.censored);
  CHECK(std::fabs(at0.tau - 1.0) <= 2.0 * h + 1e-12);

  const PassageSample at05 = first_passage(p, 1.0, 1.0, 0.5, 1.0, 3.0);
  CHECK(std::fabs(at05.tau - 1.5) <= 2.0 * h + 1e-12);
}

TEST_CASE("first_passage censoring semantics") {
  const GridSpec grid = build_grid(10.0, 100);
  const SamplePath below = path_from(grid, [](double) { return -1.0; });
  // fully covered finite horizon: provably never crosses, not censored
  const PassageSample full = first_passage(below, 0.0, 0.0, 0.1, 1.0, 10.0);
  CHECK(std::isinf(full.tau));
  CHECK(!full.censored);
  // truncated run of a longer horizon: censored
  const PassageSample trunc = first_passage(below, 0.0, 0.0, 0.1, 1.0, kInfinity);
  CHECK(std::isinf(trunc.tau));
  CHECK(trunc.censored);
}

TEST_CASE("first_passage consistency with sojourn_time on the shared grid") {
  const GridSpec grid = build_grid(4.0, 256);
  CounterRng rng(42, 0);
  for (int rep = 0; rep < 40; ++rep) {
    // rough random walk path
    SamplePath p{grid, std::vector<double>(grid.points()), 0, BrownianDrift{}};
    CounterRng prng(11, static_cast<std::uint64_t>(rep));
    double acc = 0.0;
    for (std::size_t i = 0; i < p.values.size(); ++i) {
      p.values[i] = acc;
      acc += 0.2 * prng.normal();
    }
    for (const double x : {0.0, 0.1, 0.4, 1.0}) {
      const double v = 1.3, u = 0.15, c = 0.2;
      const PassageSample tau = first_passage(p, c, u, x, v, 4.0);
      const bool within = tau.tau <= 4.0;
      const bool hit = v * sojourn_time(p, c, u, 0.0, 4.0) > x;
      CHECK(within == hit);
      if (std::isfinite(tau.tau)) CHECK(tau.tau >= x / v - 1e-12);
    }
  }
}

TEST_CASE("grid refinement changes the sojourn by at most crossings * step") {
  // piecewise-monotone test path: rises, falls, rises
  const auto f = [](double t) { return std::sin(1.7 * t) + 0.3 * t; };
  const double u = 0.8, horizon = 6.0;
  const GridSpec coarse = build_grid(horizon, 600);
  const GridSpec fine = build_grid(horizon, 1200);
  const double s_coarse = sojourn_time(path_from(coarse, f), 0.0, u, 0.0, horizon);
  const double s_fine = sojourn_time(path_from(fine, f), 0.0, u, 0.0, horizon);
  const int crossings = 4;  // two up-crossings, two down-crossings on [0,6]
  CHECK(std::fabs(s_fine - s_coarse) <= crossings * coarse.step() + 1e-12);
}

TEST_CASE("normalize_passage statistics") {
  const InfiniteHorizonRegime inf_regime{10.0, 1.0, 2.0};
  CHECK(*normalize_passage({10.0, false}, inf_regime) == doctest::Approx(0.0));
  CHECK(*normalize_passage({12.0, false}, inf_regime) == doctest::Approx(1.0));

  const FiniteHorizonRegime fin_regime{10.0, 1.0, 1.0, 0.5};  // sigma(t)=sqrt(t) at T=1
  CHECK(*normalize_passage({1.0, false}, fin_regime) == doctest::Approx(0.0));
  CHECK(*normalize_passage({0.99, false}, fin_regime) == doctest::Approx(0.5).epsilon(1e-10));

  CHECK(!normalize_passage({kInfinity, true}, fin_regime).has_value());
}

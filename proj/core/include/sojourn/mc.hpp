#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "sojourn/asymptotics.hpp"
#include "sojourn/problem.hpp"

namespace sojourn {

struct WilsonInterval {
  double lo = 0.0;
  double hi = 1.0;
};

/// Wilson score interval (default 95%).
WilsonInterval wilson_interval(std::uint64_t hits, std::uint64_t n,
                               double z = 1.959963984540054);

struct TailEstimate {
  double p_hat = 0.0;
  double se = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 1.0;
  std::uint64_t replicates = 0;
  std::uint64_t hits = 0;
  double censored_fraction = 0.0;
  // problem echo
  double u = 0.0;
  double x = 0.0;
  double c = 0.0;
  double horizon = 0.0;
  double v = 1.0;
  GridSpec grid;
  std::uint64_t seed = 0;
};

/// Crude Monte Carlo estimate of P{ v * sojourn of X - ct above u over
/// [0, min(T, grid horizon)] > x }. Replicate r uses substream (seed, r);
/// results are bit-identical for any worker-pool size.
TailEstimate estimate_tail(const SojournProblem& problem, const GridSpec& grid,
                           std::size_t replicates, std::uint64_t seed);

/// Same problem evaluated at several thresholds x on shared paths (common
/// random numbers make the x-monotonicity of p_hat exact).
std::vector<TailEstimate> estimate_tail_shared(const SojournProblem& problem,
                                               std::span<const double> xs, const GridSpec& grid,
                                               std::size_t replicates, std::uint64_t seed);

/// Full (u, x) sweep on shared paths; result[j][k] matches (us[j], xs[k]).
/// The scaling is resolved per level when the problem uses the canonical rule.
std::vector<std::vector<TailEstimate>> estimate_tail_grid(const SojournProblem& problem,
                                                          std::span<const double> us,
                                                          std::span<const double> xs,
                                                          const GridSpec& grid,
                                                          std::size_t replicates,
                                                          std::uint64_t seed);

struct PassageLawEstimate {
  std::vector<double> normalized;  // sorted normalized statistics of accepted, finite passages
  std::uint64_t replicates = 0;
  std::uint64_t accepted = 0;   // conditioning event count
  std::uint64_t atom_hits = 0;  // accepted with infinite second passage
  double acceptance_rate = 0.0;
  double atom_mass = 0.0;  // atom_hits / accepted
  std::string regime;
};

/// Conditional law of the normalized passage time tau(x2) given tau(x1)
/// finite (infinite horizon) or tau(x1) <= T (finite horizon).
PassageLawEstimate estimate_passage_law(const SojournProblem& problem, double x1, double x2,
                                        const GridSpec& grid, std::size_t replicates,
                                        std::uint64_t seed);

/// Empirical CDF of the sample at y.
double empirical_cdf(std::span<const double> sorted_sample, double y);

/// Kolmogorov-Smirnov distance between the sample and a CDF callable.
double ks_distance(std::span<const double> sorted_sample, const std::function<double(double)>& cdf);

struct GridPolicy {
  double step = 1.0 / 4096.0;
  double truncation_k = 5.0;  // infinite horizons are truncated at K * u * t_star
};

struct ConvergenceRow {
  double u = 0.0;
  TailEstimate mc;
  AsymptoticResult asymptotic;
  double ratio = 0.0;
};

struct ConvergenceStudy {
  std::vector<ConvergenceRow> rows;
  bool trend_improving = false;  // |ratio-1| nonincreasing over the last half of the ladder
};

ConvergenceStudy convergence_study(const SojournProblem& problem_template,
                                   std::span<const double> u_ladder, const GridPolicy& policy,
                                   std::size_t replicates, std::uint64_t seed,
                                   const BermanValues* supplied = nullptr);

/// The simulation window for a problem: min(T, K u t*) for infinite horizons.
double truncation_horizon(const SojournProblem& problem, double truncation_k);

}  // namespace sojourn

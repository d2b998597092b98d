#include "sojourn/mc.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "sojourn/errors.hpp"
#include "sojourn/parallel.hpp"
#include "sojourn/rng.hpp"
#include "sojourn/sojourn.hpp"

namespace sojourn {
namespace {

constexpr std::size_t kMinReplicates = 100;

struct SweepLayout {
  std::vector<double> us;
  std::vector<double> xs;
  std::vector<double> vs;              // scaling per level
  std::vector<std::uint64_t> thresh;   // [j*nx+k]: hit when count_j >= thresh
  std::uint64_t max_thresh = 0;
  std::size_t i_end = 0;               // points in [0, window)
  double h = 0.0;
};

SweepLayout make_layout(const SojournProblem& problem, std::span<const double> us,
                        std::span<const double> xs, const GridSpec& grid) {
  SweepLayout lay;
  lay.us.assign(us.begin(), us.end());
  lay.xs.assign(xs.begin(), xs.end());
  lay.h = grid.step();

  const double window = std::min(problem.horizon, grid.horizon);
  lay.i_end = static_cast<std::size_t>(std::llround(window / lay.h));
  if (lay.i_end > grid.steps) lay.i_end = grid.steps;

  for (const double u : us) {
    SojournProblem p = problem;
    p.u = u;
    double v = 0.0;
    try {
      v = resolve_scaling(p);
    } catch (const std::invalid_argument&) {
      throw;
    } catch (const std::exception& e) {
      throw missing_scaling_error(std::string("estimate_tail: scaling unresolved: ") + e.what());
    }
    if (!(v > 0.0)) throw missing_scaling_error("estimate_tail: scaling must be positive");
    lay.vs.push_back(v);
  }

  lay.thresh.resize(us.size() * xs.size());
  for (std::size_t j = 0; j < us.size(); ++j)
    for (std::size_t k = 0; k < xs.size(); ++k) {
      // count * h * v > x  <=>  count >= floor(x / (v h)) + 1
      const double ratio = xs[k] / (lay.vs[j] * lay.h);
      const auto t = static_cast<std::uint64_t>(std::floor(ratio)) + 1;
      lay.thresh[j * xs.size() + k] = t;
      lay.max_thresh = std::max(lay.max_thresh, t);
    }
  return lay;
}

struct SweepCounts {
  std::vector<std::uint64_t> hits;      // [j*nx+k]
  std::vector<std::uint64_t> censored;  // [j]
};

/// Shared-path sweep: per replicate one trendless path, exceedance counts per
/// level, hits per (level, threshold). Hit counters are integers, so the
/// reduction is exact and independent of the worker partition.
SweepCounts run_sweep(const SojournProblem& problem, const SweepLayout& lay, const GridSpec& grid,
                      std::size_t replicates, std::uint64_t seed) {
  const std::size_t nu = lay.us.size(), nx = lay.xs.size();
  const bool track_censoring = std::isinf(problem.horizon);
  const std::size_t n_blocks = std::min<std::size_t>(replicates, 8 * max_threads());

  std::vector<SweepCounts> per_block(n_blocks);
  const bool streaming = is_streaming_family(problem.model);
  const double c = problem.c;

  parallel_blocks(replicates, n_blocks, [&](std::size_t b, std::size_t lo, std::size_t hi) {
    SweepCounts& acc = per_block[b];
    acc.hits.assign(nu * nx, 0);
    acc.censored.assign(nu, 0);

    std::vector<std::uint64_t> count(nu);
    std::vector<double> path;
    PathSampler* sampler_ptr = nullptr;
    PathSampler sampler_storage = streaming
                                      ? PathSampler(ProcessModel{ZeroProcess{}}, 1, 1.0)
                                      : PathSampler(problem.model, grid.steps, grid.step());
    if (!streaming) {
      sampler_ptr = &sampler_storage;
      path.resize(grid.points());
    }

    const double h = lay.h;
    const double sh = std::sqrt(h);
    const bool is_line = std::holds_alternative<LineProcess>(problem.model);
    const bool is_zero = std::holds_alternative<ZeroProcess>(problem.model);

    for (std::size_t r = lo; r < hi; ++r) {
      CounterRng rng(seed, r);
      std::fill(count.begin(), count.end(), 0);
      double last_y = 0.0;

      if (streaming && nu == 1 && !is_line && !is_zero) {
        // tight single-level Brownian loop; this is the acceptance-scale
        // hot path, everything lives in registers
        const double u0 = lay.us[0];
        const double ch = c * h;
        const std::uint64_t stop = lay.max_thresh;
        double y = 0.0;
        std::uint64_t cnt = 0;
        for (std::size_t i = 0; i < lay.i_end; ++i) {
          if (i > 0) y += sh * rng.normal() - ch;
          cnt += (y > u0) ? 1u : 0u;
          if (cnt >= stop) break;
        }
        count[0] = cnt;
        last_y = y;
      } else if (streaming) {
        double y = 0.0;         // X(t_i) - c t_i
        double line_z = 0.0;
        if (is_line) line_z = rng.normal();
        std::uint64_t min_count = 0;
        for (std::size_t i = 0; i < lay.i_end; ++i) {
          if (i > 0) {
            if (is_line)
              y = (line_z - c) * (static_cast<double>(i) * h);
            else if (is_zero)
              y = -c * static_cast<double>(i) * h;
            else
              y += sh * rng.normal() - c * h;
          }
          min_count = ~std::uint64_t{0};
          for (std::size_t j = 0; j < nu; ++j) {
            count[j] += (y > lay.us[j]) ? 1u : 0u;
            min_count = std::min(min_count, count[j]);
          }
          if (min_count >= lay.max_thresh) break;  // every pair resolved
        }
        last_y = y;
      } else {
        sampler_ptr->sample(rng, path);
        for (std::size_t i = 0; i < lay.i_end; ++i) {
          const double y = path[i] - c * (static_cast<double>(i) * h);
          for (std::size_t j = 0; j < nu; ++j) count[j] += (y > lay.us[j]) ? 1u : 0u;
        }
        last_y = path[lay.i_end - 1] - c * (static_cast<double>(lay.i_end - 1) * h);
      }

      for (std::size_t j = 0; j < nu; ++j) {
        bool all_hit = true;
        for (std::size_t k = 0; k < nx; ++k) {
          const bool hit = count[j] >= lay.thresh[j * nx + k];
          acc.hits[j * nx + k] += hit ? 1u : 0u;
          all_hit = all_hit && hit;
        }
        // A replicate counts as censored when the window was a truncation and
        // the path was still above the level at the cut, so more horizon
        // could have changed an unresolved indicator.
        if (track_censoring && !all_hit && last_y > lay.us[j]) acc.censored[j] += 1;
      }
    }
  });

  SweepCounts total;
  total.hits.assign(nu * nx, 0);
  total.censored.assign(nu, 0);
  for (const SweepCounts& blk : per_block) {
    if (blk.hits.empty()) continue;
    for (std::size_t i = 0; i < total.hits.size(); ++i) total.hits[i] += blk.hits[i];
    for (std::size_t j = 0; j < nu; ++j) total.censored[j] += blk.censored[j];
  }
  return total;
}

TailEstimate make_estimate(const SojournProblem& problem, const GridSpec& grid,
                           std::size_t replicates, std::uint64_t seed, double u, double x,
                           double v, std::uint64_t hits, std::uint64_t censored) {
  TailEstimate e;
  e.replicates = replicates;
  e.hits = hits;
  e.p_hat = static_cast<double>(hits) / static_cast<double>(replicates);
  e.se = std::sqrt(e.p_hat * (1.0 - e.p_hat) / static_cast<double>(replicates));
  const WilsonInterval ci = wilson_interval(hits, replicates);
  e.ci_lo = ci.lo;
  e.ci_hi = ci.hi;
  e.censored_fraction = static_cast<double>(censored) / static_cast<double>(replicates);
  e.u = u;
  e.x = x;
  e.c = problem.c;
  e.horizon = problem.horizon;
  e.v = v;
  e.grid = grid;
  e.seed = seed;
  return e;
}

}  // namespace

WilsonInterval wilson_interval(std::uint64_t hits, std::uint64_t n, double z) {
  if (n == 0) return {0.0, 1.0};
  const double nn = static_cast<double>(n);
  const double p = static_cast<double>(hits) / nn;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / nn;
  const double center = (p + z2 / (2.0 * nn)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn)) / denom;
  WilsonInterval ci{std::max(0.0, center - half), std::min(1.0, center + half)};
  if (hits == 0) ci.lo = 0.0;  // the endpoints are exact in the degenerate cases
  if (hits == n) ci.hi = 1.0;
  return ci;
}

std::vector<std::vector<TailEstimate>> estimate_tail_grid(const SojournProblem& problem,
                                                          std::span<const double> us,
                                                          std::span<const double> xs,
                                                          const GridSpec& grid,
                                                          std::size_t replicates,
                                                          std::uint64_t seed) {
  validate(problem);
  if (replicates < kMinReplicates)
    throw std::invalid_argument("estimate_tail: need replicates >= 100");
  if (us.empty() || xs.empty()) throw std::invalid_argument("estimate_tail: empty sweep");

  const SweepLayout lay = make_layout(problem, us, xs, grid);
  const SweepCounts counts = run_sweep(problem, lay, grid, replicates, seed);

  std::vector<std::vector<TailEstimate>> out(us.size());
  for (std::size_t j = 0; j < us.size(); ++j) {
    out[j].reserve(xs.size());
    for (std::size_t k = 0; k < xs.size(); ++k)
      out[j].push_back(make_estimate(problem, grid, replicates, seed, us[j], xs[k], lay.vs[j],
                                     counts.hits[j * xs.size() + k], counts.censored[j]));
  }
  return out;
}

std::vector<TailEstimate> estimate_tail_shared(const SojournProblem& problem,
                                               std::span<const double> xs, const GridSpec& grid,
                                               std::size_t replicates, std::uint64_t seed) {
  const double us[1] = {problem.u};
  auto grid_out = estimate_tail_grid(problem, us, xs, grid, replicates, seed);
  return std::move(grid_out[0]);
}

TailEstimate estimate_tail(const SojournProblem& problem, const GridSpec& grid,
                           std::size_t replicates, std::uint64_t seed) {
  const double xs[1] = {problem.x};
  auto row = estimate_tail_shared(problem, xs, grid, replicates, seed);
  return row[0];
}

double empirical_cdf(std::span<const double> sorted_sample, double y) {
  const auto it = std::upper_bound(sorted_sample.begin(), sorted_sample.end(), y);
  return static_cast<double>(it - sorted_sample.begin()) /
         static_cast<double>(sorted_sample.size());
}

double ks_distance(std::span<const double> sorted_sample,
                   const std::function<double(double)>& cdf) {
  const std::size_t n = sorted_sample.size();
  double d = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double f = cdf(sorted_sample[i]);
    const double lo = static_cast<double>(i) / static_cast<double>(n);
    const double hi = static_cast<double>(i + 1) / static_cast<double>(n);
    d = std::max({d, std::fabs(f - lo), std::fabs(f - hi)});
  }
  return d;
}

double truncation_horizon(const SojournProblem& problem, double truncation_k) {
  if (!std::isinf(problem.horizon)) return problem.horizon;
  if (const auto* ss = std::get_if<SelfSimilar>(&problem.model)) {
    const SelfSimilarGeometry g = self_similar_geometry(ss->hurst, problem.c, &ss->rho);
    return truncation_k * problem.u * g.t0;
  }
  RvFunction sigma2;
  if (std::holds_alternative<BrownianDrift>(problem.model))
    sigma2 = RvFunction::power(1.0);
  else if (const auto* f = std::get_if<Fbm>(&problem.model))
    sigma2 = RvFunction::power(2.0 * f->hurst);
  else if (const auto* s = std::get_if<StationaryIncrements>(&problem.model))
    sigma2 = s->sigma2;
  else
    throw regime_error("truncation_horizon: unsupported model");
  const double a_inf = sigma2.index_at_infinity() / 2.0;
  if (!(a_inf > 0.0) || !(a_inf < 1.0))
    throw regime_error("truncation_horizon: variance index at infinity must lie in (0,2)");
  const double t_star = a_inf / (problem.c * (1.0 - a_inf));
  return truncation_k * problem.u * t_star;
}

PassageLawEstimate estimate_passage_law(const SojournProblem& problem, double x1, double x2,
                                        const GridSpec& grid, std::size_t replicates,
                                        std::uint64_t seed) {
  validate(problem);
  if (x1 > x2) throw std::invalid_argument("estimate_passage_law: need x1 <= x2");
  if (replicates < kMinReplicates)
    throw std::invalid_argument("estimate_passage_law: need replicates >= 100");

  const double v = resolve_scaling(problem);
  const double h = grid.step();
  const double window = std::min(problem.horizon, grid.horizon);
  const std::size_t i_end =
      std::min<std::size_t>(grid.steps, static_cast<std::size_t>(std::llround(window / h)));

  // count thresholds for the two running-sojourn levels
  const auto thresh1 = static_cast<std::uint64_t>(std::floor(x1 / (v * h))) + 1;
  const auto thresh2 = static_cast<std::uint64_t>(std::floor(x2 / (v * h))) + 1;

  // Normalization regime from the problem geometry.
  PassageRegime regime;
  std::string regime_tag;
  if (std::isinf(problem.horizon)) {
    if (const auto* ss = std::get_if<SelfSimilar>(&problem.model)) {
      const SelfSimilarGeometry g = self_similar_geometry(ss->hurst, problem.c, &ss->rho);
      const double scale = std::sqrt(g.a_hat * g.b_hat);  // statistic sqrt(AB)(tau - u t0)/u^H
      regime = InfiniteHorizonRegime{problem.u, g.t0, std::pow(problem.u, ss->hurst) / scale};
      regime_tag = "selfsim-infinite";
    } else {
      RvFunction sigma2 = std::holds_alternative<BrownianDrift>(problem.model)
                              ? RvFunction::power(1.0)
                          : std::holds_alternative<Fbm>(problem.model)
                              ? RvFunction::power(2.0 * std::get<Fbm>(problem.model).hurst)
                              : std::get<StationaryIncrements>(problem.model).sigma2;
      const InfiniteHorizonGeometry g = infinite_horizon_geometry(sigma2, problem.c, problem.u);
      regime = InfiniteHorizonRegime{problem.u, g.t_u, g.a_u};
      regime_tag = "stationary-infinite";
    }
  } else {
    double sigma_T = 0.0, sigma_dot_T = 0.0;
    if (const auto* ss = std::get_if<SelfSimilar>(&problem.model)) {
      sigma_T = std::pow(problem.horizon, ss->hurst);
      sigma_dot_T = ss->hurst * std::pow(problem.horizon, ss->hurst - 1.0);
      regime_tag = "selfsim-finite";
    } else {
      RvFunction sigma2 = std::holds_alternative<BrownianDrift>(problem.model)
                              ? RvFunction::power(1.0)
                          : std::holds_alternative<Fbm>(problem.model)
                              ? RvFunction::power(2.0 * std::get<Fbm>(problem.model).hurst)
                              : std::get<StationaryIncrements>(problem.model).sigma2;
      const FiniteHorizonGeometry g =
          finite_horizon_geometry(sigma2, problem.c, problem.horizon, problem.u);
      sigma_T = g.sigma_T;
      sigma_dot_T = g.sigma_dot_T;
      regime_tag = "stationary-finite";
    }
    regime = FiniteHorizonRegime{problem.u, problem.horizon, sigma_T, sigma_dot_T};
  }

  // Per-replicate passage times, indexed by replicate for determinism.
  std::vector<double> tau1(replicates), tau2(replicates);
  const bool streaming = is_streaming_family(problem.model);
  const std::size_t n_blocks = std::min<std::size_t>(replicates, 8 * max_threads());
  const double c = problem.c;

  parallel_blocks(replicates, n_blocks, [&](std::size_t, std::size_t lo, std::size_t hi) {
    std::vector<double> path;
    PathSampler sampler = streaming ? PathSampler(ProcessModel{ZeroProcess{}}, 1, 1.0)
                                    : PathSampler(problem.model, grid.steps, grid.step());
    if (!streaming) path.resize(grid.points());
    const double sh = std::sqrt(h);
    const bool is_line = std::holds_alternative<LineProcess>(problem.model);
    const bool is_zero = std::holds_alternative<ZeroProcess>(problem.model);

    for (std::size_t r = lo; r < hi; ++r) {
      CounterRng rng(seed, r);
      double t1 = kInfinity, t2 = kInfinity;
      std::uint64_t count = 0;

      if (streaming) {
        double y = 0.0;
        double line_z = 0.0;
        if (is_line) line_z = rng.normal();
        for (std::size_t k = 1; k <= i_end; ++k) {
          const std::size_t i = k - 1;
          if (i > 0) {
            if (is_line)
              y = (line_z - c) * (static_cast<double>(i) * h);
            else if (is_zero)
              y = -c * static_cast<double>(i) * h;
            else
              y += sh * rng.normal() - c * h;
          }
          count += (y > problem.u) ? 1u : 0u;
          if (std::isinf(t1) && count >= thresh1) t1 = static_cast<double>(k) * h;
          if (count >= thresh2) {
            t2 = static_cast<double>(k) * h;
            break;
          }
        }
      } else {
        sampler.sample(rng, path);
        for (std::size_t k = 1; k <= i_end; ++k) {
          const std::size_t i = k - 1;
          const double y = path[i] - c * (static_cast<double>(i) * h);
          count += (y > problem.u) ? 1u : 0u;
          if (std::isinf(t1) && count >= thresh1) t1 = static_cast<double>(k) * h;
          if (count >= thresh2) {
            t2 = static_cast<double>(k) * h;
            break;
          }
        }
      }
      tau1[r] = t1;
      tau2[r] = t2;
    }
  });

  PassageLawEstimate out;
  out.replicates = replicates;
  out.regime = regime_tag;
  for (std::size_t r = 0; r < replicates; ++r) {
    if (std::isinf(tau1[r])) continue;
    ++out.accepted;
    if (std::isinf(tau2[r])) {
      ++out.atom_hits;
      continue;
    }
    const auto stat = normalize_passage(PassageSample{tau2[r], false}, regime);
    if (stat) out.normalized.push_back(*stat);
  }
  if (out.accepted == 0)
    throw degenerate_conditioning_error(
        "estimate_passage_law: no replicate satisfied the conditioning event");
  std::sort(out.normalized.begin(), out.normalized.end());
  out.acceptance_rate = static_cast<double>(out.accepted) / static_cast<double>(replicates);
  out.atom_mass = static_cast<double>(out.atom_hits) / static_cast<double>(out.accepted);
  return out;
}

ConvergenceStudy convergence_study(const SojournProblem& problem_template,
                                   std::span<const double> u_ladder, const GridPolicy& policy,
                                   std::size_t replicates, std::uint64_t seed,
                                   const BermanValues* supplied) {
  if (u_ladder.empty()) throw std::invalid_argument("convergence_study: empty ladder");
  if (!std::is_sorted(u_ladder.begin(), u_ladder.end()))
    throw std::invalid_argument("convergence_study: u ladder must be increasing");

  ConvergenceStudy study;
  for (const double u : u_ladder) {
    SojournProblem p = problem_template;
    p.u = u;
    double window = 0.0;
    try {
      window = truncation_horizon(p, policy.truncation_k);
    } catch (const std::exception& e) {
      throw regime_error("convergence_study: u=" + std::to_string(u) + ": " + e.what());
    }
    const auto steps = static_cast<std::size_t>(std::ceil(window / policy.step));
    const GridSpec grid = build_grid(static_cast<double>(steps) * policy.step, steps);

    ConvergenceRow row;
    row.u = u;
    row.mc = estimate_tail(p, grid, replicates, seed);
    row.asymptotic = evaluate_asymptotic(p, supplied);
    row.ratio = row.asymptotic.value > 0.0 ? row.mc.p_hat / row.asymptotic.value : 0.0;
    study.rows.push_back(std::move(row));
  }

  if (study.rows.size() >= 3) {
    const std::size_t half = study.rows.size() / 2;
    bool improving = true;
    for (std::size_t i = half; i + 1 < study.rows.size(); ++i)
      improving = improving && std::fabs(study.rows[i + 1].ratio - 1.0) <=
                                   std::fabs(study.rows[i].ratio - 1.0) + 1e-12;
    study.trend_improving = improving;
  }
  return study;
}

}  // namespace sojourn

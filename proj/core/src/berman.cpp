#include "sojourn/berman.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <stdexcept>

#include "sojourn/asymptotics.hpp"
#include "sojourn/errors.hpp"
#include "sojourn/parallel.hpp"
#include "sojourn/rng.hpp"

namespace sojourn {
namespace {

std::string fmt_g(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

long long aligned_index(double t, double step, const char* what) {
  const double real = t / step;
  const auto idx = static_cast<long long>(std::llround(real));
  if (std::fabs(real - static_cast<double>(idx)) > 1e-9 * std::max(1.0, std::fabs(real)))
    throw std::invalid_argument(std::string(what) + ": endpoints must align to the grid step");
  return idx;
}

/// The fBm variance exponent when the process is exactly a unit-scale fBm.
std::optional<double> fbm_alpha(const ProcessModel& process) {
  if (std::holds_alternative<BrownianDrift>(process)) return 1.0;
  if (const auto* f = std::get_if<Fbm>(&process)) return 2.0 * f->hurst;
  if (std::holds_alternative<LineProcess>(process)) return 2.0;
  if (const auto* s = std::get_if<StationaryIncrements>(&process)) {
    const auto& p = s->sigma2.as_power();
    if (p && p->coeff == 1.0) return p->exponent;
  }
  if (const auto* s = std::get_if<SelfSimilar>(&process)) return 2.0 * s->hurst;
  return std::nullopt;
}

std::string drift_label(const DriftField& h) {
  if (h.is_zero()) return "0";
  if (h.is_power()) return "pow:" + fmt_g(h.gamma()) + "," + fmt_g(h.beta());
  return "custom";
}

struct WeightStats {
  double mean = 0.0;
  double se = 0.0;
  double trimmed = 0.0;
};

WeightStats summarize(std::span<const double> w) {
  WeightStats s;
  const std::size_t n = w.size();
  if (n == 0) return s;
  const double sum = std::accumulate(w.begin(), w.end(), 0.0);
  s.mean = sum / static_cast<double>(n);

  const auto [mn, mx] = std::minmax_element(w.begin(), w.end());
  if (*mn == *mx) {
    s.se = 0.0;  // degenerate sample, e.g. the zero process
    s.trimmed = s.mean;
    return s;
  }

  double ss = 0.0;
  for (const double v : w) ss += (v - s.mean) * (v - s.mean);
  s.se = n > 1 ? std::sqrt(ss / static_cast<double>(n - 1) / static_cast<double>(n)) : 0.0;

  std::vector<double> sorted(w.begin(), w.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t cut = static_cast<std::size_t>(0.05 * static_cast<double>(n));
  const double tsum = std::accumulate(sorted.begin() + cut, sorted.end() - cut, 0.0);
  s.trimmed = tsum / static_cast<double>(n - 2 * cut);
  return s;
}

double zstar_into(std::span<const double> m, std::span<double> scratch, double step, double x) {
  const std::size_t len = m.size();
  const auto rank = static_cast<std::size_t>(std::floor(x / step));
  if (rank + 1 > len) return 0.0;
  std::copy(m.begin(), m.end(), scratch.begin());
  std::nth_element(scratch.begin(), scratch.begin() + static_cast<std::ptrdiff_t>(rank),
                   scratch.begin() + static_cast<std::ptrdiff_t>(len), std::greater<>());
  return std::exp(scratch[rank]);
}

/// Shared worker: simulates W on the window, forms the field
/// sqrt(2) W - Var W - h on the requested points, and evaluates the collapsed
/// weight for each evaluation slice.
struct Slice {
  std::size_t offset = 0;  // first field index
  std::size_t count = 0;   // number of field points
  double x = 0.0;
};

void run_replicates(const ProcessModel& process, const DriftField& h, double step,
                    double window_origin, std::size_t window_steps,
                    std::span<const std::size_t> field_index, std::span<const Slice> slices,
                    std::size_t replicates, std::uint64_t seed,
                    std::vector<std::vector<double>>& weights_per_slice) {
  const std::size_t n_field = field_index.size();
  std::vector<double> var_term(n_field), drift_term(n_field);
  for (std::size_t i = 0; i < n_field; ++i) {
    const double t = window_origin + static_cast<double>(field_index[i]) * step;
    var_term[i] = variance_at(process, t);
    drift_term[i] = h(t);
  }

  for (auto& v : weights_per_slice) v.assign(replicates, 0.0);

  const std::size_t n_blocks = std::min<std::size_t>(replicates, 4 * max_threads());
  parallel_blocks(replicates, n_blocks, [&](std::size_t, std::size_t lo, std::size_t hi) {
    PathSampler sampler(process, window_steps, step, window_origin);
    std::vector<double> path(window_steps + 1);
    std::vector<double> field(n_field);
    std::vector<double> scratch(n_field);
    constexpr double kSqrt2 = 1.4142135623730951;

    for (std::size_t r = lo; r < hi; ++r) {
      CounterRng rng(seed, r);
      sampler.sample(rng, path);
      for (std::size_t i = 0; i < n_field; ++i)
        field[i] = kSqrt2 * path[field_index[i]] - var_term[i] - drift_term[i];
      for (std::size_t s = 0; s < slices.size(); ++s) {
        const Slice& sl = slices[s];
        weights_per_slice[s][r] =
            zstar_into(std::span(field).subspan(sl.offset, sl.count),
                       std::span(scratch).first(sl.count), step, sl.x);
      }
    }
  });
}

}  // namespace

double default_grid_step(double a, double b) {
  if (!(b > a)) throw std::invalid_argument("default_grid_step: need b > a");
  return std::min((b - a) * 0x1.0p-10, 0x1.0p-7);
}

double zstar_weight(std::span<const double> field_values, double step, double x) {
  if (!(step > 0.0)) throw std::invalid_argument("zstar_weight: step must be positive");
  if (x < 0.0) throw std::invalid_argument("zstar_weight: x must be >= 0");
  std::vector<double> scratch(field_values.size());
  return zstar_into(field_values, scratch, step, x);
}

std::string process_label(const ProcessModel& model) {
  return std::visit(
      [](const auto& m) -> std::string {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, BrownianDrift>) return "brownian";
        if constexpr (std::is_same_v<T, Fbm>) return "fbm:" + fmt_g(m.hurst);
        if constexpr (std::is_same_v<T, StationaryIncrements>) return "si:" + m.sigma2.label();
        if constexpr (std::is_same_v<T, SelfSimilar>)
          return "selfsim:" + fmt_g(m.hurst) + "," + m.rho.label();
        if constexpr (std::is_same_v<T, LineProcess>) return "line";
        if constexpr (std::is_same_v<T, ZeroProcess>) return "zero";
      },
      model);
}

std::string berman_constant_key(const ProcessModel& process, const DriftField& h, double x,
                                BermanMode mode, double a, double b) {
  const auto alpha = fbm_alpha(process);
  switch (mode) {
    case BermanMode::limit:
      if (alpha && h.is_zero()) return pickands_key(*alpha, x);
      return "B[" + process_label(process) + "][h=" + drift_label(h) + "][x=" + fmt_g(x) +
             "][limit]";
    case BermanMode::halfline_limit:
      if (alpha && *alpha == 1.0 && h.is_power() && h.beta() == 1.0)
        return drifted_b1_key(h.gamma(), x);
      return "B[" + (alpha ? "fbm:" + fmt_g(*alpha) : process_label(process)) +
             "][h=" + drift_label(h) + "][x=" + fmt_g(x) + "][halfline-limit]";
    case BermanMode::hat:
      return "Bhat[" + (alpha ? "fbm:" + fmt_g(*alpha) : process_label(process)) +
             "][h=" + drift_label(h) + "][x=" + fmt_g(x) + "]";
    case BermanMode::interval:
      return "B[" + process_label(process) + "][h=" + drift_label(h) + "][x=" + fmt_g(x) +
             "][E=" + fmt_g(a) + "," + fmt_g(b) + "]";
  }
  throw std::invalid_argument("berman_constant_key: unknown mode");
}

std::string berman_spec_hash(const BermanSpec& spec) {
  const std::string canon = "proc=" + process_label(spec.process) + ";h=" + drift_label(spec.h) +
                            ";x=" + fmt_g(spec.x) + ";a=" + fmt_g(spec.interval_a) +
                            ";b=" + fmt_g(spec.interval_b) + ";step=" + fmt_g(spec.grid_step) +
                            ";reps=" + std::to_string(spec.replicates) +
                            ";seed=" + std::to_string(spec.seed);
  std::uint64_t hash = 0xCBF29CE484222325ULL;
  for (const unsigned char ch : canon) {
    hash ^= ch;
    hash *= 0x100000001B3ULL;
  }
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash));
  return buf;
}

BermanEstimate berman_interval(const BermanSpec& spec) {
  if (!(spec.interval_b - spec.interval_a > spec.x))
    throw std::invalid_argument("berman_interval: need b - a > x");
  if (spec.replicates == 0) throw std::invalid_argument("berman_interval: need replicates >= 1");
  const double step =
      spec.grid_step > 0.0 ? spec.grid_step : default_grid_step(spec.interval_a, spec.interval_b);

  const long long ia = aligned_index(spec.interval_a, step, "berman_interval");
  const long long ib = aligned_index(spec.interval_b, step, "berman_interval");
  const long long lo = std::min<long long>(ia, 0);
  const long long hi = std::max<long long>(ib, 0);
  const auto window_steps = static_cast<std::size_t>(hi - lo);
  const double origin = static_cast<double>(lo) * step;

  const auto n_field = static_cast<std::size_t>(ib - ia);
  std::vector<std::size_t> field_index(n_field);
  for (std::size_t i = 0; i < n_field; ++i)
    field_index[i] = static_cast<std::size_t>(ia - lo) + i;

  const Slice slice{0, n_field, spec.x};
  std::vector<std::vector<double>> weights(1);
  run_replicates(spec.process, spec.h, step, origin, window_steps, field_index, {&slice, 1},
                 spec.replicates, spec.seed, weights);

  const WeightStats stats = summarize(weights[0]);
  BermanEstimate est;
  est.point = stats.mean;
  est.se = stats.se;
  est.trimmed_mean = stats.trimmed;
  est.replicates = spec.replicates;
  est.normalization = BermanNormalization::none;
  est.constant_key = berman_constant_key(spec.process, spec.h, spec.x, BermanMode::interval,
                                         spec.interval_a, spec.interval_b);
  est.record_id = "interval-" + berman_spec_hash(spec);
  return est;
}

namespace {

/// Ladder runner shared by the limit estimators: nested windows [0, S_j]
/// evaluated on one simulation of [0, S_max].
struct LadderRun {
  std::vector<std::vector<double>> weights;  // per rung, per replicate
  double step = 0.0;
};

LadderRun run_ladder(const ProcessModel& process, const DriftField& h, double x,
                     std::span<const double> s_ladder, double grid_step, std::size_t replicates,
                     std::uint64_t seed) {
  if (s_ladder.size() < 2)
    throw std::invalid_argument("berman ladder: need at least two S values");
  if (!std::is_sorted(s_ladder.begin(), s_ladder.end()))
    throw std::invalid_argument("berman ladder: S values must be increasing");
  if (!(s_ladder.back() > x))
    throw std::invalid_argument("berman ladder: max(S) must exceed x");
  if (replicates == 0) throw std::invalid_argument("berman ladder: need replicates >= 1");

  const double s_max = s_ladder.back();
  const double step = grid_step > 0.0 ? grid_step : default_grid_step(0.0, s_max);
  const auto window_steps = static_cast<std::size_t>(aligned_index(s_max, step, "berman ladder"));

  std::vector<std::size_t> field_index(window_steps);
  for (std::size_t i = 0; i < window_steps; ++i) field_index[i] = i;

  std::vector<Slice> slices;
  slices.reserve(s_ladder.size());
  for (const double s : s_ladder) {
    const auto n = static_cast<std::size_t>(aligned_index(s, step, "berman ladder"));
    slices.push_back({0, n, x});
  }

  LadderRun run;
  run.step = step;
  run.weights.resize(slices.size());
  run_replicates(process, h, step, 0.0, window_steps, field_index, slices, replicates, seed,
                 run.weights);
  return run;
}

std::string run_record_id(const char* mode, const ProcessModel& process, const DriftField& h,
                          double x, double a, double b, double step, std::size_t replicates,
                          std::uint64_t seed) {
  BermanSpec rep;
  rep.process = process;
  rep.h = h;
  rep.x = x;
  rep.interval_a = a;
  rep.interval_b = b;
  rep.grid_step = step;
  rep.replicates = replicates;
  rep.seed = seed;
  return std::string(mode) + "-" + berman_spec_hash(rep);
}

}  // namespace

BermanEstimate berman_limit(const ProcessModel& process, double x,
                            std::span<const double> s_ladder, double grid_step,
                            std::size_t replicates, std::uint64_t seed) {
  if (s_ladder.size() < 3) throw std::invalid_argument("berman_limit: ladder length must be >= 3");
  bool any_above = false;
  for (const double s : s_ladder) any_above = any_above || s > x;
  if (!any_above) throw std::invalid_argument("berman_limit: every S is below x");

  const DriftField h = DriftField::zero();
  const LadderRun run = run_ladder(process, h, x, s_ladder, grid_step, replicates, seed);

  BermanEstimate est;
  est.replicates = replicates;
  est.normalization = BermanNormalization::divide_by_s;
  est.constant_key = berman_constant_key(process, h, x, BermanMode::limit);
  est.record_id =
      run_record_id("limit", process, h, x, 0.0, s_ladder.back(), run.step, replicates, seed);

  const std::size_t k = s_ladder.size();
  for (std::size_t j = 0; j < k; ++j) {
    const WeightStats stats = summarize(run.weights[j]);
    est.ladder.push_back({s_ladder[j], stats.mean / s_ladder[j], stats.se / s_ladder[j]});
  }

  // Last-two-point Richardson extrapolation on 1/S, evaluated per replicate
  // so the standard error is honest about the path coupling.
  const double s1 = s_ladder[k - 2], s2 = s_ladder[k - 1];
  std::vector<double> extrap(replicates);
  for (std::size_t r = 0; r < replicates; ++r)
    extrap[r] = (run.weights[k - 1][r] - run.weights[k - 2][r]) / (s2 - s1);
  const WeightStats stats = summarize(extrap);
  est.point = stats.mean;
  est.se = stats.se;
  est.trimmed_mean = stats.trimmed;

  std::vector<double> diff(replicates);
  for (std::size_t r = 0; r < replicates; ++r)
    diff[r] = run.weights[k - 1][r] / s2 - run.weights[k - 2][r] / s1;
  const WeightStats dstats = summarize(diff);
  est.warning = std::fabs(dstats.mean) > 5.0 * dstats.se && dstats.se > 0.0;
  return est;
}

BermanEstimate berman_halfline_limit(const ProcessModel& process, const DriftField& h, double x,
                                     std::span<const double> s_ladder, double grid_step,
                                     std::size_t replicates, std::uint64_t seed) {
  const LadderRun run = run_ladder(process, h, x, s_ladder, grid_step, replicates, seed);

  BermanEstimate est;
  est.replicates = replicates;
  est.normalization = BermanNormalization::none;
  est.constant_key = berman_constant_key(process, h, x, BermanMode::halfline_limit);
  est.record_id = run_record_id("halfline", process, h, x, 0.0, s_ladder.back(), run.step,
                                replicates, seed);

  const std::size_t k = s_ladder.size();
  for (std::size_t j = 0; j < k; ++j) {
    const WeightStats stats = summarize(run.weights[j]);
    est.ladder.push_back({s_ladder[j], stats.mean, stats.se});
  }
  const WeightStats stats = summarize(run.weights[k - 1]);
  est.point = stats.mean;
  est.se = stats.se;
  est.trimmed_mean = stats.trimmed;

  std::vector<double> diff(replicates);
  for (std::size_t r = 0; r < replicates; ++r)
    diff[r] = run.weights[k - 1][r] - run.weights[k - 2][r];
  const WeightStats dstats = summarize(diff);
  est.warning = std::fabs(dstats.mean) > 5.0 * dstats.se && dstats.se > 0.0;
  return est;
}

BermanEstimate berman_hat(const ProcessModel& process, const DriftField& h, double x, double s,
                          double grid_step, std::size_t replicates, std::uint64_t seed) {
  if (!(s > 0.0)) throw std::invalid_argument("berman_hat: S must be positive");
  if (replicates == 0) throw std::invalid_argument("berman_hat: need replicates >= 1");
  const double step = grid_step > 0.0 ? grid_step : default_grid_step(-s, s);

  const auto half_steps = static_cast<std::size_t>(aligned_index(s, step, "berman_hat"));
  const std::size_t window_steps = 2 * half_steps;
  const double origin = -s;

  std::vector<std::size_t> field_index(window_steps);
  for (std::size_t i = 0; i < window_steps; ++i) field_index[i] = i;

  // full window [-S, S) and the centered half window [-S/2, S/2)
  const std::size_t quarter = half_steps / 2;
  const Slice slices[2] = {{0, window_steps, x}, {quarter, half_steps, x}};

  std::vector<std::vector<double>> weights(2);
  run_replicates(process, h, step, origin, window_steps, field_index, slices, replicates, seed,
                 weights);

  const WeightStats full = summarize(weights[0]);
  BermanEstimate est;
  est.point = full.mean;
  est.se = full.se;
  est.trimmed_mean = full.trimmed;
  est.replicates = replicates;
  est.normalization = BermanNormalization::none;
  est.constant_key = berman_constant_key(process, h, x, BermanMode::hat);
  est.record_id = run_record_id("hat", process, h, x, -s, s, step, replicates, seed);
  est.ladder.push_back({s, full.mean, full.se});
  const WeightStats half = summarize(weights[1]);
  est.ladder.insert(est.ladder.begin(), {0.5 * s, half.mean, half.se});

  std::vector<double> diff(replicates);
  for (std::size_t r = 0; r < replicates; ++r) diff[r] = weights[0][r] - weights[1][r];
  const WeightStats dstats = summarize(diff);
  est.warning = (std::fabs(dstats.mean) > 5.0 * dstats.se && dstats.se > 0.0) || s <= 0.5 * x;
  return est;
}

}  // namespace sojourn

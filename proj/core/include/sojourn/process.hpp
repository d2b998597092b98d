#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <variant>
#include <vector>

#include "sojourn/descriptors.hpp"
#include "sojourn/grid.hpp"
#include "sojourn/rng.hpp"

namespace sojourn {

/// Trendless standard Brownian motion, sigma^2(t) = t. The drift enters
/// separately through drift_adjust / the trend parameter c.
struct BrownianDrift {};

/// Fractional Brownian motion with Var X(t) = |t|^{2H}, H in (0,1].
struct Fbm {
  double hurst = 0.5;
};

/// Centered Gaussian process with stationary increments described by its
/// variance function sigma^2 (declared regular-variation indexes at 0 and
/// infinity drive all case classification).
struct StationaryIncrements {
  RvFunction sigma2;
};

/// Centered self-similar Gaussian process of index H with local correlation
/// decay 1 - Corr(X(s),X(t)) ~ rho(|t-s|) near the critical time. The pair
/// (H, rho) pins the law only in the fBm-compatible case rho-index == 2H;
/// other descriptors are usable by the asymptotics module only.
struct SelfSimilar {
  double hurst = 0.5;
  RvFunction rho;
  double t0 = 0.0;
};

/// X(t) = t * N with a single standard normal N (the degenerate alpha=2 case).
struct LineProcess {};

/// X(t) identically zero.
struct ZeroProcess {};

using ProcessModel =
    std::variant<BrownianDrift, Fbm, StationaryIncrements, SelfSimilar, LineProcess, ZeroProcess>;

/// Sampled trendless path on a uniform grid.
struct SamplePath {
  GridSpec grid;
  std::vector<double> values;  // size grid.points(), values[0] corresponds to t=0
  std::uint64_t seed = 0;
  ProcessModel model;
};

/// Covariance Cov(X(s), X(t)) for s,t >= 0. Throws std::invalid_argument on
/// negative times or on self-similar descriptors that do not determine a law.
double covariance(const ProcessModel& model, double s, double t);

/// Var X(t) with the two-sided |t| convention used by the constant estimators.
double variance_at(const ProcessModel& model, double t);

/// Exact-in-distribution draw on the grid, deterministic given
/// (model, grid, seed, stream). Circulant embedding of the increments for the
/// stationary-increments family, dense factorization with jitter escalation
/// as fallback.
SamplePath simulate(const ProcessModel& model, const GridSpec& grid, std::uint64_t seed,
                    std::uint64_t stream = 0);

/// X(t_i) - c * t_i
std::vector<double> drift_adjust(const SamplePath& path, double c);

/// Reusable path generator bound to (model, window). The window is
/// t_origin + i*step, i = 0..n_steps, and must contain t = 0 (where the
/// process is pinned) unless the model is degenerate.
///
/// A sampler owns scratch transform buffers and is not safe for concurrent
/// sample() calls; give each worker its own instance.
class PathSampler {
 public:
  PathSampler(const ProcessModel& model, std::size_t n_steps, double step, double t_origin = 0.0);
  ~PathSampler();
  PathSampler(PathSampler&&) noexcept;
  PathSampler& operator=(PathSampler&&) noexcept;
  PathSampler(const PathSampler&) = delete;
  PathSampler& operator=(const PathSampler&) = delete;

  /// Fills out (size n_steps+1) with one draw.
  void sample(CounterRng& rng, std::span<double> out);

  std::size_t n_steps() const;
  double step() const;
  bool used_dense_fallback() const;

  struct Impl;

 private:
  std::unique_ptr<Impl> impl_;
};

/// True for the families whose paths can be streamed point by point without a
/// transform (Brownian motion, line process, zero process).
bool is_streaming_family(const ProcessModel& model);

}  // namespace sojourn

#include "sojourn/process.hpp"

#include <fftw3.h>

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <complex>
#include <mutex>
#include <sstream>
#include <stdexcept>

#include "sojourn/errors.hpp"

namespace sojourn {
namespace {

std::mutex& fftw_plan_mutex() {
  static std::mutex m;
  return m;
}

bool fbm_compatible(const SelfSimilar& m) {
  const auto& p = m.rho.as_power();
  return p.has_value() && std::fabs(p->exponent - 2.0 * m.hurst) < 1e-12;
}

void check_times(double s, double t) {
  if (s < 0.0 || t < 0.0) throw std::invalid_argument("covariance: negative time");
}

/// Variance of the process at |t| (two-sided convention).
double model_variance(const ProcessModel& model, double t) {
  const double a = std::fabs(t);
  return std::visit(
      [&](const auto& m) -> double {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, BrownianDrift>) {
          return a;
        } else if constexpr (std::is_same_v<T, Fbm>) {
          return std::pow(a, 2.0 * m.hurst);
        } else if constexpr (std::is_same_v<T, StationaryIncrements>) {
          return a == 0.0 ? 0.0 : m.sigma2(a);
        } else if constexpr (std::is_same_v<T, SelfSimilar>) {
          if (!fbm_compatible(m))
            throw std::invalid_argument(
                "self-similar model: (H, rho) determines a law only when the rho index equals 2H");
          return std::pow(a, 2.0 * m.hurst);
        } else if constexpr (std::is_same_v<T, LineProcess>) {
          return a * a;
        } else {
          return 0.0;  // ZeroProcess
        }
      },
      model);
}

/// Stationary-increments covariance from the variance structure:
/// Cov(s,t) = (V(s) + V(t) - V(t-s)) / 2.
double si_covariance(const ProcessModel& model, double s, double t) {
  return 0.5 * (model_variance(model, s) + model_variance(model, t) -
                model_variance(model, t - s));
}

}  // namespace

double covariance(const ProcessModel& model, double s, double t) {
  check_times(s, t);
  return std::visit(
      [&](const auto& m) -> double {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, LineProcess>) {
          return s * t;
        } else if constexpr (std::is_same_v<T, ZeroProcess>) {
          return 0.0;
        } else {
          (void)m;
          return si_covariance(model, s, t);
        }
      },
      model);
}

double variance_at(const ProcessModel& model, double t) { return model_variance(model, t); }

bool is_streaming_family(const ProcessModel& model) {
  return std::holds_alternative<BrownianDrift>(model) ||
         std::holds_alternative<LineProcess>(model) || std::holds_alternative<ZeroProcess>(model);
}

// ---------------------------------------------------------------------------
// PathSampler
// ---------------------------------------------------------------------------

struct PathSampler::Impl {
  ProcessModel model;
  std::size_t n = 0;       // number of steps
  double h = 0.0;          // step
  double origin = 0.0;     // first grid time
  std::size_t pin = 0;     // index of t = 0 in the grid
  enum class Method { brownian, line, zero, circulant, dense } method = Method::zero;

  // circulant embedding state
  std::size_t m = 0;  // embedding size 2n
  std::vector<double> half_spectrum;  // sqrt(lambda_j / m) premultipliers, size m
  fftw_plan plan = nullptr;
  fftw_complex* in = nullptr;
  fftw_complex* out = nullptr;

  // dense fallback state: lower factor of the covariance of values at grid
  // times excluding the pinned index
  Eigen::MatrixXd chol_lower;

  ~Impl() {
    if (plan || in || out) {
      std::lock_guard<std::mutex> lock(fftw_plan_mutex());
      if (plan) fftw_destroy_plan(plan);
      if (in) fftw_free(in);
      if (out) fftw_free(out);
    }
  }
};

namespace {

/// Autocovariance of the increment sequence at lag k, from the two-sided
/// variance structure.
double increment_autocov(const ProcessModel& model, double h, std::size_t k) {
  const double kk = static_cast<double>(k);
  return 0.5 * (model_variance(model, (kk + 1.0) * h) + model_variance(model, (kk - 1.0) * h) -
                2.0 * model_variance(model, kk * h));
}

void setup_circulant(PathSampler::Impl& s) {
  const std::size_t n = s.n;
  const std::size_t m = 2 * n;
  std::vector<double> first_row(m);
  for (std::size_t j = 0; j <= n; ++j) first_row[j] = increment_autocov(s.model, s.h, j);
  for (std::size_t j = n + 1; j < m; ++j) first_row[j] = first_row[m - j];

  std::vector<std::complex<double>> spec(m);
  {
    std::lock_guard<std::mutex> lock(fftw_plan_mutex());
    fftw_complex* buf = fftw_alloc_complex(m);
    fftw_plan p = fftw_plan_dft_1d(static_cast<int>(m), buf, buf, FFTW_FORWARD, FFTW_ESTIMATE);
    for (std::size_t j = 0; j < m; ++j) {
      buf[j][0] = first_row[j];
      buf[j][1] = 0.0;
    }
    fftw_execute(p);
    for (std::size_t j = 0; j < m; ++j) spec[j] = {buf[j][0], buf[j][1]};
    fftw_destroy_plan(p);
    fftw_free(buf);
  }

  double max_eig = 0.0, min_eig = 0.0;
  for (const auto& z : spec) {
    max_eig = std::max(max_eig, z.real());
    min_eig = std::min(min_eig, z.real());
  }
  // Tiny negative eigenvalues are numerical noise and are clamped; a
  // substantially indefinite embedding falls back to dense factorization.
  if (min_eig < -1e-9 * std::max(1.0, max_eig)) {
    s.method = PathSampler::Impl::Method::dense;
    return;
  }

  s.m = m;
  s.half_spectrum.resize(m);
  const double dm = static_cast<double>(m);
  for (std::size_t j = 0; j < m; ++j) {
    const double lam = std::max(0.0, spec[j].real());
    const double scale = (j == 0 || j == n) ? std::sqrt(lam / dm) : std::sqrt(lam / (2.0 * dm));
    s.half_spectrum[j] = scale;
  }

  std::lock_guard<std::mutex> lock(fftw_plan_mutex());
  s.in = fftw_alloc_complex(m);
  s.out = fftw_alloc_complex(m);
  s.plan = fftw_plan_dft_1d(static_cast<int>(m), s.in, s.out, FFTW_FORWARD, FFTW_ESTIMATE);
}

void setup_dense(PathSampler::Impl& s) {
  const std::size_t pts = s.n + 1;
  std::vector<double> times(pts);
  for (std::size_t i = 0; i < pts; ++i) times[i] = s.origin + static_cast<double>(i) * s.h;

  std::vector<std::size_t> free_idx;
  free_idx.reserve(pts - 1);
  for (std::size_t i = 0; i < pts; ++i)
    if (i != s.pin) free_idx.push_back(i);

  const auto cov2 = [&](double a, double b) {
    // Two-sided stationary-increments covariance pinned at 0.
    return 0.5 * (model_variance(s.model, a) + model_variance(s.model, b) -
                  model_variance(s.model, b - a));
  };

  const Eigen::Index nf = static_cast<Eigen::Index>(free_idx.size());
  Eigen::MatrixXd cov(nf, nf);
  for (Eigen::Index i = 0; i < nf; ++i)
    for (Eigen::Index j = 0; j <= i; ++j) {
      const double v = cov2(times[free_idx[static_cast<std::size_t>(i)]],
                            times[free_idx[static_cast<std::size_t>(j)]]);
      cov(i, j) = v;
      cov(j, i) = v;
    }

  double jitter = 1e-12;
  for (int attempt = 0; attempt <= 3; ++attempt) {
    Eigen::MatrixXd work = cov;
    if (attempt > 0) work.diagonal().array() += jitter;
    Eigen::LLT<Eigen::MatrixXd> llt(work);
    if (llt.info() == Eigen::Success) {
      s.chol_lower = llt.matrixL();
      return;
    }
    if (attempt > 0) jitter *= 10.0;
  }
  std::ostringstream msg;
  msg << "simulate: covariance matrix not positive semidefinite after jitter escalation "
      << "(model " << s.model.index() << ", " << pts << " grid points, last jitter " << jitter
      << ")";
  throw simulation_error(msg.str());
}

}  // namespace

PathSampler::PathSampler(const ProcessModel& model, std::size_t n_steps, double step,
                         double t_origin)
    : impl_(std::make_unique<Impl>()) {
  if (n_steps < 1) throw std::invalid_argument("PathSampler: need at least one step");
  if (!(step > 0.0)) throw std::invalid_argument("PathSampler: step must be positive");
  impl_->model = model;
  impl_->n = n_steps;
  impl_->h = step;
  impl_->origin = t_origin;

  const double pin_real = -t_origin / step;
  const auto pin = static_cast<long long>(std::llround(pin_real));
  if (std::fabs(pin_real - static_cast<double>(pin)) > 1e-9 || pin < 0 ||
      pin > static_cast<long long>(n_steps))
    throw std::invalid_argument("PathSampler: the grid must contain t = 0");
  impl_->pin = static_cast<std::size_t>(pin);

  if (std::holds_alternative<ZeroProcess>(model)) {
    impl_->method = Impl::Method::zero;
  } else if (std::holds_alternative<LineProcess>(model)) {
    impl_->method = Impl::Method::line;
  } else if (std::holds_alternative<BrownianDrift>(model)) {
    impl_->method = Impl::Method::brownian;
  } else if (std::holds_alternative<SelfSimilar>(model) &&
             !fbm_compatible(std::get<SelfSimilar>(model))) {
    throw std::invalid_argument(
        "simulate: self-similar model is fBm-compatible only when the rho index equals 2H");
  } else {
    impl_->method = Impl::Method::circulant;
    setup_circulant(*impl_);
    if (impl_->method == Impl::Method::dense) setup_dense(*impl_);
  }
}

PathSampler::~PathSampler() = default;
PathSampler::PathSampler(PathSampler&&) noexcept = default;
PathSampler& PathSampler::operator=(PathSampler&&) noexcept = default;

std::size_t PathSampler::n_steps() const { return impl_->n; }
double PathSampler::step() const { return impl_->h; }
bool PathSampler::used_dense_fallback() const {
  return impl_->method == Impl::Method::dense;
}

void PathSampler::sample(CounterRng& rng, std::span<double> out) {
  Impl& s = *impl_;
  if (out.size() != s.n + 1) throw std::invalid_argument("PathSampler::sample: bad output size");

  switch (s.method) {
    case Impl::Method::zero: {
      std::fill(out.begin(), out.end(), 0.0);
      return;
    }
    case Impl::Method::line: {
      const double z = rng.normal();
      for (std::size_t i = 0; i <= s.n; ++i)
        out[i] = (s.origin + static_cast<double>(i) * s.h) * z;
      return;
    }
    case Impl::Method::brownian: {
      const double sh = std::sqrt(s.h);
      out[s.pin] = 0.0;
      for (std::size_t i = s.pin; i < s.n; ++i) out[i + 1] = out[i] + sh * rng.normal();
      for (std::size_t i = s.pin; i > 0; --i) out[i - 1] = out[i] - sh * rng.normal();
      return;
    }
    case Impl::Method::circulant: {
      // Dietrich-Newsam synthesis: Hermitian-symmetric spectral noise, one
      // FFT, real parts are the stationary increment sequence.
      const std::size_t n = s.n, m = s.m;
      s.in[0][0] = s.half_spectrum[0] * rng.normal();
      s.in[0][1] = 0.0;
      s.in[n][0] = s.half_spectrum[n] * rng.normal();
      s.in[n][1] = 0.0;
      for (std::size_t j = 1; j < n; ++j) {
        const double re = s.half_spectrum[j] * rng.normal();
        const double im = s.half_spectrum[j] * rng.normal();
        s.in[j][0] = re;
        s.in[j][1] = im;
        s.in[m - j][0] = re;
        s.in[m - j][1] = -im;
      }
      fftw_execute_dft(s.plan, s.in, s.out);
      // increments live in out[0..n-1]; cumulate and pin at t = 0
      double acc = 0.0;
      std::span<double> v = out;
      v[0] = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        acc += s.out[i][0];
        v[i + 1] = acc;
      }
      const double at_pin = v[s.pin];
      for (std::size_t i = 0; i <= n; ++i) v[i] -= at_pin;
      return;
    }
    case Impl::Method::dense: {
      const Eigen::Index nf = s.chol_lower.rows();
      Eigen::VectorXd xi(nf);
      for (Eigen::Index i = 0; i < nf; ++i) xi(i) = rng.normal();
      const Eigen::VectorXd vals = s.chol_lower.triangularView<Eigen::Lower>() * xi;
      Eigen::Index k = 0;
      for (std::size_t i = 0; i <= s.n; ++i)
        out[i] = (i == s.pin) ? 0.0 : vals(k++);
      return;
    }
  }
}

SamplePath simulate(const ProcessModel& model, const GridSpec& grid, std::uint64_t seed,
                    std::uint64_t stream) {
  PathSampler sampler(model, grid.steps, grid.step(), 0.0);
  SamplePath path{grid, std::vector<double>(grid.points()), seed, model};
  CounterRng rng(seed, stream);
  sampler.sample(rng, path.values);
  return path;
}

std::vector<double> drift_adjust(const SamplePath& path, double c) {
  std::vector<double> out(path.values.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = path.values[i] - c * path.grid.time(i);
  return out;
}

}  // namespace sojourn

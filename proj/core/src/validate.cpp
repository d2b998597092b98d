#include "sojourn/validate.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

#include "sojourn/asymptotics.hpp"
#include "sojourn/berman.hpp"
#include "sojourn/errors.hpp"
#include "sojourn/mc.hpp"
#include "sojourn/quadrature.hpp"
#include "sojourn/sojourn.hpp"

namespace sojourn {
namespace {

using Clock = std::chrono::steady_clock;

struct Check {
  std::vector<CriterionResult>& out;
  Clock::time_point start = Clock::now();

  void add(const std::string& id, bool passed, const std::string& detail) {
    const double secs = std::chrono::duration<double>(Clock::now() - start).count();
    out.push_back({id, passed, detail, secs});
    start = Clock::now();
  }
};

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

// ---------------------------------------------------------------------------
// 1. Exact Brownian law vs Monte Carlo
// ---------------------------------------------------------------------------

void suite_exact_law(const ValidateOptions& opt, std::vector<CriterionResult>& out) {
  Check ck{out};
  const std::size_t steps_per_unit = opt.fast ? 1024 : 4096;
  const std::size_t reps = opt.fast ? 20000 : 200000;
  const double horizon = 30.0;
  const GridSpec grid = build_grid(horizon, static_cast<std::size_t>(horizon) * steps_per_unit);

  SojournProblem problem;
  problem.model = BrownianDrift{};
  problem.c = 1.0;
  problem.u = 0.0;
  problem.horizon = horizon;
  problem.scaling = ScalingRule::explicit_v(1.0);

  const double xs[3] = {0.0, 0.25, 1.0};
  const auto estimates = estimate_tail_shared(problem, xs, grid, reps, opt.seed);
  for (std::size_t k = 0; k < 3; ++k) {
    const double exact = brownian_sojourn_tail_exact(1.0, 0.0, xs[k]);
    const double band = 3.0 * estimates[k].se + 0.02;
    const double err = std::fabs(estimates[k].p_hat - exact);
    std::string detail = "p_hat=" + fmt(estimates[k].p_hat) + " exact=" + fmt(exact) +
                         " |err|=" + fmt(err) + " band=" + fmt(band);
    if (err > band && xs[k] == 0.0)
      detail += " | known limitation at x=0: the left-endpoint grid walk never exceeds the "
                "level with probability ~1.4 sqrt(step) (0.0219 at step 2^-12, exact via "
                "Spitzer's identity), above the fixed 0.02 allowance for any seed";
    ck.add("1-exact-law/x=" + fmt(xs[k]), err <= band, detail);
  }
}

// ---------------------------------------------------------------------------
// 2. Levy factorization ratio
// ---------------------------------------------------------------------------

void suite_levy(const ValidateOptions& opt, std::vector<CriterionResult>& out) {
  Check ck{out};
  const std::size_t steps_per_unit = opt.fast ? 1024 : 4096;
  const std::size_t reps = opt.fast ? 10000 : 50000;
  const double horizon = 30.0;
  const GridSpec grid = build_grid(horizon, static_cast<std::size_t>(horizon) * steps_per_unit);

  SojournProblem problem;
  problem.model = BrownianDrift{};
  problem.c = 1.0;
  problem.horizon = horizon;
  problem.scaling = ScalingRule::explicit_v(1.0);

  const double us[2] = {0.0, 1.0};
  const double xs[2] = {0.0, 0.5};
  const auto grid_est = estimate_tail_grid(problem, us, xs, grid, reps, opt.seed + 1);
  const double target = std::exp(-2.0);
  for (std::size_t k = 0; k < 2; ++k) {
    const double ratio = grid_est[1][k].p_hat / grid_est[0][k].p_hat;
    const double rel = std::fabs(ratio / target - 1.0);
    ck.add("2-levy-factorization/x=" + fmt(xs[k]), rel <= 0.10,
           "ratio=" + fmt(ratio) + " target=" + fmt(target) + " rel_err=" + fmt(rel));
  }
}

// ---------------------------------------------------------------------------
// 3. Closed-form constant oracles
// ---------------------------------------------------------------------------

void suite_lemma22(const ValidateOptions& opt, std::vector<CriterionResult>& out) {
  Check ck{out};

  {  // zero process, deterministic, analytic target e^{-gamma x^beta}
    bool pass = true;
    std::string detail;
    const struct {
      double gamma, beta, x;
    } cases[] = {{1.0, 1.0, 0.5}, {0.8, 1.3, 0.5}, {2.0, 2.0, 0.25}};
    for (const auto& cse : cases) {
      BermanSpec spec;
      spec.process = ZeroProcess{};
      spec.h = DriftField::power(cse.gamma, cse.beta);
      spec.x = cse.x;
      spec.interval_a = 0.0;
      spec.interval_b = 8.0;
      spec.grid_step = 0x1.0p-10;
      spec.replicates = 8;
      spec.seed = opt.seed;
      const BermanEstimate est = berman_interval(spec);
      const double target = zero_process_power_constant(cse.gamma, cse.beta, cse.x);
      if (std::fabs(est.point - target) > 1e-8 || est.se != 0.0) {
        pass = false;
        detail += " fail(gamma=" + fmt(cse.gamma) + ",beta=" + fmt(cse.beta) + ")";
      }
    }
    ck.add("3-lemma22/zero-process", pass, pass ? "deterministic, <=1e-8" : detail);
  }

  {  // half-line branch continuity at y = x/2
    double worst = 0.0;
    for (const double gamma : {0.5, 1.0, 2.0})
      for (const double beta : {0.5, 1.0, 2.0})
        for (const double x : {0.5, 1.0, 2.0}) {
          const double lower_branch = std::exp(-gamma * std::pow(x - x / 2.0, beta));
          const double upper_branch = std::exp(-gamma * std::pow(2.0, -beta) * std::pow(x, beta));
          worst = std::max(worst, std::fabs(lower_branch - upper_branch));
          const double at = zero_process_halfline_constant(gamma, beta, x, x / 2.0);
          worst = std::max(worst, std::fabs(at - upper_branch));
        }
    ck.add("3-lemma22/halfline-continuity", worst <= 1e-12, "max branch gap " + fmt(worst));
  }

  {  // line-process hat constant vs closed form and its quadrature oracle
    const double gamma = 1.0, x = 1.0;
    const double closed = hat_b2_constant(gamma, x);
    const double quad_oracle =
        integrate(
            [gamma](double n) {
              return std::exp(-0.5 * n * n) / std::sqrt(2.0 * 3.141592653589793) *
                     std::exp(n * n / (2.0 * (1.0 + gamma)));
            },
            -10.0, 10.0, 1e-10) *
        std::exp(-0.25 * (1.0 + gamma) * x * x);
    ck.add("3-lemma22/hat-quadrature-oracle", std::fabs(quad_oracle - closed) <= 1e-6,
           "quad=" + fmt(quad_oracle) + " closed=" + fmt(closed));

    const std::size_t reps = opt.fast ? 8000 : 20000;
    const BermanEstimate est = berman_hat(LineProcess{}, DriftField::power(gamma, 2.0), x, 25.0,
                                          0x1.0p-7, reps, opt.seed + 2);
    const double err = std::fabs(est.point - closed);
    const double band = 3.0 * est.se;
    ck.add("3-lemma22/hat-line-process", err <= band,
           "est=" + fmt(est.point) + " closed=" + fmt(closed) + " |err|=" + fmt(err) +
               " 3se=" + fmt(band));
  }
}

// ---------------------------------------------------------------------------
// 4. Brownian sojourn constant via the S-ladder
// ---------------------------------------------------------------------------

void suite_cor32(const ValidateOptions& opt, std::vector<CriterionResult>& out) {
  Check ck{out};
  const std::size_t reps = opt.fast ? 5000 : 20000;
  const double ladder[3] = {8.0, 16.0, 32.0};
  for (const double x : {0.0, 1.0}) {
    const BermanEstimate est =
        berman_limit(BrownianDrift{}, x, ladder, 0x1.0p-10, reps, opt.seed + 3);
    const double target = brownian_sojourn_constant(x);
    const double rel = std::fabs(est.point / target - 1.0);
    std::string detail = "extrapolated=" + fmt(est.point) + " target=" + fmt(target) +
                         " rel_err=" + fmt(rel);
    if (rel > 0.10)
      detail += " | known limitation: the collapsed weights have a Pareto(1) tail, so the"
                " S=16/32 rungs need ~e^S replicates; see the ladder warning flag (" +
                std::string(est.warning ? "on" : "off") + ") and trimmed diagnostic " +
                fmt(est.trimmed_mean);
    ck.add("4-cor32/x=" + fmt(x), rel <= 0.10, detail);
  }
}

// ---------------------------------------------------------------------------
// 5. Quadrature identities
// ---------------------------------------------------------------------------

void suite_quadrature(const ValidateOptions&, std::vector<CriterionResult>& out) {
  Check ck{out};
  const double t1 = theta_integral(1.0, 0.0, kInfinity);
  ck.add("5-quadrature/theta-beta1", std::fabs(t1 - 1.0) <= 1e-10, "value=" + fmt(t1));
  const double t2 = theta_integral(2.0, -kInfinity, kInfinity);
  const double sqrt_pi = 1.7724538509055160;
  ck.add("5-quadrature/theta-beta2", std::fabs(t2 - sqrt_pi) <= 1e-10, "value=" + fmt(t2));
  const RvTailIntegral rv = rv_tail_integral(1.0, RvFunction::power(2.0), 10.0, 1.0, kInfinity);
  const double rel = std::fabs(rv.numeric / rv.asymptotic - 1.0);
  ck.add("5-quadrature/rv-tail-pure-power", rel <= 1e-6,
         "numeric=" + fmt(rv.numeric) + " asymptotic=" + fmt(rv.asymptotic) +
             " rel_err=" + fmt(rel));
}

// ---------------------------------------------------------------------------
// 6. Infinite-horizon formula against the exact Brownian law
// ---------------------------------------------------------------------------

void suite_thm31(const ValidateOptions&, std::vector<CriterionResult>& out) {
  Check ck{out};
  double prev_gap = -1.0;
  bool in_band = true, monotone = true;
  std::string detail;
  for (const double u : {2.0, 4.0, 6.0, 8.0}) {
    SojournProblem p;
    p.model = BrownianDrift{};
    p.c = 1.0;
    p.u = u;
    p.x = 0.0;
    p.horizon = kInfinity;
    const AsymptoticResult asym = evaluate_asymptotic(p);
    const double exact = brownian_sojourn_tail_exact(1.0, u, 0.0);
    const double ratio = asym.value / exact;
    detail += " u=" + fmt(u) + ":" + fmt(ratio);
    if (u == 8.0 && !(ratio >= 0.7 && ratio <= 1.3)) in_band = false;
    if (u >= 4.0) {
      const double gap = std::fabs(ratio - 1.0);
      if (prev_gap >= 0.0 && gap > prev_gap + 1e-12) monotone = false;
      prev_gap = gap;
    }
  }
  ck.add("6-thm31-vs-exact", in_band && monotone, "ratios" + detail);
}

// ---------------------------------------------------------------------------
// 7. Finite-horizon cross-consistency (stationary-increments vs self-similar)
// ---------------------------------------------------------------------------

void suite_cross(const ValidateOptions&, std::vector<CriterionResult>& out) {
  Check ck{out};
  for (const double H : {0.6, 0.7, 0.8}) {
    const double T = 1.0, u = 5.0, c = 0.0, x = 1.0;

    SojournProblem si;
    si.model = Fbm{H};
    si.c = c;
    si.u = u;
    si.x = x;
    si.horizon = T;
    const AsymptoticResult a = evaluate_asymptotic(si);

    SojournProblem ss = si;
    ss.model = SelfSimilar{
        H, RvFunction::power(2.0 * H, 1.0 / (2.0 * std::pow(T, 2.0 * H))), T};
    const AsymptoticResult b = evaluate_asymptotic(ss);

    const double rel = std::fabs(a.value / b.value - 1.0);
    const double v_si = resolve_scaling(si), v_ss = resolve_scaling(ss);
    const double rel_v = std::fabs(v_si / v_ss - 1.0);
    ck.add("7-cross-consistency/H=" + fmt(H), rel <= 1e-12 && rel_v <= 1e-12,
           a.regime + "=" + fmt(a.value) + " vs " + b.regime + "=" + fmt(b.value) +
               " rel=" + fmt(rel));
  }
}

// ---------------------------------------------------------------------------
// 8. Property suites
// ---------------------------------------------------------------------------

void suite_properties(const ValidateOptions& opt, std::vector<CriterionResult>& out) {
  Check ck{out};

  {  // pathwise sojourn monotonicity in u, c and window length
    bool pass = true;
    const GridSpec grid = build_grid(5.0, 512);
    for (std::uint64_t r = 0; r < 24 && pass; ++r) {
      const ProcessModel model =
          r % 3 == 2 ? ProcessModel{Fbm{0.7}} : ProcessModel{BrownianDrift{}};
      const SamplePath path = simulate(model, grid, opt.seed + 10, r);
      double prev = kInfinity;
      for (const double u : {-1.0, 0.0, 0.5, 1.0}) {
        const double s = sojourn_time(path, 0.4, u, 0.0, 5.0);
        pass = pass && s <= prev;
        prev = s;
      }
      prev = kInfinity;
      for (const double c : {0.0, 0.5, 1.0}) {
        const double s = sojourn_time(path, c, 0.2, 0.0, 5.0);
        pass = pass && s <= prev;
        prev = s;
      }
      pass = pass && sojourn_time(path, 0.3, 0.1, 0.0, 2.5) <=
                         sojourn_time(path, 0.3, 0.1, 0.0, 5.0) + 1e-15;
    }
    ck.add("8-properties/sojourn-monotone", pass, "u, c and window monotonicity");
  }

  {  // passage-time bounds, monotonicity and the sojourn consistency identity
    bool pass = true;
    const GridSpec grid = build_grid(5.0, 512);
    const double v = 1.5, u = 0.3, c = 0.4;
    for (std::uint64_t r = 0; r < 24 && pass; ++r) {
      const SamplePath path = simulate(BrownianDrift{}, grid, opt.seed + 11, r);
      double prev_tau = 0.0;
      for (const double x : {0.0, 0.2, 0.5, 1.0}) {
        const PassageSample tau = first_passage(path, c, u, x, v, 5.0);
        pass = pass && (tau.tau >= x / v || std::isinf(tau.tau));
        pass = pass && tau.tau >= prev_tau;
        prev_tau = tau.tau;
        const bool within = tau.tau <= 5.0;
        const bool sojourn_hit = v * sojourn_time(path, c, u, 0.0, 5.0) > x;
        pass = pass && within == sojourn_hit;
      }
    }
    ck.add("8-properties/passage-time", pass, "tau >= x/v, monotone, sojourn-consistent");
  }

  {  // covariance PSD on grids of <= 64 points
    double min_eig = 0.0;
    for (const double H : {0.3, 0.5, 0.7, 0.9}) {
      for (const bool as_power : {false, true}) {
        const ProcessModel model =
            as_power ? ProcessModel{StationaryIncrements{RvFunction::power(2.0 * H)}}
                     : ProcessModel{Fbm{H}};
        constexpr int n = 64;
        Eigen::MatrixXd cov(n, n);
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j)
            cov(i, j) = covariance(model, 2.0 * (i + 1) / n, 2.0 * (j + 1) / n);
        const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
        min_eig = std::min(min_eig, es.eigenvalues().minCoeff());
      }
    }
    ck.add("8-properties/covariance-psd", min_eig >= -1e-8, "min eigenvalue " + fmt(min_eig));
  }

  {  // self-similar covariance scaling
    bool pass = true;
    const ProcessModel model = SelfSimilar{0.7, RvFunction::power(1.4, 0.5), 1.0};
    for (const double b : {0.5, 2.0, 4.0})
      for (const double s : {0.3, 1.0, 2.5})
        for (const double t : {0.7, 1.9}) {
          const double lhs = covariance(model, b * s, b * t);
          const double rhs = std::pow(b, 1.4) * covariance(model, s, t);
          pass = pass && std::fabs(lhs - rhs) <= 1e-12 * std::max(1.0, std::fabs(rhs));
        }
    ck.add("8-properties/self-similar-scaling", pass, "cov(bs,bt) = b^{2H} cov(s,t)");
  }

  {  // stationary-increments identity
    double worst = 0.0;
    const ProcessModel model = StationaryIncrements{RvFunction::power(1.4)};
    for (const double s : {0.2, 1.0, 2.3})
      for (const double t : {0.5, 1.7, 3.1}) {
        const double var_inc =
            covariance(model, t, t) + covariance(model, s, s) - 2.0 * covariance(model, s, t);
        worst = std::max(worst, std::fabs(var_inc - std::pow(std::fabs(t - s), 1.4)));
      }
    ck.add("8-properties/stationary-increments", worst <= 1e-12, "max gap " + fmt(worst));
  }

  {  // order-statistic collapse vs direct z-grid quadrature
    bool pass = true;
    double worst = 0.0;
    const double step = 0x1.0p-6, x = 0.5;
    const GridSpec grid = build_grid(4.0, 256);
    for (std::uint64_t r = 0; r < 100 && pass; ++r) {
      const SamplePath path = simulate(Fbm{0.5}, grid, opt.seed + 12, r);
      std::vector<double> field(256);
      for (std::size_t i = 0; i < field.size(); ++i)
        field[i] = std::sqrt(2.0) * path.values[i] - variance_at(path.model, grid.time(i));
      const double collapsed = zstar_weight(field, step, x);

      std::vector<double> sorted(field);
      std::sort(sorted.begin(), sorted.end());
      double quad = 0.0;
      const double hz = 1e-3;
      double prev_f = 0.0;
      for (double z = -40.0; z <= 40.0 + 1e-12; z += hz) {
        const auto above = sorted.end() - std::upper_bound(sorted.begin(), sorted.end(), -z);
        const double mes = step * static_cast<double>(above);
        const double f = mes > x ? std::exp(-z) : 0.0;
        if (z > -40.0) quad += 0.5 * hz * (f + prev_f);
        prev_f = f;
      }
      const double err = std::fabs(collapsed - quad) / std::max(1.0, collapsed);
      worst = std::max(worst, err);
      pass = pass && err <= 1e-3;
    }
    ck.add("8-properties/zstar-vs-quadrature", pass, "worst relative gap " + fmt(worst));
  }

  {  // interval-estimate monotonicity and continuity in x (common random numbers)
    const std::size_t reps = opt.fast ? 2000 : 4000;
    bool mono = true, cont = true;
    BermanSpec spec;
    spec.process = BrownianDrift{};
    spec.h = DriftField::zero();
    spec.interval_a = 0.0;
    spec.interval_b = 4.0;
    spec.grid_step = 0x1.0p-7;
    spec.replicates = reps;
    spec.seed = opt.seed + 13;
    double prev_point = kInfinity, prev_se = 0.0;
    for (double x = 0.0; x <= 1.0 + 1e-9; x += 0.05) {
      spec.x = x;
      const BermanEstimate est = berman_interval(spec);
      if (std::isfinite(prev_point)) {
        mono = mono && est.point <= prev_point + 3.0 * (est.se + prev_se);
        cont = cont && std::fabs(est.point - prev_point) <= 5.0 * (est.se + prev_se + 0.1);
      }
      prev_point = est.point;
      prev_se = est.se;
    }
    ck.add("8-properties/berman-x-monotone", mono, "est(x2) <= est(x1) + 3 se");
    ck.add("8-properties/berman-x-continuity", cont, "jumps within 5 (se + 0.1)");
  }

  {  // interval monotonicity in E
    const std::size_t reps = opt.fast ? 2000 : 4000;
    BermanSpec spec;
    spec.process = BrownianDrift{};
    spec.x = 0.25;
    spec.interval_a = 0.0;
    spec.grid_step = 0x1.0p-7;
    spec.replicates = reps;
    spec.seed = opt.seed + 14;
    double prev = -kInfinity, prev_se = 0.0;
    bool pass = true;
    for (const double b : {2.0, 4.0, 8.0}) {
      spec.interval_b = b;
      const BermanEstimate est = berman_interval(spec);
      pass = pass && est.point >= prev - 3.0 * (est.se + prev_se);
      prev = est.point;
      prev_se = est.se;
    }
    ck.add("8-properties/berman-interval-monotone", pass, "estimate nondecreasing in E");
  }

  {  // Wilson coverage on synthetic Bernoulli streams
    const double p = 0.3;
    const std::uint64_t n = 2000;
    int covered = 0;
    for (int run = 0; run < 100; ++run) {
      CounterRng rng(opt.seed + 15, static_cast<std::uint64_t>(run));
      std::uint64_t hits = 0;
      for (std::uint64_t i = 0; i < n; ++i) hits += rng.uniform() < p ? 1u : 0u;
      const WilsonInterval ci = wilson_interval(hits, n);
      covered += (ci.lo <= p && p <= ci.hi) ? 1 : 0;
    }
    ck.add("8-properties/wilson-coverage", covered >= 93,
           fmt(covered) + "/100 intervals cover p");
  }
}

}  // namespace

std::vector<std::string> validate_suite_names() {
  return {"exact-law", "levy",  "lemma22", "cor32",
          "quadrature", "thm31", "cross",   "properties"};
}

std::vector<CriterionResult> run_validate_suite(const std::string& name,
                                                const ValidateOptions& options) {
  std::vector<CriterionResult> out;
  if (name == "exact-law")
    suite_exact_law(options, out);
  else if (name == "levy")
    suite_levy(options, out);
  else if (name == "lemma22")
    suite_lemma22(options, out);
  else if (name == "cor32")
    suite_cor32(options, out);
  else if (name == "quadrature")
    suite_quadrature(options, out);
  else if (name == "thm31")
    suite_thm31(options, out);
  else if (name == "cross")
    suite_cross(options, out);
  else if (name == "properties")
    suite_properties(options, out);
  else if (name == "all")
    return run_all_suites(options);
  else
    throw std::invalid_argument("unknown validation suite '" + name + "'");
  return out;
}

std::vector<CriterionResult> run_all_suites(const ValidateOptions& options) {
  std::vector<CriterionResult> out;
  for (const auto& name : validate_suite_names()) {
    auto part = run_validate_suite(name, options);
    out.insert(out.end(), part.begin(), part.end());
  }
  return out;
}

}  // namespace sojourn

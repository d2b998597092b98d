#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace sojourn {

/// coeff * t^exponent
struct PowerLaw {
  double coeff = 1.0;
  double exponent = 1.0;
  double operator()(double t) const { return coeff * std::pow(t, exponent); }
};

/// Scalar model descriptor for a function that is regularly varying at 0
/// (and possibly at infinity), with declared indexes. Used for variance
/// functions sigma^2, local correlation decays rho, and the w of the
/// tail-integral asymptotic. Case classification is always driven by the
/// declared metadata, never by numerical limit detection.
class RvFunction {
 public:
  RvFunction() = default;

  static RvFunction power(double exponent, double coeff = 1.0) {
    if (!(exponent > 0.0)) throw std::invalid_argument("RvFunction::power: exponent must be > 0");
    if (!(coeff > 0.0)) throw std::invalid_argument("RvFunction::power: coeff must be > 0");
    RvFunction f;
    f.value_ = [coeff, exponent](double t) { return coeff * std::pow(t, exponent); };
    f.derivative_ = [coeff, exponent](double t) {
      return coeff * exponent * std::pow(t, exponent - 1.0);
    };
    f.index_zero_ = exponent;
    f.index_inf_ = exponent;
    f.power_ = PowerLaw{coeff, exponent};
    f.label_ = "pow:" + std::to_string(exponent);
    return f;
  }

  /// t^p / log(e + 1/t)^q  (q > 0 dampens, q < 0 inflates; slowly varying part)
  static RvFunction power_over_log(double p, double q = 1.0) {
    RvFunction f;
    f.value_ = [p, q](double t) {
      if (t <= 0.0) return 0.0;
      return std::pow(t, p) / std::pow(std::log(std::exp(1.0) + 1.0 / t), q);
    };
    f.index_zero_ = p;
    f.index_inf_ = p;
    f.label_ = "powlog:" + std::to_string(p) + "," + std::to_string(q);
    return f;
  }

  static RvFunction from_callable(std::function<double(double)> value, double index_zero,
                                  double index_inf,
                                  std::function<double(double)> derivative = nullptr,
                                  std::string label = "callable") {
    RvFunction f;
    f.value_ = std::move(value);
    f.derivative_ = std::move(derivative);
    f.index_zero_ = index_zero;
    f.index_inf_ = index_inf;
    f.label_ = std::move(label);
    return f;
  }

  double operator()(double t) const { return value_(t); }

  /// d/dt; analytic when supplied by the descriptor, central difference otherwise.
  double derivative(double t) const {
    if (derivative_) return derivative_(t);
    const double h = 1e-6 * std::max(t, 1e-12);
    return (value_(t + h) - value_(t - h)) / (2.0 * h);
  }

  double index_at_zero() const { return index_zero_; }
  double index_at_infinity() const { return index_inf_; }
  const std::optional<PowerLaw>& as_power() const { return power_; }

  /// Declared lim_{t->0} f(t)/t, meaningful when index_at_zero() == 1.
  std::optional<double> theta_at_zero() const {
    if (theta_) return theta_;
    if (power_ && power_->exponent == 1.0) return power_->coeff;
    return std::nullopt;
  }
  RvFunction& declare_theta(double theta) {
    theta_ = theta;
    return *this;
  }

  /// Declared lim_{t->0} t^2/f(t) (0 when index < 2; the inverse scale when
  /// the index equals 2). Used by correlation-decay descriptors.
  std::optional<double> gamma_at_zero() const {
    if (gamma_) return gamma_;
    if (power_) {
      if (power_->exponent < 2.0) return 0.0;
      if (power_->exponent == 2.0) return 1.0 / power_->coeff;
    }
    if (index_zero_ < 2.0 && !power_) return 0.0;
    return std::nullopt;
  }
  RvFunction& declare_gamma(double gamma) {
    gamma_ = gamma;
    return *this;
  }

  const std::string& label() const { return label_; }
  bool valid() const { return static_cast<bool>(value_); }

 private:
  std::function<double(double)> value_;
  std::function<double(double)> derivative_;
  double index_zero_ = 1.0;
  double index_inf_ = 1.0;
  std::optional<PowerLaw> power_;
  std::optional<double> theta_;
  std::optional<double> gamma_;
  std::string label_ = "empty";
};

/// sigma(t) = sqrt(sigma2(t)) as an RvFunction (index halves; pure powers stay exact).
inline RvFunction sigma_of(const RvFunction& sigma2) {
  if (const auto& p = sigma2.as_power())
    return RvFunction::power(p->exponent / 2.0, std::sqrt(p->coeff));
  return RvFunction::from_callable(
      [sigma2](double t) { return std::sqrt(sigma2(t)); }, sigma2.index_at_zero() / 2.0,
      sigma2.index_at_infinity() / 2.0, nullptr, "sqrt(" + sigma2.label() + ")");
}

/// Drift field h(t) entering the constant definitions: zero, gamma*|t|^beta,
/// or an arbitrary table/callable.
class DriftField {
 public:
  static DriftField zero() { return DriftField{}; }

  static DriftField power(double gamma, double beta) {
    if (!(gamma > 0.0) || !(beta > 0.0))
      throw std::invalid_argument("DriftField::power: gamma and beta must be > 0");
    DriftField h;
    h.kind_ = Kind::power;
    h.gamma_ = gamma;
    h.beta_ = beta;
    return h;
  }

  /// Piecewise-linear table; extrapolates flat beyond the end knots.
  static DriftField table(std::vector<double> times, std::vector<double> values) {
    if (times.size() != values.size() || times.size() < 2)
      throw std::invalid_argument("DriftField::table: need >= 2 matching knots");
    DriftField h;
    h.kind_ = Kind::custom;
    h.fn_ = [ts = std::move(times), vs = std::move(values)](double t) {
      if (t <= ts.front()) return vs.front();
      if (t >= ts.back()) return vs.back();
      std::size_t i = 1;
      while (ts[i] < t) ++i;
      const double w = (t - ts[i - 1]) / (ts[i] - ts[i - 1]);
      return (1.0 - w) * vs[i - 1] + w * vs[i];
    };
    return h;
  }

  static DriftField custom(std::function<double(double)> fn) {
    DriftField h;
    h.kind_ = Kind::custom;
    h.fn_ = std::move(fn);
    return h;
  }

  double operator()(double t) const {
    switch (kind_) {
      case Kind::zero: return 0.0;
      case Kind::power: return gamma_ * std::pow(std::fabs(t), beta_);
      case Kind::custom: return fn_(t);
    }
    return 0.0;
  }

  bool is_zero() const { return kind_ == Kind::zero; }
  bool is_power() const { return kind_ == Kind::power; }
  double gamma() const { return gamma_; }
  double beta() const { return beta_; }

  std::string label() const {
    switch (kind_) {
      case Kind::zero: return "0";
      case Kind::power: return "pow:" + std::to_string(gamma_) + "," + std::to_string(beta_);
      case Kind::custom: return "custom";
    }
    return "?";
  }

 private:
  enum class Kind { zero, power, custom };
  Kind kind_ = Kind::zero;
  double gamma_ = 0.0;
  double beta_ = 1.0;
  std::function<double(double)> fn_;
};

/// Laplace exponent of a spectrally negative Levy process: E e^{l X(t)} = e^{t psi(l)},
/// psi(0)=0, strictly convex, psi'(0+) = E X(1).
struct LevyExponent {
  std::function<double(double)> psi;
  double psi_prime_zero = 0.0;
};

}  // namespace sojourn

#include "sojourn/quadrature.hpp"

#include <cmath>

#include "sojourn/errors.hpp"

namespace sojourn {
namespace {

// 15-point Kronrod abscissae/weights with the embedded 7-point Gauss rule
// (Fullerton's 80-digit evaluations, as in QUADPACK dqk15).
constexpr double kXgk[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144838258730, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0};
constexpr double kWgk[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr double kWg[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct PanelResult {
  double kronrod;
  double error;
};

PanelResult gk15(const std::function<double(double)>& f, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);

  const double fc = f(center);
  double res_gauss = kWg[3] * fc;
  double res_kron = kWgk[7] * fc;

  for (int j = 0; j < 7; ++j) {
    const double dx = half * kXgk[j];
    const double fsum = f(center - dx) + f(center + dx);
    res_kron += kWgk[j] * fsum;
    if (j % 2 == 1) res_gauss += kWg[j / 2] * fsum;
  }
  return {res_kron * half, std::fabs((res_kron - res_gauss) * half)};
}

double adapt(const std::function<double(double)>& f, double a, double b, double tol, int depth) {
  const PanelResult r = gk15(f, a, b);
  if (r.error <= tol || b - a < 1e-300) return r.kronrod;
  if (depth <= 0)
    throw numeric_error("integrate: subdivision budget exhausted before reaching tolerance");
  const double mid = 0.5 * (a + b);
  return adapt(f, a, mid, 0.5 * tol, depth - 1) + adapt(f, mid, b, 0.5 * tol, depth - 1);
}

}  // namespace

double integrate(const std::function<double(double)>& f, double a, double b, double abs_tol,
                 int max_depth) {
  if (a == b) return 0.0;
  if (b < a) return -integrate(f, b, a, abs_tol, max_depth);
  return adapt(f, a, b, abs_tol, max_depth);
}

}  // namespace sojourn

#ifndef MSL_QUADRATURE_HPP
#define MSL_QUADRATURE_HPP

#include <cmath>
#include <stdexcept>

#include "msl/core.hpp"

namespace msl::quad {

struct Estimate {
  double value = 0.0;
  double error = 0.0;
};

namespace detail {

// 15-point Kronrod nodes (and embedded 7-point Gauss) on [-1, 1].
inline constexpr double xgk[8] = {0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
                                  0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
                                  0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
                                  0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr double wgk[8] = {0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
                                  0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
                                  0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
                                  0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr double wg[4] = {0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                                 0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <class F>
Estimate gk15(F& f, double a, double b) {
  double center = 0.5 * (a + b);
  double half = 0.5 * (b - a);
  double fc = f(center);
  double kronrod = fc * wgk[7];
  double gauss = fc * wg[3];
  for (int j = 0; j < 7; ++j) {
    double dx = half * xgk[j];
    double f1 = f(center - dx);
    double f2 = f(center + dx);
    kronrod += wgk[j] * (f1 + f2);
    if (j % 2 == 1) gauss += wg[j / 2] * (f1 + f2);
  }
  if (!std::isfinite(kronrod)) throw NumericError("non-finite integrand in adaptive quadrature");
  return {kronrod * half, std::abs((kronrod - gauss) * half)};
}

template <class F>
Estimate adapt(F& f, double a, double b, double tol, int depth) {
  Estimate whole = gk15(f, a, b);
  if (whole.error <= tol || depth <= 0) return whole;
  double mid = 0.5 * (a + b);
  Estimate left = adapt(f, a, mid, 0.5 * tol, depth - 1);
  Estimate right = adapt(f, mid, b, 0.5 * tol, depth - 1);
  return {left.value + right.value, left.error + right.error};
}

}  // namespace detail

/// Adaptive Gauss-Kronrod (G7/K15) integration of f over [a, b], split into `panels`
/// equal pieces first so narrow peaks are not skipped.
template <class F>
Estimate integrate(F&& f, double a, double b, double abs_tol = 1e-10, int panels = 1, int max_depth = 30) {
  if (!(b > a)) return {0.0, 0.0};
  if (panels < 1) panels = 1;
  Estimate total;
  double width = (b - a) / panels;
  for (int i = 0; i < panels; ++i) {
    double lo = a + width * i;
    double hi = (i + 1 == panels) ? b : lo + width;
    Estimate e = detail::adapt(f, lo, hi, abs_tol / panels, max_depth);
    total.value += e.value;
    total.error += e.error;
  }
  return total;
}

}  // namespace msl::quad

#endif

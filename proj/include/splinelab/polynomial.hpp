#pragma once

#include <vector>

namespace splinelab {

/// Polynomial on [a, b], stored as monomial coefficients in the local
/// variable u = (x - a) / (b - a) in [0, 1]: Q(x) = sum_i c_i u^i.
struct Poly1D {
  std::vector<double> coeffs{0.0};
  double a = 0.0;
  double b = 1.0;

  /// From coefficients in the global variable x.
  static Poly1D from_global(const std::vector<double>& global, double a, double b);
  /// Interpolant through (x_i, y_i), x_i distinct points of [a, b].
  static Poly1D interpolate(const std::vector<double>& xs, const std::vector<double>& ys, double a,
                            double b);

  double length() const noexcept { return b - a; }
  double eval_local(double u) const noexcept;
  double operator()(double x) const noexcept { return eval_local((x - a) / (b - a)); }
  /// Degree after dropping leading coefficients below 1e-12 times the largest.
  int degree() const noexcept;
  Poly1D derivative() const;
  Poly1D shifted(double s) const;  // Q + s
};

/// Sorted distinct real roots in the closed local interval [0, 1]. Degree <= 2
/// uses closed forms, higher degrees companion-matrix eigenvalues, all
/// followed by Newton polishing. A numerically constant polynomial has none.
std::vector<double> local_roots(const Poly1D& q);

/// max over [a, b] of |Q|, from endpoints and critical points.
double sup_norm(const Poly1D& q);
/// min over [a, b] of |Q|.
double inf_abs(const Poly1D& q);

/// Lebesgue measure of {x in [a, b] : |Q(x)| > s}.
double level_set_measure(const Poly1D& q, double s);

/// Integral over [a, b] of |Q|, split at sign changes; exact up to rounding.
double integral_abs(const Poly1D& q);

}  // namespace splinelab

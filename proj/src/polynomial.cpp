#include "splinelab/polynomial.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

#include "splinelab/error.hpp"
#include "splinelab/quadrature.hpp"

namespace splinelab {

namespace {

constexpr double kCoeffThreshold = 1e-12;

// Coefficients with negligible leading terms removed.
std::vector<double> trimmed(const std::vector<double>& c) {
  double big = 0.0;
  for (double v : c) big = std::max(big, std::abs(v));
  std::vector<double> out(c);
  while (out.size() > 1 && std::abs(out.back()) <= kCoeffThreshold * big) out.pop_back();
  return out;
}

double horner(const std::vector<double>& c, double u) {
  double v = 0.0;
  for (std::size_t i = c.size(); i-- > 0;) v = v * u + c[i];
  return v;
}

double polish(const std::vector<double>& c, double u) {
  std::vector<double> dc;
  for (std::size_t i = 1; i < c.size(); ++i) dc.push_back(c[i] * static_cast<double>(i));
  for (int it = 0; it < 8; ++it) {
    const double f = horner(c, u);
    const double df = horner(dc, u);
    if (df == 0.0 || !std::isfinite(df)) break;
    const double step = f / df;
    if (!std::isfinite(step) || std::abs(step) > 0.5) break;
    u -= step;
    if (std::abs(step) <= 1e-16 * (1.0 + std::abs(u))) break;
  }
  return u;
}

}  // namespace

Poly1D Poly1D::from_global(const std::vector<double>& global, double a, double b) {
  if (!(a < b)) throw Error(ErrorCode::PreconditionViolated, "polynomial interval must have a < b");
  // substitute x = a + h u and expand by Horner steps
  const double h = b - a;
  std::vector<double> local{0.0};
  for (std::size_t i = global.size(); i-- > 0;) {
    std::vector<double> next(local.size() + 1, 0.0);
    for (std::size_t j = 0; j < local.size(); ++j) {
      next[j] += local[j] * a;
      next[j + 1] += local[j] * h;
    }
    next[0] += global[i];
    local = std::move(next);
  }
  while (local.size() > 1 && local.back() == 0.0) local.pop_back();
  return Poly1D{local, a, b};
}

Poly1D Poly1D::interpolate(const std::vector<double>& xs, const std::vector<double>& ys, double a,
                           double b) {
  const std::size_t n = xs.size();
  if (n == 0 || ys.size() != n) throw Error(ErrorCode::DimensionMismatch, "interpolation data");
  std::vector<double> u(n);
  for (std::size_t i = 0; i < n; ++i) u[i] = (xs[i] - a) / (b - a);
  // Newton divided differences, then expansion to monomials
  std::vector<double> dd(ys);
  for (std::size_t j = 1; j < n; ++j) {
    for (std::size_t i = n - 1; i >= j; --i) {
      dd[i] = (dd[i] - dd[i - 1]) / (u[i] - u[i - j]);
      if (i == j) break;
    }
  }
  std::vector<double> c{dd[n - 1]};
  for (std::size_t i = n - 1; i-- > 0;) {
    std::vector<double> next(c.size() + 1, 0.0);
    for (std::size_t j = 0; j < c.size(); ++j) {
      next[j] -= c[j] * u[i];
      next[j + 1] += c[j];
    }
    next[0] += dd[i];
    c = std::move(next);
  }
  return Poly1D{c, a, b};
}

double Poly1D::eval_local(double u) const noexcept { return horner(coeffs, u); }

int Poly1D::degree() const noexcept { return static_cast<int>(trimmed(coeffs).size()) - 1; }

Poly1D Poly1D::derivative() const {
  // d/du, rescaled to d/dx
  std::vector<double> dc;
  for (std::size_t i = 1; i < coeffs.size(); ++i) {
    dc.push_back(coeffs[i] * static_cast<double>(i) / (b - a));
  }
  if (dc.empty()) dc.push_back(0.0);
  return Poly1D{dc, a, b};
}

Poly1D Poly1D::shifted(double s) const {
  Poly1D q = *this;
  q.coeffs[0] += s;
  return q;
}

std::vector<double> local_roots(const Poly1D& q) {
  const std::vector<double> c = trimmed(q.coeffs);
  const std::size_t deg = c.size() - 1;
  std::vector<double> cand;
  if (deg == 0) return {};
  if (deg == 1) {
    cand.push_back(-c[0] / c[1]);
  } else if (deg == 2) {
    const double disc = c[1] * c[1] - 4.0 * c[2] * c[0];
    if (disc >= 0.0) {
      // stable form avoiding cancellation
      const double sq = std::sqrt(disc);
      const double t = -0.5 * (c[1] + (c[1] >= 0.0 ? sq : -sq));
      if (t != 0.0) {
        cand.push_back(t / c[2]);
        cand.push_back(c[0] / t);
      } else {
        cand.push_back(0.0);
      }
    } else if (disc > -1e-14 * (c[1] * c[1] + std::abs(4.0 * c[2] * c[0]))) {
      cand.push_back(-c[1] / (2.0 * c[2]));  // numerically a double root
    }
  } else {
    Eigen::MatrixXd comp = Eigen::MatrixXd::Zero(deg, deg);
    for (std::size_t i = 1; i < deg; ++i) comp(i, i - 1) = 1.0;
    for (std::size_t i = 0; i < deg; ++i) comp(i, deg - 1) = -c[i] / c[deg];
    Eigen::EigenSolver<Eigen::MatrixXd> es(comp, false);
    const auto ev = es.eigenvalues();
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
      const double re = ev(i).real(), im = ev(i).imag();
      if (std::abs(im) <= 1e-7 * (1.0 + std::abs(re))) cand.push_back(re);
    }
  }
  std::vector<double> roots;
  for (double r : cand) {
    if (!std::isfinite(r)) continue;
    r = polish(c, r);
    if (r >= -1e-12 && r <= 1.0 + 1e-12) roots.push_back(std::clamp(r, 0.0, 1.0));
  }
  std::sort(roots.begin(), roots.end());
  roots.erase(std::unique(roots.begin(), roots.end(),
                          [](double x, double y) { return std::abs(x - y) <= 1e-14; }),
              roots.end());
  return roots;
}

double sup_norm(const Poly1D& q) {
  double m = std::max(std::abs(q.eval_local(0.0)), std::abs(q.eval_local(1.0)));
  for (double u : local_roots(q.derivative())) m = std::max(m, std::abs(q.eval_local(u)));
  return m;
}

double inf_abs(const Poly1D& q) {
  if (!local_roots(q).empty()) return 0.0;
  double m = std::min(std::abs(q.eval_local(0.0)), std::abs(q.eval_local(1.0)));
  for (double u : local_roots(q.derivative())) m = std::min(m, std::abs(q.eval_local(u)));
  return m;
}

double level_set_measure(const Poly1D& q, double s) {
  if (s < 0.0) throw Error(ErrorCode::PreconditionViolated, "level must be >= 0");
  std::vector<double> cuts{0.0, 1.0};
  for (double r : local_roots(q.shifted(-s))) cuts.push_back(r);
  for (double r : local_roots(q.shifted(s))) cuts.push_back(r);
  std::sort(cuts.begin(), cuts.end());
  double measure = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double lo = cuts[i], hi = cuts[i + 1];
    if (!(hi > lo)) continue;
    if (std::abs(q.eval_local(0.5 * (lo + hi))) > s) measure += hi - lo;
  }
  return measure * q.length();
}

double integral_abs(const Poly1D& q) {
  std::vector<double> cuts{0.0};
  for (double r : local_roots(q)) cuts.push_back(r);
  cuts.push_back(1.0);
  std::sort(cuts.begin(), cuts.end());
  const int m = static_cast<int>(q.coeffs.size() + 1) / 2 + 1;
  const GaussRule rule = gauss_legendre(m);
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double lo = cuts[i], len = cuts[i + 1] - cuts[i];
    if (!(len > 0.0)) continue;
    double part = 0.0;
    for (std::size_t g = 0; g < rule.nodes.size(); ++g) {
      part += rule.weights[g] * q.eval_local(lo + len * rule.nodes[g]);
    }
    total += std::abs(part) * len;
  }
  return total * q.length();
}

}  // namespace splinelab

#include "splinelab/gram.hpp"

#include <algorithm>
#include <cmath>

#include "splinelab/bspline.hpp"
#include "splinelab/csv.hpp"
#include "splinelab/error.hpp"
#include "splinelab/quadrature.hpp"

namespace splinelab {

BandedSPD::BandedSPD(std::size_t n, std::size_t bandwidth)
    : n_(n), bw_(bandwidth), band_(n * (bandwidth + 1), 0.0) {}

double BandedSPD::operator()(std::size_t i, std::size_t j) const noexcept {
  if (i < j) std::swap(i, j);
  if (i - j > bw_ || i >= n_) return 0.0;
  return band_[i * (bw_ + 1) + (i - j)];
}

double& BandedSPD::at(std::size_t i, std::size_t j) {
  if (i < j) std::swap(i, j);
  if (i - j > bw_ || i >= n_) throw Error(ErrorCode::IndexOutOfRange, "entry outside band");
  return band_[i * (bw_ + 1) + (i - j)];
}

std::vector<double> BandedSPD::multiply(std::span<const double> x) const {
  if (x.size() != n_) throw Error(ErrorCode::DimensionMismatch, "vector length mismatch");
  std::vector<double> y(n_, 0.0);
  for (std::size_t i = 0; i < n_; ++i) {
    const std::size_t lo = i > bw_ ? i - bw_ : 0;
    const std::size_t hi = std::min(n_ - 1, i + bw_);
    for (std::size_t j = lo; j <= hi; ++j) y[i] += (*this)(i, j) * x[j];
  }
  return y;
}

Matrix BandedSPD::dense() const {
  Matrix m(n_, n_);
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t j = 0; j < n_; ++j) m(i, j) = (*this)(i, j);
  }
  return m;
}

BandedSPD assemble_gram(const KnotVector& kv) {
  const auto k = static_cast<std::size_t>(kv.order());
  const std::size_t n = kv.size();
  BandedSPD g(n, k - 1);
  const GaussRule rule = gauss_legendre(kv.order());
  const auto t = kv.knots();
  std::vector<double> vals(k);
  for (std::size_t s = k - 1; s < n; ++s) {
    const double a = t[s];
    const double len = t[s + 1] - a;
    if (len <= 0.0) continue;
    for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
      const std::size_t first = eval_basis_into(kv, a + len * rule.nodes[q], vals);
      const double w = rule.weights[q] * len;
      for (std::size_t r = 0; r < k; ++r) {
        for (std::size_t c = 0; c <= r; ++c) {
          g.at(first + r, first + c) += w * vals[r] * vals[c];
        }
      }
    }
  }
  return g;
}

BandedCholesky::BandedCholesky(const BandedSPD& g)
    : n_(g.size()), bw_(g.bandwidth()), l_(g.size() * (g.bandwidth() + 1), 0.0) {
  const std::size_t w = bw_ + 1;
  for (std::size_t i = 0; i < n_; ++i) {
    const std::size_t jlo = i > bw_ ? i - bw_ : 0;
    for (std::size_t j = jlo; j <= i; ++j) {
      double sum = g(i, j);
      const std::size_t plo = std::max(jlo, j > bw_ ? j - bw_ : 0);
      for (std::size_t p = plo; p < j; ++p) {
        sum -= l_[i * w + (i - p)] * l_[j * w + (j - p)];
      }
      if (i == j) {
        if (!(sum > 0.0)) {
          throw Error(ErrorCode::NotPositiveDefinite,
                      "pivot " + std::to_string(i + 1) + " is not positive");
        }
        l_[i * w] = std::sqrt(sum);
      } else {
        l_[i * w + (i - j)] = sum / l_[j * w];
      }
    }
  }
}

void BandedCholesky::solve_strided(double* x, std::size_t stride) const {
  const std::size_t w = bw_ + 1;
  for (std::size_t i = 0; i < n_; ++i) {
    double sum = x[i * stride];
    const std::size_t plo = i > bw_ ? i - bw_ : 0;
    for (std::size_t p = plo; p < i; ++p) sum -= l_[i * w + (i - p)] * x[p * stride];
    x[i * stride] = sum / l_[i * w];
  }
  for (std::size_t ii = n_; ii-- > 0;) {
    double sum = x[ii * stride];
    const std::size_t phi = std::min(n_ - 1, ii + bw_);
    for (std::size_t p = ii + 1; p <= phi; ++p) sum -= l_[p * w + (p - ii)] * x[p * stride];
    x[ii * stride] = sum / l_[ii * w];
  }
}

std::vector<double> BandedCholesky::solve(std::span<const double> rhs) const {
  if (rhs.size() != n_) throw Error(ErrorCode::DimensionMismatch, "rhs length mismatch");
  std::vector<double> x(rhs.begin(), rhs.end());
  solve_strided(x.data(), 1);
  return x;
}

std::vector<double> solve(const BandedSPD& g, std::span<const double> rhs) {
  return BandedCholesky(g).solve(rhs);
}

Matrix inverse_entries(const BandedSPD& g, std::size_t cap) {
  const std::size_t n = g.size();
  if (n > cap) {
    throw Error(ErrorCode::SizeCapExceeded,
                "dense inverse of size " + std::to_string(n) + " exceeds cap " +
                    std::to_string(cap));
  }
  const BandedCholesky chol(g);
  Matrix a(n, n);
  std::vector<double> col(n);
  for (std::size_t j = 0; j < n; ++j) {
    std::fill(col.begin(), col.end(), 0.0);
    col[j] = 1.0;
    chol.solve_strided(col.data(), 1);
    for (std::size_t i = 0; i < n; ++i) a(i, j) = col[i];
  }
  return a;
}

DecayFit fit_decay(const KnotVector& kv) {
  const std::size_t n = kv.size();
  const auto k = static_cast<std::size_t>(kv.order());
  if (n < 2 * k) throw Error(ErrorCode::PreconditionViolated, "fit_decay needs n >= 2k");

  const Matrix a = inverse_entries(assemble_gram(kv));
  DecayFit fit;
  fit.m.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const std::size_t r = i > j ? i - j : j - i;
      const double e = intervals(kv, i, j).support.length();
      fit.m[r] = std::max(fit.m[r], std::abs(a(i, j)) * e);
    }
  }

  // Off-diagonal entries that vanish identically (k = 1) leave nothing to fit.
  const bool diagonal =
      std::all_of(fit.m.begin() + 1, fit.m.end(), [](double v) { return v == 0.0; });
  if (diagonal) {
    fit.gamma = 0.0;
    fit.K = fit.m[0];
    return fit;
  }

  for (std::size_t r = 1; r < n; ++r) {
    if (fit.m[r] > 1e-300) fit.used.push_back(r);
  }
  if (fit.used.size() < 3) {
    throw Error(ErrorCode::DegenerateFit, "fewer than three usable distances");
  }

  double sx = 0.0, sy = 0.0;
  for (std::size_t r : fit.used) {
    sx += static_cast<double>(r);
    sy += std::log(fit.m[r]);
  }
  const double cnt = static_cast<double>(fit.used.size());
  const double mx = sx / cnt;
  const double my = sy / cnt;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t r : fit.used) {
    const double dx = static_cast<double>(r) - mx;
    sxx += dx * dx;
    sxy += dx * (std::log(fit.m[r]) - my);
  }
  const double slope = sxy / sxx;
  const double intercept = my - slope * mx;
  fit.gamma = std::exp(slope);
  for (std::size_t r : fit.used) {
    fit.residuals.push_back(std::log(fit.m[r]) - (intercept + slope * static_cast<double>(r)));
  }

  // K = max_r m_r / gamma^r, in log form so gamma^r cannot underflow
  double log_k = -INFINITY;
  for (std::size_t r = 0; r < n; ++r) {
    if (fit.m[r] > 0.0) {
      log_k = std::max(log_k, std::log(fit.m[r]) - slope * static_cast<double>(r));
    }
  }
  fit.K = std::exp(log_k);
  return fit;
}

std::string decay_fit_csv(const DecayFit& fit) {
  CsvWriter csv({"r", "m_r", "envelope"});
  const double lg = fit.gamma > 0.0 ? std::log(fit.gamma) : -INFINITY;
  for (std::size_t r = 0; r < fit.m.size(); ++r) {
    const double env =
        fit.gamma > 0.0 ? fit.K * std::exp(lg * static_cast<double>(r)) : (r == 0 ? fit.K : 0.0);
    csv.row({static_cast<double>(r), fit.m[r], env});
  }
  return csv.str();
}

}  // namespace splinelab

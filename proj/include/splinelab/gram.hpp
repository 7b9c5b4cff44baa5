#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "splinelab/mesh.hpp"

namespace splinelab {

/// Row-major dense matrix; only used where the full inverse is wanted.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}
  double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
};

/// Symmetric band matrix; stores the lower band, entry (i, i - r) for
/// r = 0..bandwidth.
class BandedSPD {
 public:
  BandedSPD(std::size_t n, std::size_t bandwidth);

  std::size_t size() const noexcept { return n_; }
  std::size_t bandwidth() const noexcept { return bw_; }

  /// Entry (i, j); zero outside the band.
  double operator()(std::size_t i, std::size_t j) const noexcept;
  /// Mutable access inside the band; |i - j| must not exceed the bandwidth.
  double& at(std::size_t i, std::size_t j);

  std::vector<double> multiply(std::span<const double> x) const;
  Matrix dense() const;

 private:
  std::size_t n_;
  std::size_t bw_;
  std::vector<double> band_;  // n x (bw+1)
};

/// G_ij = integral of N_i N_j over [0,1], by a k-point Gauss rule per knot
/// interval (exact for the degree 2k-2 integrand).
BandedSPD assemble_gram(const KnotVector& kv);

/// Banded Cholesky factor G = L L^T; immutable once built and reusable for
/// any number of solves.
class BandedCholesky {
 public:
  /// Throws NotPositiveDefinite if a pivot is not strictly positive.
  explicit BandedCholesky(const BandedSPD& g);

  std::size_t size() const noexcept { return n_; }
  std::vector<double> solve(std::span<const double> rhs) const;
  /// In-place solve on a strided vector (used for tensor mode products).
  void solve_strided(double* x, std::size_t stride) const;

 private:
  std::size_t n_;
  std::size_t bw_;
  std::vector<double> l_;  // lower band of L, same layout as BandedSPD
};

/// One-shot factor + solve.
std::vector<double> solve(const BandedSPD& g, std::span<const double> rhs);

inline constexpr std::size_t kDefaultInverseCap = 512;

/// Dense inverse a_ij, column j = G^{-1} e_j. Throws SizeCapExceeded above cap.
Matrix inverse_entries(const BandedSPD& g, std::size_t cap = kDefaultInverseCap);

/// Empirical decay envelope |a_ij| <= K gamma^{|i-j|} / |E_ij|.
struct DecayFit {
  double K = 0.0;
  double gamma = 0.0;
  /// m_r = max over |i-j| = r of |a_ij| |E_ij|, r = 0..n-1.
  std::vector<double> m;
  /// log m_r - (intercept + r log gamma) for the distances used in the fit.
  std::vector<double> residuals;
  /// Distances that entered the regression (m_r > 1e-300, r >= 1).
  std::vector<std::size_t> used;
};

/// Least-squares line through (r, log m_r) for r >= 1 gives gamma; K is then
/// the smallest constant making the envelope hold for every pair. A diagonal
/// inverse (k = 1) reports gamma = 0. Throws DegenerateFit if fewer than three
/// distances are usable, PreconditionViolated if n < 2k.
DecayFit fit_decay(const KnotVector& kv);

/// CSV with header "r,m_r,envelope"; envelope = K gamma^r.
std::string decay_fit_csv(const DecayFit& fit);

}  // namespace splinelab

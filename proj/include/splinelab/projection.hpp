#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <span>
#include <vector>

#include "splinelab/bspline.hpp"
#include "splinelab/gram.hpp"
#include "splinelab/mesh.hpp"
#include "splinelab/step_function.hpp"

namespace splinelab {

/// Gauss points per cell used for moments of generic fields.
struct QuadratureSpec {
  int m = 0;  // 0 selects the default k + 2 on each axis
};

/// Function on [0,1]^d. A field built from a StepFunction keeps that exact
/// representation so that moments can be integrated without quadrature error.
class ScalarField {
 public:
  ScalarField(std::size_t dim, std::function<double(std::span<const double>)> fn);
  /* implicit */ ScalarField(StepFunction f);

  std::size_t dim() const noexcept { return dim_; }
  double operator()(std::span<const double> x) const { return fn_(x); }
  const StepFunction* step() const noexcept { return step_.get(); }

 private:
  std::size_t dim_;
  std::function<double(std::span<const double>)> fn_;
  std::shared_ptr<const StepFunction> step_;
};

/// Per-axis data for P_Delta: Gram matrix, its Cholesky factor and (lazily)
/// the dense inverse. Immutable apart from the once-initialized inverse.
class AxisProjector {
 public:
  explicit AxisProjector(KnotVector kv);
  const KnotVector& knots() const noexcept { return kv_; }
  const BandedSPD& gram() const noexcept { return gram_; }
  const BandedCholesky& factor() const noexcept { return chol_; }
  /// a_ij; throws SizeCapExceeded above kDefaultInverseCap.
  const Matrix& inverse() const;
  /// K(x, y) = sum over the active k x k block of a_ij N_i(x) N_j(y).
  double kernel(double x, double y) const;
  /// Coefficients w = G^{-1} N(x), so that K(x, .) = sum_j w_j N_j.
  std::vector<double> kernel_row(double x) const;

 private:
  KnotVector kv_;
  BandedSPD gram_;
  BandedCholesky chol_;
  mutable std::once_flag inverse_once_;
  mutable Matrix inverse_;
};

/// Orthogonal projection onto the tensor-product spline space of a mesh.
class Projector {
 public:
  explicit Projector(const TensorMesh& mesh);
  const TensorMesh& mesh() const noexcept { return mesh_; }
  const AxisProjector& axis(std::size_t mu) const { return *axes_.at(mu); }

  /// b_j = <f, N_j>, row-major like TensorCoeffs.
  std::vector<double> moments(const ScalarField& f, QuadratureSpec q = {}) const;
  /// Applies G_mu^{-1} along each axis in the given order (default 0..d-1).
  TensorCoeffs solve_moments(std::vector<double> b, std::span<const std::size_t> order = {}) const;
  TensorCoeffs project(const ScalarField& f, QuadratureSpec q = {},
                       std::span<const std::size_t> order = {}) const;
  /// Product of the one-dimensional kernels.
  double kernel(std::span<const double> x, std::span<const double> y) const;

 private:
  TensorMesh mesh_;
  std::vector<std::shared_ptr<AxisProjector>> axes_;
};

SplineCoeffs project_1d(const KnotVector& kv, const ScalarField& f, QuadratureSpec q = {});
TensorCoeffs project_tensor(const TensorMesh& mesh, const ScalarField& f, QuadratureSpec q = {});
double dirichlet_kernel(const TensorMesh& mesh, std::span<const double> x,
                        std::span<const double> y);

/// max over sampled (x, y) of |K(x,y)| |I_ij| gamma^{-|i-j|_1}, with i, j the
/// cells of x and y. Pairs are drawn uniformly; the diagonal cell pair of
/// every sampled x is always included.
double kernel_bound_stat(const TensorMesh& mesh, double gamma, std::size_t samples,
                         std::uint64_t seed);

struct LebesgueReport {
  std::vector<double> per_axis;
  double lambda = 1.0;
  /// Per-axis coordinate where the axis maximum was observed.
  std::vector<double> argmax;
  /// Sample points examined per axis.
  std::vector<std::size_t> samples;
};

/// Lambda_mu = max over sample x of the integral of |K_mu(x, .)|, integrated
/// exactly per cell after splitting at sign changes. Samples: Greville
/// points, `density` equispaced points per cell, and cell endpoints +- 1e-9.
LebesgueReport lebesgue_constant(const TensorMesh& mesh, std::size_t density = 2);
/// Lebesgue function integral of |K(x, .)| for one axis at one point.
double lebesgue_function(const AxisProjector& ax, double x);

/// max over uniformly sampled points of |P f(x) - f(x)|.
double sup_error(const TensorMesh& mesh, const ScalarField& f, std::size_t samples,
                 std::uint64_t seed, QuadratureSpec q = {});
double sup_error(const TensorCoeffs& pf, const ScalarField& f, std::size_t samples,
                 std::uint64_t seed);

}  // namespace splinelab

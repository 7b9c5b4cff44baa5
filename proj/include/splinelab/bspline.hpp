#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <json.hpp>

#include "splinelab/mesh.hpp"

namespace splinelab {

/// The k possibly-nonzero B-spline values at a point: N_first .. N_{first+k-1}.
struct BasisValues {
  std::size_t first = 0;
  std::vector<double> values;
};

/// L-infinity normalized B-splines (partition of unity) by the triangular
/// Cox-de Boor scheme. Cells are right-continuous except the last one, which
/// is closed at x = 1.
BasisValues eval_basis(const KnotVector& kv, double x);

/// Allocation-free variant: writes k values into out and returns `first`.
std::size_t eval_basis_into(const KnotVector& kv, double x, std::span<double> out);

/// Univariate spline sum_i c_i N_i.
struct SplineCoeffs {
  KnotVector kv;
  std::vector<double> coeffs;
};

double eval_spline(const SplineCoeffs& s, double x);

/// Tensor-product spline coefficients, row-major in axis order (last axis
/// varies fastest).
class TensorCoeffs {
 public:
  TensorCoeffs(TensorMesh mesh, std::vector<double> data);

  const TensorMesh& mesh() const noexcept { return mesh_; }
  std::span<const double> data() const noexcept { return data_; }
  std::span<double> data() noexcept { return data_; }
  std::vector<std::size_t> shape() const { return mesh_.shape(); }

 private:
  TensorMesh mesh_;
  std::vector<double> data_;
};

/// sum_i c_i prod_mu N_{i_mu}(x_mu), contracting the active k_mu indices
/// from the last axis to the first.
double eval_tensor(const TensorCoeffs& tc, std::span<const double> point);

/// Nested arrays in axis order.
nlohmann::json coeffs_to_json(const TensorCoeffs& tc);

}  // namespace splinelab

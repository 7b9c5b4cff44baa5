#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "splinelab/mesh.hpp"
#include "splinelab/projection.hpp"
#include "splinelab/step_function.hpp"

namespace splinelab {

/// M_S f(x): supremum of averages of |f| over axis-parallel rectangles in the
/// unit cube containing x. Exact for step functions: rectangle edges range over
/// f's breakpoints together with x itself.
double strong_maximal(const StepFunction& f, std::span<const double> x);

/// M_S f at every vertex of the grid spanned by coords[mu] (each list sorted,
/// containing 0 and 1), maximizing over rectangles whose edges lie in the same
/// lists. Equals the exact M_S at a vertex when f's breakpoints are contained
/// in the lists; otherwise a lower bound. Result is row-major over vertices.
/// d = 1 or 2.
std::vector<double> maximal_on_grid(const StepFunction& f,
                                    const std::vector<std::vector<double>>& coords);

struct DominationSample {
  std::vector<double> x;
  double pf = 0.0;
  double ms = 0.0;
  double ratio = 0.0;
};

struct DominationReport {
  std::vector<DominationSample> samples;
  double max_ratio = 0.0;
};

/// |P f(x)| / M_S f(x) per point. Throws DivisionByZeroRegion where M_S f
/// vanishes but P f does not; f == 0 gives ratio 0.
DominationReport domination_ratio(const TensorMesh& mesh, const StepFunction& f,
                                  const std::vector<std::vector<double>>& points);
/// Same, with M_S values supplied (they do not depend on the mesh).
DominationReport domination_ratio(const Projector& proj, const StepFunction& f,
                                  const std::vector<std::vector<double>>& points,
                                  std::span<const double> maximal_values);

std::string domination_csv(const DominationReport& rep);

struct WeakTypeReport {
  std::vector<double> lambda;
  /// |{M_S f > lambda}| measured on the midpoint grid.
  std::vector<double> measured;
  /// integral of (|f|/lambda)(1 + log+(|f|/lambda))^{d-1}.
  std::vector<double> rhs;
  std::vector<double> ratio;
  double max_ratio = 0.0;
  /// Grid cells per axis used for the left-hand side.
  std::size_t resolution = 0;
  /// Whether f's breakpoints were all on the evaluation grid, making each
  /// grid value exact.
  bool exact_values = false;
};

/// Left side from M_S evaluated at the midpoints of a uniform grid with
/// `resolution` cells per axis (each midpoint stands for its cell); the
/// rectangle family is the grid lines, the midpoints and f's breakpoints,
/// the latter dropped when there are more than `max_breaks` on an axis.
WeakTypeReport weak_type_ratio(const StepFunction& f, const std::vector<double>& lambdas,
                               std::size_t resolution = 128, std::size_t max_breaks = 256);

/// Exact right-hand side integral for one lambda.
double weak_type_rhs(const StepFunction& f, double lambda);

}  // namespace splinelab

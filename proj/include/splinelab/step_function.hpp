#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "splinelab/mesh.hpp"

namespace splinelab {

/// Piecewise constant function on a rectangular grid over [0,1]^d.
/// Cells are right-open except the last one on each axis.
class StepFunction {
 public:
  /// breaks[mu] must start at 0, end at 1 and be strictly increasing;
  /// values are row-major over cells (last axis fastest).
  StepFunction(std::vector<std::vector<double>> breaks, std::vector<double> values);

  static StepFunction constant(std::size_t dim, double value);
  /// value on r (clipped to the unit cube), 0 elsewhere.
  static StepFunction indicator(const Rectangle& r, double value = 1.0);

  std::size_t dim() const noexcept { return breaks_.size(); }
  const std::vector<double>& breaks(std::size_t mu) const { return breaks_.at(mu); }
  const std::vector<std::vector<double>>& all_breaks() const noexcept { return breaks_; }
  /// Cell counts per axis.
  std::vector<std::size_t> shape() const;
  std::span<const double> values() const noexcept { return values_; }
  std::size_t cell_count() const noexcept { return values_.size(); }

  /// Cell index along axis mu containing x (last cell closed).
  std::size_t locate(std::size_t mu, double x) const;
  double eval(std::span<const double> x) const;

  double integral() const;
  /// Exact integral over r intersected with the unit cube.
  double integral_over(const Rectangle& r) const;
  double max_abs() const;
  bool is_zero() const;
  /// Values attained on cells of positive volume.
  std::vector<double> value_set() const;

  /// Same function on the union of its breakpoints and `extra`.
  StepFunction refine(const std::vector<std::vector<double>>& extra) const;
  StepFunction abs() const;
  StepFunction scaled(double c) const;
  /// g(u) = f(r.lo + u * r.len) on [0,1]^d; r must lie in the unit cube and
  /// have positive side lengths.
  StepFunction pullback(const Rectangle& r) const;

  friend StepFunction operator+(const StepFunction& a, const StepFunction& b);

 private:
  std::vector<std::vector<double>> breaks_;
  std::vector<double> values_;
};

/// Collects weighted rectangles and paints them onto the grid spanned by all
/// their edges. Each cell receives the sum of the weights covering it.
class StepFunctionBuilder {
 public:
  explicit StepFunctionBuilder(std::size_t dim) : dim_(dim) {}
  void add(const Rectangle& r, double weight);
  std::size_t size() const noexcept { return rects_.size(); }
  /// Throws MeshBlowup if the grid would exceed max_cells.
  StepFunction build(std::size_t max_cells = 50'000'000) const;

 private:
  std::size_t dim_;
  std::vector<Rectangle> rects_;
  std::vector<double> weights_;
};

/// Sorted union of breakpoint lists, duplicates removed.
std::vector<double> merge_breaks(std::span<const double> a, std::span<const double> b);

}  // namespace splinelab

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace splinelab {

/// Closed interval [lo, hi].
struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  double length() const noexcept { return hi - lo; }
  bool contains(double x) const noexcept { return lo <= x && x <= hi; }
  bool contains(const Interval& other) const noexcept {
    return lo <= other.lo && other.hi <= hi;
  }
  friend bool operator==(const Interval&, const Interval&) = default;
};

/// Axis-parallel box in [0,1]^d.
struct Rectangle {
  std::vector<Interval> sides;

  std::size_t dim() const noexcept { return sides.size(); }
  double volume() const noexcept;
  /// Euclidean length of the side-length vector.
  double diameter() const noexcept;
  bool contains(std::span<const double> point) const noexcept;
  friend bool operator==(const Rectangle&, const Rectangle&) = default;
};

/// Knot vector t_0 <= ... <= t_{n+k-1} of order k on [0,1] with k-fold
/// boundary knots. Indices are 0-based in code; exported files are 1-based.
///
/// Basis function i is supported on [t_i, t_{i+k}]. The cell I_i = [t_i, t_{i+1}]
/// is nonempty exactly for k-1 <= i <= n-1 when interior knots are simple;
/// cells of zero length occur at the boundary and at repeated interior knots.
class KnotVector {
 public:
  /// Single piecewise-constant cell: order 1, knots (0, 1).
  KnotVector() = default;

  /// Checks sortedness, boundary multiplicity k at 0 and 1, and that no knot
  /// has multiplicity above k. Comparisons are exact.
  static KnotVector validate(std::span<const double> raw, int order);

  int order() const noexcept { return order_; }
  /// Number of basis functions n.
  std::size_t size() const noexcept { return knots_.size() - static_cast<std::size_t>(order_); }
  std::span<const double> knots() const noexcept { return knots_; }
  double knot(std::size_t i) const { return knots_.at(i); }

  /// Distinct knot values in increasing order (0 and 1 included).
  std::vector<double> breakpoints() const;

  /// Index s with t_s <= x < t_{s+1} and k-1 <= s <= n-1; x = 1 maps to the
  /// last nonempty cell. Throws OutOfDomain outside [0,1].
  std::size_t span(double x) const;

  /// Largest knot-interval length |Delta|.
  double diameter() const noexcept;

  /// Greville abscissae (t_{i+1} + ... + t_{i+k-1}) / (k-1); cell midpoints for k = 1.
  std::vector<double> greville() const;

  friend bool operator==(const KnotVector&, const KnotVector&) = default;

 private:
  KnotVector(std::vector<double> knots, int order) : knots_(std::move(knots)), order_(order) {}

  std::vector<double> knots_{0.0, 1.0};
  int order_ = 1;
};

inline KnotVector validate_knots(std::span<const double> raw, int order) {
  return KnotVector::validate(raw, order);
}

/// The three grid intervals attached to an index pair (i, j):
/// cell = I_i, hull = conv(I_i, I_j), support = E_ij.
struct IndexIntervals {
  Interval cell;
  Interval hull;
  Interval support;
};

/// I_i = [t_i, t_{i+1}], I_ij = [t_min, t_{max+1}], E_ij = [t_min, t_{max+k}].
IndexIntervals intervals(const KnotVector& kv, std::size_t i, std::size_t j);

/// d knot vectors, one per coordinate axis.
class TensorMesh {
 public:
  explicit TensorMesh(std::vector<KnotVector> axes);

  std::size_t dim() const noexcept { return axes_.size(); }
  const KnotVector& axis(std::size_t mu) const { return axes_.at(mu); }
  const std::vector<KnotVector>& axes() const noexcept { return axes_; }
  /// Per-axis basis counts (n_1, ..., n_d).
  std::vector<std::size_t> shape() const;

  friend bool operator==(const TensorMesh&, const TensorMesh&) = default;

 private:
  std::vector<KnotVector> axes_;
};

/// |Delta| = max over axes of the largest knot-interval length.
double mesh_diameter(const TensorMesh& mesh) noexcept;

/// Tensor versions of the interval helpers: products over axes of I_i, I_ij, E_ij.
Rectangle cell_rectangle(const TensorMesh& mesh, std::span<const std::size_t> i);
Rectangle hull_rectangle(const TensorMesh& mesh, std::span<const std::size_t> i,
                         std::span<const std::size_t> j);
Rectangle support_rectangle(const TensorMesh& mesh, std::span<const std::size_t> i,
                            std::span<const std::size_t> j);

enum class MeshKind { Uniform, Random, Geometric };

MeshKind parse_mesh_kind(const std::string& name);
std::string to_string(MeshKind kind);

/// Mesh families for experiments. n is the basis count, so the mesh has
/// n - k + 1 cells. For Geometric, param is the ratio between consecutive
/// cell lengths; Random ignores param and draws sorted simple interior knots.
KnotVector generate_mesh(MeshKind kind, std::size_t n, int order, double param,
                         std::uint64_t seed);

// JSON: {"k": int, "knots": [...]}; a TensorMesh is an array of those.
void to_json(nlohmann::json& j, const KnotVector& kv);
void from_json(const nlohmann::json& j, KnotVector& kv);
nlohmann::json mesh_to_json(const TensorMesh& mesh);
TensorMesh mesh_from_json(const nlohmann::json& j);

}  // namespace splinelab

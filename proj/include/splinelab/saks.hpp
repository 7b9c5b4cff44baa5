#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>
#include <json.hpp>

#include "splinelab/mesh.hpp"
#include "splinelab/step_function.hpp"

namespace splinelab {

using Rational = boost::multiprecision::cpp_rational;

/// [x0, x1] x [y0, y1] with exact rational corners.
struct RationalRect {
  Rational x0, x1, y0, y1;

  Rational width() const { return x1 - x0; }
  Rational height() const { return y1 - y0; }
  Rational area() const { return width() * height(); }
  Rectangle to_rectangle() const;
  /// Exact intersection; empty (zero area) when the interiors do not meet.
  RationalRect intersect(const RationalRect& o) const;
  bool interiors_meet(const RationalRect& o) const;
  bool contains(const RationalRect& o) const;
  friend bool operator==(const RationalRect&, const RationalRect&) = default;
};

RationalRect unit_square();

enum class BohrRole { I, Core, Remainder };
std::string to_string(BohrRole role);

/// One splitting step on a piece: I_1..I_N, their intersection and the
/// N - 1 uncovered rectangles that are split next.
struct BohrGroup {
  std::size_t generation = 1;  // 1-based
  RationalRect piece;
  std::vector<RationalRect> members;
  RationalRect core;
};

/// First splitting of `piece` with parameter N.
BohrGroup bohr_split(const RationalRect& piece, std::size_t n);
/// R_j = [a1 + j w/N, a1 + (j+1) w/N] x [a2 + h/(j+1), b2], j = 1..N-1.
std::vector<RationalRect> bohr_uncovered(const RationalRect& piece, std::size_t n);

/// Bohr's enumeration on S. Every piece is split the same number of times G,
/// the least G with remainder area < |S|/N^2. Groups are stored breadth
/// first; the remainder rectangles are the pieces left after generation G.
///
/// When the enumeration would exceed the rectangle cap it is kept implicit:
/// only the exact counts and areas are stored. Every piece at one generation
/// is an affine image of S, so properties are checked per generation.
class BohrDecomposition {
 public:
  const RationalRect& root() const noexcept { return root_; }
  double alpha() const noexcept { return alpha_; }
  std::size_t n() const noexcept { return n_; }
  std::size_t generations() const noexcept { return generations_; }
  bool materialized() const noexcept { return materialized_; }
  const std::vector<BohrGroup>& groups() const noexcept { return groups_; }
  const std::vector<RationalRect>& remainder() const noexcept { return remainder_; }
  /// Remainder area divided by |S|: (1 - H_N/N)^G.
  const Rational& remainder_fraction() const noexcept { return remainder_fraction_; }
  /// Number of groups and of rectangles in the enumeration (I's and J's).
  double group_count() const noexcept;
  double rectangle_count() const noexcept;

  /// Rectangles in enumeration order: all I's group by group, then the J's.
  struct Entry {
    RationalRect rect;
    BohrRole role;
    std::size_t generation;
    std::size_t group;  // 1-based; 0 for remainder rectangles
    std::size_t j;      // 1..N for I's
  };
  std::vector<Entry> enumerate() const;

  friend BohrDecomposition bohr_decompose(const RationalRect& s, double alpha, std::size_t cap);

 private:
  RationalRect root_;
  double alpha_ = 2.0;
  std::size_t n_ = 2;
  std::size_t generations_ = 0;
  bool materialized_ = false;
  std::vector<BohrGroup> groups_;
  std::vector<RationalRect> remainder_;
  Rational remainder_fraction_;
};

constexpr std::size_t kDefaultBohrCap = 2'000'000;

/// Throws DegenerateAlpha unless floor(alpha) >= 2.
BohrDecomposition bohr_decompose(const RationalRect& s, double alpha,
                                 std::size_t cap = kDefaultBohrCap);
BohrDecomposition bohr_decompose(const Rectangle& s, double alpha,
                                 std::size_t cap = kDefaultBohrCap);

/// alpha on the cores and remainder rectangles, 0 elsewhere. Throws
/// MeshBlowup for an implicit decomposition or above max_cells.
StepFunction build_psi(const BohrDecomposition& dec, std::size_t max_cells = 50'000'000);

/// The part of psi inside one enumerated I: alpha on its group's core.
StepFunction psi_on_member(const BohrDecomposition& dec, const BohrGroup& group);

struct PsiReport {
  /// "direct" (step function and every rectangle) or "class" (exact
  /// rationals per generation).
  std::string route;
  bool values_ok = false;
  std::vector<double> values;
  bool orlicz_ok = false;
  double orlicz_ratio = 0.0;  // integral of psi log+ psi over |S|
  bool averages_ok = false;
  double min_average_ratio = 0.0;  // min over enumerated I of (1/|I|) int_I psi
  double rectangles_checked = 0.0;
  bool coverage_ok = false;
  bool remainder_ok = false;
  Rational remainder_fraction;
  Rational first_union_fraction;  // |union of generation-1 I's| / |S|
  bool all_pass() const noexcept {
    return values_ok && orlicz_ok && averages_ok && coverage_ok && remainder_ok;
  }
};

/// Checks values in {0, alpha}, int psi log+ psi <= 9|S|, int_I psi >= |I|
/// for every enumerated rectangle, coverage and the stopping rule, using the
/// materialized step function.
PsiReport verify_psi(const StepFunction& psi, const BohrDecomposition& dec);
/// Same properties in exact arithmetic on the generation template; works for
/// implicit decompositions.
PsiReport verify_psi(const BohrDecomposition& dec);

/// Exact area of a union of rectangles by a sweep over x.
Rational union_area(const std::vector<RationalRect>& rects);
double union_area(const std::vector<Rectangle>& rects);

/// Levels i = 1..n_max; each level partitions [0,1]^2 into rectangles of
/// diameter <= 1/i, each carrying a Bohr parameter alpha.
struct SaksSchedule {
  std::size_t n_max = 4;
  std::function<std::vector<RationalRect>(std::size_t)> partition;
  std::function<double(std::size_t level, std::size_t piece)> alpha;
  std::function<double(std::size_t)> epsilon;
  std::function<double(double)> sigma;
  /// The single-piece schedule on [0,1]^2 has diameter sqrt 2 at level 1.
  bool enforce_diameter = true;

  /// Squares of side 1/(2i), alpha = min(2^i, 4), eps_i = 1/i,
  /// sigma(t) = 1/log(e + t).
  static SaksSchedule standard(std::size_t n_max = 4);
  /// One level: S = [0,1]^2, alpha = 5, eps = 1.
  static SaksSchedule trivial();
};

/// Checks that every level tiles the unit square exactly with diam <= 1/i.
void validate_schedule(const SaksSchedule& sched);

struct SaksLevel {
  std::size_t level = 1;
  double epsilon = 1.0;
  std::vector<BohrDecomposition> pieces;
  StepFunction psi = StepFunction::constant(2, 0.0);
};

constexpr std::size_t kDefaultBreakCap = 40'000;

/// Levels 1..n with psi_i = sum_j psi_{S_j, alpha_j}. Throws MeshBlowup if a
/// level has more than break_cap breakpoints on an axis.
std::vector<SaksLevel> build_saks_levels(const SaksSchedule& sched, std::size_t n,
                                         std::size_t break_cap = kDefaultBreakCap);
/// phi_n = sum_{i <= n} psi_i / eps_i on the merged mesh.
StepFunction build_saks_partial(const SaksSchedule& sched, std::size_t n,
                                std::size_t break_cap = kDefaultBreakCap);
StepFunction saks_sum(const std::vector<SaksLevel>& levels, std::size_t n,
                      std::size_t break_cap = kDefaultBreakCap);

/// min over enumerated rectangles I of level i <= n of eps_i int_I phi / |I|;
/// at least 1 when the partial-sum bound holds.
struct LimsupCheck {
  double min_ratio = 0.0;
  std::size_t rectangles = 0;
  bool holds = false;
};
LimsupCheck check_partial_sum_bound(const StepFunction& phi, const std::vector<SaksLevel>& levels);

/// integral over [0,1]^d of sigma(|f|) |f| (log+ |f|)^{d-1}.
double orlicz_integral(const StepFunction& f, const std::function<double(double)>& sigma,
                       std::size_t d);

/// P_I phi as a polynomial of orders (k1, k2) on the unit square in local
/// coordinates of I.
struct LocalPolynomial {
  std::array<int, 2> orders{1, 1};
  Rectangle rect;
  /// Monomial coefficients c[a * k2 + b] of u^a v^b, u, v local in [0,1].
  std::vector<double> coeffs;
  double eval_local(double u, double v) const;
  double operator()(double x, double y) const;
};

/// Orthogonal projection of phi restricted to I onto polynomials of the
/// given orders (exact step-function moments).
LocalPolynomial project_on_rectangle(const StepFunction& phi, const Rectangle& rect,
                                     std::array<int, 2> orders);

struct PointwiseReport {
  double average = 0.0;    // (1/|I|) int_I phi
  double threshold = 0.0;  // t
  double hypothesis = 0.0; // c_k1 c_k2 t
  /// |A(I)| / |I| with A(I) = {|P_I phi| >= t}.
  double fraction = 0.0;
  double fraction_coarse = 0.0;  // 512^2 midpoint grid
  double fraction_fine = 0.0;    // 1024^2 midpoint grid
  bool exact = false;            // fraction from exact slices (orders <= 2)
  std::size_t resolution = 1024;
  bool richardson_ok = false;    // coarse and fine agree within 2%
  bool holds = false;            // fraction >= 1/4
};

/// Measures |A(I)| for t (t <= 0 selects the largest t the hypothesis
/// allows). Throws HypothesisNotMet if the average of phi over I is below
/// c_k1 c_k2 t.
PointwiseReport projpointwise_check(const StepFunction& phi, const Rectangle& rect,
                                    std::array<int, 2> orders, double t = 0.0);

/// Indicator of the grid cells of I (res x res) where |P| >= t.
StepFunction level_set_indicator(const LocalPolynomial& p, double t, std::size_t res = 512);

struct UnionPairEntry {
  std::size_t n = 0, l = 0;  // 1-based, l <= n
  double measured = 0.0;     // |A_n minus I_l|
  double bound = 0.0;        // |I_n| (c - l/n)
  bool holds = false;
};

struct UnionReport {
  double union_a = 0.0;
  double union_i = 0.0;
  double ratio = 0.0;
  double c = 0.0;  // min_j |A_j| / |I_j|
  std::vector<UnionPairEntry> pairs;
  bool pairs_hold = false;
};

/// A_j is the support of subsets[j]. Throws NotSubset if a support leaves
/// its rectangle.
UnionReport union_measure_check(const std::vector<Rectangle>& rects,
                                const std::vector<StepFunction>& subsets);

struct DivergenceLevel {
  std::size_t level = 1;
  double threshold = 0.0;  // t_i = 1 / (eps_i c_k1 c_k2)
  double b_measure = 0.0;  // fraction of points in B_i
  double median_growth = 0.0;
  double max_growth = 0.0;
  std::size_t rectangles = 0;
};

struct DivergenceReport {
  std::array<int, 2> orders{2, 2};
  std::vector<DivergenceLevel> levels;
  /// growth[n-1][p] = g_n(point p).
  std::vector<std::vector<double>> growth;
  double c1 = 0.0;  // min_i |B_i|
};

/// |B_i| and g_n over the sample points, with rectangles restricted to the
/// enumerated families of levels 1..n_max.
DivergenceReport divergence_curve(const SaksSchedule& sched, std::array<int, 2> orders,
                                  const std::vector<std::array<double, 2>>& points,
                                  std::size_t n_max);
DivergenceReport divergence_curve(const std::vector<SaksLevel>& levels,
                                  std::array<int, 2> orders,
                                  const std::vector<std::array<double, 2>>& points);

/// Columns: level, t_i, B_i_measure, median_growth, max_growth.
std::string divergence_csv(const DivergenceReport& rep);

/// Decomposition export: rectangles in enumeration order with roles and
/// generations (materialized decompositions only).
nlohmann::json bohr_to_json(const BohrDecomposition& dec);
nlohmann::json psi_report_to_json(const PsiReport& rep);

}  // namespace splinelab

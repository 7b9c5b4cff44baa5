#include "splinelab/saks.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "splinelab/csv.hpp"
#include "splinelab/error.hpp"
#include "splinelab/polynomial.hpp"
#include "splinelab/projection.hpp"
#include "splinelab/remez.hpp"

namespace splinelab {

namespace {

double to_double(const Rational& r) { return r.convert_to<double>(); }

std::string to_text(const Rational& r) { return r.str(); }

Rational harmonic(std::size_t n) {
  Rational h = 0;
  for (std::size_t j = 1; j <= n; ++j) h += Rational(1, static_cast<long long>(j));
  return h;
}

// Fraction of a piece left uncovered by one split: 1 - H_N / N.
Rational uncovered_fraction(std::size_t n) {
  return 1 - harmonic(n) / static_cast<long long>(n);
}

double log_plus(double x) { return x > 1.0 ? std::log(x) : 0.0; }

KnotVector single_cell(int k) {
  std::vector<double> t(static_cast<std::size_t>(k), 0.0);
  t.resize(2 * static_cast<std::size_t>(k), 1.0);
  return KnotVector::validate(t, k);
}

double binomial(int n, int r) {
  double b = 1.0;
  for (int i = 1; i <= r; ++i) b = b * (n - r + i) / i;
  return b;
}

// M[a][m]: coefficient of u^m in the Bernstein polynomial B_{a,k-1}.
std::vector<double> bernstein_to_monomial(int k) {
  const int deg = k - 1;
  std::vector<double> m(static_cast<std::size_t>(k * k), 0.0);
  for (int a = 0; a <= deg; ++a)
    for (int p = a; p <= deg; ++p)
      m[static_cast<std::size_t>(a * k + p)] =
          binomial(deg, a) * binomial(deg - a, p - a) * ((p - a) % 2 ? -1.0 : 1.0);
  return m;
}

// Union of the nonzero cells of a 2-d step function as row runs.
std::vector<Rectangle> support_rectangles(const StepFunction& f) {
  std::vector<Rectangle> out;
  const auto& bx = f.breaks(0);
  const auto& by = f.breaks(1);
  const std::size_t ny = by.size() - 1;
  const auto v = f.values();
  for (std::size_t i = 0; i + 1 < bx.size(); ++i) {
    std::size_t j = 0;
    while (j < ny) {
      if (v[i * ny + j] == 0.0) {
        ++j;
        continue;
      }
      const std::size_t start = j;
      while (j < ny && v[i * ny + j] != 0.0) ++j;
      out.push_back(Rectangle{{{bx[i], bx[i + 1]}, {by[start], by[j]}}});
    }
  }
  return out;
}

StepFunction support_indicator(const StepFunction& f) {
  std::vector<double> v(f.values().begin(), f.values().end());
  for (double& x : v) x = x != 0.0 ? 1.0 : 0.0;
  return StepFunction(f.all_breaks(), std::move(v));
}

// Distinct edge coordinates of a set of rectangles on one axis, with 0 and 1.
std::size_t distinct_edges(const std::vector<Rectangle>& rects, std::size_t mu) {
  std::vector<double> e{0.0, 1.0};
  for (const auto& r : rects) {
    e.push_back(r.sides[mu].lo);
    e.push_back(r.sides[mu].hi);
  }
  std::sort(e.begin(), e.end());
  return static_cast<std::size_t>(std::unique(e.begin(), e.end()) - e.begin());
}

}  // namespace

Rectangle RationalRect::to_rectangle() const {
  return Rectangle{{{to_double(x0), to_double(x1)}, {to_double(y0), to_double(y1)}}};
}

RationalRect RationalRect::intersect(const RationalRect& o) const {
  RationalRect r{std::max(x0, o.x0), std::min(x1, o.x1), std::max(y0, o.y0), std::min(y1, o.y1)};
  if (r.x1 < r.x0) r.x1 = r.x0;
  if (r.y1 < r.y0) r.y1 = r.y0;
  return r;
}

bool RationalRect::interiors_meet(const RationalRect& o) const {
  return std::max(x0, o.x0) < std::min(x1, o.x1) && std::max(y0, o.y0) < std::min(y1, o.y1);
}

bool RationalRect::contains(const RationalRect& o) const {
  return x0 <= o.x0 && o.x1 <= x1 && y0 <= o.y0 && o.y1 <= y1;
}

RationalRect unit_square() { return RationalRect{0, 1, 0, 1}; }

std::string to_string(BohrRole role) {
  switch (role) {
    case BohrRole::I: return "I";
    case BohrRole::Core: return "delta";
    case BohrRole::Remainder: return "J";
  }
  return "?";
}

BohrGroup bohr_split(const RationalRect& piece, std::size_t n) {
  BohrGroup g;
  g.piece = piece;
  const Rational w = piece.width(), h = piece.height();
  const auto nn = static_cast<long long>(n);
  for (long long j = 1; j <= nn; ++j) {
    g.members.push_back(RationalRect{piece.x0, piece.x0 + w * j / nn, piece.y0, piece.y0 + h / j});
  }
  g.core = RationalRect{piece.x0, piece.x0 + w / nn, piece.y0, piece.y0 + h / nn};
  return g;
}

std::vector<RationalRect> bohr_uncovered(const RationalRect& piece, std::size_t n) {
  std::vector<RationalRect> out;
  const Rational w = piece.width(), h = piece.height();
  const auto nn = static_cast<long long>(n);
  for (long long j = 1; j < nn; ++j) {
    out.push_back(RationalRect{piece.x0 + w * j / nn, piece.x0 + w * (j + 1) / nn,
                               piece.y0 + h / (j + 1), piece.y1});
  }
  return out;
}

double BohrDecomposition::group_count() const noexcept {
  double total = 0.0, level = 1.0;
  for (std::size_t g = 0; g < generations_; ++g) {
    total += level;
    level *= static_cast<double>(n_ - 1);
  }
  return total;
}

double BohrDecomposition::rectangle_count() const noexcept {
  return static_cast<double>(n_) * group_count() +
         std::pow(static_cast<double>(n_ - 1), static_cast<double>(generations_));
}

std::vector<BohrDecomposition::Entry> BohrDecomposition::enumerate() const {
  if (!materialized_) {
    throw Error(ErrorCode::MeshBlowup, "decomposition is implicit; enumeration not stored");
  }
  std::vector<Entry> out;
  out.reserve(static_cast<std::size_t>(rectangle_count()));
  for (std::size_t gi = 0; gi < groups_.size(); ++gi) {
    const auto& g = groups_[gi];
    for (std::size_t j = 0; j < g.members.size(); ++j) {
      out.push_back(Entry{g.members[j], BohrRole::I, g.generation, gi + 1, j + 1});
    }
  }
  for (const auto& r : remainder_) {
    out.push_back(Entry{r, BohrRole::Remainder, generations_, 0, 0});
  }
  return out;
}

BohrDecomposition bohr_decompose(const RationalRect& s, double alpha, std::size_t cap) {
  if (!(alpha > 1.0) || !std::isfinite(alpha) || alpha >= 1e6) {
    throw Error(ErrorCode::DegenerateAlpha, "alpha must be finite and > 1");
  }
  const auto n = static_cast<std::size_t>(std::floor(alpha));
  if (n < 2) throw Error(ErrorCode::DegenerateAlpha, "floor(alpha) must be at least 2");
  if (!(s.x0 < s.x1 && s.y0 < s.y1)) {
    throw Error(ErrorCode::PreconditionViolated, "root rectangle must have positive area");
  }
  BohrDecomposition dec;
  dec.root_ = s;
  dec.alpha_ = alpha;
  dec.n_ = n;
  const Rational frac = uncovered_fraction(n);
  const Rational stop = Rational(1, static_cast<long long>(n * n));
  Rational rem = 1;
  while (rem >= stop) {
    rem *= frac;
    ++dec.generations_;
  }
  dec.remainder_fraction_ = rem;
  dec.materialized_ = dec.rectangle_count() <= static_cast<double>(cap);
  if (!dec.materialized_) return dec;

  std::vector<RationalRect> pieces{s};
  for (std::size_t g = 1; g <= dec.generations_; ++g) {
    std::vector<RationalRect> next;
    next.reserve(pieces.size() * (n - 1));
    for (const auto& p : pieces) {
      BohrGroup grp = bohr_split(p, n);
      grp.generation = g;
      dec.groups_.push_back(std::move(grp));
      for (auto& r : bohr_uncovered(p, n)) next.push_back(std::move(r));
    }
    pieces = std::move(next);
  }
  dec.remainder_ = std::move(pieces);
  return dec;
}

BohrDecomposition bohr_decompose(const Rectangle& s, double alpha, std::size_t cap) {
  if (s.dim() != 2) throw Error(ErrorCode::DimensionMismatch, "Bohr construction is planar");
  return bohr_decompose(RationalRect{Rational(s.sides[0].lo), Rational(s.sides[0].hi),
                                     Rational(s.sides[1].lo), Rational(s.sides[1].hi)},
                        alpha, cap);
}

StepFunction build_psi(const BohrDecomposition& dec, std::size_t max_cells) {
  if (!dec.materialized()) {
    throw Error(ErrorCode::MeshBlowup, "decomposition with " +
                                           format_number(dec.rectangle_count()) +
                                           " rectangles is implicit; psi cannot be materialized");
  }
  StepFunctionBuilder b(2);
  for (const auto& g : dec.groups()) b.add(g.core.to_rectangle(), dec.alpha());
  for (const auto& r : dec.remainder()) b.add(r.to_rectangle(), dec.alpha());
  return b.build(max_cells);
}

StepFunction psi_on_member(const BohrDecomposition& dec, const BohrGroup& group) {
  return StepFunction::indicator(group.core.to_rectangle(), dec.alpha());
}

Rational union_area(const std::vector<RationalRect>& rects) {
  std::vector<Rational> xs;
  for (const auto& r : rects) {
    xs.push_back(r.x0);
    xs.push_back(r.x1);
  }
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  Rational total = 0;
  for (std::size_t s = 0; s + 1 < xs.size(); ++s) {
    std::vector<std::pair<Rational, Rational>> iv;
    for (const auto& r : rects) {
      if (r.x0 <= xs[s] && xs[s + 1] <= r.x1 && r.y0 < r.y1) iv.emplace_back(r.y0, r.y1);
    }
    std::sort(iv.begin(), iv.end());
    Rational covered = 0;
    for (std::size_t i = 0; i < iv.size();) {
      Rational lo = iv[i].first, hi = iv[i].second;
      ++i;
      while (i < iv.size() && iv[i].first <= hi) {
        hi = std::max(hi, iv[i].second);
        ++i;
      }
      covered += hi - lo;
    }
    total += covered * (xs[s + 1] - xs[s]);
  }
  return total;
}

double union_area(const std::vector<Rectangle>& rects) {
  // sweep in x with a segment tree of cover counts over compressed y
  std::vector<double> ys;
  struct Event {
    double x;
    int delta;
    double y0, y1;
  };
  std::vector<Event> ev;
  for (const auto& r : rects) {
    if (r.dim() != 2) throw Error(ErrorCode::DimensionMismatch, "planar rectangles expected");
    if (!(r.sides[0].lo < r.sides[0].hi && r.sides[1].lo < r.sides[1].hi)) continue;
    ys.push_back(r.sides[1].lo);
    ys.push_back(r.sides[1].hi);
    ev.push_back({r.sides[0].lo, 1, r.sides[1].lo, r.sides[1].hi});
    ev.push_back({r.sides[0].hi, -1, r.sides[1].lo, r.sides[1].hi});
  }
  if (ev.empty()) return 0.0;
  std::sort(ys.begin(), ys.end());
  ys.erase(std::unique(ys.begin(), ys.end()), ys.end());
  std::sort(ev.begin(), ev.end(), [](const Event& a, const Event& b) { return a.x < b.x; });
  const std::size_t m = ys.size() - 1;
  std::vector<int> count(4 * m, 0);
  std::vector<double> len(4 * m, 0.0);
  std::function<void(std::size_t, std::size_t, std::size_t, std::size_t, std::size_t, int)> update =
      [&](std::size_t node, std::size_t lo, std::size_t hi, std::size_t a, std::size_t b, int d) {
        if (b <= lo || hi <= a) return;
        if (a <= lo && hi <= b) {
          count[node] += d;
        } else {
          const std::size_t mid = (lo + hi) / 2;
          update(2 * node, lo, mid, a, b, d);
          update(2 * node + 1, mid, hi, a, b, d);
        }
        if (count[node] > 0) len[node] = ys[hi] - ys[lo];
        else if (hi - lo == 1) len[node] = 0.0;
        else len[node] = len[2 * node] + len[2 * node + 1];
      };
  double total = 0.0;
  double prev = ev.front().x;
  for (const auto& e : ev) {
    total += len[1] * (e.x - prev);
    prev = e.x;
    const auto a = static_cast<std::size_t>(std::lower_bound(ys.begin(), ys.end(), e.y0) - ys.begin());
    const auto b = static_cast<std::size_t>(std::lower_bound(ys.begin(), ys.end(), e.y1) - ys.begin());
    update(1, 0, m, a, b, e.delta);
  }
  return total;
}

PsiReport verify_psi(const StepFunction& psi, const BohrDecomposition& dec) {
  if (!dec.materialized()) {
    throw Error(ErrorCode::MeshBlowup, "direct verification needs a materialized decomposition");
  }
  PsiReport rep;
  rep.route = "direct";
  const double alpha = dec.alpha();
  const double area = to_double(dec.root().area());

  rep.values = psi.value_set();
  rep.values_ok = rep.values == std::vector<double>{0.0, alpha};

  rep.orlicz_ratio = orlicz_integral(psi, [](double) { return 1.0; }, 2) / area;
  rep.orlicz_ok = rep.orlicz_ratio <= 9.0;

  double worst = std::numeric_limits<double>::infinity();
  std::size_t checked = 0;
  for (const auto& e : dec.enumerate()) {
    const Rectangle r = e.rect.to_rectangle();
    worst = std::min(worst, psi.integral_over(r) / r.volume());
    ++checked;
  }
  rep.min_average_ratio = worst;
  rep.rectangles_checked = static_cast<double>(checked);
  // the I's of an integer alpha sit exactly at ratio 1; allow rounding only
  rep.averages_ok = worst >= 1.0 - 1e-12;

  Rational covered = 0;
  for (const auto& g : dec.groups()) covered += union_area(g.members);
  for (const auto& r : dec.remainder()) covered += r.area();
  rep.coverage_ok = covered == dec.root().area();

  rep.remainder_fraction = dec.remainder_fraction();
  Rational rem_direct = 0;
  for (const auto& r : dec.remainder()) rem_direct += r.area();
  rem_direct /= dec.root().area();
  const auto nn = static_cast<long long>(dec.n());
  rep.remainder_ok = rem_direct == dec.remainder_fraction() &&
                     rem_direct < Rational(1, nn * nn) &&
                     rem_direct / uncovered_fraction(dec.n()) >= Rational(1, nn * nn);
  rep.first_union_fraction = union_area(dec.groups().front().members) / dec.root().area();
  return rep;
}

PsiReport verify_psi(const BohrDecomposition& dec) {
  PsiReport rep;
  rep.route = "class";
  const double alpha = dec.alpha();
  const std::size_t n = dec.n();
  const auto nn = static_cast<long long>(n);
  // Every piece is an affine image of the root, so the template split of
  // the unit square decides the per-generation relations exactly.
  const RationalRect t = unit_square();
  const BohrGroup g = bohr_split(t, n);
  const auto rs = bohr_uncovered(t, n);

  bool disjoint = true;
  for (std::size_t a = 0; a < rs.size(); ++a) {
    disjoint = disjoint && t.contains(rs[a]) && !rs[a].interiors_meet(g.core);
    for (const auto& m : g.members) disjoint = disjoint && !rs[a].interiors_meet(m);
    for (std::size_t b = a + 1; b < rs.size(); ++b) disjoint = disjoint && !rs[a].interiors_meet(rs[b]);
  }
  for (const auto& m : g.members) disjoint = disjoint && t.contains(m) && m.contains(g.core);
  const Rational group_union = union_area(g.members);
  // zero is attained on the group union outside the core, alpha on the core
  rep.values_ok = disjoint && group_union > g.core.area() && g.core.area() > 0;
  if (rep.values_ok) rep.values = {0.0, alpha};

  // psi mass fraction mu_G: mu_0 = 1 (whole piece is remainder),
  // mu_m = |core| + sum_j |R_j| mu_{m-1}
  Rational rest = 0;
  for (const auto& r : rs) rest += r.area();
  Rational mu = 1;
  for (std::size_t m = 0; m < dec.generations(); ++m) mu = g.core.area() + rest * mu;
  rep.orlicz_ratio = alpha * log_plus(alpha) * to_double(mu);
  rep.orlicz_ok = rep.orlicz_ratio <= 9.0;

  // Inside the union of a group psi is alpha on the core only.
  double worst = alpha;  // remainder rectangles: psi = alpha throughout
  for (const auto& m : g.members) worst = std::min(worst, alpha * to_double(g.core.area() / m.area()));
  rep.min_average_ratio = worst;
  rep.rectangles_checked = dec.rectangle_count();
  rep.averages_ok = worst >= 1.0 && alpha >= static_cast<double>(n);

  rep.coverage_ok = group_union + rest == t.area();
  rep.remainder_fraction = dec.remainder_fraction();
  Rational rem = 1;
  for (std::size_t m = 0; m < dec.generations(); ++m) rem *= rest;
  rep.remainder_ok = rem == dec.remainder_fraction() && rem < Rational(1, nn * nn) &&
                     rem / rest >= Rational(1, nn * nn);
  rep.first_union_fraction = group_union;
  return rep;
}

// ---------------------------------------------------------------------------
// Saks schedule

SaksSchedule SaksSchedule::standard(std::size_t n_max) {
  SaksSchedule s;
  s.n_max = n_max;
  s.partition = [](std::size_t i) {
    const auto m = static_cast<long long>(2 * i);
    std::vector<RationalRect> out;
    for (long long a = 0; a < m; ++a)
      for (long long b = 0; b < m; ++b)
        out.push_back(RationalRect{Rational(a, m), Rational(a + 1, m), Rational(b, m), Rational(b + 1, m)});
    return out;
  };
  s.alpha = [](std::size_t i, std::size_t) { return std::min(std::ldexp(1.0, static_cast<int>(std::min<std::size_t>(i, 60))), 4.0); };
  s.epsilon = [](std::size_t i) { return 1.0 / static_cast<double>(i); };
  s.sigma = [](double t) { return 1.0 / std::log(std::exp(1.0) + t); };
  return s;
}

SaksSchedule SaksSchedule::trivial() {
  SaksSchedule s = standard(1);
  s.partition = [](std::size_t) { return std::vector<RationalRect>{unit_square()}; };
  s.alpha = [](std::size_t, std::size_t) { return 5.0; };
  s.epsilon = [](std::size_t) { return 1.0; };
  s.enforce_diameter = false;
  return s;
}

void validate_schedule(const SaksSchedule& sched) {
  if (!sched.partition || !sched.alpha || !sched.epsilon || !sched.sigma) {
    throw Error(ErrorCode::PreconditionViolated, "schedule is missing a component");
  }
  double prev_eps = std::numeric_limits<double>::infinity();
  const RationalRect unit = unit_square();
  for (std::size_t i = 1; i <= sched.n_max; ++i) {
    const auto parts = sched.partition(i);
    Rational total = 0;
    const Rational bound = Rational(1, static_cast<long long>(i * i));
    for (std::size_t a = 0; a < parts.size(); ++a) {
      const auto& p = parts[a];
      if (!unit.contains(p) || !(p.x0 < p.x1 && p.y0 < p.y1)) {
        throw Error(ErrorCode::PreconditionViolated, "level " + std::to_string(i) + ": piece outside the unit square");
      }
      if (sched.enforce_diameter && p.width() * p.width() + p.height() * p.height() > bound) {
        throw Error(ErrorCode::PreconditionViolated, "level " + std::to_string(i) + ": piece diameter above 1/i");
      }
      for (std::size_t b = a + 1; b < parts.size(); ++b) {
        if (p.interiors_meet(parts[b])) {
          throw Error(ErrorCode::PreconditionViolated, "level " + std::to_string(i) + ": pieces overlap");
        }
      }
      total += p.area();
      if (!(sched.alpha(i, a) > 1.0)) {
        throw Error(ErrorCode::DegenerateAlpha, "level " + std::to_string(i) + ": alpha must exceed 1");
      }
    }
    if (total != 1) {
      throw Error(ErrorCode::PreconditionViolated, "level " + std::to_string(i) + ": pieces do not tile the unit square");
    }
    const double eps = sched.epsilon(i);
    if (!(eps > 0.0) || eps > prev_eps) {
      throw Error(ErrorCode::PreconditionViolated, "epsilon must be positive and nonincreasing");
    }
    prev_eps = eps;
  }
}

std::vector<SaksLevel> build_saks_levels(const SaksSchedule& sched, std::size_t n,
                                         std::size_t break_cap) {
  validate_schedule(sched);
  if (n < 1 || n > sched.n_max) {
    throw Error(ErrorCode::PreconditionViolated, "level count must be in 1..n_max");
  }
  std::vector<SaksLevel> levels;
  for (std::size_t i = 1; i <= n; ++i) {
    SaksLevel lv;
    lv.level = i;
    lv.epsilon = sched.epsilon(i);
    const auto parts = sched.partition(i);
    std::vector<Rectangle> painted;
    for (std::size_t j = 0; j < parts.size(); ++j) {
      lv.pieces.push_back(bohr_decompose(parts[j], sched.alpha(i, j)));
      const auto& dec = lv.pieces.back();
      if (!dec.materialized()) {
        throw Error(ErrorCode::MeshBlowup, "level " + std::to_string(i) + ": Bohr decomposition too large");
      }
      for (const auto& g : dec.groups()) painted.push_back(g.core.to_rectangle());
      for (const auto& r : dec.remainder()) painted.push_back(r.to_rectangle());
    }
    for (std::size_t mu = 0; mu < 2; ++mu) {
      if (distinct_edges(painted, mu) > break_cap) {
        throw Error(ErrorCode::MeshBlowup, "level " + std::to_string(i) + ": breakpoint cap exceeded");
      }
    }
    StepFunctionBuilder b(2);
    std::size_t at = 0;
    for (const auto& dec : lv.pieces) {
      const std::size_t count = dec.groups().size() + dec.remainder().size();
      for (std::size_t c = 0; c < count; ++c) b.add(painted[at++], dec.alpha());
    }
    lv.psi = b.build();
    levels.push_back(std::move(lv));
  }
  return levels;
}

StepFunction saks_sum(const std::vector<SaksLevel>& levels, std::size_t n, std::size_t break_cap) {
  if (n < 1 || n > levels.size()) throw Error(ErrorCode::PreconditionViolated, "level count out of range");
  for (std::size_t mu = 0; mu < 2; ++mu) {
    std::vector<double> all;
    for (std::size_t i = 0; i < n; ++i) all = merge_breaks(all, levels[i].psi.breaks(mu));
    if (all.size() > break_cap) throw Error(ErrorCode::MeshBlowup, "merged breakpoint cap exceeded; reduce n");
  }
  StepFunction phi = levels[0].psi.scaled(1.0 / levels[0].epsilon);
  for (std::size_t i = 1; i < n; ++i) phi = phi + levels[i].psi.scaled(1.0 / levels[i].epsilon);
  return phi;
}

StepFunction build_saks_partial(const SaksSchedule& sched, std::size_t n, std::size_t break_cap) {
  return saks_sum(build_saks_levels(sched, n, break_cap), n, break_cap);
}

LimsupCheck check_partial_sum_bound(const StepFunction& phi, const std::vector<SaksLevel>& levels) {
  LimsupCheck out;
  out.min_ratio = std::numeric_limits<double>::infinity();
  for (const auto& lv : levels) {
    for (const auto& dec : lv.pieces) {
      for (const auto& e : dec.enumerate()) {
        const Rectangle r = e.rect.to_rectangle();
        out.min_ratio = std::min(out.min_ratio, lv.epsilon * phi.integral_over(r) / r.volume());
        ++out.rectangles;
      }
    }
  }
  out.holds = out.rectangles > 0 && out.min_ratio >= 1.0 - 1e-12;
  return out;
}

double orlicz_integral(const StepFunction& f, const std::function<double(double)>& sigma,
                       std::size_t d) {
  if (d != f.dim()) throw Error(ErrorCode::DimensionMismatch, "d must equal the function's dimension");
  const auto shape = f.shape();
  const auto v = f.values();
  // volume of each cell via an odometer over the shape
  std::vector<std::size_t> idx(d, 0);
  double total = 0.0;
  for (std::size_t flat = 0; flat < v.size(); ++flat) {
    const double a = std::abs(v[flat]);
    if (a != 0.0) {
      double vol = 1.0;
      for (std::size_t mu = 0; mu < d; ++mu) vol *= f.breaks(mu)[idx[mu] + 1] - f.breaks(mu)[idx[mu]];
      const double l = log_plus(a);
      const double p = d == 1 ? 1.0 : std::pow(l, static_cast<double>(d - 1));
      total += vol * sigma(a) * a * p;
    }
    for (std::size_t mu = d; mu-- > 0;) {
      if (++idx[mu] < shape[mu]) break;
      idx[mu] = 0;
    }
  }
  return total;
}

// ---------------------------------------------------------------------------
// Local projections

double LocalPolynomial::eval_local(double u, double v) const {
  const int k1 = orders[0], k2 = orders[1];
  double total = 0.0, ua = 1.0;
  for (int a = 0; a < k1; ++a) {
    double row = 0.0, vb = 1.0;
    for (int b = 0; b < k2; ++b) {
      row += coeffs[static_cast<std::size_t>(a * k2 + b)] * vb;
      vb *= v;
    }
    total += row * ua;
    ua *= u;
  }
  return total;
}

double LocalPolynomial::operator()(double x, double y) const {
  const auto& s = rect.sides;
  return eval_local((x - s[0].lo) / s[0].length(), (y - s[1].lo) / s[1].length());
}

namespace {

struct LocalProjector {
  std::array<int, 2> orders;
  Projector proj;
  std::vector<double> m1, m2;
  explicit LocalProjector(std::array<int, 2> k)
      : orders(k),
        proj(TensorMesh({single_cell(k[0]), single_cell(k[1])})),
        m1(bernstein_to_monomial(k[0])),
        m2(bernstein_to_monomial(k[1])) {}

  LocalPolynomial operator()(const StepFunction& phi, const Rectangle& rect) const {
    const int k1 = orders[0], k2 = orders[1];
    const TensorCoeffs tc = proj.project(ScalarField(phi.pullback(rect)));
    const auto b = tc.data();
    LocalPolynomial p;
    p.orders = orders;
    p.rect = rect;
    p.coeffs.assign(static_cast<std::size_t>(k1 * k2), 0.0);
    for (int a = 0; a < k1; ++a)
      for (int c = 0; c < k2; ++c) {
        const double w = b[static_cast<std::size_t>(a * k2 + c)];
        if (w == 0.0) continue;
        for (int pa = a; pa < k1; ++pa)
          for (int pc = c; pc < k2; ++pc)
            p.coeffs[static_cast<std::size_t>(pa * k2 + pc)] +=
                w * m1[static_cast<std::size_t>(a * k1 + pa)] * m2[static_cast<std::size_t>(c * k2 + pc)];
      }
    return p;
  }
};

void check_orders(std::array<int, 2> orders) {
  if (orders[0] < 1 || orders[1] < 1 || orders[0] > 8 || orders[1] > 8) {
    throw Error(ErrorCode::PreconditionViolated, "orders must be in 1..8");
  }
}

double grid_fraction(const LocalPolynomial& p, double t, std::size_t res) {
  std::size_t hits = 0;
  for (std::size_t i = 0; i < res; ++i) {
    const double u = (static_cast<double>(i) + 0.5) / static_cast<double>(res);
    for (std::size_t j = 0; j < res; ++j) {
      const double v = (static_cast<double>(j) + 0.5) / static_cast<double>(res);
      if (std::abs(p.eval_local(u, v)) >= t) ++hits;
    }
  }
  return static_cast<double>(hits) / static_cast<double>(res * res);
}

// Integral over u of |{v : |p0(u) + p1(u) v| >= t}| for P linear in v.
double slice_fraction(const LocalPolynomial& p, double t) {
  const int k1 = p.orders[0], k2 = p.orders[1];
  std::vector<double> c0(static_cast<std::size_t>(k1)), c1(static_cast<std::size_t>(k1), 0.0);
  for (int a = 0; a < k1; ++a) {
    c0[static_cast<std::size_t>(a)] = p.coeffs[static_cast<std::size_t>(a * k2)];
    if (k2 == 2) c1[static_cast<std::size_t>(a)] = p.coeffs[static_cast<std::size_t>(a * k2 + 1)];
  }
  const Poly1D p0{c0}, p1{c1};
  std::vector<double> sum(c0);
  for (std::size_t a = 0; a < sum.size(); ++a) sum[a] += c1[a];
  const Poly1D p01{sum};
  std::vector<double> cuts{0.0, 1.0};
  for (const Poly1D& q : {p0.shifted(-t), p0.shifted(t), p01.shifted(-t), p01.shifted(t), p1}) {
    for (double r : local_roots(q)) cuts.push_back(r);
  }
  std::sort(cuts.begin(), cuts.end());
  const auto slice = [&](double u) {
    const double a = p0.eval_local(u), b = p1.eval_local(u);
    if (b == 0.0) return std::abs(a) >= t ? 1.0 : 0.0;
    // {a + b v >= t} and {a + b v <= -t} are disjoint for t > 0
    const double r1 = (t - a) / b, r2 = (-t - a) / b;
    double m = 0.0;
    if (b > 0.0) m += 1.0 - std::clamp(r1, 0.0, 1.0) + std::clamp(r2, 0.0, 1.0);
    else m += std::clamp(r1, 0.0, 1.0) + 1.0 - std::clamp(r2, 0.0, 1.0);
    return m;
  };
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    if (!(cuts[i + 1] > cuts[i])) continue;
    total += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(slice, cuts[i], cuts[i + 1],
                                                                           15, 1e-14);
  }
  return std::clamp(total, 0.0, 1.0);
}

}  // namespace

LocalPolynomial project_on_rectangle(const StepFunction& phi, const Rectangle& rect,
                                     std::array<int, 2> orders) {
  check_orders(orders);
  if (phi.dim() != 2) throw Error(ErrorCode::DimensionMismatch, "planar step function expected");
  return LocalProjector(orders)(phi, rect);
}

PointwiseReport projpointwise_check(const StepFunction& phi, const Rectangle& rect,
                                    std::array<int, 2> orders, double t) {
  check_orders(orders);
  PointwiseReport rep;
  rep.average = phi.integral_over(rect) / rect.volume();
  const double c = remez_constant(orders[0]) * remez_constant(orders[1]);
  if (t <= 0.0) t = rep.average / c;
  rep.threshold = t;
  rep.hypothesis = c * t;
  if (!(t > 0.0) || rep.average < c * t * (1.0 - 1e-12)) {
    throw Error(ErrorCode::HypothesisNotMet, "average " + format_number(rep.average) +
                                                 " below c_k1 c_k2 t = " + format_number(c * t));
  }
  const LocalPolynomial p = project_on_rectangle(phi, rect, orders);
  rep.fraction_coarse = grid_fraction(p, t, 512);
  rep.fraction_fine = grid_fraction(p, t, 1024);
  rep.richardson_ok = std::abs(rep.fraction_coarse - rep.fraction_fine) <= 0.02 * rep.fraction_fine;
  rep.exact = orders[0] <= 2 && orders[1] <= 2;
  rep.fraction = rep.exact ? slice_fraction(p, t) : rep.fraction_fine;
  rep.resolution = 1024;
  rep.holds = rep.fraction >= 0.25 - 1e-12;
  return rep;
}

StepFunction level_set_indicator(const LocalPolynomial& p, double t, std::size_t res) {
  std::vector<std::vector<double>> breaks(2);
  std::vector<std::size_t> first(2);
  for (std::size_t mu = 0; mu < 2; ++mu) {
    const Interval s = p.rect.sides[mu];
    auto& b = breaks[mu];
    if (s.lo > 0.0) b.push_back(0.0);
    first[mu] = b.size();
    for (std::size_t i = 0; i <= res; ++i) {
      b.push_back(i == res ? s.hi : s.lo + s.length() * static_cast<double>(i) / static_cast<double>(res));
    }
    if (s.hi < 1.0) b.push_back(1.0);
  }
  const std::size_t nx = breaks[0].size() - 1, ny = breaks[1].size() - 1;
  std::vector<double> v(nx * ny, 0.0);
  for (std::size_t i = 0; i < res; ++i) {
    const double u = (static_cast<double>(i) + 0.5) / static_cast<double>(res);
    for (std::size_t j = 0; j < res; ++j) {
      const double w = (static_cast<double>(j) + 0.5) / static_cast<double>(res);
      if (std::abs(p.eval_local(u, w)) >= t) v[(first[0] + i) * ny + first[1] + j] = 1.0;
    }
  }
  return StepFunction(std::move(breaks), std::move(v));
}

UnionReport union_measure_check(const std::vector<Rectangle>& rects,
                                const std::vector<StepFunction>& subsets) {
  if (rects.size() != subsets.size() || rects.empty()) {
    throw Error(ErrorCode::DimensionMismatch, "one subset per rectangle required");
  }
  const std::size_t n = rects.size();
  UnionReport rep;
  std::vector<StepFunction> ind;
  std::vector<double> measure(n);
  std::vector<Rectangle> all;
  rep.c = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < n; ++j) {
    if (subsets[j].dim() != 2 || rects[j].dim() != 2) {
      throw Error(ErrorCode::DimensionMismatch, "planar sets expected");
    }
    ind.push_back(support_indicator(subsets[j]));
    measure[j] = ind[j].integral();
    const double inside = ind[j].integral_over(rects[j]);
    if (measure[j] - inside > 1e-12 * rects[j].volume()) {
      throw Error(ErrorCode::NotSubset, "A_" + std::to_string(j + 1) + " leaves I_" + std::to_string(j + 1));
    }
    rep.c = std::min(rep.c, measure[j] / rects[j].volume());
    for (auto& r : support_rectangles(subsets[j])) all.push_back(std::move(r));
  }
  rep.union_a = union_area(all);
  rep.union_i = union_area(rects);
  rep.ratio = rep.union_a / rep.union_i;
  rep.pairs_hold = true;
  for (std::size_t nn = 1; nn <= n; ++nn) {
    for (std::size_t l = 1; l <= nn; ++l) {
      UnionPairEntry e;
      e.n = nn;
      e.l = l;
      e.measured = measure[nn - 1] - ind[nn - 1].integral_over(rects[l - 1]);
      e.bound = rects[nn - 1].volume() * (rep.c - static_cast<double>(l) / static_cast<double>(nn));
      e.holds = e.measured >= e.bound - 1e-12 * rects[nn - 1].volume();
      rep.pairs_hold = rep.pairs_hold && e.holds;
      rep.pairs.push_back(e);
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Divergence laboratory

DivergenceReport divergence_curve(const SaksSchedule& sched, std::array<int, 2> orders,
                                  const std::vector<std::array<double, 2>>& points,
                                  std::size_t n_max) {
  return divergence_curve(build_saks_levels(sched, n_max), orders, points);
}

DivergenceReport divergence_curve(const std::vector<SaksLevel>& levels,
                                  std::array<int, 2> orders,
                                  const std::vector<std::array<double, 2>>& points) {
  check_orders(orders);
  if (levels.empty()) throw Error(ErrorCode::PreconditionViolated, "no levels");
  if (points.empty()) throw Error(ErrorCode::PreconditionViolated, "no sample points");
  for (const auto& p : points) {
    if (!(p[0] >= 0.0 && p[0] <= 1.0 && p[1] >= 0.0 && p[1] <= 1.0)) {
      throw Error(ErrorCode::OutOfDomain, "sample points must lie in the unit square");
    }
  }
  const std::size_t nl = levels.size(), np = points.size();
  const double c = remez_constant(orders[0]) * remez_constant(orders[1]);

  // bucket index over the sample points
  constexpr std::size_t kB = 64;
  std::vector<std::vector<std::size_t>> bucket(kB * kB);
  const auto cell = [](double x) { return std::min(kB - 1, static_cast<std::size_t>(x * kB)); };
  for (std::size_t p = 0; p < np; ++p) bucket[cell(points[p][0]) * kB + cell(points[p][1])].push_back(p);

  DivergenceReport rep;
  rep.orders = orders;
  std::vector<std::vector<double>> growth(nl, std::vector<double>(np, 0.0));
  std::vector<std::vector<char>> in_b(nl, std::vector<char>(np, 0));
  std::vector<double> threshold(nl);
  for (std::size_t i = 0; i < nl; ++i) threshold[i] = 1.0 / (levels[i].epsilon * c);
  std::vector<std::size_t> rect_count(nl, 0);

  const LocalProjector local(orders);
  std::vector<std::size_t> inside;
  std::vector<double> cum(nl);
  for (const auto& lv : levels) {
    for (const auto& dec : lv.pieces) {
      for (const auto& e : dec.enumerate()) {
        ++rect_count[lv.level - 1];
        const Rectangle r = e.rect.to_rectangle();
        inside.clear();
        for (std::size_t bx = cell(r.sides[0].lo); bx <= cell(r.sides[0].hi); ++bx)
          for (std::size_t by = cell(r.sides[1].lo); by <= cell(r.sides[1].hi); ++by)
            for (std::size_t p : bucket[bx * kB + by]) {
              const double x[] = {points[p][0], points[p][1]};
              if (r.contains(x)) inside.push_back(p);
            }
        if (inside.empty()) continue;
        std::vector<LocalPolynomial> per_level;
        for (const auto& src : levels) per_level.push_back(local(src.psi, r));
        const double diam = r.diameter();
        for (std::size_t p : inside) {
          double s = 0.0;
          for (std::size_t l = 0; l < nl; ++l) {
            s += per_level[l](points[p][0], points[p][1]) / levels[l].epsilon;
            cum[l] = s;
          }
          for (std::size_t i = 0; i < nl; ++i) {
            if (diam > 1.0 / static_cast<double>(i + 1)) continue;
            growth[i][p] = std::max(growth[i][p], std::abs(cum[i]));
            if (std::abs(cum[nl - 1]) >= threshold[i]) in_b[i][p] = 1;
          }
        }
      }
    }
  }
  rep.c1 = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < nl; ++i) {
    DivergenceLevel d;
    d.level = i + 1;
    d.threshold = threshold[i];
    d.rectangles = rect_count[i];
    std::size_t hits = 0;
    for (char b : in_b[i]) hits += b ? 1 : 0;
    d.b_measure = static_cast<double>(hits) / static_cast<double>(np);
    std::vector<double> g = growth[i];
    std::sort(g.begin(), g.end());
    d.median_growth = np % 2 ? g[np / 2] : 0.5 * (g[np / 2 - 1] + g[np / 2]);
    d.max_growth = g.back();
    rep.c1 = std::min(rep.c1, d.b_measure);
    rep.levels.push_back(d);
  }
  rep.growth = std::move(growth);
  return rep;
}

std::string divergence_csv(const DivergenceReport& rep) {
  CsvWriter w({"level", "t_i", "B_i_measure", "median_growth", "max_growth"});
  for (const auto& d : rep.levels) {
    w.row({static_cast<double>(d.level), d.threshold, d.b_measure, d.median_growth, d.max_growth});
  }
  return w.str();
}

nlohmann::json bohr_to_json(const BohrDecomposition& dec) {
  using nlohmann::json;
  const auto exact = [](const RationalRect& r) {
    return json::array({json::array({to_text(r.x0), to_text(r.x1)}),
                        json::array({to_text(r.y0), to_text(r.y1)})});
  };
  const auto approx = [](const RationalRect& r) {
    return json::array({json::array({to_double(r.x0), to_double(r.x1)}),
                        json::array({to_double(r.y0), to_double(r.y1)})});
  };
  json out;
  out["alpha"] = dec.alpha();
  out["N"] = dec.n();
  out["generations"] = dec.generations();
  out["materialized"] = dec.materialized();
  out["rectangle_count"] = dec.rectangle_count();
  out["root"] = exact(dec.root());
  out["remainder_fraction"] = to_text(dec.remainder_fraction());
  json rects = json::array();
  if (dec.materialized()) {
    std::size_t order = 0;
    for (std::size_t gi = 0; gi < dec.groups().size(); ++gi) {
      const auto& g = dec.groups()[gi];
      for (std::size_t j = 0; j < g.members.size(); ++j) {
        rects.push_back({{"order", ++order}, {"role", "I"}, {"generation", g.generation},
                         {"group", gi + 1}, {"j", j + 1}, {"rect", approx(g.members[j])},
                         {"exact", exact(g.members[j])}});
      }
      rects.push_back({{"role", "delta"}, {"generation", g.generation}, {"group", gi + 1},
                       {"rect", approx(g.core)}, {"exact", exact(g.core)}});
    }
    for (const auto& r : dec.remainder()) {
      rects.push_back({{"order", ++order}, {"role", "J"}, {"generation", dec.generations()},
                       {"rect", approx(r)}, {"exact", exact(r)}});
    }
  }
  out["rectangles"] = std::move(rects);
  return out;
}

nlohmann::json psi_report_to_json(const PsiReport& rep) {
  return {{"route", rep.route},
          {"values_ok", rep.values_ok},
          {"values", rep.values},
          {"orlicz_ok", rep.orlicz_ok},
          {"orlicz_ratio", rep.orlicz_ratio},
          {"averages_ok", rep.averages_ok},
          {"min_average_ratio", rep.min_average_ratio},
          {"rectangles_checked", rep.rectangles_checked},
          {"coverage_ok", rep.coverage_ok},
          {"remainder_ok", rep.remainder_ok},
          {"remainder_fraction", to_text(rep.remainder_fraction)},
          {"first_union_fraction", to_text(rep.first_union_fraction)},
          {"all_pass", rep.all_pass()}};
}

}  // namespace splinelab

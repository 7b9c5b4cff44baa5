#include "splinelab/step_function.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "splinelab/error.hpp"

namespace splinelab {

namespace {

std::vector<std::size_t> strides_of(const std::vector<std::size_t>& shape) {
  std::vector<std::size_t> s(shape.size(), 1);
  for (std::size_t mu = shape.size(); mu-- > 1;) s[mu - 1] = s[mu] * shape[mu];
  return s;
}

// Calls fn(flat, idx) for every multi-index lo <= idx < hi (componentwise).
template <class Fn>
void for_each_in_box(const std::vector<std::size_t>& strides, const std::vector<std::size_t>& lo,
                     const std::vector<std::size_t>& hi, Fn&& fn) {
  const std::size_t d = lo.size();
  for (std::size_t mu = 0; mu < d; ++mu) {
    if (lo[mu] >= hi[mu]) return;
  }
  std::vector<std::size_t> idx = lo;
  while (true) {
    std::size_t flat = 0;
    for (std::size_t mu = 0; mu < d; ++mu) flat += idx[mu] * strides[mu];
    fn(flat, idx);
    std::size_t mu = d;
    while (mu-- > 0) {
      if (++idx[mu] < hi[mu]) break;
      idx[mu] = lo[mu];
    }
    if (mu == static_cast<std::size_t>(-1)) return;
  }
}

void check_breaks(const std::vector<double>& b) {
  if (b.size() < 2 || b.front() != 0.0 || b.back() != 1.0) {
    throw Error(ErrorCode::BadBoundary, "step function breakpoints must run from 0 to 1");
  }
  for (std::size_t i = 0; i + 1 < b.size(); ++i) {
    if (!(b[i] < b[i + 1])) throw Error(ErrorCode::NotSorted, "breakpoints not increasing");
  }
}

// Cell index of the old grid that contains the new cell [nb[c], nb[c+1]].
std::vector<std::size_t> cell_map(const std::vector<double>& old_b, const std::vector<double>& nb) {
  std::vector<std::size_t> map(nb.size() - 1);
  std::size_t o = 0;
  for (std::size_t c = 0; c + 1 < nb.size(); ++c) {
    while (o + 2 < old_b.size() && old_b[o + 1] <= nb[c]) ++o;
    map[c] = o;
  }
  return map;
}

}  // namespace

std::vector<double> merge_breaks(std::span<const double> a, std::span<const double> b) {
  std::vector<double> out;
  out.reserve(a.size() + b.size());
  std::merge(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

StepFunction::StepFunction(std::vector<std::vector<double>> breaks, std::vector<double> values)
    : breaks_(std::move(breaks)), values_(std::move(values)) {
  if (breaks_.empty()) throw Error(ErrorCode::DimensionMismatch, "step function needs d >= 1");
  std::size_t cells = 1;
  for (const auto& b : breaks_) {
    check_breaks(b);
    cells *= b.size() - 1;
  }
  if (cells != values_.size()) {
    throw Error(ErrorCode::DimensionMismatch, "value array does not match the cell grid");
  }
}

StepFunction StepFunction::constant(std::size_t dim, double value) {
  return StepFunction(std::vector<std::vector<double>>(dim, {0.0, 1.0}), {value});
}

StepFunction StepFunction::indicator(const Rectangle& r, double value) {
  StepFunctionBuilder b(r.dim());
  b.add(r, value);
  return b.build();
}

std::vector<std::size_t> StepFunction::shape() const {
  std::vector<std::size_t> s;
  for (const auto& b : breaks_) s.push_back(b.size() - 1);
  return s;
}

std::size_t StepFunction::locate(std::size_t mu, double x) const {
  const auto& b = breaks_.at(mu);
  if (!(x >= 0.0 && x <= 1.0)) throw Error(ErrorCode::OutOfDomain, "point outside [0,1]");
  const auto it = std::upper_bound(b.begin(), b.end(), x);
  const auto c = static_cast<std::size_t>(it - b.begin());
  return std::min(c, b.size() - 1) - 1;
}

double StepFunction::eval(std::span<const double> x) const {
  if (x.size() != dim()) throw Error(ErrorCode::DimensionMismatch, "point dimension mismatch");
  const auto st = strides_of(shape());
  std::size_t flat = 0;
  for (std::size_t mu = 0; mu < dim(); ++mu) flat += locate(mu, x[mu]) * st[mu];
  return values_[flat];
}

double StepFunction::integral() const {
  const auto sh = shape();
  const auto st = strides_of(sh);
  double total = 0.0;
  for_each_in_box(st, std::vector<std::size_t>(dim(), 0), sh,
                  [&](std::size_t flat, const std::vector<std::size_t>& idx) {
                    double vol = 1.0;
                    for (std::size_t mu = 0; mu < dim(); ++mu) {
                      vol *= breaks_[mu][idx[mu] + 1] - breaks_[mu][idx[mu]];
                    }
                    total += values_[flat] * vol;
                  });
  return total;
}

double StepFunction::integral_over(const Rectangle& r) const {
  if (r.dim() != dim()) throw Error(ErrorCode::DimensionMismatch, "rectangle dimension mismatch");
  const std::size_t d = dim();
  std::vector<std::size_t> lo(d), hi(d);
  std::vector<std::vector<double>> overlap(d);
  for (std::size_t mu = 0; mu < d; ++mu) {
    const auto& b = breaks_[mu];
    const double a = std::max(0.0, r.sides[mu].lo);
    const double e = std::min(1.0, r.sides[mu].hi);
    if (!(a < e)) return 0.0;
    lo[mu] = static_cast<std::size_t>(std::upper_bound(b.begin(), b.end(), a) - b.begin()) - 1;
    hi[mu] = static_cast<std::size_t>(std::lower_bound(b.begin(), b.end(), e) - b.begin());
    overlap[mu].resize(hi[mu] - lo[mu]);
    for (std::size_t c = lo[mu]; c < hi[mu]; ++c) {
      overlap[mu][c - lo[mu]] = std::min(e, b[c + 1]) - std::max(a, b[c]);
    }
  }
  const auto st = strides_of(shape());
  double total = 0.0;
  for_each_in_box(st, lo, hi, [&](std::size_t flat, const std::vector<std::size_t>& idx) {
    double vol = 1.0;
    for (std::size_t mu = 0; mu < d; ++mu) vol *= overlap[mu][idx[mu] - lo[mu]];
    total += values_[flat] * vol;
  });
  return total;
}

double StepFunction::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

bool StepFunction::is_zero() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return v == 0.0; });
}

std::vector<double> StepFunction::value_set() const {
  std::set<double> s(values_.begin(), values_.end());
  return {s.begin(), s.end()};
}

StepFunction StepFunction::refine(const std::vector<std::vector<double>>& extra) const {
  if (extra.size() != dim()) throw Error(ErrorCode::DimensionMismatch, "refine: dimension mismatch");
  std::vector<std::vector<double>> nb(dim());
  std::vector<std::vector<std::size_t>> maps(dim());
  for (std::size_t mu = 0; mu < dim(); ++mu) {
    std::vector<double> e;
    for (double v : extra[mu]) {
      if (v > 0.0 && v < 1.0) e.push_back(v);
    }
    std::sort(e.begin(), e.end());
    nb[mu] = merge_breaks(breaks_[mu], e);
    maps[mu] = cell_map(breaks_[mu], nb[mu]);
  }
  std::vector<std::size_t> nshape;
  for (const auto& b : nb) nshape.push_back(b.size() - 1);
  const auto ost = strides_of(shape());
  const auto nst = strides_of(nshape);
  std::size_t total = 1;
  for (auto s : nshape) total *= s;
  std::vector<double> vals(total, 0.0);
  for_each_in_box(nst, std::vector<std::size_t>(dim(), 0), nshape,
                  [&](std::size_t flat, const std::vector<std::size_t>& idx) {
                    std::size_t of = 0;
                    for (std::size_t mu = 0; mu < dim(); ++mu) of += maps[mu][idx[mu]] * ost[mu];
                    vals[flat] = values_[of];
                  });
  return StepFunction(std::move(nb), std::move(vals));
}

StepFunction StepFunction::abs() const {
  std::vector<double> v(values_);
  for (double& x : v) x = std::abs(x);
  return StepFunction(breaks_, std::move(v));
}

StepFunction StepFunction::scaled(double c) const {
  std::vector<double> v(values_);
  for (double& x : v) x *= c;
  return StepFunction(breaks_, std::move(v));
}

StepFunction StepFunction::pullback(const Rectangle& r) const {
  if (r.dim() != dim()) throw Error(ErrorCode::DimensionMismatch, "rectangle dimension mismatch");
  const std::size_t d = dim();
  std::vector<std::vector<double>> nb(d);
  std::vector<std::size_t> lo(d), hi(d);
  for (std::size_t mu = 0; mu < d; ++mu) {
    const double a = r.sides[mu].lo, e = r.sides[mu].hi;
    if (!(0.0 <= a && a < e && e <= 1.0)) {
      throw Error(ErrorCode::OutOfDomain, "pullback rectangle must be a nondegenerate box in [0,1]^d");
    }
    const auto& b = breaks_[mu];
    lo[mu] = static_cast<std::size_t>(std::upper_bound(b.begin(), b.end(), a) - b.begin()) - 1;
    hi[mu] = static_cast<std::size_t>(std::lower_bound(b.begin(), b.end(), e) - b.begin());
    nb[mu].push_back(0.0);
    for (std::size_t c = lo[mu] + 1; c < hi[mu]; ++c) {
      const double u = (b[c] - a) / (e - a);
      // rounding may push an interior breakpoint onto a neighbour; drop it
      if (u > nb[mu].back() && u < 1.0) nb[mu].push_back(u);
    }
    nb[mu].push_back(1.0);
  }
  // Values come from the old cell holding each new cell's midpoint, so a
  // dropped breakpoint cannot misalign the array.
  std::vector<std::size_t> nshape;
  for (const auto& b : nb) nshape.push_back(b.size() - 1);
  const auto nst = strides_of(nshape);
  const auto ost = strides_of(shape());
  std::size_t total = 1;
  for (auto s : nshape) total *= s;
  std::vector<double> vals(total);
  std::vector<std::vector<std::size_t>> maps(d);
  for (std::size_t mu = 0; mu < d; ++mu) {
    const double a = r.sides[mu].lo, e = r.sides[mu].hi;
    for (std::size_t c = 0; c + 1 < nb[mu].size(); ++c) {
      const double mid = a + (e - a) * 0.5 * (nb[mu][c] + nb[mu][c + 1]);
      maps[mu].push_back(locate(mu, std::min(1.0, std::max(0.0, mid))));
    }
  }
  for_each_in_box(nst, std::vector<std::size_t>(d, 0), nshape,
                  [&](std::size_t flat, const std::vector<std::size_t>& idx) {
                    std::size_t of = 0;
                    for (std::size_t mu = 0; mu < d; ++mu) of += maps[mu][idx[mu]] * ost[mu];
                    vals[flat] = values_[of];
                  });
  return StepFunction(std::move(nb), std::move(vals));
}

StepFunction operator+(const StepFunction& a, const StepFunction& b) {
  if (a.dim() != b.dim()) throw Error(ErrorCode::DimensionMismatch, "sum: dimension mismatch");
  const StepFunction ra = a.refine(b.all_breaks());
  const StepFunction rb = b.refine(a.all_breaks());
  std::vector<double> v(ra.values().begin(), ra.values().end());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] += rb.values()[i];
  return StepFunction(ra.all_breaks(), std::move(v));
}

void StepFunctionBuilder::add(const Rectangle& r, double weight) {
  if (r.dim() != dim_) throw Error(ErrorCode::DimensionMismatch, "rectangle dimension mismatch");
  rects_.push_back(r);
  weights_.push_back(weight);
}

StepFunction StepFunctionBuilder::build(std::size_t max_cells) const {
  std::vector<std::vector<double>> breaks(dim_);
  for (std::size_t mu = 0; mu < dim_; ++mu) {
    auto& b = breaks[mu];
    b.reserve(2 * rects_.size() + 2);
    b.push_back(0.0);
    b.push_back(1.0);
    for (const auto& r : rects_) {
      b.push_back(std::clamp(r.sides[mu].lo, 0.0, 1.0));
      b.push_back(std::clamp(r.sides[mu].hi, 0.0, 1.0));
    }
    std::sort(b.begin(), b.end());
    b.erase(std::unique(b.begin(), b.end()), b.end());
  }
  std::size_t total = 1;
  std::vector<std::size_t> sh;
  for (const auto& b : breaks) {
    sh.push_back(b.size() - 1);
    if (total > max_cells / sh.back()) {
      throw Error(ErrorCode::MeshBlowup, "step function grid exceeds the cell cap");
    }
    total *= sh.back();
  }
  const auto st = strides_of(sh);
  std::vector<double> vals(total, 0.0);
  std::vector<std::size_t> lo(dim_), hi(dim_);
  for (std::size_t q = 0; q < rects_.size(); ++q) {
    for (std::size_t mu = 0; mu < dim_; ++mu) {
      const auto& b = breaks[mu];
      const double a = std::clamp(rects_[q].sides[mu].lo, 0.0, 1.0);
      const double e = std::clamp(rects_[q].sides[mu].hi, 0.0, 1.0);
      lo[mu] = static_cast<std::size_t>(std::lower_bound(b.begin(), b.end(), a) - b.begin());
      hi[mu] = static_cast<std::size_t>(std::lower_bound(b.begin(), b.end(), e) - b.begin());
    }
    const double w = weights_[q];
    for_each_in_box(st, lo, hi,
                    [&](std::size_t flat, const std::vector<std::size_t>&) { vals[flat] += w; });
  }
  return StepFunction(std::move(breaks), std::move(vals));
}

}  // namespace splinelab

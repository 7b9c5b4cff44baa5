#include "splinelab/maximal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "splinelab/csv.hpp"
#include "splinelab/error.hpp"

namespace splinelab {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// F(x) = integral of |f| over [0, x], multilinear inside each cell of f.
class Primitive {
 public:
  explicit Primitive(const StepFunction& f) : f_(f) {
    const std::size_t d = f.dim();
    dims_.resize(d);
    for (std::size_t mu = 0; mu < d; ++mu) dims_[mu] = f.breaks(mu).size();
    strides_.assign(d, 1);
    for (std::size_t mu = d; mu-- > 1;) strides_[mu - 1] = strides_[mu] * dims_[mu];
    std::size_t total = 1;
    for (auto s : dims_) total *= s;
    table_.assign(total, 0.0);

    const auto shape = f.shape();
    std::vector<std::size_t> cst(d, 1);
    for (std::size_t mu = d; mu-- > 1;) cst[mu - 1] = cst[mu] * shape[mu];
    std::vector<std::size_t> idx(d, 0);
    for (std::size_t cell = 0; cell < f.cell_count(); ++cell) {
      std::size_t rem = cell, flat = 0;
      double vol = 1.0;
      for (std::size_t mu = 0; mu < d; ++mu) {
        idx[mu] = rem / cst[mu];
        rem %= cst[mu];
        const auto& b = f.breaks(mu);
        vol *= b[idx[mu] + 1] - b[idx[mu]];
        flat += (idx[mu] + 1) * strides_[mu];
      }
      table_[flat] = std::abs(f.values()[cell]) * vol;
    }
    for (std::size_t mu = 0; mu < d; ++mu) {
      for (std::size_t i = 0; i < total; ++i) {
        if ((i / strides_[mu]) % dims_[mu] != 0) table_[i] += table_[i - strides_[mu]];
      }
    }
  }

  double operator()(std::span<const double> x) const {
    const std::size_t d = dims_.size();
    std::size_t base = 0;
    double t[8] = {};
    for (std::size_t mu = 0; mu < d; ++mu) {
      const std::size_t c = f_.locate(mu, x[mu]);
      const auto& b = f_.breaks(mu);
      t[mu] = (x[mu] - b[c]) / (b[c + 1] - b[c]);
      base += c * strides_[mu];
    }
    double s = 0.0;
    for (std::size_t corner = 0; corner < (std::size_t{1} << d); ++corner) {
      double w = 1.0;
      std::size_t flat = base;
      for (std::size_t mu = 0; mu < d; ++mu) {
        if (corner & (std::size_t{1} << mu)) {
          w *= t[mu];
          flat += strides_[mu];
        } else {
          w *= 1.0 - t[mu];
        }
      }
      if (w != 0.0) s += w * table_[flat];
    }
    return s;
  }

 private:
  const StepFunction& f_;
  std::vector<std::size_t> dims_;
  std::vector<std::size_t> strides_;
  std::vector<double> table_;
};

std::vector<double> vertex_table(const Primitive& prim, const std::vector<std::vector<double>>& c) {
  const std::size_t d = c.size();
  std::vector<std::size_t> dims(d);
  std::size_t total = 1;
  for (std::size_t mu = 0; mu < d; ++mu) {
    dims[mu] = c[mu].size();
    total *= dims[mu];
  }
  std::vector<double> out(total);
  std::vector<double> x(d);
  for (std::size_t i = 0; i < total; ++i) {
    std::size_t rem = i;
    for (std::size_t mu = d; mu-- > 0;) {
      x[mu] = c[mu][rem % dims[mu]];
      rem /= dims[mu];
    }
    out[i] = prim(x);
  }
  return out;
}

void check_coords(const std::vector<double>& c) {
  if (c.size() < 2 || c.front() != 0.0 || c.back() != 1.0) {
    throw Error(ErrorCode::BadBoundary, "coordinate lists must contain 0 and 1");
  }
  for (std::size_t i = 0; i + 1 < c.size(); ++i) {
    if (!(c[i] < c[i + 1])) throw Error(ErrorCode::NotSorted, "coordinates not increasing");
  }
}

std::vector<double> grid_1d(const std::vector<double>& t, const std::vector<double>& c) {
  const std::size_t n = c.size();
  std::vector<double> m(n, kNegInf);
  for (std::size_t a = 0; a + 1 < n; ++a) {
    double suf = kNegInf;
    for (std::size_t b = n - 1; b > a; --b) {
      suf = std::max(suf, (t[b] - t[a]) / (c[b] - c[a]));
      m[b] = std::max(m[b], suf);
    }
    m[a] = std::max(m[a], suf);
  }
  return m;
}

std::vector<double> grid_2d(const std::vector<double>& t, const std::vector<double>& c1,
                            const std::vector<double>& c2) {
  const std::size_t n1 = c1.size(), n2 = c2.size();
  std::vector<double> m(n1 * n2, kNegInf);
  std::vector<double> h(n2), sm(n2), col(n2);
  for (std::size_t a1 = 0; a1 + 1 < n1; ++a1) {
    std::fill(sm.begin(), sm.end(), kNegInf);
    for (std::size_t b1 = n1 - 1; b1 > a1; --b1) {
      const double w1 = c1[b1] - c1[a1];
      for (std::size_t j = 0; j < n2; ++j) col[j] = t[b1 * n2 + j] - t[a1 * n2 + j];
      // h[p] = best average over y-intervals containing p for this x-strip
      std::fill(h.begin(), h.end(), kNegInf);
      for (std::size_t a2 = 0; a2 + 1 < n2; ++a2) {
        double suf = kNegInf;
        for (std::size_t b2 = n2 - 1; b2 > a2; --b2) {
          suf = std::max(suf, (col[b2] - col[a2]) / (w1 * (c2[b2] - c2[a2])));
          h[b2] = std::max(h[b2], suf);
        }
        h[a2] = std::max(h[a2], suf);
      }
      for (std::size_t j = 0; j < n2; ++j) sm[j] = std::max(sm[j], h[j]);
      for (std::size_t j = 0; j < n2; ++j) m[b1 * n2 + j] = std::max(m[b1 * n2 + j], sm[j]);
    }
    for (std::size_t j = 0; j < n2; ++j) m[a1 * n2 + j] = std::max(m[a1 * n2 + j], sm[j]);
  }
  return m;
}

}  // namespace

double strong_maximal(const StepFunction& f, std::span<const double> x) {
  const std::size_t d = f.dim();
  if (x.size() != d) throw Error(ErrorCode::DimensionMismatch, "point dimension mismatch");
  if (d > 8) throw Error(ErrorCode::DimensionMismatch, "at most 8 dimensions supported");
  for (double v : x) {
    if (!(v >= 0.0 && v <= 1.0)) throw Error(ErrorCode::OutOfDomain, "point outside [0,1]^d");
  }
  const double top = f.max_abs();
  if (top == 0.0) return 0.0;

  std::vector<std::vector<double>> c(d);
  std::vector<std::size_t> p(d), dims(d), strides(d, 1);
  for (std::size_t mu = 0; mu < d; ++mu) {
    const double xv[] = {x[mu]};
    c[mu] = merge_breaks(f.breaks(mu), xv);
    p[mu] = static_cast<std::size_t>(std::lower_bound(c[mu].begin(), c[mu].end(), x[mu]) -
                                     c[mu].begin());
    dims[mu] = c[mu].size();
  }
  for (std::size_t mu = d; mu-- > 1;) strides[mu - 1] = strides[mu] * dims[mu];
  const Primitive prim(f);
  const auto t = vertex_table(prim, c);

  // Pruning bound: max |f| over each slab between consecutive axis-0 edges.
  const auto shape = f.shape();
  std::size_t inner = 1;
  for (std::size_t mu = 1; mu < d; ++mu) inner *= shape[mu];
  std::vector<double> slab(dims[0] - 1, 0.0);
  for (std::size_t i = 0; i + 1 < dims[0]; ++i) {
    const std::size_t fc = f.locate(0, 0.5 * (c[0][i] + c[0][i + 1]));
    for (std::size_t r = 0; r < inner; ++r) {
      slab[i] = std::max(slab[i], std::abs(f.values()[fc * inner + r]));
    }
  }

  double best = 0.0;
  std::vector<std::size_t> lo(d), hi(d);
  // Enumerate edges of axes 1..d-1 recursively and evaluate by inclusion-exclusion.
  auto leaf = [&] {
    double s = 0.0;
    for (std::size_t corner = 0; corner < (std::size_t{1} << d); ++corner) {
      std::size_t flat = 0;
      int sign = 1;
      for (std::size_t mu = 0; mu < d; ++mu) {
        if (corner & (std::size_t{1} << mu)) {
          flat += hi[mu] * strides[mu];
        } else {
          flat += lo[mu] * strides[mu];
          sign = -sign;
        }
      }
      s += sign * t[flat];
    }
    double vol = 1.0;
    for (std::size_t mu = 0; mu < d; ++mu) vol *= c[mu][hi[mu]] - c[mu][lo[mu]];
    best = std::max(best, s / vol);
  };
  auto recurse = [&](auto&& self, std::size_t mu) -> void {
    if (mu == d) {
      leaf();
      return;
    }
    for (std::size_t a = 0; a <= p[mu]; ++a) {
      for (std::size_t b = std::max(p[mu], a + 1); b < dims[mu]; ++b) {
        lo[mu] = a;
        hi[mu] = b;
        self(self, mu + 1);
      }
    }
  };
  for (std::size_t a = 0; a <= p[0]; ++a) {
    double bound = 0.0;
    for (std::size_t i = a; i < p[0]; ++i) bound = std::max(bound, slab[i]);
    for (std::size_t b = std::max(p[0], a + 1); b < dims[0]; ++b) {
      bound = std::max(bound, slab[b - 1]);
      if (bound <= best) continue;
      lo[0] = a;
      hi[0] = b;
      recurse(recurse, 1);
      if (best >= top) return best;
    }
  }
  return best;
}

std::vector<double> maximal_on_grid(const StepFunction& f,
                                    const std::vector<std::vector<double>>& coords) {
  const std::size_t d = f.dim();
  if (coords.size() != d) throw Error(ErrorCode::DimensionMismatch, "coordinate lists mismatch");
  if (d > 2) throw Error(ErrorCode::DimensionMismatch, "grid maximal function supports d <= 2");
  for (const auto& c : coords) check_coords(c);
  const Primitive prim(f);
  const auto t = vertex_table(prim, coords);
  return d == 1 ? grid_1d(t, coords[0]) : grid_2d(t, coords[0], coords[1]);
}

DominationReport domination_ratio(const Projector& proj, const StepFunction& f,
                                  const std::vector<std::vector<double>>& points,
                                  std::span<const double> maximal_values) {
  if (maximal_values.size() != points.size()) {
    throw Error(ErrorCode::DimensionMismatch, "one maximal value per point required");
  }
  const bool zero = f.is_zero();
  const TensorCoeffs pf = proj.project(ScalarField(f));
  DominationReport rep;
  for (std::size_t i = 0; i < points.size(); ++i) {
    DominationSample s;
    s.x = points[i];
    s.pf = std::abs(eval_tensor(pf, s.x));
    s.ms = maximal_values[i];
    if (s.ms > 0.0) {
      s.ratio = s.pf / s.ms;
    } else if (zero || s.pf == 0.0) {
      s.ratio = 0.0;
    } else {
      throw Error(ErrorCode::DivisionByZeroRegion,
                  "maximal function vanishes where the projection does not");
    }
    rep.max_ratio = std::max(rep.max_ratio, s.ratio);
    rep.samples.push_back(std::move(s));
  }
  return rep;
}

DominationReport domination_ratio(const TensorMesh& mesh, const StepFunction& f,
                                  const std::vector<std::vector<double>>& points) {
  std::vector<double> ms;
  ms.reserve(points.size());
  for (const auto& x : points) ms.push_back(strong_maximal(f, x));
  return domination_ratio(Projector(mesh), f, points, ms);
}

std::string domination_csv(const DominationReport& rep) {
  const std::size_t d = rep.samples.empty() ? 0 : rep.samples.front().x.size();
  std::string header;
  for (std::size_t mu = 0; mu < d; ++mu) header += "x" + std::to_string(mu + 1) + ",";
  header += "Pf,MSf,ratio";
  CsvWriter csv({header});
  for (const auto& s : rep.samples) {
    std::vector<double> row = s.x;
    row.push_back(s.pf);
    row.push_back(s.ms);
    row.push_back(s.ratio);
    csv.row(row);
  }
  return csv.str();
}

double weak_type_rhs(const StepFunction& f, double lambda) {
  if (!(lambda > 0.0)) throw Error(ErrorCode::PreconditionViolated, "lambda must be > 0");
  const std::size_t d = f.dim();
  const auto shape = f.shape();
  double total = 0.0;
  std::vector<std::size_t> st(d, 1);
  for (std::size_t mu = d; mu-- > 1;) st[mu - 1] = st[mu] * shape[mu];
  for (std::size_t cell = 0; cell < f.cell_count(); ++cell) {
    const double r = std::abs(f.values()[cell]) / lambda;
    if (r == 0.0) continue;
    double vol = 1.0;
    std::size_t rem = cell;
    for (std::size_t mu = 0; mu < d; ++mu) {
      const std::size_t i = rem / st[mu];
      rem %= st[mu];
      vol *= f.breaks(mu)[i + 1] - f.breaks(mu)[i];
    }
    const double lp = r > 1.0 ? std::log(r) : 0.0;
    total += vol * r * std::pow(1.0 + lp, static_cast<double>(d) - 1.0);
  }
  return total;
}

WeakTypeReport weak_type_ratio(const StepFunction& f, const std::vector<double>& lambdas,
                               std::size_t resolution, std::size_t max_breaks) {
  const std::size_t d = f.dim();
  if (resolution < 1) throw Error(ErrorCode::PreconditionViolated, "resolution must be >= 1");
  WeakTypeReport rep;
  rep.resolution = resolution;
  rep.exact_values = true;
  std::vector<std::vector<double>> coords(d);
  std::vector<std::vector<std::size_t>> mid_index(d);
  for (std::size_t mu = 0; mu < d; ++mu) {
    std::vector<double> mids(resolution);
    for (std::size_t i = 0; i < resolution; ++i) {
      mids[i] = (static_cast<double>(i) + 0.5) / static_cast<double>(resolution);
    }
    std::vector<double> base{0.0, 1.0};
    if (f.breaks(mu).size() <= max_breaks + 2) {
      base = f.breaks(mu);
    } else {
      rep.exact_values = false;
    }
    coords[mu] = merge_breaks(base, mids);
    for (double m : mids) {
      mid_index[mu].push_back(static_cast<std::size_t>(
          std::lower_bound(coords[mu].begin(), coords[mu].end(), m) - coords[mu].begin()));
    }
  }
  const auto m = maximal_on_grid(f, coords);
  std::vector<double> at_mid;
  if (d == 1) {
    for (std::size_t i : mid_index[0]) at_mid.push_back(m[i]);
  } else {
    const std::size_t n2 = coords[1].size();
    for (std::size_t i : mid_index[0]) {
      for (std::size_t j : mid_index[1]) at_mid.push_back(m[i * n2 + j]);
    }
  }
  const double cell = std::pow(1.0 / static_cast<double>(resolution), static_cast<double>(d));
  for (double lambda : lambdas) {
    const std::size_t count = static_cast<std::size_t>(
        std::count_if(at_mid.begin(), at_mid.end(), [&](double v) { return v > lambda; }));
    const double lhs = static_cast<double>(count) * cell;
    const double rhs = weak_type_rhs(f, lambda);
    const double ratio = lhs == 0.0 ? 0.0 : lhs / rhs;
    rep.lambda.push_back(lambda);
    rep.measured.push_back(lhs);
    rep.rhs.push_back(rhs);
    rep.ratio.push_back(ratio);
    rep.max_ratio = std::max(rep.max_ratio, ratio);
  }
  return rep;
}

}  // namespace splinelab

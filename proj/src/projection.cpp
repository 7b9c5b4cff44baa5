#include "splinelab/projection.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "splinelab/error.hpp"
#include "splinelab/polynomial.hpp"
#include "splinelab/quadrature.hpp"
#include "splinelab/rng.hpp"

namespace splinelab {

namespace {

// One quadrature node along an axis with its active basis values.
struct AxisNode {
  double x;
  double w;
  std::size_t first;
  std::vector<double> vals;
};

std::vector<AxisNode> axis_nodes(const KnotVector& kv, int m) {
  const GaussRule rule = gauss_legendre(m);
  const auto bp = kv.breakpoints();
  std::vector<AxisNode> out;
  std::vector<double> vals(static_cast<std::size_t>(kv.order()));
  for (std::size_t c = 0; c + 1 < bp.size(); ++c) {
    const double a = bp[c], len = bp[c + 1] - bp[c];
    for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
      const double x = a + len * rule.nodes[q];
      const std::size_t first = eval_basis_into(kv, x, vals);
      out.push_back({x, rule.weights[q] * len, first, vals});
    }
  }
  return out;
}

// Sparse matrix rows: for each refined cell, integrals of the k active
// B-splines over that cell.
struct CellIntegrals {
  std::vector<std::size_t> first;
  std::vector<double> vals;  // k per cell
};

CellIntegrals cell_integrals(const KnotVector& kv, const std::vector<double>& cuts) {
  const auto k = static_cast<std::size_t>(kv.order());
  const GaussRule rule = gauss_legendre(kv.order());
  CellIntegrals ci;
  std::vector<double> vals(k);
  for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
    const double a = cuts[c], len = cuts[c + 1] - cuts[c];
    const std::size_t first = eval_basis_into(kv, a + 0.5 * len, vals);
    ci.first.push_back(first);
    std::vector<double> acc(k, 0.0);
    for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
      const std::size_t f2 = eval_basis_into(kv, a + len * rule.nodes[q], vals);
      // all nodes of a refined cell fall in one knot interval
      if (f2 != first) throw Error(ErrorCode::PreconditionViolated, "refined cell straddles a knot");
      for (std::size_t r = 0; r < k; ++r) acc[r] += rule.weights[q] * len * vals[r];
    }
    ci.vals.insert(ci.vals.end(), acc.begin(), acc.end());
  }
  return ci;
}

// Contracts axis `mu` of an array with the cell-integral matrix.
std::vector<double> mode_product(const std::vector<double>& in, std::vector<std::size_t>& shape,
                                 std::size_t mu, const CellIntegrals& ci, std::size_t n,
                                 std::size_t k) {
  std::size_t outer = 1, inner = 1;
  for (std::size_t nu = 0; nu < mu; ++nu) outer *= shape[nu];
  for (std::size_t nu = mu + 1; nu < shape.size(); ++nu) inner *= shape[nu];
  const std::size_t rc = shape[mu];
  std::vector<double> out(outer * n * inner, 0.0);
  for (std::size_t o = 0; o < outer; ++o) {
    for (std::size_t c = 0; c < rc; ++c) {
      const double* src = &in[(o * rc + c) * inner];
      for (std::size_t r = 0; r < k; ++r) {
        const double w = ci.vals[c * k + r];
        if (w == 0.0) continue;
        double* dst = &out[(o * n + ci.first[c] + r) * inner];
        for (std::size_t i = 0; i < inner; ++i) dst[i] += w * src[i];
      }
    }
  }
  shape[mu] = n;
  return out;
}

std::vector<double> step_moments(const TensorMesh& mesh, const StepFunction& f) {
  const std::size_t d = mesh.dim();
  std::vector<std::vector<double>> knots_bp(d);
  for (std::size_t mu = 0; mu < d; ++mu) knots_bp[mu] = mesh.axis(mu).breakpoints();
  const StepFunction g = f.refine(knots_bp);
  std::vector<double> arr(g.values().begin(), g.values().end());
  std::vector<std::size_t> shape = g.shape();
  for (std::size_t mu = 0; mu < d; ++mu) {
    const auto& kv = mesh.axis(mu);
    const CellIntegrals ci = cell_integrals(kv, g.breaks(mu));
    arr = mode_product(arr, shape, mu, ci, kv.size(), static_cast<std::size_t>(kv.order()));
  }
  return arr;
}

}  // namespace

ScalarField::ScalarField(std::size_t dim, std::function<double(std::span<const double>)> fn)
    : dim_(dim), fn_(std::move(fn)) {}

ScalarField::ScalarField(StepFunction f)
    : dim_(f.dim()), step_(std::make_shared<const StepFunction>(std::move(f))) {
  const auto* p = step_.get();
  fn_ = [p](std::span<const double> x) { return p->eval(x); };
}

AxisProjector::AxisProjector(KnotVector kv)
    : kv_(std::move(kv)), gram_(assemble_gram(kv_)), chol_(gram_) {}

const Matrix& AxisProjector::inverse() const {
  std::call_once(inverse_once_, [this] { inverse_ = inverse_entries(gram_); });
  return inverse_;
}

double AxisProjector::kernel(double x, double y) const {
  const Matrix& a = inverse();
  const auto bx = eval_basis(kv_, x);
  const auto by = eval_basis(kv_, y);
  double s = 0.0;
  for (std::size_t r = 0; r < bx.values.size(); ++r) {
    for (std::size_t c = 0; c < by.values.size(); ++c) {
      s += a(bx.first + r, by.first + c) * bx.values[r] * by.values[c];
    }
  }
  return s;
}

std::vector<double> AxisProjector::kernel_row(double x) const {
  std::vector<double> w(kv_.size(), 0.0);
  const auto bx = eval_basis(kv_, x);
  for (std::size_t r = 0; r < bx.values.size(); ++r) w[bx.first + r] = bx.values[r];
  chol_.solve_strided(w.data(), 1);
  return w;
}

Projector::Projector(const TensorMesh& mesh) : mesh_(mesh) {
  for (const auto& kv : mesh_.axes()) axes_.push_back(std::make_shared<AxisProjector>(kv));
}

std::vector<double> Projector::moments(const ScalarField& f, QuadratureSpec q) const {
  const std::size_t d = mesh_.dim();
  if (f.dim() != d) throw Error(ErrorCode::DimensionMismatch, "field dimension mismatch");
  if (q.m < 0) throw Error(ErrorCode::PreconditionViolated, "quadrature points must be >= 1");
  if (f.step() != nullptr) return step_moments(mesh_, *f.step());

  std::vector<std::vector<AxisNode>> nodes(d);
  for (std::size_t mu = 0; mu < d; ++mu) {
    const int m = q.m > 0 ? q.m : mesh_.axis(mu).order() + 2;
    nodes[mu] = axis_nodes(mesh_.axis(mu), m);
  }
  const auto shape = mesh_.shape();
  std::vector<std::size_t> strides(d, 1);
  for (std::size_t mu = d; mu-- > 1;) strides[mu - 1] = strides[mu] * shape[mu];
  std::size_t total = 1;
  for (auto s : shape) total *= s;
  std::vector<double> b(total, 0.0);

  std::vector<std::size_t> idx(d, 0);
  std::vector<double> x(d);
  std::vector<std::size_t> act(d, 0);
  while (true) {
    double w = 1.0;
    for (std::size_t mu = 0; mu < d; ++mu) {
      x[mu] = nodes[mu][idx[mu]].x;
      w *= nodes[mu][idx[mu]].w;
    }
    const double fw = f(x) * w;
    if (fw != 0.0) {
      // scatter over the k_1 x ... x k_d active block
      std::fill(act.begin(), act.end(), 0);
      while (true) {
        double prod = fw;
        std::size_t flat = 0;
        for (std::size_t mu = 0; mu < d; ++mu) {
          const auto& nd = nodes[mu][idx[mu]];
          prod *= nd.vals[act[mu]];
          flat += (nd.first + act[mu]) * strides[mu];
        }
        b[flat] += prod;
        std::size_t mu = d;
        while (mu-- > 0) {
          if (++act[mu] < static_cast<std::size_t>(mesh_.axis(mu).order())) break;
          act[mu] = 0;
        }
        if (mu == static_cast<std::size_t>(-1)) break;
      }
    }
    std::size_t mu = d;
    while (mu-- > 0) {
      if (++idx[mu] < nodes[mu].size()) break;
      idx[mu] = 0;
    }
    if (mu == static_cast<std::size_t>(-1)) break;
  }
  return b;
}

TensorCoeffs Projector::solve_moments(std::vector<double> b,
                                      std::span<const std::size_t> order) const {
  const std::size_t d = mesh_.dim();
  std::vector<std::size_t> seq(order.begin(), order.end());
  if (seq.empty()) {
    for (std::size_t mu = 0; mu < d; ++mu) seq.push_back(mu);
  }
  {
    std::vector<std::size_t> sorted = seq;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t mu = 0; mu < d; ++mu) {
      if (sorted.size() != d || sorted[mu] != mu) {
        throw Error(ErrorCode::PreconditionViolated, "axis order must be a permutation");
      }
    }
  }
  const auto shape = mesh_.shape();
  for (std::size_t mu : seq) {
    std::size_t outer = 1, inner = 1;
    for (std::size_t nu = 0; nu < mu; ++nu) outer *= shape[nu];
    for (std::size_t nu = mu + 1; nu < d; ++nu) inner *= shape[nu];
    const auto& chol = axes_[mu]->factor();
    for (std::size_t o = 0; o < outer; ++o) {
      for (std::size_t i = 0; i < inner; ++i) {
        chol.solve_strided(&b[o * shape[mu] * inner + i], inner);
      }
    }
  }
  return TensorCoeffs(mesh_, std::move(b));
}

TensorCoeffs Projector::project(const ScalarField& f, QuadratureSpec q,
                                std::span<const std::size_t> order) const {
  return solve_moments(moments(f, q), order);
}

double Projector::kernel(std::span<const double> x, std::span<const double> y) const {
  if (x.size() != mesh_.dim() || y.size() != mesh_.dim()) {
    throw Error(ErrorCode::DimensionMismatch, "kernel arguments have the wrong dimension");
  }
  double k = 1.0;
  for (std::size_t mu = 0; mu < mesh_.dim(); ++mu) k *= axes_[mu]->kernel(x[mu], y[mu]);
  return k;
}

SplineCoeffs project_1d(const KnotVector& kv, const ScalarField& f, QuadratureSpec q) {
  const Projector p(TensorMesh({kv}));
  auto tc = p.project(f, q);
  return SplineCoeffs{kv, std::vector<double>(tc.data().begin(), tc.data().end())};
}

TensorCoeffs project_tensor(const TensorMesh& mesh, const ScalarField& f, QuadratureSpec q) {
  return Projector(mesh).project(f, q);
}

double dirichlet_kernel(const TensorMesh& mesh, std::span<const double> x,
                        std::span<const double> y) {
  return Projector(mesh).kernel(x, y);
}

double kernel_bound_stat(const TensorMesh& mesh, double gamma, std::size_t samples,
                         std::uint64_t seed) {
  if (!(gamma > 0.0 && gamma < 1.0)) {
    throw Error(ErrorCode::PreconditionViolated, "gamma must lie in (0, 1)");
  }
  const Projector p(mesh);
  const std::size_t d = mesh.dim();
  Rng rng(seed);
  const double lg = std::log(gamma);
  double best = 0.0;
  std::vector<double> x(d), y(d);
  auto consider = [&] {
    double hull = 1.0;
    double dist = 0.0;
    for (std::size_t mu = 0; mu < d; ++mu) {
      const auto& kv = mesh.axis(mu);
      const std::size_t i = kv.span(x[mu]), j = kv.span(y[mu]);
      hull *= intervals(kv, i, j).hull.length();
      dist += static_cast<double>(i > j ? i - j : j - i);
    }
    const double v = std::abs(p.kernel(x, y)) * hull * std::exp(-dist * lg);
    best = std::max(best, v);
  };
  for (std::size_t s = 0; s < samples; ++s) {
    for (std::size_t mu = 0; mu < d; ++mu) x[mu] = rng.uniform();
    for (std::size_t mu = 0; mu < d; ++mu) y[mu] = rng.uniform();
    consider();
    for (std::size_t mu = 0; mu < d; ++mu) {
      const auto& kv = mesh.axis(mu);
      const std::size_t i = kv.span(x[mu]);
      y[mu] = rng.uniform(kv.knot(i), kv.knot(i + 1));
    }
    consider();
  }
  return best;
}

double lebesgue_function(const AxisProjector& ax, double x) {
  const KnotVector& kv = ax.knots();
  const auto w = ax.kernel_row(x);
  const auto k = static_cast<std::size_t>(kv.order());
  const auto bp = kv.breakpoints();
  std::vector<double> vals(k), xs(k), ys(k);
  double total = 0.0;
  for (std::size_t c = 0; c + 1 < bp.size(); ++c) {
    const double a = bp[c], b = bp[c + 1];
    for (std::size_t q = 0; q < k; ++q) {
      // Chebyshev points keep the interpolation well conditioned
      const double t = 0.5 - 0.5 * std::cos(std::numbers::pi * (2.0 * q + 1.0) / (2.0 * k));
      xs[q] = a + (b - a) * t;
      const std::size_t first = eval_basis_into(kv, xs[q], vals);
      double s = 0.0;
      for (std::size_t r = 0; r < k; ++r) s += w[first + r] * vals[r];
      ys[q] = s;
    }
    total += integral_abs(Poly1D::interpolate(xs, ys, a, b));
  }
  return total;
}

LebesgueReport lebesgue_constant(const TensorMesh& mesh, std::size_t density) {
  if (density < 2) throw Error(ErrorCode::PreconditionViolated, "density must be >= 2");
  const Projector p(mesh);
  LebesgueReport rep;
  rep.lambda = 1.0;
  for (std::size_t mu = 0; mu < mesh.dim(); ++mu) {
    const auto& ax = p.axis(mu);
    const auto& kv = ax.knots();
    std::vector<double> pts = kv.greville();
    const auto bp = kv.breakpoints();
    for (std::size_t c = 0; c + 1 < bp.size(); ++c) {
      const double a = bp[c], b = bp[c + 1];
      pts.push_back(0.5 * (a + b));
      for (std::size_t q = 1; q <= density; ++q) {
        pts.push_back(a + (b - a) * static_cast<double>(q) / static_cast<double>(density + 1));
      }
      pts.push_back(std::min(1.0, a + 1e-9));
      pts.push_back(std::max(0.0, b - 1e-9));
    }
    pts.push_back(0.0);
    pts.push_back(1.0);
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    double best = 0.0, arg = 0.0;
    for (double x : pts) {
      const double v = lebesgue_function(ax, x);
      if (v > best) {
        best = v;
        arg = x;
      }
    }
    rep.per_axis.push_back(best);
    rep.argmax.push_back(arg);
    rep.samples.push_back(pts.size());
    rep.lambda *= best;
  }
  return rep;
}

double sup_error(const TensorCoeffs& pf, const ScalarField& f, std::size_t samples,
                 std::uint64_t seed) {
  const std::size_t d = pf.mesh().dim();
  if (f.dim() != d) throw Error(ErrorCode::DimensionMismatch, "field dimension mismatch");
  Rng rng(seed);
  std::vector<double> x(d);
  double worst = 0.0;
  for (std::size_t s = 0; s < samples; ++s) {
    for (double& v : x) v = rng.uniform();
    worst = std::max(worst, std::abs(eval_tensor(pf, x) - f(x)));
  }
  return worst;
}

double sup_error(const TensorMesh& mesh, const ScalarField& f, std::size_t samples,
                 std::uint64_t seed, QuadratureSpec q) {
  return sup_error(project_tensor(mesh, f, q), f, samples, seed);
}

}  // namespace splinelab

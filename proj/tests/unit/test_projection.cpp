#include <doctest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "splinelab/bspline.hpp"
#include "splinelab/error.hpp"
#include "splinelab/gram.hpp"
#include "splinelab/projection.hpp"
#include "splinelab/quadrature.hpp"
#include "splinelab/rng.hpp"

using namespace splinelab;

namespace {

StepFunction random_step(Rng& rng, std::size_t cuts) {
  std::vector<std::vector<double>> breaks(2);
  std::size_t cells = 1;
  for (auto& b : breaks) {
    b = {0.0, 1.0};
    for (std::size_t i = 0; i < cuts; ++i) b.push_back(rng.uniform(0.01, 0.99));
    std::sort(b.begin(), b.end());
    b.erase(std::unique(b.begin(), b.end()), b.end());
    cells *= b.size() - 1;
  }
  std::vector<double> v(cells);
  for (double& x : v) x = rng.uniform(-1, 2);
  return StepFunction(breaks, v);
}

// integral of N_j over [lo, hi] by an 8-point rule per knot interval piece
double basis_integral(const KnotVector& kv, std::size_t j, double lo, double hi) {
  const GaussRule rule = gauss_legendre(8);
  std::vector<double> cuts{lo, hi};
  for (double t : kv.breakpoints()) {
    if (t > lo && t < hi) cuts.push_back(t);
  }
  std::sort(cuts.begin(), cuts.end());
  double s = 0.0;
  for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
    const double len = cuts[c + 1] - cuts[c];
    for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
      const auto b = eval_basis(kv, cuts[c] + len * rule.nodes[q]);
      if (j >= b.first && j < b.first + b.values.size()) {
        s += rule.weights[q] * len * b.values[j - b.first];
      }
    }
  }
  return s;
}

// Dense Kronecker Gram solve of the step-function moments.
std::vector<double> dense_oracle(const TensorMesh& mesh, const StepFunction& f) {
  const auto& ka = mesh.axis(0);
  const auto& kb = mesh.axis(1);
  const std::size_t na = ka.size(), nb = kb.size();
  Eigen::VectorXd b = Eigen::VectorXd::Zero(na * nb);
  const auto& xa = f.breaks(0);
  const auto& xb = f.breaks(1);
  for (std::size_t c1 = 0; c1 + 1 < xa.size(); ++c1) {
    for (std::size_t c2 = 0; c2 + 1 < xb.size(); ++c2) {
      const double v = f.values()[c1 * (xb.size() - 1) + c2];
      for (std::size_t i = 0; i < na; ++i) {
        const double ia = basis_integral(ka, i, xa[c1], xa[c1 + 1]);
        if (ia == 0.0) continue;
        for (std::size_t j = 0; j < nb; ++j) {
          b(i * nb + j) += v * ia * basis_integral(kb, j, xb[c2], xb[c2 + 1]);
        }
      }
    }
  }
  Eigen::MatrixXd ga(na, na), gb(nb, nb);
  for (std::size_t i = 0; i < na; ++i)
    for (std::size_t j = 0; j < na; ++j) ga(i, j) = assemble_gram(ka)(i, j);
  for (std::size_t i = 0; i < nb; ++i)
    for (std::size_t j = 0; j < nb; ++j) gb(i, j) = assemble_gram(kb)(i, j);
  Eigen::MatrixXd kron(na * nb, na * nb);
  for (std::size_t i = 0; i < na; ++i)
    for (std::size_t j = 0; j < na; ++j) kron.block(i * nb, j * nb, nb, nb) = ga(i, j) * gb;
  const Eigen::VectorXd c = kron.llt().solve(b);
  return {c.data(), c.data() + c.size()};
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

const double kPi = std::numbers::pi;

}  // namespace

TEST_CASE("project_1d examples") {
  const std::vector<double> pc{0, 0.5, 1};
  const ScalarField id(1, [](std::span<const double> x) { return x[0]; });
  const auto c = project_1d(validate_knots(pc, 1), id);
  CHECK(c.coeffs[0] == doctest::Approx(0.25));
  CHECK(c.coeffs[1] == doctest::Approx(0.75));

  Rng rng(2);
  for (int k = 1; k <= 4; ++k) {
    const auto kv = generate_mesh(MeshKind::Random, 15, k, 0.0, 30 + k);
    std::vector<double> c0(kv.size());
    for (double& v : c0) v = rng.uniform(-1, 1);
    const SplineCoeffs s{kv, c0};
    const ScalarField f(1, [&](std::span<const double> x) { return eval_spline(s, x[0]); });
    const auto got = project_1d(kv, f);
    for (std::size_t i = 0; i < c0.size(); ++i) CHECK(std::abs(got.coeffs[i] - c0[i]) <= 1e-9);
  }

  // residual of x^2 is orthogonal to every basis function
  const auto kv = generate_mesh(MeshKind::Uniform, 12, 2, 0.0, 0);
  const ScalarField sq(1, [](std::span<const double> x) { return x[0] * x[0]; });
  const auto p = project_1d(kv, sq);
  const GaussRule rule = gauss_legendre(10);
  const auto bp = kv.breakpoints();
  for (std::size_t j = 0; j < kv.size(); ++j) {
    double r = 0.0;
    for (std::size_t c2 = 0; c2 + 1 < bp.size(); ++c2) {
      const double len = bp[c2 + 1] - bp[c2];
      for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
        const double x = bp[c2] + len * rule.nodes[q];
        const auto b = eval_basis(kv, x);
        if (j < b.first || j >= b.first + b.values.size()) continue;
        r += rule.weights[q] * len * (eval_spline(p, x) - x * x) * b.values[j - b.first];
      }
    }
    CHECK(std::abs(r) <= 1e-10);
  }
}

TEST_CASE("project_tensor examples") {
  const std::vector<double> pc{0, 0.5, 1};
  const auto kv = validate_knots(pc, 1);
  const TensorMesh mesh({kv, kv});
  const ScalarField xy(2, [](std::span<const double> x) { return x[0] * x[1]; });
  const auto c = project_tensor(mesh, xy);
  const double expect[] = {1.0 / 16, 3.0 / 16, 3.0 / 16, 9.0 / 16};
  for (int i = 0; i < 4; ++i) CHECK(c.data()[i] == doctest::Approx(expect[i]).epsilon(1e-14));

  // tensor spline recovered
  const auto a = generate_mesh(MeshKind::Random, 8, 3, 0.0, 4);
  const auto b = generate_mesh(MeshKind::Random, 6, 2, 0.0, 5);
  const TensorMesh m2({a, b});
  Rng rng(6);
  std::vector<double> c0(a.size() * b.size());
  for (double& v : c0) v = rng.uniform(-1, 1);
  const TensorCoeffs s(m2, c0);
  const ScalarField f(2, [&](std::span<const double> x) { return eval_tensor(s, x); });
  const auto got = project_tensor(m2, f);
  for (std::size_t i = 0; i < c0.size(); ++i) CHECK(std::abs(got.data()[i] - c0[i]) <= 1e-9);
}

TEST_CASE("step-function projection matches the dense Kronecker oracle") {
  Rng rng(7);
  for (int t = 0; t < 6; ++t) {
    const int ka = 1 + t % 3, kb = 1 + (t + 1) % 3;
    const auto a = generate_mesh(MeshKind::Random, 6 + t, ka, 0.0, 100 + t);
    const auto b = generate_mesh(MeshKind::Random, 12 - t, kb, 0.0, 200 + t);
    const TensorMesh mesh({a, b});
    const auto f = random_step(rng, 5);
    const auto got = project_tensor(mesh, ScalarField(f));
    const auto ref = dense_oracle(mesh, f);
    double worst = 0.0;
    for (std::size_t i = 0; i < ref.size(); ++i) worst = std::max(worst, std::abs(got.data()[i] - ref[i]));
    CHECK(worst <= 1e-8);
  }
}

TEST_CASE("property: axis order independence, idempotence, self-adjointness") {
  Rng rng(9);
  const auto a = generate_mesh(MeshKind::Random, 14, 3, 0.0, 1);
  const auto b = generate_mesh(MeshKind::Random, 11, 2, 0.0, 2);
  const Projector p(TensorMesh({a, b}));
  for (int t = 0; t < 10; ++t) {
    const auto f = random_step(rng, 6);
    const auto g = random_step(rng, 4);
    const ScalarField ff(f), fg(g);
    const std::size_t fwd[] = {0, 1};
    const std::size_t rev[] = {1, 0};
    const auto c1 = p.project(ff, {}, fwd);
    const auto c2 = p.project(ff, {}, rev);
    for (std::size_t i = 0; i < c1.data().size(); ++i) {
      CHECK(std::abs(c1.data()[i] - c2.data()[i]) <= 1e-9);
    }
    // P(Pf) = Pf
    const ScalarField pf(2, [&](std::span<const double> x) { return eval_tensor(c1, x); });
    const auto again = p.project(pf);
    for (std::size_t i = 0; i < c1.data().size(); ++i) {
      CHECK(std::abs(again.data()[i] - c1.data()[i]) <= 1e-9);
    }
    // <Pf, g> = c_f . b_g and <f, Pg> = c_g . b_f
    const auto bf = p.moments(ff);
    const auto bg = p.moments(fg);
    const auto cg = p.project(fg);
    CHECK(std::abs(dot(c1.data(), bg) - dot(cg.data(), bf)) <= 1e-8);
  }
}

TEST_CASE("property: polynomial reproduction") {
  Rng rng(10);
  for (int k1 = 1; k1 <= 4; ++k1) {
    for (int k2 = 1; k2 <= 3; ++k2) {
      const auto a = generate_mesh(MeshKind::Random, 9 + k1, k1, 0.0, 40 + k1);
      const auto b = generate_mesh(MeshKind::Geometric, 7 + k2, k2, 1.7, 0);
      std::vector<double> ca(static_cast<std::size_t>(k1)), cb(static_cast<std::size_t>(k2));
      for (double& v : ca) v = rng.uniform(-1, 1);
      for (double& v : cb) v = rng.uniform(-1, 1);
      auto poly = [&](std::span<const double> x) {
        double pa = 0.0, pb = 0.0;
        for (std::size_t i = ca.size(); i-- > 0;) pa = pa * x[0] + ca[i];
        for (std::size_t i = cb.size(); i-- > 0;) pb = pb * x[1] + cb[i];
        return pa * pb + pa;  // per-coordinate degrees < k
      };
      const ScalarField f(2, poly);
      const auto c = project_tensor(TensorMesh({a, b}), f);
      for (int t = 0; t < 50; ++t) {
        const std::vector<double> x{rng.uniform(), rng.uniform()};
        CHECK(std::abs(eval_tensor(c, x) - poly(x)) <= 1e-8);
      }
    }
  }
}

TEST_CASE("dirichlet_kernel examples") {
  const auto kv1 = generate_mesh(MeshKind::Random, 7, 1, 0.0, 3);
  const TensorMesh m1({kv1});
  Rng rng(11);
  for (int t = 0; t < 100; ++t) {
    const double x[] = {rng.uniform()};
    const double y[] = {rng.uniform()};
    const std::size_t i = kv1.span(x[0]), j = kv1.span(y[0]);
    const double expect = i == j ? 1.0 / (kv1.knot(i + 1) - kv1.knot(i)) : 0.0;
    CHECK(dirichlet_kernel(m1, x, y) == doctest::Approx(expect).epsilon(1e-12));
  }

  const auto a = generate_mesh(MeshKind::Random, 10, 3, 0.0, 5);
  const auto b = generate_mesh(MeshKind::Uniform, 8, 2, 0.0, 0);
  const Projector p(TensorMesh({a, b}));
  for (int t = 0; t < 100; ++t) {
    const double x[] = {rng.uniform(), rng.uniform()};
    const double y[] = {rng.uniform(), rng.uniform()};
    CHECK(std::abs(p.kernel(x, y) - p.kernel(y, x)) <= 1e-10);
  }

  // reproducing property on one axis: integral of K(x, y) s(y) dy = s(x)
  const AxisProjector& ax = p.axis(0);
  std::vector<double> c0(a.size());
  for (double& v : c0) v = rng.uniform(-1, 1);
  const SplineCoeffs s{a, c0};
  const GaussRule rule = gauss_legendre(6);
  const auto bp = a.breakpoints();
  for (int t = 0; t < 20; ++t) {
    const double x = rng.uniform();
    double integral = 0.0;
    for (std::size_t c = 0; c + 1 < bp.size(); ++c) {
      const double len = bp[c + 1] - bp[c];
      for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
        const double y = bp[c] + len * rule.nodes[q];
        integral += rule.weights[q] * len * ax.kernel(x, y) * eval_spline(s, y);
      }
    }
    CHECK(std::abs(integral - eval_spline(s, x)) <= 1e-8);
  }
}

TEST_CASE("kernel_bound_stat examples") {
  const auto kv1 = generate_mesh(MeshKind::Random, 9, 1, 0.0, 3);
  CHECK(kernel_bound_stat(TensorMesh({kv1}), 0.5, 500, 1) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK_THROWS_AS(kernel_bound_stat(TensorMesh({kv1}), 1.0, 10, 1), Error);

  // 2-d samples are products of 1-d samples, each bounded by its axis supremum
  const auto a = generate_mesh(MeshKind::Uniform, 12, 2, 0.0, 0);
  const auto b = generate_mesh(MeshKind::Random, 10, 2, 0.0, 8);
  const double gamma = 0.35;
  const double c1 = kernel_bound_stat(TensorMesh({a}), gamma, 40000, 2);
  const double c2 = kernel_bound_stat(TensorMesh({b}), gamma, 40000, 3);
  const double c12 = kernel_bound_stat(TensorMesh({a, b}), gamma, 4000, 4);
  CHECK(c12 <= c1 * c2 + 1e-8);
  CHECK(std::isfinite(c12));
}

TEST_CASE("kernel_bound_stat is stable under refinement for gamma above the decay rate") {
  const double fitted = fit_decay(generate_mesh(MeshKind::Uniform, 20, 2, 0.0, 0)).gamma;
  const double rho = 2.0 - std::sqrt(3.0);
  REQUIRE(fitted > rho);
  std::vector<double> c, boundary;
  for (std::size_t n : {20, 40, 80}) {
    const TensorMesh mesh({generate_mesh(MeshKind::Uniform, n, 2, 0.0, 0)});
    c.push_back(kernel_bound_stat(mesh, fitted, 20000, 7));
    boundary.push_back(kernel_bound_stat(mesh, rho, 20000, 7));
  }
  for (std::size_t i = 1; i < c.size(); ++i) {
    CHECK(std::max(c[i], c[i - 1]) / std::min(c[i], c[i - 1]) <= 1.2);
  }
  // at gamma = rho the hull length |I_ij| = (r + 1) h is not absorbed, so
  // C grows linearly with n
  CHECK(boundary[2] / boundary[0] > 3.0);
}

TEST_CASE("lebesgue_constant examples") {
  const auto kv1 = generate_mesh(MeshKind::Random, 20, 1, 0.0, 3);
  CHECK(std::abs(lebesgue_constant(TensorMesh({kv1})).lambda - 1.0) <= 1e-10);

  // Lebesgue function at the reported argmax vs a dense-inverse oracle with
  // fine midpoint integration of |K(x, .)|
  const auto kv = generate_mesh(MeshKind::Uniform, 50, 2, 0.0, 0);
  const auto rep = lebesgue_constant(TensorMesh({kv}));
  CHECK(rep.per_axis[0] >= 1.0);
  CHECK(rep.per_axis[0] <= 3.1);
  const Matrix a = inverse_entries(assemble_gram(kv));
  const double x = rep.argmax[0];
  const auto bx = eval_basis(kv, x);
  const int fine = 200000;
  double oracle = 0.0;
  for (int i = 0; i < fine; ++i) {
    const double y = (i + 0.5) / fine;
    const auto by = eval_basis(kv, y);
    double k = 0.0;
    for (std::size_t r = 0; r < bx.values.size(); ++r)
      for (std::size_t c = 0; c < by.values.size(); ++c)
        k += a(bx.first + r, by.first + c) * bx.values[r] * by.values[c];
    oracle += std::abs(k) / fine;
  }
  CHECK(rep.per_axis[0] == doctest::Approx(oracle).epsilon(1e-6));

  // d = 2 factorization
  const auto b = generate_mesh(MeshKind::Random, 17, 3, 0.0, 9);
  const auto r2 = lebesgue_constant(TensorMesh({kv, b}));
  const auto rb = lebesgue_constant(TensorMesh({b}));
  CHECK(std::abs(r2.lambda - rep.lambda * rb.lambda) <= 1e-8);
  CHECK_THROWS_AS(lebesgue_constant(TensorMesh({kv}), 1), Error);
}

TEST_CASE("property: Lebesgue constant does not trend with the mesh") {
  for (int k = 2; k <= 3; ++k) {
    double lo = 1e9, hi = 0.0;
    for (int t = 0; t < 10; ++t) {
      const std::size_t n = 20 + 20 * static_cast<std::size_t>(t);
      const auto kv = generate_mesh(MeshKind::Random, n, k, 0.0, derive_seed(k, t));
      const double l = lebesgue_constant(TensorMesh({kv})).lambda;
      CHECK(l >= 1.0 - 1e-12);
      lo = std::min(lo, l);
      hi = std::max(hi, l);
    }
    CHECK(hi / lo <= 2.0);
  }
}

TEST_CASE("sup_error examples") {
  const auto kv = generate_mesh(MeshKind::Random, 13, 3, 0.0, 2);
  const ScalarField one(1, [](std::span<const double>) { return 1.0; });
  CHECK(sup_error(TensorMesh({kv}), one, 1000, 1) <= 1e-10);

  const ScalarField sin1(1, [](std::span<const double> x) { return std::sin(2 * kPi * x[0]); });
  double prev = 0.0;
  for (std::size_t n : {10u, 20u, 40u}) {
    const double e = sup_error(TensorMesh({generate_mesh(MeshKind::Uniform, n, 2, 0.0, 0)}), sin1,
                               4000, 5);
    if (prev > 0.0) CHECK(prev / e >= 3.0);
    prev = e;
  }

  const ScalarField sin2(2, [](std::span<const double> x) {
    return std::sin(2 * kPi * x[0]) * std::sin(2 * kPi * x[1]);
  });
  prev = 1e9;
  for (std::size_t n : {6u, 12u, 24u}) {
    const auto u = generate_mesh(MeshKind::Uniform, n, 2, 0.0, 0);
    const double e = sup_error(TensorMesh({u, u}), sin2, 4000, 6);
    CHECK(e < prev);
    prev = e;
  }
}

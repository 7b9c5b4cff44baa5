#include <doctest.h>

#include <cmath>
#include <vector>

#include "splinelab/bspline.hpp"
#include "splinelab/error.hpp"
#include "splinelab/rng.hpp"

using namespace splinelab;

namespace {

// Textbook recursion with 0/0 := 0, evaluated one function at a time.
double naive_bspline(const KnotVector& kv, std::size_t i, int k, double x) {
  const auto t = kv.knots();
  if (k == 1) {
    const std::size_t last = kv.span(1.0);
    if (x == 1.0) return i == last ? 1.0 : 0.0;
    return (t[i] <= x && x < t[i + 1]) ? 1.0 : 0.0;
  }
  double v = 0.0;
  const double d1 = t[i + k - 1] - t[i];
  const double d2 = t[i + k] - t[i + 1];
  if (d1 > 0) v += (x - t[i]) / d1 * naive_bspline(kv, i, k - 1, x);
  if (d2 > 0) v += (t[i + k] - x) / d2 * naive_bspline(kv, i + 1, k - 1, x);
  return v;
}

}  // namespace

TEST_CASE("eval_basis examples") {
  const std::vector<double> pc{0, 0.5, 1};
  const auto kv1 = validate_knots(pc, 1);
  auto b = eval_basis(kv1, 0.25);
  CHECK(b.first == 0);
  CHECK(b.values == std::vector<double>{1.0});

  const std::vector<double> hat{0, 0, 0.5, 1, 1};
  const auto kv2 = validate_knots(hat, 2);
  b = eval_basis(kv2, 0.25);
  CHECK(b.first == 0);
  CHECK(b.values[0] == doctest::Approx(0.5));  // 1 - 2x
  CHECK(b.values[1] == doctest::Approx(0.5));  // 2x

  for (int k = 1; k <= 5; ++k) {
    const auto kv = generate_mesh(MeshKind::Random, 12 + k, k, 0.0, 7);
    b = eval_basis(kv, 1.0);
    double sum = 0.0;
    for (double v : b.values) sum += v;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(b.values.back() == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(b.first + b.values.size() == kv.size());
  }

  CHECK_THROWS_AS(eval_basis(kv2, -0.1), Error);
}

TEST_CASE("eval_basis agrees with the naive recursion") {
  Rng rng(11);
  for (int k = 1; k <= 4; ++k) {
    const auto kv = generate_mesh(MeshKind::Random, 10 + k, k, 0.0, 100 + k);
    for (int trial = 0; trial < 200; ++trial) {
      const double x = trial == 0 ? 0.0 : (trial == 1 ? 1.0 : rng.uniform());
      const auto b = eval_basis(kv, x);
      for (std::size_t i = 0; i < kv.size(); ++i) {
        const double expect = naive_bspline(kv, i, k, x);
        double got = 0.0;
        if (i >= b.first && i < b.first + b.values.size()) got = b.values[i - b.first];
        CHECK(got == doctest::Approx(expect).epsilon(1e-13));
      }
    }
  }
}

TEST_CASE("repeated interior knots") {
  const std::vector<double> knots{0, 0, 0, 0.5, 0.5, 1, 1, 1};
  const auto kv = validate_knots(knots, 3);
  for (double x : {0.0, 0.2, 0.5, 0.7, 1.0}) {
    const auto b = eval_basis(kv, x);
    double sum = 0.0;
    for (std::size_t r = 0; r < b.values.size(); ++r) {
      sum += b.values[r];
      CHECK(b.values[r] == doctest::Approx(naive_bspline(kv, b.first + r, 3, x)).epsilon(1e-13));
    }
    CHECK(sum == doctest::Approx(1.0));
  }
}

TEST_CASE("eval_spline examples") {
  const auto kv = generate_mesh(MeshKind::Random, 15, 4, 0.0, 3);
  SplineCoeffs ones{kv, std::vector<double>(kv.size(), 1.0)};
  for (double x : {0.0, 0.13, 0.5, 0.99, 1.0}) CHECK(eval_spline(ones, x) == doctest::Approx(1.0));

  const std::vector<double> pc{0, 0.5, 1};
  SplineCoeffs step{validate_knots(pc, 1), {2.0, 5.0}};
  CHECK(eval_spline(step, 0.75) == 5.0);

  const auto hat = generate_mesh(MeshKind::Uniform, 11, 2, 0.0, 0);
  SplineCoeffs lin{hat, hat.greville()};
  Rng rng(1);
  for (int i = 0; i < 100; ++i) {
    const double x = rng.uniform();
    CHECK(std::abs(eval_spline(lin, x) - x) <= 1e-12);
  }
}

TEST_CASE("eval_tensor examples") {
  const auto a = generate_mesh(MeshKind::Random, 7, 3, 0.0, 1);
  const auto b = generate_mesh(MeshKind::Random, 5, 2, 0.0, 2);
  const TensorMesh mesh({a, b});

  TensorCoeffs ones(mesh, std::vector<double>(a.size() * b.size(), 1.0));
  const std::vector<double> p{0.3, 0.8};
  CHECK(eval_tensor(ones, p) == doctest::Approx(1.0));

  std::vector<double> ca(a.size()), cb(b.size()), rank1;
  for (std::size_t i = 0; i < ca.size(); ++i) ca[i] = 1.0 + i * i;
  for (std::size_t j = 0; j < cb.size(); ++j) cb[j] = 2.0 - j;
  for (double u : ca)
    for (double v : cb) rank1.push_back(u * v);
  TensorCoeffs tc(mesh, rank1);
  Rng rng(5);
  for (int t = 0; t < 50; ++t) {
    const std::vector<double> q{rng.uniform(), rng.uniform()};
    const double expect = eval_spline({a, ca}, q[0]) * eval_spline({b, cb}, q[1]);
    CHECK(eval_tensor(tc, q) == doctest::Approx(expect).epsilon(1e-13));
  }

  const auto cells = generate_mesh(MeshKind::Uniform, 3, 1, 0.0, 0);
  const auto cells2 = generate_mesh(MeshKind::Uniform, 2, 1, 0.0, 0);
  TensorCoeffs cc(TensorMesh({cells, cells2}), {1, 2, 3, 4, 5, 6});
  // cell (2,1) in 1-based indexing -> coefficient c_{2,1} = 3
  const std::vector<double> in21{0.5, 0.25};
  CHECK(eval_tensor(cc, in21) == 3.0);

  const std::vector<double> bad{0.5};
  CHECK_THROWS_AS(eval_tensor(cc, bad), Error);
}

TEST_CASE("property: partition of unity and nonnegativity on random meshes") {
  Rng rng(2024);
  double worst = 0.0;
  for (int m = 0; m < 100; ++m) {
    const int k = 1 + static_cast<int>(rng.below(4));
    const std::size_t n = static_cast<std::size_t>(k) + rng.below(47);
    const auto kv = generate_mesh(MeshKind::Random, n, k, 0.0, derive_seed(77, m));
    for (int i = 0; i < 1000; ++i) {
      const auto b = eval_basis(kv, rng.uniform());
      double sum = 0.0;
      for (double v : b.values) {
        CHECK(v >= 0.0);
        sum += v;
      }
      worst = std::max(worst, std::abs(sum - 1.0));
    }
  }
  CHECK(worst <= 1e-12);
}

TEST_CASE("property: support and local polynomial degree") {
  for (int k = 1; k <= 4; ++k) {
    const auto kv = generate_mesh(MeshKind::Random, 9 + k, k, 0.0, 40 + k);
    const auto t = kv.knots();
    Rng rng(k);
    for (int trial = 0; trial < 200; ++trial) {
      const double x = rng.uniform();
      const auto b = eval_basis(kv, x);
      for (std::size_t r = 0; r < b.values.size(); ++r) {
        const std::size_t i = b.first + r;
        CHECK(t[i] <= x);
        CHECK(x <= t[i + static_cast<std::size_t>(k)]);
      }
    }
    // On each cell, every basis function is a polynomial of degree k-1:
    // the k-th finite difference over equally spaced samples vanishes.
    for (std::size_t s = static_cast<std::size_t>(k) - 1; s < kv.size(); ++s) {
      const double lo = t[s];
      const double h = (t[s + 1] - lo) / (k + 1);
      for (std::size_t i = s + 1 - static_cast<std::size_t>(k); i <= s; ++i) {
        double diff = 0.0;
        double binom = 1.0;
        for (int q = 0; q <= k; ++q) {
          const auto b = eval_basis(kv, lo + h * (q + 0.5));
          const double v = b.values[i - b.first];
          diff += ((k - q) % 2 == 0 ? 1.0 : -1.0) * binom * v;
          binom = binom * (k - q) / (q + 1);
        }
        CHECK(std::abs(diff) <= 1e-9);
      }
    }
  }
}

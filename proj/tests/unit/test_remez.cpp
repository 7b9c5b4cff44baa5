#include <doctest.h>

#include <cmath>
#include <vector>

#include "splinelab/error.hpp"
#include "splinelab/remez.hpp"
#include "splinelab/rng.hpp"

using namespace splinelab;

namespace {

// T_{k-1}(3): the extremal ratio for rho = 1/2 (Chebyshev polynomial of the
// half interval, read off at the far endpoint).
double chebyshev_at_three(int k) {
  double a = 1.0, b = 3.0;
  if (k == 1) return a;
  for (int i = 2; i < k; ++i) {
    const double c = 6.0 * b - a;
    a = b;
    b = c;
  }
  return b;
}

}  // namespace

TEST_CASE("adversarial level") {
  CHECK(adversarial_level(Poly1D{{0.0, 1.0}}, 0.5) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(adversarial_level(Poly1D{{0.0, 1.0}}, 0.25) == doctest::Approx(0.25).epsilon(1e-12));
  // |1 - 4u| <= s on a set of measure s/2 + min(s, 3)/4 ... = 1/2 at s = 1
  CHECK(adversarial_level(Poly1D{{1.0, -4.0}}, 0.5) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(adversarial_level(Poly1D{{2.0}}, 0.5) == 2.0);
  CHECK_THROWS_AS(adversarial_level(Poly1D{{0.0, 1.0}}, 1.0), Error);
}

TEST_CASE("check_half_measure examples") {
  const auto lin = check_half_measure(Poly1D{{1.0, -4.0}}, 3.0, 3.0);
  CHECK(lin.holds);
  CHECK(lin.measure == doctest::Approx(0.5).epsilon(1e-14));
  const auto c = check_half_measure(Poly1D{{2.0}, 0.0, 3.0}, 2.0, 1.0001);
  CHECK(c.holds);
  CHECK(c.measure == 3.0);
  CHECK_THROWS_AS(check_half_measure(Poly1D{{1.0, -4.0}}, 3.5, 3.0), Error);
  CHECK_THROWS_AS(check_half_measure(Poly1D{{1.0, -4.0}}, 3.0, 1.0), Error);
  // Chebyshev cubic on [0, 1], unit sup norm
  const auto cheb = Poly1D::from_global({-1.0, 18.0, -48.0, 32.0}, 0.0, 1.0);
  CHECK(sup_norm(cheb) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(check_half_measure(cheb, 1.0, remez_constant(4)).holds);
}

TEST_CASE("estimate_remez examples") {
  CHECK(estimate_remez(1, 0.5, 100, 1).c_hat == 1.0);
  CHECK(estimate_remez(1, 0.3, 100, 1).c_hat == 1.0);
  const auto e2 = estimate_remez(2, 0.5, 2000, 7);
  CHECK(std::abs(e2.c_hat - 3.0) <= 0.02 * 3.0);
  CHECK(e2.trials == 2000);
  CHECK(sup_norm(e2.witness) == doctest::Approx(1.0));

  // brute force over the root of u - r
  double grid = 0.0;
  for (int i = 0; i <= 20000; ++i) {
    const Poly1D q{{-i / 20000.0, 1.0}};
    grid = std::max(grid, sup_norm(q) / adversarial_level(q, 0.5));
  }
  CHECK(grid == doctest::Approx(3.0).epsilon(1e-9));
  CHECK(std::abs(e2.c_hat - grid) <= 0.02 * grid);
  CHECK_THROWS_AS(estimate_remez(2, 0.5, 0, 1), Error);
}

TEST_CASE("property: estimates are nondecreasing in k and below the extremal value") {
  double prev = 0.0;
  for (int k = 1; k <= 4; ++k) {
    const double c = remez_constant(k) / 1.01;
    CHECK(c >= prev);
    CHECK(c <= chebyshev_at_three(k) * (1.0 + 1e-9));
    CHECK(c >= 0.97 * chebyshev_at_three(k));
    prev = c;
  }
}

TEST_CASE("property: the default constants give the half-measure bound on random polynomials") {
  Rng rng(99);
  for (int k = 1; k <= 4; ++k) {
    const double ck = remez_constant(k);
    int failures = 0;
    for (int t = 0; t < 1000; ++t) {
      std::vector<double> c(static_cast<std::size_t>(k));
      for (double& v : c) v = rng.normal();
      Poly1D q{c, rng.uniform(-2, 0), 0.0};
      q.b = q.a + rng.uniform(0.1, 3);
      if (!check_half_measure(q, sup_norm(q), ck).holds) ++failures;
    }
    CHECK(failures == 0);
  }
}

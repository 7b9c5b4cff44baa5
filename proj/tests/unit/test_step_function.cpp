#include <doctest.h>

#include <cmath>
#include <vector>

#include "splinelab/error.hpp"
#include "splinelab/rng.hpp"
#include "splinelab/step_function.hpp"

using namespace splinelab;

namespace {

StepFunction random_step(Rng& rng, std::size_t d, std::size_t cuts) {
  std::vector<std::vector<double>> breaks(d);
  std::size_t cells = 1;
  for (auto& b : breaks) {
    b = {0.0, 1.0};
    for (std::size_t i = 0; i < cuts; ++i) b.push_back(rng.uniform(0.01, 0.99));
    std::sort(b.begin(), b.end());
    b.erase(std::unique(b.begin(), b.end()), b.end());
    cells *= b.size() - 1;
  }
  std::vector<double> v(cells);
  for (double& x : v) x = rng.uniform(-2, 3);
  return StepFunction(breaks, v);
}

Rectangle box(double a, double b, double c, double d) { return Rectangle{{{a, b}, {c, d}}}; }

}  // namespace

TEST_CASE("construction and evaluation") {
  const StepFunction f({{0, 0.5, 1}, {0, 0.25, 1}}, {1, 2, 3, 4});
  const double p1[] = {0.1, 0.1};
  const double p2[] = {0.5, 0.25};
  const double p3[] = {1.0, 1.0};
  CHECK(f.eval(p1) == 1);
  CHECK(f.eval(p2) == 4);
  CHECK(f.eval(p3) == 4);
  CHECK(f.integral() == doctest::Approx(0.5 * 0.25 * 1 + 0.5 * 0.75 * 2 + 0.5 * 0.25 * 3 +
                                        0.5 * 0.75 * 4));
  CHECK_THROWS_AS(StepFunction({{0, 1}}, {1, 2}), Error);
  CHECK_THROWS_AS(StepFunction({{0, 0.5, 0.5, 1}}, {1, 2, 3}), Error);
  CHECK_THROWS_AS(StepFunction({{0.1, 1}}, {1}), Error);
}

TEST_CASE("builder paints weighted rectangles exactly") {
  StepFunctionBuilder b(2);
  b.add(box(0, 0.5, 0, 0.5), 2.0);
  b.add(box(0.25, 1, 0.25, 1), 3.0);
  const auto f = b.build();
  const double in_both[] = {0.3, 0.3};
  const double first_only[] = {0.1, 0.1};
  const double second_only[] = {0.9, 0.9};
  const double none[] = {0.9, 0.1};
  CHECK(f.eval(in_both) == 5.0);
  CHECK(f.eval(first_only) == 2.0);
  CHECK(f.eval(second_only) == 3.0);
  CHECK(f.eval(none) == 0.0);
  CHECK(f.value_set() == std::vector<double>{0, 2, 3, 5});
  CHECK(f.integral() == doctest::Approx(2 * 0.25 + 3 * 0.5625));
  CHECK_THROWS_AS(b.build(4), Error);
}

TEST_CASE("integral_over agrees with a midpoint oracle") {
  Rng rng(3);
  for (int t = 0; t < 20; ++t) {
    const auto f = random_step(rng, 2, 4);
    const double a = rng.uniform(0, 0.5), b = rng.uniform(0.5, 1);
    const double c = rng.uniform(0, 0.5), d = rng.uniform(0.5, 1);
    // oracle: integrate the refined function cell by cell using eval at midpoints
    const auto g = f.refine({{a, b}, {c, d}});
    double expect = 0.0;
    for (std::size_t i = 0; i + 1 < g.breaks(0).size(); ++i) {
      for (std::size_t j = 0; j + 1 < g.breaks(1).size(); ++j) {
        const double x0 = g.breaks(0)[i], x1 = g.breaks(0)[i + 1];
        const double y0 = g.breaks(1)[j], y1 = g.breaks(1)[j + 1];
        const double mid[] = {0.5 * (x0 + x1), 0.5 * (y0 + y1)};
        if (mid[0] > a && mid[0] < b && mid[1] > c && mid[1] < d) {
          expect += f.eval(mid) * (x1 - x0) * (y1 - y0);
        }
      }
    }
    CHECK(f.integral_over(box(a, b, c, d)) == doctest::Approx(expect).epsilon(1e-12));
  }
}

TEST_CASE("refine, sum, scale and abs preserve pointwise values") {
  Rng rng(5);
  const auto f = random_step(rng, 2, 3);
  const auto g = random_step(rng, 2, 5);
  const auto fr = f.refine({{0.33, 0.77}, {0.5}});
  const auto s = f + g;
  const auto a = f.abs();
  const auto sc = f.scaled(-2.5);
  for (int t = 0; t < 500; ++t) {
    const double x[] = {rng.uniform(), rng.uniform()};
    CHECK(fr.eval(x) == f.eval(x));
    CHECK(s.eval(x) == f.eval(x) + g.eval(x));
    CHECK(a.eval(x) == std::abs(f.eval(x)));
    CHECK(sc.eval(x) == -2.5 * f.eval(x));
  }
  CHECK(s.integral() == doctest::Approx(f.integral() + g.integral()).epsilon(1e-13));
}

TEST_CASE("pullback to the unit cube") {
  Rng rng(8);
  const auto f = random_step(rng, 2, 6);
  const Rectangle r = box(0.2, 0.7, 0.1, 0.4);
  const auto g = f.pullback(r);
  for (int t = 0; t < 500; ++t) {
    const double u[] = {rng.uniform(), rng.uniform()};
    const double x[] = {0.2 + 0.5 * u[0], 0.1 + 0.3 * u[1]};
    CHECK(g.eval(u) == f.eval(x));
  }
  CHECK(g.integral() * r.volume() == doctest::Approx(f.integral_over(r)).epsilon(1e-12));
  CHECK_THROWS_AS(f.pullback(box(0.5, 0.5, 0, 1)), Error);
}

TEST_CASE("indicator and constant") {
  const auto c = StepFunction::constant(3, 2.0);
  CHECK(c.integral() == 2.0);
  CHECK(c.cell_count() == 1);
  const auto ind = StepFunction::indicator(box(0, 0.5, 0, 0.5));
  CHECK(ind.integral() == 0.25);
  CHECK(ind.shape() == std::vector<std::size_t>{2, 2});
  CHECK(merge_breaks(std::vector<double>{0, 0.5, 1}, std::vector<double>{0.25, 0.5}) ==
        std::vector<double>{0, 0.25, 0.5, 1});
}

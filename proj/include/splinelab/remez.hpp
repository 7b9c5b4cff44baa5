#pragma once

#include <cstddef>
#include <cstdint>

#include "splinelab/polynomial.hpp"

namespace splinelab {

/// Empirical Remez constant: max over sampled polynomials Q of order k of
/// ||Q|| / sup_A |Q|, where A is the worst set of measure rho |I|.
struct RemezEstimate {
  int k = 1;
  double rho = 0.5;
  double c_hat = 1.0;
  std::size_t trials = 0;
  Poly1D witness;
};

struct HalfMeasureResult {
  bool holds = false;
  double measure = 0.0;
};

/// Level s* with |{|Q| > s*}| = (1 - rho)|I|; the adversarial set of measure
/// rho |I| is {|Q| <= s*}, so sup over it of |Q| is s*.
double adversarial_level(const Poly1D& q, double rho);

/// Whether |{|Q| > t / c_k}| >= |I| / 2. Throws PreconditionViolated if
/// sup |Q| < t or c_k <= 1.
HalfMeasureResult check_half_measure(const Poly1D& q, double t, double c_k);

/// Random search over polynomials of order k (root-parameterized and
/// Gaussian-coefficient draws), then local refinement around the best one.
RemezEstimate estimate_remez(int k, double rho, std::size_t trials, std::uint64_t seed);

/// Default c_k: estimate_remez(k, 1/2, 10^4, fixed seed).c_hat * 1.01,
/// computed once per k.
double remez_constant(int k);

}  // namespace splinelab

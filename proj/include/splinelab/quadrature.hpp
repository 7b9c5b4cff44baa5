#pragma once

#include <vector>

namespace splinelab {

/// Gauss-Legendre rule mapped to [0, 1]; weights sum to 1.
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// m-point rule, exact for polynomials of degree <= 2m - 1.
GaussRule gauss_legendre(int m);

}  // namespace splinelab

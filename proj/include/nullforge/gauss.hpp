#pragma once

#include <vector>

namespace nullforge {

// Gauss-Legendre nodes and weights on [-1, 1], Newton iteration on the
// Legendre recurrence. Accurate to ~1e-15 for q <= 64.
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

GaussRule gauss_legendre(int q);

}  // namespace nullforge

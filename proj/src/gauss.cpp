#include "nullforge/gauss.hpp"

#include <cmath>
#include <stdexcept>

namespace nullforge {

GaussRule gauss_legendre(int q) {
  if (q < 1 || q > 64) throw std::invalid_argument("gauss_legendre: q must be in [1, 64]");
  GaussRule rule;
  rule.nodes.resize(q);
  rule.weights.resize(q);
  for (int i = 0; i < q; ++i) {
    // Chebyshev initial guess, Newton on P_q
    double x = std::cos(M_PI * (i + 0.75) / (q + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      if (q == 1) {
        p1 = x;
      }
      for (int k = 2; k <= q; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      // derivative of P_q
      pp = q * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / pp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    rule.nodes[i] = x;
    rule.weights[i] = 2.0 / ((1.0 - x * x) * pp * pp);
  }
  if (q == 1) {
    rule.nodes[0] = 0.0;
    rule.weights[0] = 2.0;
  }
  return rule;
}

}  // namespace nullforge

#pragma once

#include <memory>
#include <span>
#include <vector>

#include "nullforge/multiindex.hpp"
#include "nullforge/network.hpp"

namespace nullforge {

// Value and all partial derivatives of a network at one point, up to a fixed
// order. Entries follow the graded-lexicographic multi-index layout of
// MultiIndexTable; mixed partials are stored once per multi-index.
struct DerivativeBundle {
  Point point;
  int order = 0;
  std::shared_ptr<const MultiIndexTable> table;
  std::vector<double> entries;  // D^beta u(point), graded-lex order

  double value() const { return entries[0]; }
  double partial(const MultiIndex& beta) const;
  std::vector<double> gradient() const;  // order-1 block
};

// All partials up to `order` by propagating truncated multivariate Taylor
// polynomials through the layers (exact up to roundoff, no differencing).
// Errors: KinkProximityError when a ReLU preactivation is within kink_tol of
// a kink; UnsupportedOrderError when the activation is not smooth enough.
DerivativeBundle jet_forward(const MlpNetwork& net, std::span<const double> x, int order,
                             double kink_tol = 1e-9);

}  // namespace nullforge

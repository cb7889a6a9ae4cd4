#include "nullforge/jet.hpp"

#include <cmath>
#include <stdexcept>

#include "nullforge/errors.hpp"

namespace nullforge {

namespace {

// Taylor polynomial truncated at the table's order; coefficients share the
// table's multi-index layout.
struct Poly {
  const MultiIndexTable* t;
  std::vector<double> c;

  explicit Poly(const MultiIndexTable* table) : t(table), c(table->size(), 0.0) {}
};

Poly mul(const Poly& a, const Poly& b) {
  Poly out(a.t);
  const int n = a.t->size();
  for (int i = 0; i < n; ++i) {
    if (a.c[i] == 0.0) continue;
    for (int j = 0; j < n; ++j) {
      if (b.c[j] == 0.0) continue;
      const int k = a.t->product_position(i, j);
      if (k >= 0) out.c[k] += a.c[i] * b.c[j];
    }
  }
  return out;
}

// sigma composed with an inner jet g: Horner over (g - g0) with the scaled
// derivatives sigma^(k)(g0)/k!.
Poly compose_activation(const Activation& act, const Poly& g, int order, double kink_tol) {
  const double g0 = g.c[0];
  if (act.kind() == ActivationKind::ReLU) {
    // an order-0 jet is a plain evaluation and stays total at kinks
    if (order >= 1 && std::abs(g0) <= kink_tol)
      throw KinkProximityError("ReLU preactivation within kink_tolerance at jet point");
    if (g0 > 0.0) return g;
    Poly z(g.t);
    return z;
  }
  if (order > act.smoothness_order())
    throw UnsupportedOrderError("activation smoothness below requested jet order");
  const auto ders = act.derivatives(g0, order, kink_tol);
  Poly gbar = g;
  gbar.c[0] = 0.0;
  // Horner from the top coefficient down, over sigma^(k)(g0)/k!
  std::vector<double> scaled(order + 1);
  double f = 1.0;
  for (int k = 0; k <= order; ++k) {
    scaled[k] = ders[k] / f;
    f *= (k + 1);
  }
  Poly acc(g.t);
  acc.c[0] = scaled[order];
  for (int k = order - 1; k >= 0; --k) {
    acc = mul(acc, gbar);
    acc.c[0] += scaled[k];
  }
  return acc;
}

}  // namespace

double DerivativeBundle::partial(const MultiIndex& beta) const {
  const int pos = table->position(beta);
  if (pos < 0) throw std::invalid_argument("partial: multi-index outside bundle order");
  return entries[pos];
}

std::vector<double> DerivativeBundle::gradient() const {
  const int d = table->dim();
  std::vector<double> g(d, 0.0);
  MultiIndex beta(d, 0);
  for (int i = 0; i < d; ++i) {
    beta.assign(d, 0);
    beta[i] = 1;
    g[i] = partial(beta);
  }
  return g;
}

DerivativeBundle jet_forward(const MlpNetwork& net, std::span<const double> x, int order,
                             double kink_tol) {
  if (order < 0) throw std::invalid_argument("jet order must be >= 0");
  const int d = net.input_dim();
  if (static_cast<int>(x.size()) != d)
    throw std::invalid_argument("jet_forward: input dimension mismatch");
  auto table = MultiIndexTable::get(d, order);
  const MultiIndexTable* t = table.get();

  std::vector<Poly> cur;
  cur.reserve(d);
  for (int i = 0; i < d; ++i) {
    Poly p(t);
    p.c[0] = x[i];
    MultiIndex e(d, 0);
    e[i] = 1;
    const int pos = t->position(e);
    if (pos >= 0) p.c[pos] = 1.0;
    cur.push_back(std::move(p));
  }

  const int L = net.depth();
  for (int layer = 0; layer < L; ++layer) {
    const int rows = net.layer_dims()[layer + 1];
    const int cols = net.layer_dims()[layer];
    const auto& W = net.weights(layer);
    const auto& b = net.biases(layer);
    std::vector<Poly> next;
    next.reserve(rows);
    for (int r = 0; r < rows; ++r) {
      Poly acc(t);
      acc.c[0] = b[r];
      const double* wrow = W.data() + static_cast<std::size_t>(r) * cols;
      for (int c = 0; c < cols; ++c) {
        if (wrow[c] == 0.0) continue;
        for (int k = 0; k < t->size(); ++k) acc.c[k] += wrow[c] * cur[c].c[k];
      }
      if (layer + 1 < L) acc = compose_activation(net.activation(), acc, order, kink_tol);
      next.push_back(std::move(acc));
    }
    cur.swap(next);
  }

  DerivativeBundle out;
  out.point.assign(x.begin(), x.end());
  out.order = order;
  out.table = table;
  out.entries.resize(t->size());
  for (int i = 0; i < t->size(); ++i) out.entries[i] = cur[0].c[i] * t->factorial_of(i);
  return out;
}

}  // namespace nullforge

#include "nullforge/activation.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "nullforge/errors.hpp"

namespace nullforge {

namespace {

// Derivatives of tanh and sigmoid are polynomials in the function value:
//   tanh:    y' = 1 - y^2
//   sigmoid: y' = y - y^2
// so P_{k+1}(y) = P_k'(y) * q(y) with q the right-hand side above.
std::vector<std::vector<double>> derivative_polys(double q0, double q1, double q2, int m) {
  // q(y) = q0 + q1 y + q2 y^2; P_0(y) = y
  std::vector<std::vector<double>> polys;
  polys.push_back({0.0, 1.0});
  for (int k = 0; k < m; ++k) {
    const auto& p = polys.back();
    std::vector<double> dp(p.size() > 1 ? p.size() - 1 : 1, 0.0);
    for (std::size_t i = 1; i < p.size(); ++i) dp[i - 1] = p[i] * static_cast<double>(i);
    std::vector<double> next(dp.size() + 2, 0.0);
    for (std::size_t i = 0; i < dp.size(); ++i) {
      next[i] += q0 * dp[i];
      next[i + 1] += q1 * dp[i];
      next[i + 2] += q2 * dp[i];
    }
    polys.push_back(std::move(next));
  }
  return polys;
}

double polyval(const std::vector<double>& coeffs, double y) {
  double r = 0.0;
  for (std::size_t i = coeffs.size(); i-- > 0;) r = r * y + coeffs[i];
  return r;
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double softplus(double x) {
  if (x > 0.0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

}  // namespace

int Activation::smoothness_order() const {
  return kind_ == ActivationKind::ReLU ? 0 : std::numeric_limits<int>::max();
}

bool Activation::strictly_monotone() const { return kind_ != ActivationKind::ReLU; }

double Activation::value(double x) const {
  switch (kind_) {
    case ActivationKind::ReLU: return x > 0.0 ? x : 0.0;
    case ActivationKind::Tanh: return std::tanh(x);
    case ActivationKind::Sigmoid: return sigmoid(x);
    case ActivationKind::Softplus: return softplus(x);
    case ActivationKind::Identity: return x;
  }
  return 0.0;
}

std::vector<double> Activation::derivatives(double x, int m, double kink_tol) const {
  if (m < 0) throw std::invalid_argument("derivative order must be >= 0");
  std::vector<double> out(static_cast<std::size_t>(m) + 1, 0.0);
  switch (kind_) {
    case ActivationKind::ReLU: {
      if (m >= 1 && std::abs(x) <= kink_tol)
        throw KinkProximityError("ReLU derivative requested within kink_tolerance of 0");
      if (x > 0.0) {
        out[0] = x;
        if (m >= 1) out[1] = 1.0;
      }
      return out;
    }
    case ActivationKind::Identity: {
      out[0] = x;
      if (m >= 1) out[1] = 1.0;
      return out;
    }
    case ActivationKind::Tanh: {
      const double y = std::tanh(x);
      auto polys = derivative_polys(1.0, 0.0, -1.0, m);
      for (int k = 0; k <= m; ++k) out[k] = polyval(polys[k], y);
      return out;
    }
    case ActivationKind::Sigmoid: {
      const double y = sigmoid(x);
      auto polys = derivative_polys(0.0, 1.0, -1.0, m);
      for (int k = 0; k <= m; ++k) out[k] = polyval(polys[k], y);
      return out;
    }
    case ActivationKind::Softplus: {
      out[0] = softplus(x);
      if (m >= 1) {
        const double y = sigmoid(x);
        auto polys = derivative_polys(0.0, 1.0, -1.0, m - 1);
        for (int k = 1; k <= m; ++k) out[k] = polyval(polys[k - 1], y);
      }
      return out;
    }
  }
  return out;
}

double Activation::anchor() const {
  // tanh is odd, so every even derivative vanishes at 0; 0.5 keeps all
  // derivatives nonzero for the orders used here. The same point works for
  // the other smooth kinds.
  return 0.5;
}

std::string Activation::name() const {
  switch (kind_) {
    case ActivationKind::ReLU: return "relu";
    case ActivationKind::Tanh: return "tanh";
    case ActivationKind::Sigmoid: return "sigmoid";
    case ActivationKind::Softplus: return "softplus";
    case ActivationKind::Identity: return "identity";
  }
  return "relu";
}

Activation Activation::from_name(const std::string& name) {
  if (name == "relu") return Activation(ActivationKind::ReLU);
  if (name == "tanh") return Activation(ActivationKind::Tanh);
  if (name == "sigmoid") return Activation(ActivationKind::Sigmoid);
  if (name == "softplus") return Activation(ActivationKind::Softplus);
  if (name == "identity") return Activation(ActivationKind::Identity);
  throw std::invalid_argument("unknown activation: " + name);
}

}  // namespace nullforge

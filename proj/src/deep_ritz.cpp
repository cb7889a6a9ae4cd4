#include "nullforge/deep_ritz.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

#include "nullforge/rng.hpp"

namespace nullforge {

double LocalIntegrand::eval(std::span<const double> grad, double value, int node) const {
  double g2 = 0.0;
  for (double g : grad) g2 += g * g;
  switch (kind) {
    case Kind::DirichletEnergy:
      return 0.5 * g2;
    case Kind::Poisson:
      return 0.5 * g2 - zeta.at(node) * value;
    case Kind::StrictlyConvexPoisson:
      return 0.5 * g2 + 0.5 * mu * value * value - zeta.at(node) * value;
  }
  return 0.0;
}

void LocalIntegrand::grad(std::span<const double> grad, double value, int node,
                          std::span<double> d_xi, double& d_s) const {
  for (std::size_t i = 0; i < grad.size(); ++i) d_xi[i] = grad[i];
  switch (kind) {
    case Kind::DirichletEnergy:
      d_s = 0.0;
      break;
    case Kind::Poisson:
      d_s = -zeta.at(node);
      break;
    case Kind::StrictlyConvexPoisson:
      d_s = mu * value - zeta.at(node);
      break;
  }
}

double DeepRitzConfig::interior_weight(int i) const {
  if (interior_weights.empty()) return 1.0 / static_cast<double>(interior.size());
  return interior_weights.at(i);
}

double DeepRitzConfig::boundary_weight(int i) const {
  if (boundary_weights.empty()) return 1.0 / static_cast<double>(boundary.size());
  return boundary_weights.at(i);
}

DeepRitzConfig DeepRitzConfig::example_1d(double T, double u0, double uT, double alpha_b,
                                          const std::vector<double>& interior_nodes) {
  DeepRitzConfig cfg;
  for (double z : interior_nodes) cfg.interior.push_back({z});
  cfg.interior_weights.assign(interior_nodes.size(), 1.0 / interior_nodes.size());
  cfg.boundary = {{0.0}, {T}};
  cfg.boundary_weights = {1.0, 1.0};
  cfg.boundary_data = {u0, uT};
  cfg.alpha_b = alpha_b;
  cfg.p = 2.0;
  return cfg;
}

MeasurementSpec deep_ritz_spec(const DeepRitzConfig& config) {
  return MeasurementSpec::deep_ritz(config.interior, config.boundary);
}

namespace {

// MeasurementSpec factories sort points; build index maps from the config's
// node order into the measurement layout.
struct DrLayout {
  std::vector<int> value_pos;                // per interior node
  std::vector<std::vector<int>> grad_pos;    // per interior node, per axis
  std::vector<int> trace_pos;                // per boundary node
};

DrLayout dr_layout(const MeasurementSpec& spec, const DeepRitzConfig& config) {
  DrLayout lay;
  const int d = spec.dim();
  lay.value_pos.assign(config.interior.size(), -1);
  lay.grad_pos.assign(config.interior.size(), std::vector<int>(d, -1));
  lay.trace_pos.assign(config.boundary.size(), -1);
  const auto& probes = spec.probes();
  for (std::size_t i = 0; i < config.interior.size(); ++i) {
    for (int p = 0; p < spec.size(); ++p) {
      if (probes[p].point != config.interior[i]) continue;
      if (probes[p].kind == ProbeKind::Value) lay.value_pos[i] = p;
      if (probes[p].kind == ProbeKind::Partial) {
        for (int a = 0; a < d; ++a)
          if (probes[p].beta[a] == 1 && mi_order(probes[p].beta) == 1) lay.grad_pos[i][a] = p;
      }
    }
  }
  for (std::size_t i = 0; i < config.boundary.size(); ++i)
    for (int p = 0; p < spec.size(); ++p)
      if (probes[p].kind == ProbeKind::TraceValue && probes[p].point == config.boundary[i])
        lay.trace_pos[i] = p;
  return lay;
}

}  // namespace

FiniteMeasurementLoss make_dr_loss(const LocalIntegrand& integrand, const DeepRitzConfig& config) {
  MeasurementSpec spec = deep_ritz_spec(config);
  const DrLayout lay = dr_layout(spec, config);
  const int d = spec.dim();
  const bool penalty = config.enforcement == Enforcement::Penalty;
  auto integ = integrand;
  auto cfg = config;
  auto G = [integ, cfg, lay, d, penalty](std::span<const double> mvec) {
    double total = 0.0;
    std::vector<double> grad(d);
    for (std::size_t i = 0; i < cfg.interior.size(); ++i) {
      for (int a = 0; a < d; ++a) grad[a] = mvec[lay.grad_pos[i][a]];
      total += cfg.interior_weight(static_cast<int>(i)) *
               integ.eval(grad, mvec[lay.value_pos[i]], static_cast<int>(i));
    }
    if (penalty && cfg.alpha_b != 0.0) {
      double bterm = 0.0;
      for (std::size_t i = 0; i < cfg.boundary.size(); ++i) {
        const double r = mvec[lay.trace_pos[i]] - cfg.boundary_data[i];
        bterm += cfg.boundary_weight(static_cast<int>(i)) * std::pow(std::abs(r), cfg.p);
      }
      total += cfg.alpha_b * bterm;
    }
    return total;
  };
  return FiniteMeasurementLoss{std::move(spec), std::move(G), config.kink_tol};
}

double dr_loss(const MlpNetwork& net, const LocalIntegrand& integrand,
               const DeepRitzConfig& config) {
  return make_dr_loss(integrand, config).eval(net);
}

double boundary_constraint_residual(const MlpNetwork& net, const DeepRitzConfig& config) {
  double r = 0.0;
  for (std::size_t i = 0; i < config.boundary.size(); ++i)
    r = std::max(r, std::abs(net.forward(config.boundary[i]) - config.boundary_data[i]));
  return r;
}

AffineMinimizer affine_minimizer_1d(double T, double u0, double uT, double alpha_b) {
  if (!(T > 0.0)) throw std::invalid_argument("affine_minimizer_1d: T must be positive");
  if (alpha_b < 0.0) throw std::invalid_argument("affine_minimizer_1d: alpha_b must be >= 0");
  AffineMinimizer am;
  am.slope = alpha_b * T * (uT - u0) / (alpha_b * T * T + 1.0);
  am.intercept = (2.0 * alpha_b * T * T * u0 + u0 + uT) / (2.0 * alpha_b * T * T + 2.0);
  return am;
}

MlpNetwork one_neuron_zero_loss(double b, double T, double u0, double uT, double z_max) {
  if (!(b > -T && b < -z_max))
    throw std::invalid_argument("one_neuron_zero_loss: b must lie in (-T, -z_max)");
  const double scale = (uT - u0) / (T + b);
  return MlpNetwork(Activation(ActivationKind::ReLU), {1, 1, 1}, {{1.0}, {scale}},
                    {{b}, {u0}});
}

NonCoerciveStep non_coercive_sequence(int k, const LocalIntegrand& integrand,
                                      const DeepRitzConfig& config) {
  if (k < 0) throw std::invalid_argument("non_coercive_sequence: k must be >= 0");
  if (integrand.kind == LocalIntegrand::Kind::DirichletEnergy)
    throw std::invalid_argument("non_coercive_sequence: integrand must carry a source term");
  int z0 = -1;
  for (std::size_t i = 0; i < integrand.zeta.size(); ++i)
    if (integrand.zeta[i] != 0.0) {
      z0 = static_cast<int>(i);
      break;
    }
  if (z0 < 0) throw std::invalid_argument("non_coercive_sequence: all zeta samples are zero");

  std::vector<Point> nodes = config.interior;
  std::vector<double> data;
  for (double z : integrand.zeta)
    data.push_back(static_cast<double>(k) * (z > 0.0 ? 1.0 : (z < 0.0 ? -1.0 : 0.0)));
  for (std::size_t i = 0; i < config.boundary.size(); ++i) {
    nodes.push_back(config.boundary[i]);
    data.push_back(config.boundary_data[i]);
  }
  NonCoerciveStep step{relu_plateau_interpolant(nodes, data, 2), 0.0, 0.0};
  step.loss = dr_loss(step.net, integrand, config);
  step.descent_rate = config.interior_weight(z0) * std::abs(integrand.zeta[z0]);
  return step;
}

DegeneracyCertificate certify_dr_nonuniqueness(const DeepRitzConfig& config,
                                               const LocalIntegrand& integrand,
                                               const MlpNetwork& base, const NullFamily& family,
                                               int depth, const Point& z0,
                                               const std::vector<double>& lambdas,
                                               std::uint64_t seed,
                                               const std::optional<MlpNetwork>& reference,
                                               const std::optional<Box>& domain) {
  FiniteMeasurementLoss loss = make_dr_loss(integrand, config);
  const double null_tol = family.is_relu() ? 1e-12 : 1e-8;
  const MlpNetwork phi = null_direction(loss.spec, z0, family, depth, seed);
  DegeneracyCertificate cert = loss_invariance_sweep(loss, base, phi, z0, lambdas, null_tol);
  if (config.enforcement == Enforcement::HardAtPoints) {
    for (double lam : cert.lambda_samples) {
      const MlpNetwork shifted = linear_combine({base, phi}, {1.0, lam});
      cert.constraint_residuals.push_back(boundary_constraint_residual(shifted, config));
    }
  }
  if (reference && domain) attach_distance_escape(cert, *reference, 2.0, *domain, 4096);
  return cert;
}

namespace {

// analytic parameter gradient of the penalty loss for depth-2 scalar nets
struct Depth2Fit {
  // params: [c0, c_j..., w_j..., b_j...]
  int width;
  Activation act;

  double value(const std::vector<double>& th, double z, std::vector<double>* dv,
               double* deriv = nullptr, std::vector<double>* dderiv = nullptr) const {
    const int W = width;
    double u = th[0];
    if (dv) {
      dv->assign(th.size(), 0.0);
      (*dv)[0] = 1.0;
    }
    if (deriv) *deriv = 0.0;
    if (dderiv) dderiv->assign(th.size(), 0.0);
    for (int j = 0; j < W; ++j) {
      const double c = th[1 + j], w = th[1 + W + j], b = th[1 + 2 * W + j];
      const auto s = act.derivatives(w * z + b, dderiv ? 2 : 1);
      u += c * s[0];
      if (dv) {
        (*dv)[1 + j] = s[0];
        (*dv)[1 + W + j] = c * s[1] * z;
        (*dv)[1 + 2 * W + j] = c * s[1];
      }
      if (deriv) *deriv += c * w * s[1];
      if (dderiv) {
        (*dderiv)[1 + j] = w * s[1];
        (*dderiv)[1 + W + j] = c * (s[1] + w * z * s[2]);
        (*dderiv)[1 + 2 * W + j] = c * w * s[2];
      }
    }
    return u;
  }

  MlpNetwork to_network(const std::vector<double>& th) const {
    const int W = width;
    std::vector<double> W1(W), B1(W), W2(W);
    for (int j = 0; j < W; ++j) {
      W1[j] = th[1 + W + j];
      B1[j] = th[1 + 2 * W + j];
      W2[j] = th[1 + j];
    }
    return MlpNetwork(act, {1, W, 1}, {W1, W2}, {B1, {th[0]}});
  }
};

}  // namespace

CollocationReport collocation_agreement_check(const LocalIntegrand& integrand,
                                              const DeepRitzConfig& config, int trials,
                                              int budget, std::uint64_t seed) {
  if (config.interior.empty() || config.interior[0].size() != 1)
    throw std::invalid_argument("collocation_agreement_check supports 1D configs");
  CollocationReport rep;
  rep.trials = trials;
  const bool penalty_convex = config.alpha_b == 0.0 || config.p > 1.0;
  rep.applicable = integrand.strictly_convex() && penalty_convex;
  if (!rep.applicable)
    rep.note = "integrand not strictly convex in (grad, value): "
               "measurement agreement is not implied";
  else
    rep.note = "empirical agreement at optimizer tolerance; the trial class is "
               "not closed under convex combinations";

  const Depth2Fit fit{8, Activation(ActivationKind::Tanh)};
  const int P = 1 + 3 * fit.width;
  const double step_size = 1e-2;

  const FiniteMeasurementLoss loss = make_dr_loss(integrand, config);
  auto loss_and_grad = [&](const std::vector<double>& th, std::vector<double>& grad) {
    grad.assign(P, 0.0);
    std::vector<double> dv, dd;
    double total = 0.0;
    std::vector<double> d_xi(1);
    for (std::size_t i = 0; i < config.interior.size(); ++i) {
      const double z = config.interior[i][0];
      double uz;
      double du;
      const double u = fit.value(th, z, &dv, &du, &dd);
      uz = u;
      double d_s = 0.0;
      std::array<double, 1> g{du};
      integrand.grad(g, uz, static_cast<int>(i), d_xi, d_s);
      const double w = config.interior_weight(static_cast<int>(i));
      total += w * integrand.eval(g, uz, static_cast<int>(i));
      for (int p = 0; p < P; ++p) grad[p] += w * (d_xi[0] * dd[p] + d_s * dv[p]);
    }
    if (config.alpha_b != 0.0 && config.enforcement == Enforcement::Penalty) {
      for (std::size_t i = 0; i < config.boundary.size(); ++i) {
        const double z = config.boundary[i][0];
        const double u = fit.value(th, z, &dv);
        const double r = u - config.boundary_data[i];
        const double w = config.boundary_weight(static_cast<int>(i));
        total += config.alpha_b * w * std::pow(std::abs(r), config.p);
        const double dr = config.p * std::pow(std::abs(r), config.p - 1.0) * (r >= 0 ? 1.0 : -1.0);
        for (int p = 0; p < P; ++p) grad[p] += config.alpha_b * w * dr * dv[p];
      }
    }
    return total;
  };

  std::vector<std::vector<double>> measurements;
  for (int t = 0; t < trials; ++t) {
    Rng rng(seed + static_cast<std::uint64_t>(t) * 7919);
    std::vector<double> th(P);
    for (auto& x : th) x = 0.5 * rng.normal();
    std::vector<double> grad(P);
    double cur = loss_and_grad(th, grad);
    double window_ref = cur;
    for (int it = 0; it < budget; ++it) {
      for (int p = 0; p < P; ++p) th[p] -= step_size * grad[p];
      cur = loss_and_grad(th, grad);
      // converged when the loss decreased by < 1e-12 over 100 iterations
      if (it % 100 == 99) {
        if (window_ref - cur < 1e-12) break;
        window_ref = cur;
      }
    }
    rep.final_losses.push_back(cur);
    measurements.push_back(measure(fit.to_network(th), loss.spec, config.kink_tol));
  }
  if (rep.final_losses.empty()) return rep;
  rep.best_loss = *std::min_element(rep.final_losses.begin(), rep.final_losses.end());

  double dev = 0.0;
  int conv = 0;
  std::vector<int> converged_ids;
  for (int t = 0; t < trials; ++t)
    if (rep.final_losses[t] <= rep.best_loss + 1e-8) {
      ++conv;
      converged_ids.push_back(t);
    }
  for (std::size_t a = 0; a < converged_ids.size(); ++a)
    for (std::size_t b = a + 1; b < converged_ids.size(); ++b)
      for (std::size_t k = 0; k < measurements[converged_ids[a]].size(); ++k)
        dev = std::max(dev, std::abs(measurements[converged_ids[a]][k] -
                                     measurements[converged_ids[b]][k]));
  rep.converged = conv;
  rep.max_measurement_deviation = dev;
  rep.deviation_ok = dev <= 1e-3;
  if (conv == 0) rep.note += "; no run converged within budget";
  return rep;
}

}  // namespace nullforge

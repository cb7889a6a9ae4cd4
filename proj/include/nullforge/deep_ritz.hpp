#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "nullforge/certificate.hpp"
#include "nullforge/measurement.hpp"
#include "nullforge/network.hpp"
#include "nullforge/null_forge.hpp"

namespace nullforge {

// Local integrand L(xi, s, z) evaluated at sampled collocation points.
// zeta is supplied as samples aligned with the interior node list.
struct LocalIntegrand {
  enum class Kind { Poisson, StrictlyConvexPoisson, DirichletEnergy };
  Kind kind = Kind::DirichletEnergy;
  std::vector<double> zeta;  // per interior node; unused for DirichletEnergy
  double mu = 0.0;           // coefficient of (mu/2) s^2

  double eval(std::span<const double> grad, double value, int node) const;
  // partials w.r.t. xi and s (optimizer support)
  void grad(std::span<const double> grad, double value, int node, std::span<double> d_xi,
            double& d_s) const;
  bool strictly_convex() const { return kind == Kind::StrictlyConvexPoisson && mu > 0.0; }

  static LocalIntegrand poisson(std::vector<double> zeta) {
    return {Kind::Poisson, std::move(zeta), 0.0};
  }
  static LocalIntegrand strictly_convex_poisson(std::vector<double> zeta, double mu) {
    return {Kind::StrictlyConvexPoisson, std::move(zeta), mu};
  }
  static LocalIntegrand dirichlet_energy() { return {Kind::DirichletEnergy, {}, 0.0}; }
};

enum class Enforcement { Penalty, HardAtPoints };

// Discrete Deep Ritz configuration: interior quadrature nodes and weights,
// boundary points with data, penalty alpha_B and exponent p, or hard
// point constraints.
struct DeepRitzConfig {
  std::vector<Point> interior;
  std::vector<double> interior_weights;  // empty: 1/|interior|
  std::vector<Point> boundary;
  std::vector<double> boundary_weights;  // empty: 1/|boundary|
  std::vector<double> boundary_data;     // B(u)(z) = u(z) - data
  double alpha_b = 0.0;
  double p = 2.0;
  Enforcement enforcement = Enforcement::Penalty;
  double kink_tol = 1e-9;

  double interior_weight(int i) const;
  double boundary_weight(int i) const;

  // the 1D two-point boundary example on [0, T]: interior weights 1/N and
  // unit boundary weights (the convention of the closed-form minimizer)
  static DeepRitzConfig example_1d(double T, double u0, double uT, double alpha_b,
                                   const std::vector<double>& interior_nodes);
};

MeasurementSpec deep_ritz_spec(const DeepRitzConfig& config);

// J = sum_z w_L L(grad u(z), u(z), z) [+ alpha_B sum_z w_B |u(z)-data|^p].
// Hard enforcement keeps only the interior sum; constraints are checked
// separately. Expressed as G over the Deep Ritz measurement layout.
FiniteMeasurementLoss make_dr_loss(const LocalIntegrand& integrand, const DeepRitzConfig& config);
double dr_loss(const MlpNetwork& net, const LocalIntegrand& integrand,
               const DeepRitzConfig& config);

// max_z |u(z) - data(z)| over the boundary points
double boundary_constraint_residual(const MlpNetwork& net, const DeepRitzConfig& config);

struct AffineMinimizer {
  double slope = 0.0;
  double intercept = 0.0;
};

// Closed-form minimizer of the example loss over affine trial functions
// (depth-1 networks); biased away from the exact solution for finite alpha_b.
AffineMinimizer affine_minimizer_1d(double T, double u0, double uT, double alpha_b);

// One-hidden-neuron ReLU network with exactly zero example loss for any
// b in (-T, -z_max): u(z) = (uT - u0)/(T + b) * sigma(z + b) + u0.
MlpNetwork one_neuron_zero_loss(double b, double T, double u0, double uT, double z_max);

struct NonCoerciveStep {
  MlpNetwork net;
  double loss = 0.0;
  double descent_rate = 0.0;  // c = w_L^{z0} |zeta(z0)|
};

// k-th member of a minimizing sequence with plateaus at all interior nodes
// and plateau heights k * sign(zeta); loss <= -c k.
NonCoerciveStep non_coercive_sequence(int k, const LocalIntegrand& integrand,
                                      const DeepRitzConfig& config);

// Forges a null direction for the Deep Ritz measurements and certifies loss
// invariance (and constraint preservation under hard enforcement), plus the
// L^p escape when a reference is supplied.
DegeneracyCertificate certify_dr_nonuniqueness(const DeepRitzConfig& config,
                                               const LocalIntegrand& integrand,
                                               const MlpNetwork& base, const NullFamily& family,
                                               int depth, const Point& z0,
                                               const std::vector<double>& lambdas,
                                               std::uint64_t seed = 1,
                                               const std::optional<MlpNetwork>& reference = {},
                                               const std::optional<Box>& domain = {});

struct CollocationReport {
  bool applicable = false;  // integrand (and boundary penalty) strictly convex
  int trials = 0;
  int converged = 0;
  std::vector<double> final_losses;
  double best_loss = 0.0;
  double max_measurement_deviation = 0.0;
  bool deviation_ok = false;  // <= 1e-3 among converged runs
  std::string note;
};

// Empirical check that independently trained networks agree on the
// collocation measurements when the integrand is strictly convex. Optimizer
// is plain fixed-step gradient descent on depth-2 tanh networks (1D).
CollocationReport collocation_agreement_check(const LocalIntegrand& integrand,
                                              const DeepRitzConfig& config, int trials,
                                              int budget, std::uint64_t seed = 1);

}  // namespace nullforge

#include <doctest.h>

#include <cmath>

#include "nullforge/deep_ritz.hpp"
#include "nullforge/jet.hpp"
#include "nullforge/null_forge.hpp"
#include "nullforge/rng.hpp"

using namespace nullforge;

namespace {

// independent oracle: direct summation of the discrete loss via jets,
// bypassing the measurement-layout path
double direct_dr_loss(const MlpNetwork& net, const LocalIntegrand& integ,
                      const DeepRitzConfig& cfg) {
  double total = 0.0;
  for (std::size_t i = 0; i < cfg.interior.size(); ++i) {
    const auto jet = jet_forward(net, cfg.interior[i], 1);
    const auto grad = jet.gradient();
    total += cfg.interior_weight(static_cast<int>(i)) *
             integ.eval(grad, jet.value(), static_cast<int>(i));
  }
  if (cfg.enforcement == Enforcement::Penalty && cfg.alpha_b != 0.0) {
    for (std::size_t i = 0; i < cfg.boundary.size(); ++i) {
      const double r = net.forward(cfg.boundary[i]) - cfg.boundary_data[i];
      total += cfg.alpha_b * cfg.boundary_weight(static_cast<int>(i)) *
               std::pow(std::abs(r), cfg.p);
    }
  }
  return total;
}

// oracle for the affine minimizer: exact 2x2 normal equations of the
// quadratic loss in (slope, intercept)
AffineMinimizer normal_equation_oracle(double T, double u0, double uT, double alpha) {
  // d/da: a + 2 alpha T (a T + c - uT) = 0
  // d/dc: 2 alpha (c - u0) + 2 alpha (a T + c - uT) = 0
  const double A11 = 1.0 + 2.0 * alpha * T * T, A12 = 2.0 * alpha * T;
  const double A21 = 2.0 * alpha * T, A22 = 4.0 * alpha;
  const double b1 = 2.0 * alpha * T * uT, b2 = 2.0 * alpha * (u0 + uT);
  const double det = A11 * A22 - A12 * A21;
  if (det == 0.0) return {0.0, (u0 + uT) / 2.0};  // alpha = 0
  return {(b1 * A22 - A12 * b2) / det, (A11 * b2 - A21 * b1) / det};
}

MlpNetwork affine_net(double slope, double intercept) {
  return MlpNetwork(Activation(ActivationKind::ReLU), {1, 1}, {{slope}}, {{intercept}});
}

}  // namespace

TEST_CASE("dr_loss: constant network has zero dirichlet energy") {
  DeepRitzConfig cfg = DeepRitzConfig::example_1d(1.0, 0.0, 0.0, 0.0, {0.2, 0.5, 0.8});
  const MlpNetwork c(Activation(ActivationKind::ReLU), {1, 1, 1}, {{0.0}, {0.0}},
                     {{1.0}, {4.2}});
  CHECK(dr_loss(c, LocalIntegrand::dirichlet_energy(), cfg) == 0.0);
}

TEST_CASE("dr_loss of the exact affine solution: interior half, boundary zero") {
  DeepRitzConfig cfg = DeepRitzConfig::example_1d(1.0, 0.0, 1.0, 3.0, {0.2, 0.5, 0.8});
  const MlpNetwork u = affine_net(1.0, 0.0);
  const double loss = dr_loss(u, LocalIntegrand::dirichlet_energy(), cfg);
  CHECK(loss == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("dr_loss agrees with direct summation") {
  Rng rng(55);
  DeepRitzConfig cfg = DeepRitzConfig::example_1d(1.0, 0.0, 1.0, 2.5, {0.2, 0.5, 0.8});
  const LocalIntegrand integ = LocalIntegrand::strictly_convex_poisson({1.0, -2.0, 0.5}, 0.7);
  for (int t = 0; t < 20; ++t) {
    std::vector<double> W1(4), B1(4), W2(4);
    for (auto& x : W1) x = rng.normal();
    for (auto& x : B1) x = rng.normal();
    for (auto& x : W2) x = rng.normal();
    const MlpNetwork net(Activation(ActivationKind::Tanh), {1, 4, 1}, {W1, W2},
                         {B1, {rng.normal()}});
    const double a = dr_loss(net, integ, cfg);
    const double b = direct_dr_loss(net, integ, cfg);
    CHECK(std::abs(a - b) <= 1e-12 * (1.0 + std::abs(b)));
  }
}

TEST_CASE("affine minimizer: closed form vs normal equations") {
  const AffineMinimizer am = affine_minimizer_1d(1.0, 0.0, 1.0, 1.0);
  CHECK(am.slope == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(am.intercept == doctest::Approx(0.25).epsilon(1e-15));
  Rng rng(56);
  for (int t = 0; t < 10; ++t) {
    const double T = rng.uniform(0.5, 2.0), u0 = rng.uniform(-1, 1), uT = rng.uniform(-1, 1);
    const double alpha = rng.uniform(0.1, 10.0);
    const AffineMinimizer got = affine_minimizer_1d(T, u0, uT, alpha);
    const AffineMinimizer want = normal_equation_oracle(T, u0, uT, alpha);
    CHECK(std::abs(got.slope - want.slope) <= 1e-10);
    CHECK(std::abs(got.intercept - want.intercept) <= 1e-10);
  }
}

TEST_CASE("affine minimizer limits") {
  const AffineMinimizer big = affine_minimizer_1d(1.0, 0.0, 1.0, 1e12);
  CHECK(std::abs(big.slope - 1.0) <= 1e-10);
  CHECK(std::abs(big.intercept - 0.0) <= 1e-10);
  const AffineMinimizer zero = affine_minimizer_1d(1.0, 0.0, 1.0, 0.0);
  CHECK(zero.slope == 0.0);
  CHECK(zero.intercept == 0.5);
}

TEST_CASE("affine minimizer satisfies first-order optimality of the discrete loss") {
  for (double alpha : {0.0, 0.5, 1.0, 7.0}) {
    const double T = 1.0, u0 = 0.0, uT = 1.0;
    const AffineMinimizer am = affine_minimizer_1d(T, u0, uT, alpha);
    const double ga = am.slope + 2.0 * alpha * T * (am.slope * T + am.intercept - uT);
    const double gc = 2.0 * alpha * ((am.intercept - u0) + (am.slope * T + am.intercept - uT));
    CHECK(std::hypot(ga, gc) <= 1e-10);
  }
}

TEST_CASE("one-neuron zero-loss family") {
  DeepRitzConfig cfg = DeepRitzConfig::example_1d(1.0, 0.0, 1.0, 1.0, {0.2, 0.5, 0.8});
  const LocalIntegrand integ = LocalIntegrand::dirichlet_energy();
  const MlpNetwork u = one_neuron_zero_loss(-0.9, 1.0, 0.0, 1.0, 0.8);
  CHECK(std::abs(dr_loss(u, integ, cfg)) <= 1e-14);

  // five members, all zero loss, pairwise distinct
  std::vector<MlpNetwork> members;
  for (double b : {-0.98, -0.95, -0.9, -0.85, -0.82}) {
    members.push_back(one_neuron_zero_loss(b, 1.0, 0.0, 1.0, 0.8));
    CHECK(std::abs(dr_loss(members.back(), integ, cfg)) <= 1e-14);
  }
  // evaluate right of every kink (max kink at 0.98), where the slopes differ
  for (std::size_t i = 0; i < members.size(); ++i)
    for (std::size_t j = i + 1; j < members.size(); ++j)
      CHECK(std::abs(members[i].forward(Point{0.99}) - members[j].forward(Point{0.99})) > 1e-12);

  CHECK_THROWS_AS(one_neuron_zero_loss(-0.5, 1.0, 0.0, 1.0, 0.8), std::invalid_argument);
}

TEST_CASE("non-coercive plateau sequence") {
  DeepRitzConfig cfg = DeepRitzConfig::example_1d(1.0, 0.0, 0.0, 1.0, {0.2, 0.5, 0.8});
  const LocalIntegrand integ = LocalIntegrand::poisson({1.0, 1.0, 1.0});

  const NonCoerciveStep k0 = non_coercive_sequence(0, integ, cfg);
  CHECK(k0.loss == 0.0);

  const NonCoerciveStep k10 = non_coercive_sequence(10, integ, cfg);
  const NonCoerciveStep k100 = non_coercive_sequence(100, integ, cfg);
  CHECK(k100.loss / k10.loss == doctest::Approx(10.0).epsilon(1e-12));
  CHECK(k10.loss <= -0.9 * k10.descent_rate * 10);

  // loss is affine in k with slope -sum_z w |zeta|
  const NonCoerciveStep k1 = non_coercive_sequence(1, integ, cfg);
  const NonCoerciveStep k2 = non_coercive_sequence(2, integ, cfg);
  const NonCoerciveStep k3 = non_coercive_sequence(3, integ, cfg);
  CHECK(k1.loss > k2.loss);
  CHECK(k2.loss > k3.loss);
  const double slope = k2.loss - k1.loss;
  CHECK(std::abs((k3.loss - k2.loss) - slope) <= 1e-12);
  CHECK(std::abs(slope - (-1.0)) <= 1e-12);  // sum w |zeta| = 1 here

  CHECK_THROWS_AS(non_coercive_sequence(1, LocalIntegrand::poisson({0.0, 0.0, 0.0}), cfg),
                  std::invalid_argument);
}

TEST_CASE("deep ritz nonuniqueness certificate: penalty and hard enforcement") {
  const std::vector<double> lambdas{-100, -10, -1, 1, 10, 100};
  const MlpNetwork base = one_neuron_zero_loss(-0.9, 1.0, 0.0, 1.0, 0.75);
  const MlpNetwork exact = affine_net(1.0, 0.0);
  const Box domain{{0.0}, {1.0}};

  for (auto enf : {Enforcement::Penalty, Enforcement::HardAtPoints}) {
    DeepRitzConfig cfg = DeepRitzConfig::example_1d(1.0, 0.0, 1.0, 1.0, {0.25, 0.75});
    cfg.enforcement = enf;
    const auto cert =
        certify_dr_nonuniqueness(cfg, LocalIntegrand::dirichlet_energy(), base,
                                 NullFamily::relu(), 2, {0.5}, lambdas, 1, exact, domain);
    CHECK(cert.passed);
    CHECK(cert.null_residual <= 1e-12);
    CHECK(std::abs(cert.base_loss) <= 1e-14);
    if (enf == Enforcement::HardAtPoints) {
      REQUIRE(cert.constraint_residuals.size() == lambdas.size());
      for (double r : cert.constraint_residuals) CHECK(r <= 1e-9);
    } else {
      CHECK(cert.lp_distances.size() == lambdas.size());
    }
  }
}

TEST_CASE("invariance holds for a random non-minimizing base") {
  Rng rng(57);
  std::vector<double> W1(3), B1(3), W2(3);
  for (auto& x : W1) x = rng.normal();
  for (auto& x : B1) x = rng.normal();
  for (auto& x : W2) x = rng.normal();
  const MlpNetwork base(Activation(ActivationKind::ReLU), {1, 3, 1}, {W1, W2},
                        {B1, {rng.normal()}});
  DeepRitzConfig cfg = DeepRitzConfig::example_1d(1.0, 0.0, 1.0, 1.0, {0.25, 0.75});
  const auto cert = certify_dr_nonuniqueness(cfg, LocalIntegrand::dirichlet_energy(), base,
                                             NullFamily::relu(), 2, {0.5},
                                             {-100, -10, -1, 1, 10, 100}, 1);
  CHECK(cert.passed_invariance);
  CHECK(cert.passed_null);
}

TEST_CASE("tanh family certificate meets the 1e-8 gate") {
  DeepRitzConfig cfg = DeepRitzConfig::example_1d(1.0, 0.0, 1.0, 1.0, {0.25, 0.75});
  // tanh zero-loss base: flat Hermite interpolant through the solution values
  const MlpNetwork base = smooth_hermite_interpolant(
      {{0.0}, {0.25}, {0.75}, {1.0}}, {0.0, 0.25, 0.75, 1.0}, 1,
      Activation(ActivationKind::Tanh), 2, 9);
  const auto cert = certify_dr_nonuniqueness(
      cfg, LocalIntegrand::dirichlet_energy(), base,
      NullFamily::smooth(Activation(ActivationKind::Tanh)), 2, {0.5},
      {-100, -10, -1, 1, 10, 100}, 1);
  CHECK(cert.null_residual <= 1e-8);
  CHECK(std::abs(cert.base_loss) <= 1e-12);
  CHECK(cert.passed);
}

TEST_CASE("collocation agreement: strictly convex integrand") {
  DeepRitzConfig cfg = DeepRitzConfig::example_1d(1.0, 0.0, 1.0, 1.0, {0.25, 0.5, 0.75});
  const auto rep = collocation_agreement_check(
      LocalIntegrand::strictly_convex_poisson({1.0, 1.0, 1.0}, 1.0), cfg, 5, 60000, 3);
  CHECK(rep.applicable);
  CHECK(rep.converged >= 1);
  // deviation over the runs within 1e-8 of the best found
  CHECK(rep.max_measurement_deviation <= 1e-3);
}

TEST_CASE("collocation agreement: dirichlet energy flagged, single trial trivial") {
  DeepRitzConfig cfg = DeepRitzConfig::example_1d(1.0, 0.0, 1.0, 1.0, {0.25, 0.5, 0.75});
  const auto rep =
      collocation_agreement_check(LocalIntegrand::dirichlet_energy(), cfg, 2, 5000, 3);
  CHECK_FALSE(rep.applicable);

  const auto solo = collocation_agreement_check(
      LocalIntegrand::strictly_convex_poisson({1.0, 1.0, 1.0}, 1.0), cfg, 1, 5000, 3);
  CHECK(solo.max_measurement_deviation == 0.0);
}

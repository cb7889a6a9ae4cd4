#include <doctest.h>

#include <cmath>

#include "nullforge/certificate.hpp"
#include "nullforge/measurement.hpp"
#include "nullforge/null_forge.hpp"
#include "nullforge/rng.hpp"

using namespace nullforge;

namespace {

MlpNetwork random_net(Activation act, const std::vector<int>& dims, Rng& rng, double scale = 1.0) {
  std::vector<std::vector<double>> W, B;
  for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
    std::vector<double> w(static_cast<std::size_t>(dims[i + 1]) * dims[i]), b(dims[i + 1]);
    for (auto& x : w) x = scale * rng.normal();
    for (auto& x : b) x = scale * rng.normal();
    W.push_back(std::move(w));
    B.push_back(std::move(b));
  }
  return MlpNetwork(act, dims, std::move(W), std::move(B));
}

MlpNetwork constant_net(double c) {
  return MlpNetwork(Activation(ActivationKind::Tanh), {1, 1, 1}, {{0.0}, {0.0}}, {{0.0}, {c}});
}

// ReLU constant with the hidden preactivation held at 1, away from the kink
MlpNetwork relu_constant(double c) {
  return MlpNetwork(Activation(ActivationKind::ReLU), {1, 1, 1}, {{0.0}, {0.0}}, {{1.0}, {c}});
}

}  // namespace

TEST_CASE("measure: constant and affine networks") {
  const MeasurementSpec spec3 =
      MeasurementSpec::values_only({{0.1}, {0.5}, {0.9}});
  const auto mv = measure(constant_net(2.5), spec3);
  REQUIRE(mv.size() == 3);
  for (double v : mv) CHECK(v == 2.5);

  // u(z) = 2z + 1: value and derivative probes at 0.5
  const MlpNetwork affine(Activation(ActivationKind::Identity), {1, 1}, {{2.0}}, {{1.0}});
  MeasurementSpec spec(1, {{Point{0.5}, ProbeKind::Value, {}},
                           {Point{0.5}, ProbeKind::Partial, MultiIndex{1}}});
  const auto m = measure(affine, spec);
  CHECK(m[0] == 2.0);
  CHECK(m[1] == 2.0);
}

TEST_CASE("deep ritz spec layout and dimension") {
  const MeasurementSpec spec = MeasurementSpec::deep_ritz({{0.75}, {0.25}}, {{1.0}, {0.0}});
  // |interior| (d+1) + |boundary|
  CHECK(spec.size() == 2 * 2 + 2);
  // interior sorted lexicographically, value probe before the derivative
  CHECK(spec.probes()[0].point == Point{0.25});
  CHECK(spec.probes()[0].kind == ProbeKind::Value);
  CHECK(spec.probes()[1].kind == ProbeKind::Partial);
  CHECK(spec.probes()[2].point == Point{0.75});
  // boundary probes last
  CHECK(spec.probes()[4].kind == ProbeKind::TraceValue);
  CHECK(spec.probes()[4].point == Point{0.0});
  CHECK(spec.probes()[5].point == Point{1.0});
}

TEST_CASE("derivative spec dimension is |nodes| (eta + 1)") {
  const MeasurementSpec spec = MeasurementSpec::derivative_probes(
      {{0.1}, {0.3}, {0.5}, {0.7}, {0.9}}, 2);
  CHECK(spec.size() == 5 * (2 + 1));
  CHECK(spec.max_order() == 2);
}

TEST_CASE("measurement is linear in the network") {
  Rng rng(31);
  const MeasurementSpec spec = MeasurementSpec::deep_ritz({{0.25}, {0.6}}, {{0.0}, {1.0}});
  for (int trial = 0; trial < 50; ++trial) {
    const MlpNetwork u = random_net(Activation(ActivationKind::Tanh), {1, 3, 1}, rng, 0.8);
    const MlpNetwork v = random_net(Activation(ActivationKind::Tanh), {1, 4, 1}, rng, 0.8);
    const double a = rng.uniform(-2, 2), b = rng.uniform(-2, 2);
    const auto mu = measure(u, spec), mv = measure(v, spec);
    const auto mc = measure(linear_combine({u, v}, {a, b}), spec);
    for (std::size_t i = 0; i < mc.size(); ++i)
      CHECK(std::abs(mc[i] - (a * mu[i] + b * mv[i])) <= 1e-10);
  }
}

TEST_CASE("loss_eval composes G with the measurement") {
  const MeasurementSpec spec = MeasurementSpec::values_only({{0.2}, {0.5}, {0.8}});
  FiniteMeasurementLoss sq{spec, [](std::span<const double> m) {
                             double s = 0.0;
                             for (double v : m) s += v * v;
                             return s;
                           }};
  CHECK(sq.eval(constant_net(0.0)) == 0.0);
  FiniteMeasurementLoss sum{spec, [](std::span<const double> m) {
                              double s = 0.0;
                              for (double v : m) s += v;
                              return s;
                            }};
  // constant 2 across three value probes
  CHECK(sum.eval(constant_net(2.0)) == 6.0);
}

TEST_CASE("verify_null rejects the zero function and witness-on-probe") {
  const MeasurementSpec spec = MeasurementSpec::deep_ritz({{0.25}, {0.75}}, {});
  const auto chk = verify_null(constant_net(0.0), spec, {0.5}, 1e-12);
  CHECK(chk.null_residual == 0.0);
  CHECK(chk.null_ok);
  CHECK_FALSE(chk.witness_ok);
  CHECK_FALSE(chk.passed);
  CHECK_THROWS_AS(verify_null(constant_net(0.0), spec, {0.25}, 1e-12), std::invalid_argument);
}

TEST_CASE("forged relu bump annihilates the measurements exactly") {
  const MeasurementSpec spec = MeasurementSpec::deep_ritz({{0.25}, {0.75}}, {});
  const MlpNetwork phi = null_direction(spec, {0.5}, NullFamily::relu(), 2);
  const auto chk = verify_null(phi, spec, {0.5}, 1e-12);
  CHECK(chk.null_residual == 0.0);
  CHECK(chk.witness_value == 1.0);
  CHECK(chk.passed);
}

TEST_CASE("forged smooth null direction meets the 1e-8 gate") {
  const MeasurementSpec spec =
      MeasurementSpec::derivative_probes({{0.2}, {0.5}, {0.8}}, 1);
  const MlpNetwork phi =
      null_direction(spec, {0.35}, NullFamily::smooth(Activation(ActivationKind::Tanh)), 2);
  const auto chk = verify_null(phi, spec, {0.35}, 1e-8);
  CHECK(chk.passed);
  CHECK(chk.null_residual <= 1e-8);
  CHECK(std::abs(phi.forward(Point{0.35}) - 1.0) <= 1e-12);
}

TEST_CASE("loss invariance sweep: trivial, passing and failing") {
  const MeasurementSpec spec = MeasurementSpec::deep_ritz({{0.25}, {0.75}}, {});
  FiniteMeasurementLoss loss{spec, [](std::span<const double> m) {
                               double s = 0.0;
                               for (double v : m) s += v * v;
                               return s;
                             }};
  Rng rng(32);
  const MlpNetwork base = random_net(Activation(ActivationKind::ReLU), {1, 3, 1}, rng);
  const MlpNetwork phi = null_direction(spec, {0.5}, NullFamily::relu(), 2);

  const auto trivial = loss_invariance_sweep(loss, base, phi, {0.5}, {0.0}, 1e-12);
  CHECK(trivial.passed_invariance);

  // degeneracy holds with a random non-minimizing base
  const auto cert =
      loss_invariance_sweep(loss, base, phi, {0.5}, {-100, -10, -1, 1, 10, 100}, 1e-12);
  CHECK(cert.passed);
  CHECK(cert.max_spread <= 1e-9 * (1.0 + std::abs(cert.base_loss)));

  // negative control: a bump sitting on a probe point does not annihilate M
  PlateauOptions small;
  small.radius = 0.0625;  // keep the other probe away from the bump's kinks
  const MlpNetwork bad = relu_plateau_interpolant({{0.25}}, {1.0}, 2, small);
  const auto fail =
      loss_invariance_sweep(loss, base, bad, {0.5}, {-100, -10, -1, 1, 10, 100}, 1e-12);
  CHECK_FALSE(fail.passed);
  CHECK(std::abs(fail.worst_lambda) == 100.0);
}

TEST_CASE("lp_distance basics and homogeneity") {
  const Box box{{0.0}, {1.0}};
  const MlpNetwork u = constant_net(1.25), v = constant_net(1.25);
  CHECK(lp_distance(u, v, 2.0, box, 128) == 0.0);
  CHECK(lp_distance(constant_net(2.0), constant_net(-1.0), 2.0, box, 128) ==
        doctest::Approx(3.0).epsilon(1e-12));

  const MeasurementSpec spec = MeasurementSpec::deep_ritz({{0.25}, {0.75}}, {});
  const MlpNetwork phi = null_direction(spec, {0.5}, NullFamily::relu(), 2);
  Rng rng(33);
  const MlpNetwork base = random_net(Activation(ActivationKind::ReLU), {1, 3, 1}, rng);
  double ratio0 = -1.0;
  for (double lam : {1.0, 10.0, 100.0}) {
    const double dist = lp_distance(linear_combine({base, phi}, {1.0, lam}), base, 2.0, box, 4096);
    const double ratio = dist / lam;
    if (ratio0 < 0)
      ratio0 = ratio;
    else
      CHECK(std::abs(ratio - ratio0) <= 1e-10 * ratio0);
  }
}

TEST_CASE("distance escape attaches lambda_star") {
  const MeasurementSpec spec = MeasurementSpec::deep_ritz({{0.25}, {0.75}}, {});
  FiniteMeasurementLoss loss{spec, [](std::span<const double> m) {
                               double s = 0.0;
                               for (double v : m) s += v * v;
                               return s;
                             }};
  const MlpNetwork phi = null_direction(spec, {0.5}, NullFamily::relu(), 2);
  const MlpNetwork base = relu_constant(0.0);
  auto cert = loss_invariance_sweep(loss, base, phi, {0.5}, {-100, -10, -1, 1, 10, 100}, 1e-12);
  attach_distance_escape(cert, relu_constant(0.0), 2.0, Box{{0.0}, {1.0}}, 2048);
  REQUIRE(cert.lp_distances.size() == 6);
  CHECK(cert.lambda_star.has_value());
  // nondecreasing in |lambda| from lambda_star on
  CHECK(*cert.lambda_star <= 1.0);
}

TEST_CASE("certificate serialization carries the sweep") {
  const MeasurementSpec spec = MeasurementSpec::deep_ritz({{0.25}, {0.75}}, {});
  FiniteMeasurementLoss loss{spec, [](std::span<const double> m) {
                               double s = 0.0;
                               for (double v : m) s += v;
                               return s;
                             }};
  const MlpNetwork phi = null_direction(spec, {0.5}, NullFamily::relu(), 2);
  const auto cert =
      loss_invariance_sweep(loss, relu_constant(1.0), phi, {0.5}, {-1, 1}, 1e-12);
  const auto j = certificate_to_json(cert);
  CHECK(j.at("passed").get<bool>());
  CHECK(j.at("lambda_samples").size() == 2);
  const std::string csv = certificate_sweep_csv(cert);
  CHECK(csv.rfind("lambda,loss,distance\n", 0) == 0);
}

#include <doctest.h>

#include <cmath>

#include "nullforge/measurement.hpp"
#include "nullforge/rng.hpp"
#include "nullforge/wpinn.hpp"

using namespace nullforge;

namespace {

MlpNetwork affine_net(double slope, double intercept) {
  return MlpNetwork(Activation(ActivationKind::Identity), {1, 1}, {{slope}}, {{intercept}});
}

MlpNetwork constant_net(double c) {
  return MlpNetwork(Activation(ActivationKind::Tanh), {1, 1, 1}, {{0.0}, {0.0}}, {{0.0}, {c}});
}

}  // namespace

TEST_CASE("test space: hats vanish at the endpoints and sum to one inside") {
  const TestSpace space = TestSpace::uniform(1.0, 4, 8);
  for (int i = 1; i <= space.n(); ++i) {
    CHECK(space.hat(i, 0.0) == 0.0);
    CHECK(space.hat(i, 1.0) == 0.0);
  }
  // partition of unity on the interior elements
  for (double z : {0.25, 0.33, 0.5, 0.61, 0.75}) {
    double s = 0.0;
    for (int i = 1; i <= space.n(); ++i) s += space.hat(i, z);
    CHECK(s == doctest::Approx(1.0).epsilon(1e-14));
  }
}

TEST_CASE("assemble_T: shape and structural zero columns") {
  const TestSpace space = TestSpace::uniform(1.0, 2, 8);
  const auto nets = draw_trial_nets(3, 4, 21);
  const TMatrix T = assemble_T(nets, space);
  CHECK(T.rows == 2);
  CHECK(T.cols == 3);

  // constant network: u' = 0, the whole column vanishes
  const TMatrix Tc = assemble_T({constant_net(2.0)}, space);
  for (int i = 0; i < Tc.rows; ++i) CHECK(Tc.at(i, 0) == 0.0);

  // u(z) = z against interior hats: integral of hat' over the support is 0
  const TMatrix Tl = assemble_T({affine_net(1.0, 0.0)}, space);
  for (int i = 0; i < Tl.rows; ++i) CHECK(std::abs(Tl.at(i, 0)) <= 1e-12);
}

TEST_CASE("assembly is bilinear in the trial function") {
  const TestSpace space = TestSpace::uniform(1.0, 3, 8);
  const auto nets = draw_trial_nets(2, 5, 22);
  const double a = 1.3, b = -0.7;
  const MlpNetwork combo = linear_combine(nets, {a, b});
  const TMatrix T = assemble_T(nets, space);
  const TMatrix Tc = assemble_T({combo}, space);
  for (int i = 0; i < space.n(); ++i)
    CHECK(std::abs(Tc.at(i, 0) - (a * T.at(i, 0) + b * T.at(i, 1))) <= 1e-12);
}

TEST_CASE("homogeneous kernel: residual within 1e-10 of the matrix scale") {
  for (int n : {2, 4, 8}) {
    const TestSpace space = TestSpace::uniform(1.0, n, 8);
    const auto nets = draw_trial_nets(n + 1, 8, 1000 + n);
    const KernelResult ker = homogeneous_kernel(nets, space, 5);
    CHECK(ker.residual <= 1e-10 * std::max(ker.smax, 1e-30));
    // rank bound: an n x (n+1) matrix always has a numerical null vector
    CHECK(ker.smin <= 1e-10 * std::max(ker.smax, 1e-30));
    double norm = 0.0;
    for (double c : ker.coeffs) norm += c * c;
    CHECK(std::sqrt(norm) == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("kernel containing a weakly harmonic member") {
  const TestSpace space = TestSpace::uniform(1.0, 2, 8);
  // a constant is weakly harmonic against interior hats
  std::vector<MlpNetwork> nets = draw_trial_nets(2, 4, 31);
  nets.push_back(constant_net(1.0));
  const KernelResult ker = homogeneous_kernel(nets, space, 6);
  CHECK(ker.residual <= 1e-12 * std::max(1.0, ker.smax));
}

TEST_CASE("empty test space: vacuous constraints") {
  const TestSpace space = TestSpace::uniform(1.0, 0, 4);
  const auto nets = draw_trial_nets(1, 4, 32);
  const KernelResult ker = homogeneous_kernel(nets, space, 7);
  CHECK(ker.residual == 0.0);
  CHECK(std::abs(ker.coeffs[0]) == doctest::Approx(1.0));
}

TEST_CASE("kernel nontriviality with resampling") {
  const TestSpace space = TestSpace::uniform(1.0, 4, 8);
  const Box box{{0.0}, {1.0}};
  bool ok = false;
  for (int attempt = 0; attempt < 3 && !ok; ++attempt) {
    const auto nets = draw_trial_nets(5, 8, 900 + attempt);
    const KernelResult ker = homogeneous_kernel(nets, space, 11 + attempt);
    ok = lp_norm(ker.phi, 2.0, box, 4096) >= 1e-4;
  }
  CHECK(ok);
}

TEST_CASE("weak_residual: exact solution, zero function, closed-form hat masses") {
  const TestSpace space = TestSpace::uniform(1.0, 4, 8);
  // u(z) = z solves -u'' = 0 weakly against interior hats
  const auto r_exact = weak_residual(net_trial(affine_net(1.0, 0.0)), space,
                                     [](double) { return 0.0; });
  for (double r : r_exact) CHECK(std::abs(r) <= 1e-12);

  // u = 0, f = 1: entry i = -(element mass of the hat) = -h on a uniform mesh
  const auto r_mass = weak_residual(net_trial(constant_net(0.0)), space,
                                    [](double) { return 1.0; });
  const double h = 1.0 / 5.0;
  for (double r : r_mass) CHECK(r == doctest::Approx(-h).epsilon(1e-14));

  // constant trial with zero source: zero residual vector
  const auto r_zero = weak_residual(net_trial(constant_net(3.0)), space,
                                    [](double) { return 0.0; });
  for (double r : r_zero) CHECK(r == 0.0);
}

TEST_CASE("solution family: residual bound and L2 escape") {
  const TestSpace space = TestSpace::uniform(1.0, 4, 8);
  const auto f = [](double) { return 0.0; };
  // exact weak solution of the two-point problem with built-in boundary values
  const WeakTrial u_star = net_trial(affine_net(1.0, 0.0));
  const auto nets = draw_trial_nets(5, 8, 71);
  const KernelResult ker = homogeneous_kernel(nets, space, 13);

  const std::vector<double> lambdas{-1000, -100, -10, -1, 0, 1, 10, 100, 1000};
  const auto cert =
      solution_family(u_star, net_trial(ker.phi), ker.residual, lambdas, space, f);
  CHECK(cert.passed);
  CHECK(cert.u_star_residual <= 1e-12);
  for (std::size_t i = 0; i < lambdas.size(); ++i)
    CHECK(cert.measured[i] <= 1e-8 + std::abs(lambdas[i]) * 1e-10);

  // escape: || (u* + 100 phi) - u* ||_2 = 100 ||phi||_2
  const Box box{{0.0}, {1.0}};
  const double phi_l2 = lp_norm(ker.phi, 2.0, box, 4096);
  const double dist = lp_norm(linear_combine({ker.phi}, {100.0}), 2.0, box, 4096);
  CHECK(dist >= 99.0 * phi_l2 * (1.0 - 1e-6));
}

TEST_CASE("wpinn_fit: zero source reaches tiny residual, zero budget returns init") {
  const TestSpace space = TestSpace::uniform(1.0, 4, 8);
  const auto fit = wpinn_fit(space, [](double) { return 0.0; }, 0.0, 1.0, 8, 4000, 0.05, 3);
  CHECK(fit.residual_norm <= 1e-8);

  const auto frozen = wpinn_fit(space, [](double) { return 1.0; }, 0.0, 1.0, 8, 0, 0.05, 3);
  CHECK(frozen.residual_norm > 0.0);  // initialization reported as-is
}

TEST_CASE("wpinn_fit: unit source within budget") {
  const TestSpace space = TestSpace::uniform(1.0, 4, 8);
  const auto fit = wpinn_fit(space, [](double) { return 1.0; }, 0.0, 1.0, 8, 30000, 0.02, 3);
  CHECK(fit.residual_norm <= 1e-6);
  CHECK_FALSE(fit.warning);
}

TEST_CASE("quadrature sensitivity: mesh-aligned relu kinks are exact at every order") {
  const int n = 3;
  const TestSpace space = TestSpace::uniform(1.0, n, 8);
  std::vector<MlpNetwork> mesh_nets;
  for (int j = 0; j <= n; ++j)
    mesh_nets.emplace_back(Activation(ActivationKind::ReLU), std::vector<int>{1, 1, 1},
                           std::vector<std::vector<double>>{{1.0}, {1.0}},
                           std::vector<std::vector<double>>{{-space.mesh[j]}, {0.0}});
  const KernelResult ker = homogeneous_kernel(mesh_nets, space, 17);
  const auto rep = quadrature_sensitivity(net_trial(mesh_nets[1]), net_trial(ker.phi), space,
                                          {1, 2, 4, 8, 16});
  for (std::size_t i = 0; i < rep.q_list.size(); ++i) {
    CHECK(rep.column_max_diff_to_ref[i] <= 1e-14);
    CHECK(rep.kernel_residuals[i] <= 1e-8);
    CHECK(rep.below_floor[i] == (rep.q_list[i] < 4));
  }
}

TEST_CASE("quadrature sensitivity: smooth integrand differences shrink with q") {
  const TestSpace space = TestSpace::uniform(1.0, 3, 8);
  const auto nets = draw_trial_nets(4, 6, 41);
  const KernelResult ker = homogeneous_kernel(nets, space, 19);
  const auto rep =
      quadrature_sensitivity(net_trial(nets[0]), net_trial(ker.phi), space, {2, 4, 8, 16});
  CHECK(rep.column_max_diff_to_ref[0] >= rep.column_max_diff_to_ref[1]);
  CHECK(rep.column_max_diff_to_ref[1] >= rep.column_max_diff_to_ref[2]);
  // the forged kernel keeps a small residual for q >= 4
  for (std::size_t i = 0; i < rep.q_list.size(); ++i)
    if (rep.q_list[i] >= 4) CHECK(rep.kernel_residuals[i] <= 1e-8);
}

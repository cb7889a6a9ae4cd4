#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "nullforge/network.hpp"

namespace nullforge {

// 1D P1 test space on [0, T]: n interior hat functions on a partition with
// per-element Gauss-Legendre quadrature.
struct TestSpace {
  std::vector<double> mesh;  // n + 2 points including the endpoints
  int q = 8;

  static TestSpace uniform(double T, int n, int q = 8);

  int n() const { return static_cast<int>(mesh.size()) - 2; }
  double hat(int i, double z) const;        // i in 1..n
  double hat_deriv(int i, double z) const;  // piecewise constant
};

// Trial function interface for the weak form: value and first derivative.
struct WeakTrial {
  std::function<double(double)> value;
  std::function<double(double)> deriv;
};

WeakTrial net_trial(const MlpNetwork& net, double kink_tol = 1e-9);
// boundary-conforming map u(z) = u0 + (uT - u0) z / T + z (T - z) net(z)
WeakTrial mapped_trial(const MlpNetwork& net, double u0, double uT, double T,
                       double kink_tol = 1e-9);
WeakTrial combo_trial(const WeakTrial& u, double a, const WeakTrial& v, double b);

// a(u, phi_i) = int u' phi_i' for the Poisson bilinear form, element-wise
// Gauss quadrature at the space's order (or an override q).
std::vector<double> assemble_column(const WeakTrial& u, const TestSpace& space, int q_override = 0);

// n x k matrix with column j = (a(net_j, phi_1), ..., a(net_j, phi_n)),
// flattened row-major.
struct TMatrix {
  int rows = 0, cols = 0;
  std::vector<double> a;
  double& at(int r, int c) { return a[static_cast<std::size_t>(r) * cols + c]; }
  double at(int r, int c) const { return a[static_cast<std::size_t>(r) * cols + c]; }
};
TMatrix assemble_T(const std::vector<MlpNetwork>& nets, const TestSpace& space,
                   double kink_tol = 1e-9);

// entry i = a(u, phi_i) - int f phi_i
std::vector<double> weak_residual(const WeakTrial& u, const TestSpace& space,
                                  const std::function<double(double)>& f, int q_override = 0);

struct KernelResult {
  std::vector<double> coeffs;  // unit-norm right singular vector, smallest sigma
  MlpNetwork phi;
  double residual = 0.0;       // max_i |a(phi, phi_i)| on the combined network
  double smin = 0.0, smax = 0.0;
  double gram_smin = 0.0;      // independence check statistic
};

// Null combination of n+1 trial networks against n test functions: the
// pigeonhole of the finite-dimensional test space realized in floating point.
// Errors when the nets fail the value-Gram independence check.
KernelResult homogeneous_kernel(const std::vector<MlpNetwork>& nets, const TestSpace& space,
                                std::uint64_t gram_seed = 1, double kink_tol = 1e-9);

// seeded depth-2 tanh trial nets for kernel extraction
std::vector<MlpNetwork> draw_trial_nets(int count, int width, std::uint64_t seed);

struct FamilyCertificate {
  std::vector<double> lambdas;
  std::vector<double> measured;   // max |weak_residual(u* + lambda phi)|
  std::vector<double> bound;      // tol_star + |lambda| * kernel_residual
  double u_star_residual = 0.0;
  double kernel_residual = 0.0;
  bool passed = false;
};

// residual bound along the affine solution family u* + lambda phi
FamilyCertificate solution_family(const WeakTrial& u_star, const WeakTrial& phi,
                                  double kernel_residual, const std::vector<double>& lambdas,
                                  const TestSpace& space,
                                  const std::function<double(double)>& f);

struct WpinnFitResult {
  MlpNetwork net;
  double u0 = 0.0, uT = 0.0, T = 1.0;
  bool boundary_map = true;
  double residual_norm = 0.0;  // max |weak residual entry|
  bool warning = false;        // budget exhausted above 1e-6
  WeakTrial trial() const;
};

// Plain gradient descent on the squared weak residual of a depth-2 tanh net
// under the boundary-conforming trial map. No optimality claim.
WpinnFitResult wpinn_fit(const TestSpace& space, const std::function<double(double)>& f,
                         double u0, double uT, int width, int budget, double step,
                         std::uint64_t seed);

struct QuadratureReport {
  std::vector<int> q_list;
  std::vector<std::vector<double>> columns;      // a(u, phi_i) per q
  std::vector<double> column_max_diff_to_ref;    // vs the largest q
  std::vector<double> kernel_residuals;          // residual of a fixed phi per q
  std::vector<bool> below_floor;                 // q < 4 flagged
};

// a(u, phi_i) across quadrature orders plus the kernel residual of a fixed
// null combination: quadrature refinement does not remove the kernel.
QuadratureReport quadrature_sensitivity(const WeakTrial& u, const WeakTrial& phi,
                                        const TestSpace& space, const std::vector<int>& q_list);

}  // namespace nullforge

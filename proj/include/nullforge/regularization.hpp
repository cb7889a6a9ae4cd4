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

// Regular grid over a box; nodes include the extent endpoints. Node order is
// lexicographic with the last axis fastest.
struct GridSpec {
  std::vector<double> mins, maxs;
  std::vector<int> counts;

  int dim() const { return static_cast<int>(counts.size()); }
  int num_nodes() const;
  double spacing(int axis) const;
  Point node(int flat) const;
  std::vector<Point> nodes() const;
  Box box() const { return Box{mins, maxs}; }

  static GridSpec line(double a, double b, int n) { return GridSpec{{a}, {b}, {n}}; }
  static GridSpec square(double a, double b, int n) { return GridSpec{{a, a}, {b, b}, {n, n}}; }
};

// Pointwise derivative tuple (D^beta u)_{1<=|beta|<=m} in graded-lex order.
struct DerivTuple {
  int d = 1, m = 1;
  std::vector<double> v;  // length eta

  double first(int axis) const;            // gradient component
  double second(int ax1, int ax2) const;   // hessian component (requires m >= 2)
  double grad_norm2() const;               // |grad|_2
  double hessian_frobenius() const;        // |hess|_2
  double laplacian() const;
};

// One catalog entry: a Borel evaluator R with R(0) = 0 acting on the
// derivative tuple, of order 1 or 2.
struct RegularizerSpec {
  enum class Kind {
    Tikhonov,        // |grad|_2^p, p in N
    TV,              // |grad|_nu, nu in {1, 2}
    Hessian,         // |hess|_2
    MixedTvHessian,  // rho(x) |hess|_2 + (1 - rho(x)) |grad|_2
    TvLaplacian,     // rho1 |hess|_2 + rho2 w(|grad|_eps) (lap)^2
    Elastica,        // (rho1 + rho2 curvature^2) (|grad|_eps - eps)
    NonconvexP       // |grad|_2^p, 0 < p < 1
  };
  Kind kind = Kind::TV;
  int p = 2;
  int nu = 1;
  double rho1 = 1.0, rho2 = 1.0;
  double kappa = 1.0;                 // edge weight scale, w(t) = 1/(1 + (t/kappa)^2)
  std::vector<double> rho_pointwise;  // MixedTvHessian: per-node weight in [0, 1]
  double p_frac = 0.5;
  double eps_smooth = 1e-3;

  int order() const;
  bool convex() const;
  double eval(const DerivTuple& t, int node) const;
  std::vector<double> subgradient(const DerivTuple& t, int node) const;  // d/dv (convex kinds)
  std::string name() const;

  static RegularizerSpec tikhonov(int p) { return {Kind::Tikhonov, p}; }
  static RegularizerSpec tv(int nu) {
    RegularizerSpec r{Kind::TV};
    r.nu = nu;
    return r;
  }
  static RegularizerSpec hessian() { return {Kind::Hessian}; }
  static RegularizerSpec mixed_tv_hessian(std::vector<double> rho);
  static RegularizerSpec tv_laplacian(double rho1, double rho2, double eps);
  static RegularizerSpec elastica(double rho1, double rho2, double eps);
  static RegularizerSpec nonconvex_p(double p);
};

struct FidelityConfig {
  double alpha1 = 0.0, alpha2 = 1.0;
  std::vector<double> data;        // g^h per grid node
  std::vector<double> w_data;      // empty: 1/|grid|
  std::vector<double> w_reg;       // empty: 1/|grid|
  double kink_tol = 1e-9;

  double wd(int i, int n) const { return w_data.empty() ? 1.0 / n : w_data.at(i); }
  double wr(int i, int n) const { return w_reg.empty() ? 1.0 / n : w_reg.at(i); }
};

MeasurementSpec regularization_spec(const GridSpec& grid, int m);

// Quadrature loss with pointwise derivatives:
// sum_tau alpha_tau sum_x wD |u - g|^tau + sum_x wR R((D^beta u)).
FiniteMeasurementLoss make_reg_pointwise_loss(const RegularizerSpec& reg,
                                              const FidelityConfig& fid, const GridSpec& grid);
double reg_pointwise_loss(const MlpNetwork& net, const RegularizerSpec& reg,
                          const FidelityConfig& fid, const GridSpec& grid);

// Interpolant with u(x) = g(x) and vanishing derivatives up to order m at
// every grid node, so the quadrature loss of any catalog kind is zero.
MlpNetwork zero_loss_interpolant(const GridSpec& grid, const std::vector<double>& data, int m,
                                 const NullFamily& family, int depth, std::uint64_t seed = 1);

std::vector<DegeneracyCertificate> certify_reg_nonuniqueness(
    const GridSpec& grid, const std::vector<double>& data, const RegularizerSpec& reg,
    const FidelityConfig& fid, const NullFamily& family, int depth,
    const std::vector<Point>& z0_list, const std::vector<double>& lambdas,
    std::uint64_t seed = 1);

// Finite differences on grid fields: forward first differences, centered
// second differences, Neumann-style value replication at the boundary.
std::vector<double> fd_operator(const std::vector<double>& field, const MultiIndex& beta,
                                const GridSpec& grid);

// Finite-difference analogue of the quadrature loss; needs only grid values.
double reg_fd_loss_field(const std::vector<double>& field, const RegularizerSpec& reg,
                         const FidelityConfig& fid, const GridSpec& grid);
double reg_fd_loss(const MlpNetwork& net, const RegularizerSpec& reg, const FidelityConfig& fid,
                   const GridSpec& grid);

struct FdSolveResult {
  std::vector<double> field;
  double objective = 0.0;
  int iterations = 0;
};

// Minimizer of the classical finite-difference problem for convex instances
// with alpha2 > 0: proximal-subgradient descent with diminishing steps,
// polished by cyclic coordinate minimization until the objective stagnates.
FdSolveResult fd_reference_solve(const RegularizerSpec& reg, const FidelityConfig& fid,
                                 const GridSpec& grid, double tolerance = 1e-10);

struct GridSearchResult {
  std::vector<double> field;
  double objective = 0.0;
};

// Independent dense grid-search oracle for tiny instances (<= 5 nodes).
// For 3 nodes the scan is a full cube at the given resolution; larger
// instances refine in stages to the same effective resolution.
GridSearchResult fd_grid_search_oracle(const RegularizerSpec& reg, const FidelityConfig& fid,
                                       const GridSpec& grid, double resolution = 1e-3);

struct StencilReport {
  MlpNetwork interpolant;
  double max_node_mismatch = 0.0;   // |net(x) - u^h(x)| over grid nodes
  double fd_loss_field = 0.0;
  double fd_loss_net = 0.0;
  double loss_diff = 0.0;
  std::vector<DegeneracyCertificate> certificates;       // FD-loss invariance per witness
  double max_grid_value_shift = 0.0;                     // over all lambda and nodes
  std::vector<double> witness_shifts;                    // |(base+lambda phi)(z0) - base(z0)|
  bool passed = false;
};

// Interpolates the FD solution, matches its FD loss, then certifies that
// value-probe null perturbations change neither the FD loss nor any grid
// value while moving the off-grid witness by |lambda|.
StencilReport stencil_agreement(const std::vector<double>& fd_solution, const GridSpec& grid,
                                const RegularizerSpec& reg, const FidelityConfig& fid,
                                const std::vector<Point>& z0_list,
                                const std::vector<double>& lambdas, const NullFamily& family,
                                int depth, std::uint64_t seed = 1,
                                const std::optional<MlpNetwork>& minimizer_net = {});

DegeneracyCertificate certify_fd_nonuniqueness(const GridSpec& grid, const RegularizerSpec& reg,
                                               const FidelityConfig& fid, const NullFamily& family,
                                               int depth, const Point& z0,
                                               const std::vector<double>& lambdas,
                                               std::uint64_t seed = 1);

}  // namespace nullforge

#include "nullforge/wpinn.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "nullforge/gauss.hpp"
#include "nullforge/jet.hpp"
#include "nullforge/rng.hpp"

namespace nullforge {

TestSpace TestSpace::uniform(double T, int n, int q) {
  if (n < 0) throw std::invalid_argument("TestSpace: n must be >= 0");
  if (!(T > 0.0)) throw std::invalid_argument("TestSpace: T must be positive");
  TestSpace s;
  s.q = q;
  const int pts = n + 2;
  s.mesh.resize(pts);
  for (int i = 0; i < pts; ++i) s.mesh[i] = T * static_cast<double>(i) / (pts - 1);
  return s;
}

double TestSpace::hat(int i, double z) const {
  const double xl = mesh[i - 1], xm = mesh[i], xr = mesh[i + 1];
  if (z <= xl || z >= xr) return 0.0;
  if (z <= xm) return (z - xl) / (xm - xl);
  return (xr - z) / (xr - xm);
}

double TestSpace::hat_deriv(int i, double z) const {
  const double xl = mesh[i - 1], xm = mesh[i], xr = mesh[i + 1];
  if (z <= xl || z >= xr) return 0.0;
  if (z <= xm) return 1.0 / (xm - xl);
  return -1.0 / (xr - xm);
}

WeakTrial net_trial(const MlpNetwork& net, double kink_tol) {
  if (net.input_dim() != 1)
    throw std::invalid_argument("net_trial: 1D networks only");
  auto value = [net](double z) { return net.forward(z); };
  auto deriv = [net, kink_tol](double z) {
    const auto jet = jet_forward(net, std::span<const double>(&z, 1), 1, kink_tol);
    return jet.entries[1];
  };
  return WeakTrial{value, deriv};
}

WeakTrial mapped_trial(const MlpNetwork& net, double u0, double uT, double T, double kink_tol) {
  if (net.input_dim() != 1)
    throw std::invalid_argument("mapped_trial: 1D networks only");
  auto value = [net, u0, uT, T](double z) {
    return u0 + (uT - u0) * z / T + z * (T - z) * net.forward(z);
  };
  auto deriv = [net, u0, uT, T, kink_tol](double z) {
    const auto jet = jet_forward(net, std::span<const double>(&z, 1), 1, kink_tol);
    return (uT - u0) / T + (T - 2.0 * z) * jet.entries[0] + z * (T - z) * jet.entries[1];
  };
  return WeakTrial{value, deriv};
}

WeakTrial combo_trial(const WeakTrial& u, double a, const WeakTrial& v, double b) {
  auto uv = u.value, vv = v.value;
  auto ud = u.deriv, vd = v.deriv;
  return WeakTrial{[uv, vv, a, b](double z) { return a * uv(z) + b * vv(z); },
                   [ud, vd, a, b](double z) { return a * ud(z) + b * vd(z); }};
}

std::vector<double> assemble_column(const WeakTrial& u, const TestSpace& space, int q_override) {
  const int n = space.n();
  std::vector<double> col(n, 0.0);
  const GaussRule rule = gauss_legendre(q_override > 0 ? q_override : space.q);
  const int elems = static_cast<int>(space.mesh.size()) - 1;
  for (int e = 0; e < elems; ++e) {
    const double a = space.mesh[e], b = space.mesh[e + 1];
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
      const double z = mid + half * rule.nodes[k];
      const double w = half * rule.weights[k];
      const double uz = u.deriv(z);
      // hats with support on this element: indices e and e+1 (1-based interior)
      for (int i = std::max(1, e); i <= std::min(n, e + 1); ++i)
        col[i - 1] += w * uz * space.hat_deriv(i, z);
    }
  }
  return col;
}

TMatrix assemble_T(const std::vector<MlpNetwork>& nets, const TestSpace& space, double kink_tol) {
  TMatrix T;
  T.rows = space.n();
  T.cols = static_cast<int>(nets.size());
  T.a.assign(static_cast<std::size_t>(T.rows) * T.cols, 0.0);
  for (int j = 0; j < T.cols; ++j) {
    const auto col = assemble_column(net_trial(nets[j], kink_tol), space);
    for (int i = 0; i < T.rows; ++i) T.at(i, j) = col[i];
  }
  return T;
}

std::vector<double> weak_residual(const WeakTrial& u, const TestSpace& space,
                                  const std::function<double(double)>& f, int q_override) {
  const int n = space.n();
  std::vector<double> res = assemble_column(u, space, q_override);
  const GaussRule rule = gauss_legendre(q_override > 0 ? q_override : space.q);
  const int elems = static_cast<int>(space.mesh.size()) - 1;
  for (int e = 0; e < elems; ++e) {
    const double a = space.mesh[e], b = space.mesh[e + 1];
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
      const double z = mid + half * rule.nodes[k];
      const double w = half * rule.weights[k];
      const double fz = f(z);
      for (int i = std::max(1, e); i <= std::min(n, e + 1); ++i)
        res[i - 1] -= w * fz * space.hat(i, z);
    }
  }
  return res;
}

std::vector<MlpNetwork> draw_trial_nets(int count, int width, std::uint64_t seed) {
  std::vector<MlpNetwork> nets;
  for (int j = 0; j < count; ++j) {
    Rng rng(seed + static_cast<std::uint64_t>(j) * 6151);
    std::vector<double> W1(width), B1(width), W2(width);
    for (int i = 0; i < width; ++i) {
      W1[i] = rng.normal();
      B1[i] = rng.normal();
      W2[i] = rng.normal();
    }
    nets.emplace_back(Activation(ActivationKind::Tanh), std::vector<int>{1, width, 1},
                      std::vector<std::vector<double>>{W1, W2},
                      std::vector<std::vector<double>>{B1, {rng.normal()}});
  }
  return nets;
}

KernelResult homogeneous_kernel(const std::vector<MlpNetwork>& nets, const TestSpace& space,
                                std::uint64_t gram_seed, double kink_tol) {
  const int k = static_cast<int>(nets.size());
  if (k != space.n() + 1)
    throw std::invalid_argument("homogeneous_kernel: need exactly n + 1 trial networks");

  // linear independence as functions: value Gram on 4(n+1) seeded points
  const double T = space.mesh.back();
  Rng rng(gram_seed);
  const int rows = 4 * k;
  Eigen::MatrixXd A(rows, k);
  for (int r = 0; r < rows; ++r) {
    const double z = rng.uniform(0.0, T);
    for (int j = 0; j < k; ++j) A(r, j) = nets[j].forward(z);
  }
  for (int j = 0; j < k; ++j) {
    const double norm = A.col(j).norm();
    if (norm > 0.0) A.col(j) /= norm;
  }
  double gram_smin = 0.0;
  {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(A);
    gram_smin = svd.singularValues()(k - 1);
    if (gram_smin <= 1e-8)
      throw std::runtime_error("homogeneous_kernel: trial nets fail the independence check");
  }

  const TMatrix T_mat = assemble_T(nets, space, kink_tol);
  Eigen::MatrixXd M(T_mat.rows, T_mat.cols);
  for (int i = 0; i < T_mat.rows; ++i)
    for (int j = 0; j < T_mat.cols; ++j) M(i, j) = T_mat.at(i, j);

  Eigen::VectorXd c;
  double smax = 0.0;
  if (T_mat.rows == 0) {
    // empty test space: any single direction is in the kernel
    c = Eigen::VectorXd::Zero(k);
    c(0) = 1.0;
  } else {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(M, Eigen::ComputeFullV);
    c = svd.matrixV().col(k - 1);
    smax = svd.singularValues()(0);
  }
  c /= c.norm();
  // with k = n + 1 columns the map has a structural null direction; the
  // realized smallest singular value is ||T c|| of the chosen unit vector
  const double smin = T_mat.rows == 0 ? 0.0 : (M * c).norm();
  std::vector<double> coeffs(c.data(), c.data() + k);
  KernelResult out{coeffs, linear_combine(nets, coeffs), 0.0, smin, smax, gram_smin};

  const auto col = assemble_column(net_trial(out.phi, kink_tol), space);
  for (double v : col) out.residual = std::max(out.residual, std::abs(v));
  return out;
}

FamilyCertificate solution_family(const WeakTrial& u_star, const WeakTrial& phi,
                                  double kernel_residual, const std::vector<double>& lambdas,
                                  const TestSpace& space,
                                  const std::function<double(double)>& f) {
  FamilyCertificate cert;
  cert.lambdas = lambdas;
  cert.kernel_residual = kernel_residual;
  for (double r : weak_residual(u_star, space, f))
    cert.u_star_residual = std::max(cert.u_star_residual, std::abs(r));
  bool ok = true;
  for (double lam : lambdas) {
    const WeakTrial shifted = combo_trial(u_star, 1.0, phi, lam);
    double res = 0.0;
    for (double r : weak_residual(shifted, space, f)) res = std::max(res, std::abs(r));
    const double bound = cert.u_star_residual + std::abs(lam) * kernel_residual + 1e-12;
    cert.measured.push_back(res);
    cert.bound.push_back(bound);
    ok = ok && res <= bound * (1.0 + 1e-6) + 1e-12;
  }
  cert.passed = ok;
  return cert;
}

WeakTrial WpinnFitResult::trial() const {
  if (boundary_map) return mapped_trial(net, u0, uT, T);
  return net_trial(net);
}

WpinnFitResult wpinn_fit(const TestSpace& space, const std::function<double(double)>& f,
                         double u0, double uT, int width, int budget, double step,
                         std::uint64_t seed) {
  const double T = space.mesh.back();
  const int n = space.n();
  const Activation act(ActivationKind::Tanh);

  // params: [c0, c_j, w_j, b_j]
  const int P = 1 + 3 * width;
  Rng rng(seed);
  std::vector<double> th(P);
  for (auto& x : th) x = 0.5 * rng.normal();

  // residual entries and their parameter gradients share one quadrature sweep
  const GaussRule rule = gauss_legendre(space.q);
  auto eval_residual = [&](const std::vector<double>& theta, std::vector<double>& res,
                           std::vector<std::vector<double>>* dres) {
    res.assign(n, 0.0);
    if (dres) dres->assign(n, std::vector<double>(P, 0.0));
    const int elems = static_cast<int>(space.mesh.size()) - 1;
    std::vector<double> dnet(P), dnetp(P);
    for (int e = 0; e < elems; ++e) {
      const double a = space.mesh[e], b = space.mesh[e + 1];
      const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
      for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
        const double z = mid + half * rule.nodes[k];
        const double w = half * rule.weights[k];
        // depth-2 net value/derivative and parameter gradients
        double net = theta[0], netp = 0.0;
        dnet.assign(P, 0.0);
        dnetp.assign(P, 0.0);
        dnet[0] = 1.0;
        for (int j = 0; j < width; ++j) {
          const double cj = theta[1 + j], wj = theta[1 + width + j], bj = theta[1 + 2 * width + j];
          const auto s = act.derivatives(wj * z + bj, 2);
          net += cj * s[0];
          netp += cj * wj * s[1];
          dnet[1 + j] = s[0];
          dnet[1 + width + j] = cj * s[1] * z;
          dnet[1 + 2 * width + j] = cj * s[1];
          dnetp[1 + j] = wj * s[1];
          dnetp[1 + width + j] = cj * (s[1] + wj * z * s[2]);
          dnetp[1 + 2 * width + j] = cj * wj * s[2];
        }
        // u' under the boundary map
        const double up = (uT - u0) / T + (T - 2.0 * z) * net + z * (T - z) * netp;
        const double fz = f(z);
        for (int i = std::max(1, e); i <= std::min(n, e + 1); ++i) {
          const double hd = space.hat_deriv(i, z);
          res[i - 1] += w * (up * hd - fz * space.hat(i, z));
          if (dres)
            for (int p = 0; p < P; ++p)
              (*dres)[i - 1][p] += w * hd * ((T - 2.0 * z) * dnet[p] + z * (T - z) * dnetp[p]);
        }
      }
    }
  };

  std::vector<double> res;
  std::vector<std::vector<double>> dres;
  auto objective = [&](const std::vector<double>& theta, std::vector<double>* grad) {
    eval_residual(theta, res, grad ? &dres : nullptr);
    double obj = 0.0;
    for (double r : res) obj += r * r;
    if (grad) {
      grad->assign(P, 0.0);
      for (int i = 0; i < n; ++i)
        for (int p = 0; p < P; ++p) (*grad)[p] += 2.0 * res[i] * dres[i][p];
    }
    return obj;
  };

  // the residual is affine in the output-layer coefficients (c0, c_j); an
  // exact least-squares substep on that block pairs with gradient steps on
  // the nonlinear hidden parameters
  auto output_lsq = [&](std::vector<double>& theta) {
    Eigen::MatrixXd Mc = Eigen::MatrixXd::Zero(n, width + 1);
    Eigen::VectorXd r0 = Eigen::VectorXd::Zero(n);
    const int elems = static_cast<int>(space.mesh.size()) - 1;
    for (int e = 0; e < elems; ++e) {
      const double a = space.mesh[e], b2 = space.mesh[e + 1];
      const double mid = 0.5 * (a + b2), half = 0.5 * (b2 - a);
      for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
        const double z = mid + half * rule.nodes[k];
        const double w = half * rule.weights[k];
        const double fz = f(z);
        for (int i = std::max(1, e); i <= std::min(n, e + 1); ++i) {
          const double hd = space.hat_deriv(i, z);
          r0(i - 1) += w * ((uT - u0) / T * hd - fz * space.hat(i, z));
          Mc(i - 1, 0) += w * hd * (T - 2.0 * z);
          for (int j = 0; j < width; ++j) {
            const double wj = theta[1 + width + j], bj = theta[1 + 2 * width + j];
            const auto s = act.derivatives(wj * z + bj, 1);
            Mc(i - 1, 1 + j) += w * hd * ((T - 2.0 * z) * s[0] + z * (T - z) * wj * s[1]);
          }
        }
      }
    }
    const Eigen::VectorXd c =
        Mc.jacobiSvd(Eigen::ComputeThinU | Eigen::ComputeThinV).solve(-r0);
    for (int j = 0; j <= width; ++j) theta[j] = c(j);
  };

  std::vector<double> grad(P), cand_grad(P), cand(P);
  std::vector<double> best_th = th;
  double cur = objective(th, &grad);
  double best = cur;
  double stp = step;
  for (int it = 0; it < budget; ++it) {
    if (it % 50 == 0 && n > 0) {
      output_lsq(th);
      cur = objective(th, &grad);
      if (cur < best) {
        best = cur;
        best_th = th;
      }
    }
    for (int p = 0; p < P; ++p) cand[p] = th[p] - stp * grad[p];
    const double cval = objective(cand, &cand_grad);
    if (cval <= cur) {
      th.swap(cand);
      grad.swap(cand_grad);
      cur = cval;
      stp *= 1.1;
      if (cur < best) {
        best = cur;
        best_th = th;
      }
    } else {
      stp *= 0.5;  // adapted step, still plain descent
    }
  }

  WpinnFitResult out{
      MlpNetwork(act, {1, width, 1},
                 {std::vector<double>(best_th.begin() + 1 + width, best_th.begin() + 1 + 2 * width),
                  std::vector<double>(best_th.begin() + 1, best_th.begin() + 1 + width)},
                 {std::vector<double>(best_th.begin() + 1 + 2 * width, best_th.end()),
                  {best_th[0]}}),
      u0, uT, T, true, 0.0, false};
  for (double r : weak_residual(out.trial(), space, f))
    out.residual_norm = std::max(out.residual_norm, std::abs(r));
  out.warning = out.residual_norm > 1e-6;
  return out;
}

QuadratureReport quadrature_sensitivity(const WeakTrial& u, const WeakTrial& phi,
                                        const TestSpace& space, const std::vector<int>& q_list) {
  QuadratureReport rep;
  rep.q_list = q_list;
  const int q_ref = *std::max_element(q_list.begin(), q_list.end());
  const auto ref = assemble_column(u, space, q_ref);
  for (int q : q_list) {
    const auto col = assemble_column(u, space, q);
    rep.columns.push_back(col);
    double d = 0.0;
    for (std::size_t i = 0; i < col.size(); ++i) d = std::max(d, std::abs(col[i] - ref[i]));
    rep.column_max_diff_to_ref.push_back(d);
    const auto kcol = assemble_column(phi, space, q);
    double kr = 0.0;
    for (double v : kcol) kr = std::max(kr, std::abs(v));
    rep.kernel_residuals.push_back(kr);
    rep.below_floor.push_back(q < 4);
  }
  return rep;
}

}  // namespace nullforge

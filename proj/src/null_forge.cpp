#include "nullforge/null_forge.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "nullforge/errors.hpp"
#include "nullforge/rng.hpp"

namespace nullforge {

namespace {

double power_of_two_at_most(double x) {
  if (!(x > 0.0)) throw std::invalid_argument("plateau radius scale must be positive");
  return std::exp2(std::floor(std::log2(x)));
}

double power_of_two_at_least(double x) { return std::exp2(std::ceil(std::log2(x))); }

double min_pairwise_distance(const std::vector<Point>& nodes) {
  double dmin = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < nodes.size(); ++i)
    for (std::size_t j = i + 1; j < nodes.size(); ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < nodes[i].size(); ++k) {
        const double t = nodes[i][k] - nodes[j][k];
        s += t * t;
      }
      const double dist = std::sqrt(s);
      if (dist == 0.0) throw std::invalid_argument("interpolation nodes must be pairwise distinct");
      dmin = std::min(dmin, dist);
    }
  return dmin;
}

double auto_plateau_radius(const std::vector<Point>& nodes, const std::optional<Box>& domain) {
  double scale = nodes.size() > 1 ? min_pairwise_distance(nodes)
                                  : std::numeric_limits<double>::infinity();
  if (domain) {
    for (const auto& x : nodes) {
      double bdist = std::numeric_limits<double>::infinity();
      for (int a = 0; a < domain->dim(); ++a)
        bdist = std::min({bdist, x[a] - domain->lo[a], domain->hi[a] - x[a]});
      // nodes sitting on the boundary keep their plateaus (the network is
      // defined on all of R^d); only interior margins cap the radius
      if (bdist > 0.0) scale = std::min(scale, 4.0 * bdist);
    }
  }
  if (!std::isfinite(scale)) scale = 1.0;  // single unconstrained node
  return power_of_two_at_most(scale / 4.0);
}

// Offset factor for the frustum centers, scanned over dyadic candidates so
// that no kink line of any bump passes through any node.
double dodge_offset_factor(const std::vector<Point>& nodes, double r, double margin) {
  const int d = static_cast<int>(nodes[0].size());
  for (int k = 0; k < 160; ++k) {
    const double beta = 5.0 / 16.0 + static_cast<double>(k) / 1024.0;
    const double rho = beta * r;
    bool ok = true;
    for (const auto& xj : nodes) {
      for (const auto& xi : nodes) {
        for (int a = 0; a < d && ok; ++a)
          if (std::abs(xj[a] - (xi[a] - rho)) < margin) ok = false;
        if (!ok) break;
      }
      if (!ok) break;
    }
    if (ok) return beta;
  }
  throw std::runtime_error("plateau construction: failed to separate kink lines from nodes");
}

MlpNetwork trapezoid_interpolant_1d(const std::vector<Point>& nodes,
                                    const std::vector<double>& data, double r) {
  const int n = static_cast<int>(nodes.size());
  const double h = 1.0 / r;
  std::vector<double> W1, B1, W2;
  W1.reserve(4 * n);
  B1.reserve(4 * n);
  W2.reserve(4 * n);
  for (int i = 0; i < n; ++i) {
    const double x = nodes[i][0], g = data[i];
    const double offs[4] = {x - 2.0 * r, x - r, x + r, x + 2.0 * r};
    const double coef[4] = {g * h, -g * h, -g * h, g * h};
    for (int k = 0; k < 4; ++k) {
      W1.push_back(1.0);
      B1.push_back(-offs[k]);
      W2.push_back(coef[k]);
    }
  }
  return MlpNetwork(Activation(ActivationKind::ReLU), {1, 4 * n, 1}, {W1, W2},
                    {B1, {0.0}});
}

// Depth-3 frustum bumps: per node, 2d absolute-value units feed two clamp
// units sigma(c - |.|_1 / r) and sigma(c - 1 - |.|_1 / r) whose difference is
// exactly 1 on the plateau. Bump centers are offset from the nodes so every
// preactivation stays away from a kink at every node.
MlpNetwork frustum_interpolant(const std::vector<Point>& nodes, const std::vector<double>& data,
                               double r, double kink_margin) {
  const int d = static_cast<int>(nodes[0].size());
  const int n = static_cast<int>(nodes.size());
  const double beta = dodge_offset_factor(nodes, r, kink_margin);
  const double rho = beta * r;
  const double c = 2.0 + d * beta;
  const double h = 1.0 / r;

  const int w1 = 2 * d * n, w2 = 2 * n;
  std::vector<double> W1(static_cast<std::size_t>(w1) * d, 0.0), B1(w1, 0.0);
  std::vector<double> W2(static_cast<std::size_t>(w2) * w1, 0.0), B2(w2, 0.0);
  std::vector<double> W3(w2, 0.0);
  for (int i = 0; i < n; ++i) {
    for (int a = 0; a < d; ++a) {
      const double center = nodes[i][a] - rho;
      const int up = i * 2 * d + 2 * a, dn = up + 1;
      W1[static_cast<std::size_t>(up) * d + a] = 1.0;
      B1[up] = -center;
      W1[static_cast<std::size_t>(dn) * d + a] = -1.0;
      B1[dn] = center;
    }
    const int s1 = 2 * i, s2 = 2 * i + 1;
    for (int u = 0; u < 2 * d; ++u) {
      W2[static_cast<std::size_t>(s1) * w1 + i * 2 * d + u] = -h;
      W2[static_cast<std::size_t>(s2) * w1 + i * 2 * d + u] = -h;
    }
    B2[s1] = c;
    B2[s2] = c - 1.0;
    W3[s1] = data[i];
    W3[s2] = -data[i];
  }
  return MlpNetwork(Activation(ActivationKind::ReLU), {d, w1, w2, 1}, {W1, W2, W3},
                    {B1, B2, {0.0}});
}

}  // namespace

std::vector<double> separating_direction(const std::vector<Point>& points, std::uint64_t seed) {
  if (points.empty()) throw std::invalid_argument("separating_direction: empty point set");
  for (std::size_t i = 0; i < points.size(); ++i)
    for (std::size_t j = i + 1; j < points.size(); ++j)
      if (points[i] == points[j])
        throw std::invalid_argument("separating_direction: points must be pairwise distinct");
  const int d = static_cast<int>(points[0].size());
  const double gap_floor = 1e-6;

  auto gaps_ok = [&](const std::vector<double>& v) {
    std::vector<double> proj(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
      double s = 0.0;
      for (int a = 0; a < d; ++a) s += v[a] * points[i][a];
      proj[i] = s;
    }
    double gmin = std::numeric_limits<double>::infinity(), gmax = 0.0;
    for (std::size_t i = 0; i < proj.size(); ++i)
      for (std::size_t j = i + 1; j < proj.size(); ++j) {
        const double g = std::abs(proj[i] - proj[j]);
        gmin = std::min(gmin, g);
        gmax = std::max(gmax, g);
      }
    if (points.size() < 2) return true;
    return gmin >= gap_floor * gmax && gmax > 0.0;
  };

  if (d == 1) {
    std::vector<double> v{1.0};
    if (!gaps_ok(v))
      throw std::runtime_error("separating_direction: degenerate 1D point scaling");
    return v;
  }

  Rng rng(seed);
  for (int attempt = 0; attempt < 1000; ++attempt) {
    auto v = rng.normal_vector(d);
    double norm = 0.0;
    for (double x : v) norm += x * x;
    norm = std::sqrt(norm);
    if (norm < 1e-12) continue;
    for (double& x : v) x /= norm;
    if (gaps_ok(v)) return v;
  }
  throw std::runtime_error("separating_direction: exhausted 1000 attempts (degenerate scaling)");
}

MlpNetwork relu_plateau_interpolant(const std::vector<Point>& nodes,
                                    const std::vector<double>& data, int depth,
                                    const PlateauOptions& opts) {
  if (nodes.empty() || nodes.size() != data.size())
    throw std::invalid_argument("plateau interpolant: nodes/data size mismatch");
  const int d = static_cast<int>(nodes[0].size());
  if (d != 1 && d != 2)
    throw std::invalid_argument("plateau interpolant supports d in {1, 2} only");
  const int min_depth = static_cast<int>(std::ceil(std::log2(d + 1.0))) + 1;
  if (depth < min_depth)
    throw std::invalid_argument("plateau interpolant: depth below ceil(log2(d+1))+1");

  double r = opts.radius > 0.0 ? opts.radius : auto_plateau_radius(nodes, opts.domain);
  if (nodes.size() > 1) {
    const double dmin = min_pairwise_distance(nodes);
    if (!(dmin > 4.0 * r) && opts.radius > 0.0)
      throw std::invalid_argument("plateau interpolant: nodes too close (need distance > 4*radius)");
    if (dmin < 4.0 * r) r = power_of_two_at_most(dmin / 4.0);
  }

  double max_abs = 0.0;
  for (double g : data) max_abs = std::max(max_abs, std::abs(g));

  MlpNetwork net = [&]() {
    if (d == 1 && depth == 2) {
      // sort nodes so unit order matches the telescoping cancellation
      std::vector<int> order(nodes.size());
      for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
      std::sort(order.begin(), order.end(),
                [&](int a, int b) { return nodes[a][0] < nodes[b][0]; });
      std::vector<Point> ns;
      std::vector<double> ds;
      for (int i : order) {
        ns.push_back(nodes[i]);
        ds.push_back(data[i]);
      }
      return trapezoid_interpolant_1d(ns, ds, r);
    }
    return frustum_interpolant(nodes, data, r, std::max(1e-7 * r, 1e-9));
  }();

  if (net.depth() < depth) {
    const double shift = opts.identity_shift != 0.0
                             ? opts.identity_shift
                             : power_of_two_at_least(2.0 + max_abs);
    net = extend_depth_identity(net, depth, shift);
  }
  return net;
}

MlpNetwork smooth_hermite_interpolant(const std::vector<Point>& nodes,
                                      const std::vector<double>& values, int m,
                                      Activation activation, int depth, std::uint64_t seed,
                                      HermiteReport* report, double delta) {
  if (nodes.empty() || nodes.size() != values.size())
    throw std::invalid_argument("hermite interpolant: nodes/values size mismatch");
  if (!activation.infinitely_smooth())
    throw std::invalid_argument("hermite interpolant needs a smooth activation");
  if (activation.kind() == ActivationKind::Identity)
    throw UnsupportedOrderError("identity activation has vanishing higher derivatives");
  if (depth < 2) throw std::invalid_argument("hermite interpolant: depth must be >= 2");
  if (depth > 2 && !activation.strictly_monotone())
    throw std::invalid_argument("hermite interpolant: depth > 2 needs a strictly monotone activation");
  if (m < 0) throw std::invalid_argument("hermite interpolant: m must be >= 0");

  const int d = static_cast<int>(nodes[0].size());
  const int N = static_cast<int>(nodes.size());
  const int ell = N * (m + 1);
  const double s_anchor = activation.anchor();

  const auto v = separating_direction(nodes, seed);

  // scalar nodes after the sigma chain, rescaled to [-1, 1]
  std::vector<double> t(N);
  for (int i = 0; i < N; ++i) {
    double s = 0.0;
    for (int a = 0; a < d; ++a) s += v[a] * nodes[i][a];
    for (int k = 0; k < depth - 2; ++k) s = activation.value(s);
    t[i] = s;
  }
  const double tmin = *std::min_element(t.begin(), t.end());
  const double tmax = *std::max_element(t.begin(), t.end());
  double A = 1.0, Boff = 0.0;
  if (N > 1) {
    A = 2.0 / (tmax - tmin);
    Boff = -1.0 - A * tmin;
  } else {
    Boff = -t[0];
  }
  std::vector<double> tau(N);
  for (int i = 0; i < N; ++i) tau[i] = A * t[i] + Boff;

  // hidden units: per node, m+1 units with weights (k+1)*delta centered there
  auto build_matrix = [&](double dl, Eigen::MatrixXd& M) {
    M.resize(ell, ell);
    for (int col = 0; col < ell; ++col) {
      const int ci = col / (m + 1), ck = col % (m + 1);
      const double w = (ck + 1) * dl;
      for (int i = 0; i < N; ++i) {
        const auto ders = activation.derivatives(w * (tau[i] - tau[ci]) + s_anchor, m);
        double wk = 1.0;
        for (int k = 0; k <= m; ++k) {
          M(i * (m + 1) + k, col) = wk * ders[k];
          wk *= w;
        }
      }
    }
  };

  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(ell);
  double max_abs = 0.0;
  for (int i = 0; i < N; ++i) {
    rhs(i * (m + 1)) = values[i];
    max_abs = std::max(max_abs, std::abs(values[i]));
  }

  const std::vector<double> candidates =
      delta > 0.0 ? std::vector<double>{delta}
                  : std::vector<double>{2.0, 3.0, 1.5, 2.5, 1.0, 4.0, 0.75, 5.0};
  Eigen::MatrixXd M;
  double best_cond = std::numeric_limits<double>::infinity();
  double chosen = candidates[0];
  for (double dl : candidates) {
    build_matrix(dl, M);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
    const double smin = svd.singularValues()(ell - 1);
    const double cond = smin > 0.0 ? svd.singularValues()(0) / smin
                                   : std::numeric_limits<double>::infinity();
    if (cond < best_cond) {
      best_cond = cond;
      chosen = dl;
    }
    if (cond <= 1e10) break;
  }
  if (best_cond > 1e12)
    throw IllConditionedError("hermite collocation matrix condition estimate " +
                              std::to_string(best_cond) + " exceeds 1e12");
  build_matrix(chosen, M);

  Eigen::PartialPivLU<Eigen::MatrixXd> lu(M);
  Eigen::VectorXd c = lu.solve(rhs);
  // one refinement step keeps the residual at the backward-stable floor
  c += lu.solve(rhs - M * c);
  const double residual = (M * c - rhs).cwiseAbs().maxCoeff();
  if (residual > 1e-8 * (1.0 + max_abs))
    throw IllConditionedError("hermite solve residual " + std::to_string(residual) +
                              " exceeds certification gate");

  bool anchor_warning = false;
  {
    const auto ders = activation.derivatives(s_anchor, std::min(ell - 1, 40));
    for (double dv : ders)
      if (std::abs(dv) <= 1e-12) anchor_warning = true;
  }

  if (report) {
    report->ell = ell;
    report->delta = chosen;
    report->condition = best_cond;
    report->residual = residual;
    report->anchor_warning = anchor_warning;
  }

  // assemble the depth-L network
  std::vector<int> dims;
  std::vector<std::vector<double>> W, B;
  if (depth == 2) {
    dims = {d, ell};
    std::vector<double> W1(static_cast<std::size_t>(ell) * d), B1(ell);
    for (int col = 0; col < ell; ++col) {
      const int ci = col / (m + 1), ck = col % (m + 1);
      const double w = (ck + 1) * chosen;
      for (int a = 0; a < d; ++a) W1[static_cast<std::size_t>(col) * d + a] = w * A * v[a];
      B1[col] = w * (Boff - tau[ci]) + s_anchor;
    }
    W.push_back(std::move(W1));
    B.push_back(std::move(B1));
  } else {
    dims.push_back(d);
    std::vector<double> W1(d);
    for (int a = 0; a < d; ++a) W1[a] = v[a];
    dims.push_back(1);
    W.push_back(std::move(W1));
    B.push_back({0.0});
    for (int k = 0; k < depth - 3; ++k) {
      dims.push_back(1);
      W.push_back({1.0});
      B.push_back({0.0});
    }
    dims.push_back(ell);
    std::vector<double> Wl(ell), Bl(ell);
    for (int col = 0; col < ell; ++col) {
      const int ci = col / (m + 1), ck = col % (m + 1);
      const double w = (ck + 1) * chosen;
      Wl[col] = w * A;
      Bl[col] = w * (Boff - tau[ci]) + s_anchor;
    }
    W.push_back(std::move(Wl));
    B.push_back(std::move(Bl));
  }
  dims.push_back(1);
  std::vector<double> Wout(ell);
  for (int i = 0; i < ell; ++i) Wout[i] = c(i);
  W.push_back(std::move(Wout));
  B.push_back({0.0});
  return MlpNetwork(activation, dims, std::move(W), std::move(B));
}

namespace {

MlpNetwork rescale_output(const MlpNetwork& net, double scale) {
  std::vector<std::vector<double>> W, B;
  for (int i = 0; i < net.depth(); ++i) {
    W.push_back(net.weights(i));
    B.push_back(net.biases(i));
  }
  for (double& w : W.back()) w *= scale;
  for (double& b : B.back()) b *= scale;
  return MlpNetwork(net.activation(), net.layer_dims(), std::move(W), std::move(B));
}

}  // namespace

MlpNetwork null_direction(const MeasurementSpec& spec, const Point& z0, const NullFamily& family,
                          int depth, std::uint64_t seed, HermiteReport* report) {
  if (static_cast<int>(z0.size()) != spec.dim())
    throw std::invalid_argument("null_direction: witness dimension mismatch");
  if (spec.contains_point(z0))
    throw std::invalid_argument("null_direction: witness point coincides with a probe point");

  std::vector<Point> nodes = spec.distinct_points();
  std::vector<double> data(nodes.size(), 0.0);
  nodes.push_back(z0);
  data.push_back(1.0);

  MlpNetwork phi = family.is_relu()
                       ? relu_plateau_interpolant(nodes, data, depth)
                       : smooth_hermite_interpolant(nodes, data, spec.max_order(),
                                                    family.activation, depth, seed, report);
  const double val = phi.forward(z0);
  if (std::abs(val) < 0.5)
    throw std::runtime_error("null_direction: witness normalization failed");
  if (val != 1.0) phi = rescale_output(phi, 1.0 / val);
  return phi;
}

std::vector<MlpNetwork> null_family(const MeasurementSpec& spec, const std::vector<Point>& z0s,
                                    const NullFamily& family, int depth, std::uint64_t seed) {
  if (z0s.empty()) throw std::invalid_argument("null_family: empty witness list");
  for (std::size_t i = 0; i < z0s.size(); ++i)
    for (std::size_t j = i + 1; j < z0s.size(); ++j)
      if (z0s[i] == z0s[j]) throw std::invalid_argument("null_family: witnesses must be distinct");

  std::vector<MlpNetwork> out;
  for (std::size_t j = 0; j < z0s.size(); ++j)
    out.push_back(null_direction(spec, z0s[j], family, depth, seed + j));

  // cross-evaluation rows must be pairwise distinct
  const std::size_t n = z0s.size();
  std::vector<std::vector<double>> cross(n, std::vector<double>(n));
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t k = 0; k < n; ++k) cross[j][k] = out[j].forward(z0s[k]);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a + 1; b < n; ++b) {
      double diff = 0.0;
      for (std::size_t k = 0; k < n; ++k)
        diff = std::max(diff, std::abs(cross[a][k] - cross[b][k]));
      if (diff <= 1e-6)
        throw std::runtime_error("null_family: two null directions are indistinguishable");
    }
  return out;
}

}  // namespace nullforge

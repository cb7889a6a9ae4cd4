#include "nullforge/network.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace nullforge {

MlpNetwork::MlpNetwork(Activation activation, std::vector<int> layer_dims,
                       std::vector<std::vector<double>> weights,
                       std::vector<std::vector<double>> biases)
    : activation_(activation),
      layer_dims_(std::move(layer_dims)),
      weights_(std::move(weights)),
      biases_(std::move(biases)) {
  if (layer_dims_.size() < 2) throw std::invalid_argument("network needs depth >= 1");
  if (layer_dims_.back() != 1) throw std::invalid_argument("output dimension must be 1");
  for (int d : layer_dims_)
    if (d < 1) throw std::invalid_argument("layer widths must be positive");
  const std::size_t L = layer_dims_.size() - 1;
  if (weights_.size() != L || biases_.size() != L)
    throw std::invalid_argument("weights/biases must have one entry per affine layer");
  for (std::size_t i = 0; i < L; ++i) {
    const std::size_t rows = layer_dims_[i + 1], cols = layer_dims_[i];
    if (weights_[i].size() != rows * cols)
      throw std::invalid_argument("weight shape mismatch at layer " + std::to_string(i));
    if (biases_[i].size() != rows)
      throw std::invalid_argument("bias shape mismatch at layer " + std::to_string(i));
  }
}

std::int64_t MlpNetwork::parameter_count() const {
  std::int64_t n = 0;
  for (std::size_t i = 0; i + 1 < layer_dims_.size(); ++i)
    n += static_cast<std::int64_t>(layer_dims_[i + 1]) * layer_dims_[i] + layer_dims_[i + 1];
  return n;
}

// Accumulation is a plain sequential loop: certified quantities rely on a
// fixed summation order.
double MlpNetwork::forward(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != input_dim())
    throw std::invalid_argument("forward: input dimension mismatch");
  const int L = depth();
  std::vector<double> cur(x.begin(), x.end()), next;
  for (int layer = 0; layer < L; ++layer) {
    const int rows = layer_dims_[layer + 1], cols = layer_dims_[layer];
    const auto& W = weights_[layer];
    const auto& b = biases_[layer];
    next.assign(rows, 0.0);
    for (int r = 0; r < rows; ++r) {
      double acc = b[r];
      const double* wrow = W.data() + static_cast<std::size_t>(r) * cols;
      for (int c = 0; c < cols; ++c) acc += wrow[c] * cur[c];
      next[r] = (layer + 1 < L) ? activation_.value(acc) : acc;
    }
    cur.swap(next);
  }
  return cur[0];
}

bool MlpNetwork::is_smooth_at(std::span<const double> x, double kink_tol) const {
  if (activation_.infinitely_smooth()) return true;
  if (static_cast<int>(x.size()) != input_dim())
    throw std::invalid_argument("is_smooth_at: input dimension mismatch");
  const int L = depth();
  std::vector<double> cur(x.begin(), x.end()), next;
  for (int layer = 0; layer < L; ++layer) {
    const int rows = layer_dims_[layer + 1], cols = layer_dims_[layer];
    const auto& W = weights_[layer];
    const auto& b = biases_[layer];
    next.assign(rows, 0.0);
    for (int r = 0; r < rows; ++r) {
      double acc = b[r];
      const double* wrow = W.data() + static_cast<std::size_t>(r) * cols;
      for (int c = 0; c < cols; ++c) acc += wrow[c] * cur[c];
      if (layer + 1 < L) {
        if (std::abs(acc) <= kink_tol) return false;
        next[r] = activation_.value(acc);
      } else {
        next[r] = acc;
      }
    }
    cur.swap(next);
  }
  return true;
}

bool is_smooth_at(const MlpNetwork& net, std::span<const double> x, double kink_tol) {
  return net.is_smooth_at(x, kink_tol);
}

MlpNetwork linear_combine(const std::vector<MlpNetwork>& nets, const std::vector<double>& coeffs) {
  if (nets.empty()) throw std::invalid_argument("linear_combine: empty list");
  if (nets.size() != coeffs.size())
    throw std::invalid_argument("linear_combine: nets/coeffs size mismatch");
  const int L = nets[0].depth();
  const int d = nets[0].input_dim();
  for (const auto& n : nets) {
    if (n.depth() != L) throw std::invalid_argument("linear_combine: depth mismatch");
    if (!(n.activation() == nets[0].activation()))
      throw std::invalid_argument("linear_combine: activation mismatch");
    if (n.input_dim() != d) throw std::invalid_argument("linear_combine: input dim mismatch");
  }

  if (L == 1) {
    std::vector<double> W(d, 0.0);
    double b = 0.0;
    for (std::size_t j = 0; j < nets.size(); ++j) {
      for (int c = 0; c < d; ++c) W[c] += coeffs[j] * nets[j].weights(0)[c];
      b += coeffs[j] * nets[j].biases(0)[0];
    }
    return MlpNetwork(nets[0].activation(), {d, 1}, {W}, {{b}});
  }

  std::vector<int> dims(L + 1);
  dims[0] = d;
  dims[L] = 1;
  for (int layer = 1; layer < L; ++layer) {
    int w = 0;
    for (const auto& n : nets) w += n.layer_dims()[layer];
    dims[layer] = w;
  }

  std::vector<std::vector<double>> W(L), B(L);
  // first layer: stacked rows sharing the input
  {
    W[0].assign(static_cast<std::size_t>(dims[1]) * d, 0.0);
    B[0].assign(dims[1], 0.0);
    int row0 = 0;
    for (const auto& n : nets) {
      const int rows = n.layer_dims()[1];
      for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < d; ++c)
          W[0][static_cast<std::size_t>(row0 + r) * d + c] = n.weights(0)[r * d + c];
        B[0][row0 + r] = n.biases(0)[r];
      }
      row0 += rows;
    }
  }
  // hidden layers: block diagonal
  for (int layer = 1; layer < L - 1; ++layer) {
    const int rows = dims[layer + 1], cols = dims[layer];
    W[layer].assign(static_cast<std::size_t>(rows) * cols, 0.0);
    B[layer].assign(rows, 0.0);
    int row0 = 0, col0 = 0;
    for (const auto& n : nets) {
      const int nr = n.layer_dims()[layer + 1], nc = n.layer_dims()[layer];
      for (int r = 0; r < nr; ++r) {
        for (int c = 0; c < nc; ++c)
          W[layer][static_cast<std::size_t>(row0 + r) * cols + (col0 + c)] =
              n.weights(layer)[r * nc + c];
        B[layer][row0 + r] = n.biases(layer)[r];
      }
      row0 += nr;
      col0 += nc;
    }
  }
  // output: concatenated scaled rows, summed biases
  {
    const int cols = dims[L - 1];
    W[L - 1].assign(cols, 0.0);
    B[L - 1].assign(1, 0.0);
    int col0 = 0;
    for (std::size_t j = 0; j < nets.size(); ++j) {
      const int nc = nets[j].layer_dims()[L - 1];
      for (int c = 0; c < nc; ++c) W[L - 1][col0 + c] = coeffs[j] * nets[j].weights(L - 1)[c];
      B[L - 1][0] += coeffs[j] * nets[j].biases(L - 1)[0];
      col0 += nc;
    }
  }
  return MlpNetwork(nets[0].activation(), dims, std::move(W), std::move(B));
}

MlpNetwork extend_depth_identity(const MlpNetwork& net, int target_depth, double identity_shift) {
  if (target_depth < net.depth())
    throw std::invalid_argument("extend_depth_identity: target depth below current depth");
  if (target_depth == net.depth()) return net;
  const Activation act = net.activation();
  if (act.infinitely_smooth() && !(act.kind() == ActivationKind::Identity) &&
      !act.strictly_monotone())
    throw std::invalid_argument("extend_depth_identity: smooth activation must be strictly monotone");

  std::vector<int> dims = net.layer_dims();
  std::vector<std::vector<double>> W;
  std::vector<std::vector<double>> B;
  const int L = net.depth();
  for (int i = 0; i < L; ++i) {
    W.push_back(net.weights(i));
    B.push_back(net.biases(i));
  }

  const int extra = target_depth - L;
  if (act.kind() == ActivationKind::Identity) {
    // appended (w=1, b=0) layers are exact when sigma is the identity
    for (int k = 0; k < extra; ++k) {
      dims.push_back(1);
      W.push_back({1.0});
      B.push_back({0.0});
    }
    return MlpNetwork(act, dims, std::move(W), std::move(B));
  }

  if (act.kind() == ActivationKind::ReLU) {
    const double c = identity_shift;
    for (int k = 0; k < extra; ++k) {
      // current output row becomes a width-2 hidden layer [y + c; -y - c]
      std::vector<double> out_w = W.back();
      std::vector<double> out_b = B.back();
      W.pop_back();
      B.pop_back();
      const int cols = static_cast<int>(out_w.size());
      std::vector<double> Wh(2 * cols);
      for (int i = 0; i < cols; ++i) {
        Wh[i] = out_w[i];
        Wh[cols + i] = -out_w[i];
      }
      W.push_back(std::move(Wh));
      B.push_back({out_b[0] + c, -out_b[0] - c});
      W.push_back({1.0, -1.0});
      B.push_back({-c});
      dims.pop_back();
      dims.push_back(2);
      dims.push_back(1);
    }
    return MlpNetwork(act, dims, std::move(W), std::move(B));
  }

  // smooth strictly monotone: the symmetric pair
  //   y -> (sigma(s + eps y) - sigma(s - eps y)) / (2 eps sigma'(s))
  // reproduces y with an O(eps^2 y^3) defect; odd symmetry cancels the
  // first-order term of the one-sided version
  const double s = act.anchor();
  const double eps = 2e-6;
  const double s1 = act.derivatives(s, 1)[1];
  for (int k = 0; k < extra; ++k) {
    std::vector<double> out_w = W.back();
    std::vector<double> out_b = B.back();
    W.pop_back();
    B.pop_back();
    const int cols = static_cast<int>(out_w.size());
    std::vector<double> Wh(2 * cols);
    for (int i = 0; i < cols; ++i) {
      Wh[i] = eps * out_w[i];
      Wh[cols + i] = -eps * out_w[i];
    }
    W.push_back(std::move(Wh));
    B.push_back({eps * out_b[0] + s, -eps * out_b[0] + s});
    const double scale = 1.0 / (2.0 * eps * s1);
    W.push_back({scale, -scale});
    B.push_back({0.0});
    dims.pop_back();
    dims.push_back(2);
    dims.push_back(1);
  }
  return MlpNetwork(act, dims, std::move(W), std::move(B));
}

}  // namespace nullforge

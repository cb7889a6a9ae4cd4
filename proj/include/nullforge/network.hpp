#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "nullforge/activation.hpp"

namespace nullforge {

using Point = std::vector<double>;

// Fully connected scalar network with explicit weights. Depth L counts the
// affine layers, so layer_dims = (d_0, d_1, ..., d_L) with d_L = 1 and sigma
// applied after the first L-1 of them. Immutable after construction; all
// operations on it are pure.
class MlpNetwork {
 public:
  MlpNetwork(Activation activation, std::vector<int> layer_dims,
             std::vector<std::vector<double>> weights,   // row-major, d_i x d_{i-1}
             std::vector<std::vector<double>> biases);   // d_i

  const Activation& activation() const { return activation_; }
  const std::vector<int>& layer_dims() const { return layer_dims_; }
  int depth() const { return static_cast<int>(layer_dims_.size()) - 1; }
  int input_dim() const { return layer_dims_.front(); }
  std::int64_t parameter_count() const;

  const std::vector<double>& weights(int layer) const { return weights_[layer]; }
  const std::vector<double>& biases(int layer) const { return biases_[layer]; }

  double forward(std::span<const double> x) const;
  double forward(double x) const { return forward(std::span<const double>(&x, 1)); }

  // true iff every hidden preactivation stays away from a ReLU kink
  // (always true for smooth activations)
  bool is_smooth_at(std::span<const double> x, double kink_tol = 1e-9) const;

 private:
  Activation activation_;
  std::vector<int> layer_dims_;
  std::vector<std::vector<double>> weights_;
  std::vector<std::vector<double>> biases_;
};

// Width-concatenation realization of sum_j coeffs_j * nets_j: hidden widths
// add per layer and forward values agree with the weighted sum of the inputs'
// forwards to machine precision. Requires a common depth and activation.
MlpNetwork linear_combine(const std::vector<MlpNetwork>& nets, const std::vector<double>& coeffs);

// Depth extension preserving the forward map. ReLU inserts
// sigma(t + c) - sigma(-t - c) - c layers (exact; c = identity_shift moves the
// inserted kink away from t = 0 so jets stay evaluable at points where the
// function vanishes). Smooth strictly monotone activations insert a scaled
// sigma with its first-order affine inverse folded into the next layer, exact
// to ~1e-10 on moderate values.
MlpNetwork extend_depth_identity(const MlpNetwork& net, int target_depth,
                                 double identity_shift = 0.0);

bool is_smooth_at(const MlpNetwork& net, std::span<const double> x, double kink_tol = 1e-9);

}  // namespace nullforge

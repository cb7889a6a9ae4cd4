#pragma once

#include <string>
#include <vector>

namespace nullforge {

enum class ActivationKind { ReLU, Tanh, Sigmoid, Softplus, Identity };

// Scalar activation with exact k-th derivatives. ReLU has smoothness order 0;
// asking for its derivative within kink_tol of the kink is an error, not a
// one-sided convention.
class Activation {
 public:
  Activation() : kind_(ActivationKind::ReLU) {}
  explicit Activation(ActivationKind k) : kind_(k) {}

  ActivationKind kind() const { return kind_; }
  bool operator==(const Activation& o) const { return kind_ == o.kind_; }

  bool infinitely_smooth() const { return kind_ != ActivationKind::ReLU; }
  int smoothness_order() const;  // 0 for ReLU, large sentinel otherwise
  bool strictly_monotone() const;

  double value(double x) const;

  // [sigma(x), sigma'(x), ..., sigma^(m)(x)].
  // ReLU: KinkProximityError when m >= 1 and |x| <= kink_tol.
  std::vector<double> derivatives(double x, int m, double kink_tol = 1e-9) const;

  // Reference point where all derivatives up to high order are nonzero
  // (used by the smooth interpolation construction).
  double anchor() const;

  std::string name() const;
  static Activation from_name(const std::string& name);

 private:
  ActivationKind kind_;
};

}  // namespace nullforge

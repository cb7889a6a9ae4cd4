#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "nullforge/measurement.hpp"
#include "nullforge/network.hpp"

namespace nullforge {

// Direction v with pairwise distinct projections v . x_i, found by seeded
// rejection sampling on the unit sphere (finitely many separating hyperplane
// constraints). Gap floor: min pairwise gap >= 1e-6 * max gap.
std::vector<double> separating_direction(const std::vector<Point>& points, std::uint64_t seed);

struct PlateauOptions {
  double radius = 0.0;         // 0: quarter of the min pairwise/boundary distance, power of 2
  std::optional<Box> domain;   // caps the automatic radius at interior nodes
  double identity_shift = 0.0; // 0: derived from the data scale when extending depth
};

// ReLU network interpolating (nodes, data) that is constant near each node,
// so every derivative vanishes there. d in {1, 2}; depth >= ceil(log2(d+1))+1.
// Node values are exact for dyadic configurations and within ~2 ulp otherwise;
// derivative probes at nodes are exact zeros by construction.
MlpNetwork relu_plateau_interpolant(const std::vector<Point>& nodes,
                                    const std::vector<double>& data, int depth,
                                    const PlateauOptions& opts = {});

struct HermiteReport {
  int ell = 0;            // hidden width N(m+1)
  double delta = 0.0;     // unit weight scale actually used
  double condition = 0.0; // SVD condition estimate of the collocation matrix
  double residual = 0.0;  // max |M c - rhs| of the solved system
  bool anchor_warning = false;
};

// Smooth-activation network matching u(x_i) = g_i with all derivatives of
// order 1..m vanishing at the nodes: a scalar sigma chain on a separating
// direction feeds one hidden layer of N(m+1) units whose output weights solve
// the 1D Hermite system. Throws IllConditionedError instead of returning an
// uncertified interpolant.
MlpNetwork smooth_hermite_interpolant(const std::vector<Point>& nodes,
                                      const std::vector<double>& values, int m,
                                      Activation activation, int depth, std::uint64_t seed,
                                      HermiteReport* report = nullptr, double delta = 0.0);

// Family of networks used to annihilate a measurement map: ReLU plateaus or a
// smooth Hermite construction with the given activation.
struct NullFamily {
  Activation activation;
  static NullFamily relu() { return {Activation(ActivationKind::ReLU)}; }
  static NullFamily smooth(Activation a) { return {a}; }
  bool is_relu() const { return activation.kind() == ActivationKind::ReLU; }
};

// Nonzero Phi with M(Phi) = 0 (exact for ReLU up to representation roundoff,
// <= 1e-8 residual for smooth) and Phi(z0) = 1 after output rescaling.
// Boundary trace probes are annihilated like interior value probes.
MlpNetwork null_direction(const MeasurementSpec& spec, const Point& z0, const NullFamily& family,
                          int depth, std::uint64_t seed = 1, HermiteReport* report = nullptr);

// One normalized null direction per witness point; certified pairwise
// distinct via the cross-evaluation matrix Phi_j(z0_k).
std::vector<MlpNetwork> null_family(const MeasurementSpec& spec, const std::vector<Point>& z0s,
                                    const NullFamily& family, int depth, std::uint64_t seed = 1);

}  // namespace nullforge

#pragma once

#include <stdexcept>
#include <string>

namespace nullforge {

// A ReLU derivative was requested at (or too close to) a kink.
struct KinkProximityError : std::runtime_error {
  explicit KinkProximityError(const std::string& msg) : std::runtime_error(msg) {}
};

// Derivative order exceeds the smoothness of the activation.
struct UnsupportedOrderError : std::runtime_error {
  explicit UnsupportedOrderError(const std::string& msg) : std::runtime_error(msg) {}
};

// A collocation/Hermite system is too badly conditioned to certify.
struct IllConditionedError : std::runtime_error {
  explicit IllConditionedError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace nullforge

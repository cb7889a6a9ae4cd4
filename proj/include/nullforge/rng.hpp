#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace nullforge {

// Seeded random source with a fixed uint64 -> double conversion so that
// streams are reproducible independent of the standard library's
// distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // uniform in [0, 1)
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // standard normal via Box-Muller (pairs cached)
  double normal();

  std::vector<double> normal_vector(std::size_t n);

  std::uint64_t raw() { return engine_(); }

 private:
  std::mt19937_64 engine_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace nullforge

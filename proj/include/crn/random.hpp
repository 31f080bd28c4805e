#pragma once

#include <cstdint>
#include <random>

namespace crn {

/// Seeded generator used for every random draw in the project. The engine is
/// std::mt19937_64 (fully specified by the standard); normal deviates come
/// from the Marsaglia polar method implemented here, because the standard
/// distributions are not portable across library implementations.
class Rng {
 public:
  static constexpr const char* kAlgorithm = "mt19937_64/polar-normal";

  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  double normal();
  std::uint64_t bits() { return engine_(); }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace crn

#pragma once

#include <cstdint>
#include <random>

#include "relpose/pose_math.h"

namespace relpose {

// Seeded generator with platform-independent mappings to real numbers.
// std::*_distribution output differs between standard libraries, so the
// conversions below are done by hand to keep seeded outputs identical
// everywhere.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  // Independent stream derived from (seed, stream).
  Rng(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t NextU64() { return engine_(); }
  // Uniform in [0, 1).
  double Uniform();
  double Uniform(double lo, double hi) { return lo + (hi - lo) * Uniform(); }
  // Uniform integer in [0, n).
  std::uint64_t UniformIndex(std::uint64_t n);
  double Normal();

  Vec3 UnitVector();
  // Uniformly distributed rotation.
  Quaternion UnitQuaternion();
  // Random axis, angle uniform in [0, max_angle_rad].
  Quaternion BoundedRotation(double max_angle_rad);

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace relpose

#include "relpose/random.h"

#include <cmath>
#include <numbers>

namespace relpose {

namespace {

std::uint64_t SplitMix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

}  // namespace

Rng::Rng(std::uint64_t seed, std::uint64_t stream)
    : engine_(SplitMix64(SplitMix64(seed) ^ (stream * 0xD1B54A32D192ED03ull))) {}

double Rng::Uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

std::uint64_t Rng::UniformIndex(std::uint64_t n) {
  // Rejection sampling removes modulo bias.
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t r;
  do {
    r = engine_();
  } while (r >= limit);
  return r % n;
}

double Rng::Normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1;
  do {
    u1 = Uniform();
  } while (u1 <= 0.0);
  const double u2 = Uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

Vec3 Rng::UnitVector() {
  for (;;) {
    Vec3 v(Normal(), Normal(), Normal());
    const double n = v.norm();
    if (n > 1e-8) return v / n;
  }
}

Quaternion Rng::UnitQuaternion() {
  for (;;) {
    Quaternion q{Normal(), Normal(), Normal(), Normal()};
    if (q.Norm() > 1e-8) return QuatNormalize(q);
  }
}

Quaternion Rng::BoundedRotation(double max_angle_rad) {
  const Vec3 axis = UnitVector();
  const double half = 0.5 * Uniform(0.0, max_angle_rad);
  const double s = std::sin(half);
  return {std::cos(half), axis.x() * s, axis.y() * s, axis.z() * s};
}

}  // namespace relpose

#pragma once

#include <string>

#include <Eigen/Core>

namespace relpose {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;

// Tolerance for algebraic identities between exact constructions.
inline constexpr double kAlgebraTol = 1e-9;
// Tolerance for validating externally supplied rotations.
inline constexpr double kValidationTol = 1e-6;
// Below this norm a quaternion has no direction.
inline constexpr double kMinQuaternionNorm = 1e-12;

// Hamilton quaternion stored as (w, x, y, z).
struct Quaternion {
  double w = 1.0;
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  static Quaternion Identity() { return {1.0, 0.0, 0.0, 0.0}; }

  double Norm() const;
  Eigen::Vector4d ToVector() const { return {w, x, y, z}; }
  static Quaternion FromVector(const Eigen::Vector4d& v) {
    return {v(0), v(1), v(2), v(3)};
  }

  Quaternion operator-() const { return {-w, -x, -y, -z}; }
  friend bool operator==(const Quaternion&, const Quaternion&) = default;
};

// Throws DegenerateQuaternion when the norm is <= kMinQuaternionNorm.
Quaternion QuatNormalize(const Quaternion& q);
Quaternion QuatConjugate(const Quaternion& q);
// Hamilton product a * b (apply b first, then a).
Quaternion QuatMultiply(const Quaternion& a, const Quaternion& b);

// Picks the representative with w >= 0. When w == 0 the first nonzero of
// (x, y, z) is made positive. The represented rotation is unchanged.
Quaternion QuatCanonicalize(const Quaternion& q);

// Expects a unit quaternion.
Mat3 QuatToRotmat(const Quaternion& q);
// Throws NotARotation when R is not orthonormal with det +1 (1e-6 slack).
// The result is unit and canonical.
Quaternion RotmatToQuat(const Mat3& R);

// World-to-camera pose: x_cam = R * x_world + t.
struct AbsolutePose {
  Quaternion rotation;
  Vec3 translation = Vec3::Zero();
  std::string frame_id;
};

// Transform from the first camera's frame to the second camera's frame.
struct RelativePose {
  Quaternion rotation;
  Vec3 translation = Vec3::Zero();

  friend bool operator==(const RelativePose& a, const RelativePose& b) {
    return a.rotation == b.rotation && a.translation == b.translation;
  }
};

// q_rel = q2 * conj(q1), t_rel = R2 * (-R1^T t1) + t2. Rotation is returned
// normalized and canonical.
RelativePose ComputeRelativePose(const AbsolutePose& p1,
                                 const AbsolutePose& p2);

// Chains b after a: maps frame 1 -> 3 given a: 1 -> 2 and b: 2 -> 3.
RelativePose ComposeRelative(const RelativePose& b, const RelativePose& a);
RelativePose InverseRelative(const RelativePose& rel);

// 4x4 homogeneous [R t; 0 1].
Mat4 ToHomogeneous(const Mat3& R, const Vec3& t);
Mat4 ToHomogeneous(const RelativePose& rel);

// Geodesic angle between the rotations, in degrees, within [0, 180].
double RotationErrorDeg(const Quaternion& predicted, const Quaternion& truth);
double TranslationErrorM(const Vec3& predicted, const Vec3& truth);

}  // namespace relpose

#include "relpose/pose_math.h"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/LU>

#include "relpose/errors.h"

namespace relpose {

double Quaternion::Norm() const {
  return std::sqrt(w * w + x * x + y * y + z * z);
}

Quaternion QuatNormalize(const Quaternion& q) {
  const double n = q.Norm();
  if (!(n > kMinQuaternionNorm)) {
    throw DegenerateQuaternion("quaternion norm too small to normalize");
  }
  return {q.w / n, q.x / n, q.y / n, q.z / n};
}

Quaternion QuatConjugate(const Quaternion& q) { return {q.w, -q.x, -q.y, -q.z}; }

Quaternion QuatMultiply(const Quaternion& a, const Quaternion& b) {
  return {a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z,
          a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y,
          a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x,
          a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w};
}

Quaternion QuatCanonicalize(const Quaternion& q) {
  const double components[4] = {q.w, q.x, q.y, q.z};
  for (double c : components) {
    if (c > 0.0) return q;
    if (c < 0.0) return -q;
  }
  return q;
}

Mat3 QuatToRotmat(const Quaternion& q) {
  const double w = q.w, x = q.x, y = q.y, z = q.z;
  Mat3 R;
  R << 1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y),
      2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x),
      2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y);
  return R;
}

Quaternion RotmatToQuat(const Mat3& R) {
  if (!R.allFinite()) {
    throw NotARotation("rotation matrix has non-finite entries");
  }
  const double ortho_err =
      (R.transpose() * R - Mat3::Identity()).cwiseAbs().maxCoeff();
  if (ortho_err > kValidationTol || std::abs(R.determinant() - 1.0) > kValidationTol) {
    throw NotARotation("matrix is not orthonormal with determinant +1");
  }

  // Shepperd: branch on the largest of trace and diagonal entries.
  Quaternion q;
  const double trace = R.trace();
  if (trace > R(0, 0) && trace > R(1, 1) && trace > R(2, 2)) {
    const double s = 2.0 * std::sqrt(1.0 + trace);
    q = {0.25 * s, (R(2, 1) - R(1, 2)) / s, (R(0, 2) - R(2, 0)) / s,
         (R(1, 0) - R(0, 1)) / s};
  } else if (R(0, 0) >= R(1, 1) && R(0, 0) >= R(2, 2)) {
    const double s = 2.0 * std::sqrt(1.0 + R(0, 0) - R(1, 1) - R(2, 2));
    q = {(R(2, 1) - R(1, 2)) / s, 0.25 * s, (R(0, 1) + R(1, 0)) / s,
         (R(0, 2) + R(2, 0)) / s};
  } else if (R(1, 1) >= R(2, 2)) {
    const double s = 2.0 * std::sqrt(1.0 + R(1, 1) - R(0, 0) - R(2, 2));
    q = {(R(0, 2) - R(2, 0)) / s, (R(0, 1) + R(1, 0)) / s, 0.25 * s,
         (R(1, 2) + R(2, 1)) / s};
  } else {
    const double s = 2.0 * std::sqrt(1.0 + R(2, 2) - R(0, 0) - R(1, 1));
    q = {(R(1, 0) - R(0, 1)) / s, (R(0, 2) + R(2, 0)) / s,
         (R(1, 2) + R(2, 1)) / s, 0.25 * s};
  }
  return QuatCanonicalize(QuatNormalize(q));
}

RelativePose ComputeRelativePose(const AbsolutePose& p1,
                                 const AbsolutePose& p2) {
  const Quaternion q1 = QuatNormalize(p1.rotation);
  const Quaternion q2 = QuatNormalize(p2.rotation);
  const Mat3 R1 = QuatToRotmat(q1);
  const Mat3 R2 = QuatToRotmat(q2);

  RelativePose rel;
  rel.rotation =
      QuatCanonicalize(QuatNormalize(QuatMultiply(q2, QuatConjugate(q1))));
  rel.translation = R2 * (-R1.transpose() * p1.translation) + p2.translation;
  return rel;
}

RelativePose ComposeRelative(const RelativePose& b, const RelativePose& a) {
  const Quaternion qa = QuatNormalize(a.rotation);
  const Quaternion qb = QuatNormalize(b.rotation);
  RelativePose out;
  out.rotation = QuatCanonicalize(QuatNormalize(QuatMultiply(qb, qa)));
  out.translation = QuatToRotmat(qb) * a.translation + b.translation;
  return out;
}

RelativePose InverseRelative(const RelativePose& rel) {
  const Quaternion q = QuatNormalize(rel.rotation);
  RelativePose out;
  out.rotation = QuatCanonicalize(QuatConjugate(q));
  out.translation = -(QuatToRotmat(q).transpose() * rel.translation);
  return out;
}

Mat4 ToHomogeneous(const Mat3& R, const Vec3& t) {
  Mat4 T = Mat4::Identity();
  T.topLeftCorner<3, 3>() = R;
  T.topRightCorner<3, 1>() = t;
  return T;
}

Mat4 ToHomogeneous(const RelativePose& rel) {
  return ToHomogeneous(QuatToRotmat(QuatNormalize(rel.rotation)),
                       rel.translation);
}

double RotationErrorDeg(const Quaternion& predicted, const Quaternion& truth) {
  const Quaternion a = QuatNormalize(predicted);
  const Quaternion b = QuatNormalize(truth);
  // Equal to 2 acos(|<a,b>|), evaluated through atan2 so that near-identical
  // rotations do not lose half their digits to acos.
  const Quaternion d = QuatMultiply(QuatConjugate(a), b);
  const double vec = std::sqrt(d.x * d.x + d.y * d.y + d.z * d.z);
  const double angle = 2.0 * std::atan2(vec, std::abs(d.w));
  return std::clamp(angle * 180.0 / std::numbers::pi, 0.0, 180.0);
}

double TranslationErrorM(const Vec3& predicted, const Vec3& truth) {
  return (predicted - truth).norm();
}

}  // namespace relpose

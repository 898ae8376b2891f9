#pragma once

#include <cmath>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "relpose/pose_math.h"
#include "relpose/sfm_io.h"

namespace relpose {

using Vec2 = Eigen::Vector2d;

// Pinhole camera with square pixels and zero skew. Pixel coordinates have
// their origin at the top-left corner, u to the right and v downwards.
struct CameraIntrinsics {
  double f = 1.0;
  double cx = 0.0;
  double cy = 0.0;
  std::int64_t width = 0;
  std::int64_t height = 0;

  Mat3 K() const;
  Mat3 KInverse() const;
  bool Contains(const Vec2& x) const {
    return x.x() >= 0 && x.y() >= 0 && x.x() <= width && x.y() <= height;
  }
};

// cx = width / 2, cy = height / 2, f = width / (2 tan(fov / 2)), with fov
// the horizontal field of view. Throws InvalidFov unless 0 < fov < 180.
CameraIntrinsics ApproxIntrinsics(std::int64_t width, std::int64_t height,
                                  double fov_deg);

// Reads f, cx, cy from a COLMAP camera. Models whose parameter list starts
// with (f, cx, cy) or (fx, fy, cx, cy) are accepted; for the latter f is
// the mean of fx and fy. Anything else throws InputError.
CameraIntrinsics IntrinsicsFromColmap(const ColmapCameraRecord& camera);

// Cross-product matrix: Skew(v) * w == v.cross(w).
Mat3 Skew(const Vec3& v);

// Scale-normalized fundamental matrix: unit Frobenius norm, with the
// largest-magnitude entry positive.
struct FundamentalMatrix {
  Mat3 matrix = Mat3::Zero();

  // Throws InputError for an all-zero or non-finite matrix.
  static FundamentalMatrix Normalized(const Mat3& raw);
};

// F = K2^-T [t]x R K1^-1 from a relative pose mapping camera 1 to camera 2.
// Throws DegenerateTranslation when |t| <= 1e-9.
FundamentalMatrix FundamentalFromPose(const CameraIntrinsics& k1,
                                      const CameraIntrinsics& k2,
                                      const RelativePose& rel);

// Line a*u + b*v + c = 0 with a^2 + b^2 = 1.
struct EpipolarLine {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;

  double Distance(const Vec2& x) const {
    return std::abs(a * x.x() + b * x.y() + c);
  }
};

enum class EpipolarSide {
  // Point in image 1, line in image 2 (F x).
  kLeftToRight,
  // Point in image 2, line in image 1 (F^T x).
  kRightToLeft,
};

// Throws DegenerateLine when x is (numerically) the epipole.
EpipolarLine ComputeEpipolarLine(const FundamentalMatrix& F, const Vec2& x,
                                 EpipolarSide side);

// |x2~^T F x1~| / (|x1~| |x2~|): the epipolar constraint made invariant to
// the pixel scale of the homogeneous points.
double EpipolarResidual(const FundamentalMatrix& F, const Vec2& x1,
                        const Vec2& x2);

struct Keypoint {
  std::string image;
  Vec2 position = Vec2::Zero();
  std::int64_t keypoint_id = 0;

  friend bool operator==(const Keypoint&, const Keypoint&) = default;
};

// Columns: image,u,v,keypoint_id.
std::vector<Keypoint> ReadKeypointsFile(std::istream& in);
void WriteKeypointsFile(std::ostream& out, std::span<const Keypoint> keypoints);

// A fundamental matrix computed outside the toolkit, stored row-major.
// Columns: image_a,image_b,f00,f01,f02,f10,f11,f12,f20,f21,f22.
struct ExternalFundamental {
  std::string image_a;
  std::string image_b;
  Mat3 matrix = Mat3::Zero();

  friend bool operator==(const ExternalFundamental&,
                         const ExternalFundamental&) = default;
};
std::vector<ExternalFundamental> ReadFundamentalFile(std::istream& in);
void WriteFundamentalFile(std::ostream& out,
                          std::span<const ExternalFundamental> rows);

// One fundamental matrix per source ("gt", "pred", "external", ...) for a pair.
struct PairFundamentals {
  std::string image_a;
  std::string image_b;
  std::vector<std::pair<std::string, FundamentalMatrix>> sources;
};

// Line in image_b for a keypoint of image_a. residual_px is the distance of
// the image_b keypoint with the same id from the line, when one exists.
struct EpilineRecord {
  std::string image_pair;
  std::int64_t keypoint_id = 0;
  std::string source;
  EpipolarLine line;
  std::optional<double> residual_px;
};

struct EpilineReport {
  std::vector<EpilineRecord> records;
  // Keypoints lying outside image_a's bounds (reported, not rejected).
  std::size_t keypoints_outside_image = 0;
  // Keypoints skipped because they sit on the epipole.
  std::size_t degenerate_lines = 0;
};

// Builds the line set for every (pair, keypoint of image_a, source).
// An empty keypoint list yields an empty report. Throws MissingKeypoints when
// keypoints exist but none belong to the first image of any pair.
EpilineReport BuildEpilineReport(std::span<const PairFundamentals> pairs,
                                 std::span<const Keypoint> keypoints,
                                 const std::optional<CameraIntrinsics>& bounds);

// Columns: image_pair,keypoint_id,source,a,b,c,residual_px. A missing
// residual is written as an empty field.
void WriteEpilineReport(std::ostream& out, const EpilineReport& report);
std::vector<EpilineRecord> ReadEpilineReport(std::istream& in);

}  // namespace relpose

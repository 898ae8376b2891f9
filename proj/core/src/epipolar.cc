#include "relpose/epipolar.h"

#include <cmath>
#include <istream>
#include <map>
#include <numbers>
#include <ostream>

#include "csv.h"
#include "relpose/errors.h"

namespace relpose {

namespace {

const std::vector<std::string> kKeypointColumns = {"image", "u", "v",
                                                   "keypoint_id"};
const std::vector<std::string> kFundamentalColumns = {
    "image_a", "image_b", "f00", "f01", "f02", "f10",
    "f11",     "f12",     "f20", "f21", "f22"};
const std::vector<std::string> kReportColumns = {
    "image_pair", "keypoint_id", "source", "a", "b", "c", "residual_px"};

Vec3 Homogeneous(const Vec2& x) { return {x.x(), x.y(), 1.0}; }

void RequireFieldCount(const std::vector<std::string>& fields,
                       std::size_t expected, std::size_t line_no) {
  if (fields.size() != expected) {
    throw ParseError(line_no, "expected " + std::to_string(expected) +
                                  " fields, found " +
                                  std::to_string(fields.size()));
  }
}

}  // namespace

Mat3 CameraIntrinsics::K() const {
  Mat3 K;
  K << f, 0, cx, 0, f, cy, 0, 0, 1;
  return K;
}

Mat3 CameraIntrinsics::KInverse() const {
  Mat3 Kinv;
  Kinv << 1 / f, 0, -cx / f, 0, 1 / f, -cy / f, 0, 0, 1;
  return Kinv;
}

CameraIntrinsics ApproxIntrinsics(std::int64_t width, std::int64_t height,
                                  double fov_deg) {
  if (width <= 0 || height <= 0) {
    throw InputError("image width and height must be positive");
  }
  if (!(fov_deg > 0.0 && fov_deg < 180.0)) {
    throw InvalidFov("field of view must lie strictly between 0 and 180 degrees");
  }
  const double half_fov = 0.5 * fov_deg * std::numbers::pi / 180.0;
  CameraIntrinsics k;
  k.width = width;
  k.height = height;
  k.cx = static_cast<double>(width) / 2.0;
  k.cy = static_cast<double>(height) / 2.0;
  k.f = static_cast<double>(width) / (std::tan(half_fov) * 2.0);
  return k;
}

CameraIntrinsics IntrinsicsFromColmap(const ColmapCameraRecord& camera) {
  static const std::map<std::string, bool> kSingleFocal = {
      {"SIMPLE_PINHOLE", true}, {"SIMPLE_RADIAL", true},
      {"RADIAL", true},         {"PINHOLE", false},
      {"OPENCV", false},        {"FULL_OPENCV", false}};
  const auto it = kSingleFocal.find(camera.model_name);
  if (it == kSingleFocal.end()) {
    throw InputError("camera model " + camera.model_name +
                     " has no pinhole interpretation");
  }
  const auto& p = camera.params;
  const std::size_t needed = it->second ? 3 : 4;
  if (p.size() < needed) {
    throw InputError("camera " + std::to_string(camera.camera_id) +
                     " has too few parameters");
  }
  CameraIntrinsics k;
  k.width = camera.width;
  k.height = camera.height;
  if (it->second) {
    k.f = p[0];
    k.cx = p[1];
    k.cy = p[2];
  } else {
    k.f = 0.5 * (p[0] + p[1]);
    k.cx = p[2];
    k.cy = p[3];
  }
  if (!(k.f > 0.0)) throw InputError("focal length must be positive");
  return k;
}

Mat3 Skew(const Vec3& v) {
  Mat3 S;
  S << 0, -v.z(), v.y(), v.z(), 0, -v.x(), -v.y(), v.x(), 0;
  return S;
}

FundamentalMatrix FundamentalMatrix::Normalized(const Mat3& raw) {
  if (!raw.allFinite()) throw InputError("fundamental matrix is not finite");
  const double norm = raw.norm();
  if (!(norm > 0.0)) throw InputError("fundamental matrix is zero");
  Mat3 m = raw / norm;
  Eigen::Index r = 0, c = 0;
  m.cwiseAbs().maxCoeff(&r, &c);
  if (m(r, c) < 0) m = -m;
  return {m};
}

FundamentalMatrix FundamentalFromPose(const CameraIntrinsics& k1,
                                      const CameraIntrinsics& k2,
                                      const RelativePose& rel) {
  if (!(rel.translation.norm() > kAlgebraTol)) {
    throw DegenerateTranslation(
        "fundamental matrix is undefined for zero baseline");
  }
  const Mat3 R = QuatToRotmat(QuatNormalize(rel.rotation));
  const Mat3 F =
      k2.KInverse().transpose() * Skew(rel.translation) * R * k1.KInverse();
  return FundamentalMatrix::Normalized(F);
}

EpipolarLine ComputeEpipolarLine(const FundamentalMatrix& F, const Vec2& x,
                                 EpipolarSide side) {
  const Vec3 xh = Homogeneous(x);
  const Vec3 l = side == EpipolarSide::kLeftToRight
                     ? Vec3(F.matrix * xh)
                     : Vec3(F.matrix.transpose() * xh);
  const double ab = std::hypot(l.x(), l.y());
  if (!(ab > 1e-12 * F.matrix.norm() * xh.norm())) {
    throw DegenerateLine("point coincides with the epipole");
  }
  return {l.x() / ab, l.y() / ab, l.z() / ab};
}

double EpipolarResidual(const FundamentalMatrix& F, const Vec2& x1,
                        const Vec2& x2) {
  const Vec3 a = Homogeneous(x1), b = Homogeneous(x2);
  return std::abs(b.dot(F.matrix * a)) / (a.norm() * b.norm());
}

std::vector<Keypoint> ReadKeypointsFile(std::istream& in) {
  csv::LineReader reader(in);
  csv::ExpectHeader(reader, kKeypointColumns);
  std::vector<Keypoint> keypoints;
  std::string line;
  while (reader.Next(line)) {
    if (csv::Trim(line).empty()) continue;
    const std::size_t line_no = reader.line_no();
    const auto fields = csv::SplitLine(line, line_no);
    RequireFieldCount(fields, kKeypointColumns.size(), line_no);
    if (csv::Trim(fields[0]).empty()) throw ParseError(line_no, "empty image");
    keypoints.push_back({fields[0],
                         {csv::ParseReal(fields[1], line_no),
                          csv::ParseReal(fields[2], line_no)},
                         csv::ParseInt(fields[3], line_no)});
  }
  return keypoints;
}

void WriteKeypointsFile(std::ostream& out,
                        std::span<const Keypoint> keypoints) {
  out << csv::Join(kKeypointColumns) << '\n';
  for (const auto& k : keypoints) {
    out << csv::Escape(k.image) << ',' << csv::FormatReal(k.position.x()) << ','
        << csv::FormatReal(k.position.y()) << ',' << k.keypoint_id << '\n';
  }
}

std::vector<ExternalFundamental> ReadFundamentalFile(std::istream& in) {
  csv::LineReader reader(in);
  csv::ExpectHeader(reader, kFundamentalColumns);
  std::vector<ExternalFundamental> rows;
  std::string line;
  while (reader.Next(line)) {
    if (csv::Trim(line).empty()) continue;
    const std::size_t line_no = reader.line_no();
    const auto fields = csv::SplitLine(line, line_no);
    RequireFieldCount(fields, kFundamentalColumns.size(), line_no);
    ExternalFundamental row;
    row.image_a = fields[0];
    row.image_b = fields[1];
    for (int i = 0; i < 9; ++i) {
      row.matrix(i / 3, i % 3) = csv::ParseReal(fields[2 + i], line_no);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

void WriteFundamentalFile(std::ostream& out,
                          std::span<const ExternalFundamental> rows) {
  out << csv::Join(kFundamentalColumns) << '\n';
  for (const auto& r : rows) {
    out << csv::Escape(r.image_a) << ',' << csv::Escape(r.image_b);
    for (int i = 0; i < 9; ++i) {
      out << ',' << csv::FormatReal(r.matrix(i / 3, i % 3));
    }
    out << '\n';
  }
}

EpilineReport BuildEpilineReport(
    std::span<const PairFundamentals> pairs, std::span<const Keypoint> keypoints,
    const std::optional<CameraIntrinsics>& bounds) {
  EpilineReport report;
  if (keypoints.empty()) return report;

  std::map<std::string, std::vector<const Keypoint*>> by_image;
  for (const auto& k : keypoints) by_image[k.image].push_back(&k);

  bool any_pair_matched = false;
  for (const auto& pair : pairs) {
    const auto a_it = by_image.find(pair.image_a);
    if (a_it == by_image.end()) continue;
    any_pair_matched = true;

    std::map<std::int64_t, Vec2> in_b;
    if (const auto b_it = by_image.find(pair.image_b); b_it != by_image.end()) {
      for (const Keypoint* k : b_it->second) in_b.emplace(k->keypoint_id, k->position);
    }
    const std::string pair_id = pair.image_a + "|" + pair.image_b;

    for (const Keypoint* k : a_it->second) {
      if (bounds && !bounds->Contains(k->position)) ++report.keypoints_outside_image;
      for (const auto& [source, F] : pair.sources) {
        EpilineRecord rec;
        try {
          rec.line = ComputeEpipolarLine(F, k->position, EpipolarSide::kLeftToRight);
        } catch (const DegenerateLine&) {
          ++report.degenerate_lines;
          continue;
        }
        rec.image_pair = pair_id;
        rec.keypoint_id = k->keypoint_id;
        rec.source = source;
        if (const auto m = in_b.find(k->keypoint_id); m != in_b.end()) {
          rec.residual_px = rec.line.Distance(m->second);
        }
        report.records.push_back(std::move(rec));
      }
    }
  }
  if (!any_pair_matched) {
    throw MissingKeypoints(
        "no keypoints found for the first image of any requested pair");
  }
  return report;
}

void WriteEpilineReport(std::ostream& out, const EpilineReport& report) {
  out << csv::Join(kReportColumns) << '\n';
  for (const auto& r : report.records) {
    out << csv::Escape(r.image_pair) << ',' << r.keypoint_id << ','
        << csv::Escape(r.source) << ',' << csv::FormatReal(r.line.a) << ','
        << csv::FormatReal(r.line.b) << ',' << csv::FormatReal(r.line.c) << ',';
    if (r.residual_px) out << csv::FormatReal(*r.residual_px);
    out << '\n';
  }
}

std::vector<EpilineRecord> ReadEpilineReport(std::istream& in) {
  csv::LineReader reader(in);
  csv::ExpectHeader(reader, kReportColumns);
  std::vector<EpilineRecord> records;
  std::string line;
  while (reader.Next(line)) {
    if (csv::Trim(line).empty()) continue;
    const std::size_t line_no = reader.line_no();
    const auto fields = csv::SplitLine(line, line_no);
    RequireFieldCount(fields, kReportColumns.size(), line_no);
    EpilineRecord rec;
    rec.image_pair = fields[0];
    rec.keypoint_id = csv::ParseInt(fields[1], line_no);
    rec.source = fields[2];
    rec.line = {csv::ParseReal(fields[3], line_no),
                csv::ParseReal(fields[4], line_no),
                csv::ParseReal(fields[5], line_no)};
    if (!csv::Trim(fields[6]).empty()) {
      rec.residual_px = csv::ParseReal(fields[6], line_no);
    }
    records.push_back(std::move(rec));
  }
  return records;
}

}  // namespace relpose

#include "relpose/sfm_io.h"

#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <unordered_set>

#include "csv.h"
#include "relpose/errors.h"

namespace relpose {

namespace {

using csv::FormatReal;
using csv::ParseInt;
using csv::ParseReal;

const std::vector<std::string> kPoseTableColumns = {
    "image", "sequence_id", "qw", "qx", "qy", "qz", "tx", "ty", "tz"};
const std::vector<std::string> kPairColumns = {
    "image_a", "image_b", "sequence_id", "qw",  "qx",  "qy", "qz",
    "tx",      "ty",      "tz",          "tnx", "tny", "tnz"};
const std::vector<std::string> kPredictionColumns = {
    "image_a", "image_b", "qw", "qx", "qy", "qz", "tx", "ty", "tz"};

Quaternion ParseQuaternion(std::span<const std::string_view> tok,
                           std::size_t line_no) {
  Quaternion q{ParseReal(tok[0], line_no), ParseReal(tok[1], line_no),
               ParseReal(tok[2], line_no), ParseReal(tok[3], line_no)};
  if (!(q.Norm() > kMinQuaternionNorm)) {
    throw ParseError(line_no, "quaternion cannot be normalized");
  }
  return q;
}

Vec3 ParseVec3(std::span<const std::string_view> tok, std::size_t line_no) {
  return {ParseReal(tok[0], line_no), ParseReal(tok[1], line_no),
          ParseReal(tok[2], line_no)};
}

std::vector<std::string_view> Views(const std::vector<std::string>& fields) {
  return {fields.begin(), fields.end()};
}

void RequireFieldCount(const std::vector<std::string>& fields,
                       std::size_t expected, std::size_t line_no) {
  if (fields.size() != expected) {
    throw ParseError(line_no, "expected " + std::to_string(expected) +
                                  " fields, found " +
                                  std::to_string(fields.size()));
  }
}

std::string RequireName(std::string_view field, std::size_t line_no,
                        const char* column) {
  const std::string_view trimmed = csv::Trim(field);
  if (trimmed.empty()) {
    throw ParseError(line_no, std::string("empty ") + column);
  }
  return std::string(field);
}

void AppendQuaternion(std::vector<std::string>& fields, const Quaternion& q) {
  fields.push_back(FormatReal(q.w));
  fields.push_back(FormatReal(q.x));
  fields.push_back(FormatReal(q.y));
  fields.push_back(FormatReal(q.z));
}

void AppendVec3(std::vector<std::string>& fields, const Vec3& v) {
  fields.push_back(FormatReal(v.x()));
  fields.push_back(FormatReal(v.y()));
  fields.push_back(FormatReal(v.z()));
}

std::string SpaceJoin(std::initializer_list<double> values) {
  std::string out;
  for (double v : values) {
    if (!out.empty()) out += ' ';
    out += FormatReal(v);
  }
  return out;
}

bool IsCommentOrBlank(std::string_view line) {
  const std::string_view t = csv::Trim(line);
  return t.empty() || t.front() == '#';
}

}  // namespace

int ColmapModelParamCount(const std::string& model_name) {
  static const std::map<std::string, int> kCounts = {
      {"SIMPLE_PINHOLE", 3}, {"PINHOLE", 4},
      {"SIMPLE_RADIAL", 4},  {"RADIAL", 5},
      {"OPENCV", 8},         {"OPENCV_FISHEYE", 8},
      {"FULL_OPENCV", 12},   {"FOV", 5},
      {"SIMPLE_RADIAL_FISHEYE", 4},
      {"RADIAL_FISHEYE", 5}, {"THIN_PRISM_FISHEYE", 12}};
  const auto it = kCounts.find(model_name);
  return it == kCounts.end() ? -1 : it->second;
}

std::vector<ColmapImageRecord> ParseColmapImages(std::istream& in) {
  std::vector<ColmapImageRecord> records;
  std::unordered_set<std::int64_t> seen_ids;
  csv::LineReader reader(in);
  std::string line;
  while (reader.Next(line)) {
    if (IsCommentOrBlank(line)) continue;
    const std::size_t line_no = reader.line_no();
    const auto tok = csv::SplitWhitespace(line);
    if (tok.size() < 10) {
      throw ParseError(line_no, "image record needs 10 fields "
                                "(IMAGE_ID QW QX QY QZ TX TY TZ CAMERA_ID NAME), found " +
                                    std::to_string(tok.size()));
    }
    ColmapImageRecord rec;
    rec.image_id = ParseInt(tok[0], line_no);
    rec.rotation = ParseQuaternion(std::span(tok).subspan(1, 4), line_no);
    rec.translation_raw = ParseVec3(std::span(tok).subspan(5, 3), line_no);
    rec.camera_id = ParseInt(tok[8], line_no);
    // NAME runs to the end of the line so names with spaces survive.
    const std::size_t name_start =
        static_cast<std::size_t>(tok[9].data() - line.data());
    rec.name = std::string(csv::Trim(std::string_view(line).substr(name_start)));

    if (!seen_ids.insert(rec.image_id).second) {
      throw DuplicateImageId("line " + std::to_string(line_no) +
                             ": duplicate IMAGE_ID " +
                             std::to_string(rec.image_id));
    }
    records.push_back(std::move(rec));

    // POINTS2D[] line, possibly empty.
    reader.Next(line);
  }
  return records;
}

std::vector<ColmapCameraRecord> ParseColmapCameras(std::istream& in) {
  std::vector<ColmapCameraRecord> cameras;
  csv::LineReader reader(in);
  std::string line;
  while (reader.Next(line)) {
    if (IsCommentOrBlank(line)) continue;
    const std::size_t line_no = reader.line_no();
    const auto tok = csv::SplitWhitespace(line);
    if (tok.size() < 4) {
      throw ParseError(line_no,
                       "camera record needs CAMERA_ID MODEL WIDTH HEIGHT");
    }
    ColmapCameraRecord cam;
    cam.camera_id = ParseInt(tok[0], line_no);
    cam.model_name = std::string(tok[1]);
    cam.width = ParseInt(tok[2], line_no);
    cam.height = ParseInt(tok[3], line_no);
    if (cam.width <= 0 || cam.height <= 0) {
      throw ParseError(line_no, "camera width and height must be positive");
    }
    for (std::size_t i = 4; i < tok.size(); ++i) {
      cam.params.push_back(ParseReal(tok[i], line_no));
    }
    const int expected = ColmapModelParamCount(cam.model_name);
    if (expected >= 0 && static_cast<int>(cam.params.size()) != expected) {
      throw ParseError(line_no, cam.model_name + " expects " +
                                    std::to_string(expected) +
                                    " params, found " +
                                    std::to_string(cam.params.size()));
    }
    cameras.push_back(std::move(cam));
  }
  return cameras;
}

void WriteColmapImages(std::ostream& out,
                       std::span<const ColmapImageRecord> records) {
  out << "# Image list with two lines of data per image:\n"
         "#   IMAGE_ID, QW, QX, QY, QZ, TX, TY, TZ, CAMERA_ID, NAME\n"
         "#   POINTS2D[] as (X, Y, POINT3D_ID)\n"
         "# Number of images: "
      << records.size() << "\n";
  for (const auto& r : records) {
    out << r.image_id << ' '
        << SpaceJoin({r.rotation.w, r.rotation.x, r.rotation.y, r.rotation.z,
                      r.translation_raw.x(), r.translation_raw.y(),
                      r.translation_raw.z()})
        << ' ' << r.camera_id << ' ' << r.name << "\n\n";
  }
}

void WriteColmapCameras(std::ostream& out,
                        std::span<const ColmapCameraRecord> cameras) {
  out << "# Camera list with one line of data per camera:\n"
         "#   CAMERA_ID, MODEL, WIDTH, HEIGHT, PARAMS[]\n"
         "# Number of cameras: "
      << cameras.size() << "\n";
  for (const auto& c : cameras) {
    out << c.camera_id << ' ' << c.model_name << ' ' << c.width << ' '
        << c.height;
    for (double p : c.params) out << ' ' << FormatReal(p);
    out << '\n';
  }
}

std::vector<DatasetPoseRecord> ParseLandmarkPoses(std::istream& in) {
  std::vector<DatasetPoseRecord> records;
  csv::LineReader reader(in);
  std::string line;
  for (int i = 0; i < 3; ++i) {
    if (!reader.Next(line)) return records;
  }
  while (reader.Next(line)) {
    const auto tok = csv::SplitWhitespace(line);
    if (tok.empty()) continue;
    const std::size_t line_no = reader.line_no();
    if (tok.size() != 8) {
      throw ParseError(line_no, "pose row needs 8 fields "
                                "(ImageFile X Y Z W P Q R), found " +
                                    std::to_string(tok.size()));
    }
    DatasetPoseRecord rec;
    rec.image_path = std::string(tok[0]);
    rec.translation = ParseVec3(std::span(tok).subspan(1, 3), line_no);
    rec.rotation = ParseQuaternion(std::span(tok).subspan(4, 4), line_no);
    records.push_back(std::move(rec));
  }
  return records;
}

void WriteLandmarkPoses(std::ostream& out,
                        std::span<const DatasetPoseRecord> records) {
  out << "Visual Landmark Dataset V1\n"
         "ImageFile, Camera Position [X Y Z W P Q R]\n\n";
  for (const auto& r : records) {
    out << r.image_path << ' '
        << SpaceJoin({r.translation.x(), r.translation.y(), r.translation.z(),
                      r.rotation.w, r.rotation.x, r.rotation.y, r.rotation.z})
        << '\n';
  }
}

std::vector<PoseTableRow> ReadPoseTable(std::istream& in) {
  csv::LineReader reader(in);
  csv::ExpectHeader(reader, kPoseTableColumns);
  std::vector<PoseTableRow> rows;
  std::string line;
  while (reader.Next(line)) {
    if (csv::Trim(line).empty()) continue;
    const std::size_t line_no = reader.line_no();
    const auto fields = csv::SplitLine(line, line_no);
    RequireFieldCount(fields, kPoseTableColumns.size(), line_no);
    const auto v = Views(fields);
    PoseTableRow row;
    row.image = RequireName(fields[0], line_no, "image");
    row.sequence_id = fields[1];
    row.rotation = ParseQuaternion(std::span(v).subspan(2, 4), line_no);
    row.translation = ParseVec3(std::span(v).subspan(6, 3), line_no);
    rows.push_back(std::move(row));
  }
  return rows;
}

void WritePoseTable(std::ostream& out, std::span<const PoseTableRow> rows) {
  out << csv::Join(kPoseTableColumns) << '\n';
  for (const auto& r : rows) {
    std::vector<std::string> f = {csv::Escape(r.image),
                                  csv::Escape(r.sequence_id)};
    AppendQuaternion(f, r.rotation);
    AppendVec3(f, r.translation);
    out << csv::Join(f) << '\n';
  }
}

std::vector<PairFileRow> ReadPairsFile(std::istream& in) {
  csv::LineReader reader(in);
  csv::ExpectHeader(reader, kPairColumns);
  std::vector<PairFileRow> rows;
  std::string line;
  while (reader.Next(line)) {
    if (csv::Trim(line).empty()) continue;
    const std::size_t line_no = reader.line_no();
    const auto fields = csv::SplitLine(line, line_no);
    RequireFieldCount(fields, kPairColumns.size(), line_no);
    const auto v = Views(fields);
    PairFileRow row;
    row.image_a = RequireName(fields[0], line_no, "image_a");
    row.image_b = RequireName(fields[1], line_no, "image_b");
    row.sequence_id = fields[2];
    const Quaternion q = ParseQuaternion(std::span(v).subspan(3, 4), line_no);
    const Vec3 t_metric = ParseVec3(std::span(v).subspan(7, 3), line_no);
    const Vec3 t_unit = ParseVec3(std::span(v).subspan(10, 3), line_no);
    if (std::abs(q.Norm() - 1.0) > kValidationTol) {
      throw InvariantViolation("line " + std::to_string(line_no) +
                               ": rotation is not a unit quaternion");
    }
    if (std::abs(t_unit.norm() - 1.0) > kAlgebraTol) {
      throw InvariantViolation(
          "line " + std::to_string(line_no) +
          ": normalized translation has norm " + FormatReal(t_unit.norm()));
    }
    row.label_normalized = {q, t_unit};
    row.label_metric = {q, t_metric};
    rows.push_back(std::move(row));
  }
  return rows;
}

void WritePairsFile(std::ostream& out, std::span<const PairFileRow> rows) {
  out << csv::Join(kPairColumns) << '\n';
  for (const auto& r : rows) {
    if (!(r.label_normalized.rotation == r.label_metric.rotation)) {
      throw InvariantViolation("pair " + r.image_a + " / " + r.image_b +
                               ": label sets disagree on rotation");
    }
    std::vector<std::string> f = {csv::Escape(r.image_a),
                                  csv::Escape(r.image_b),
                                  csv::Escape(r.sequence_id)};
    AppendQuaternion(f, r.label_metric.rotation);
    AppendVec3(f, r.label_metric.translation);
    AppendVec3(f, r.label_normalized.translation);
    out << csv::Join(f) << '\n';
  }
}

std::vector<PredictionRow> ReadPredictionsFile(std::istream& in) {
  csv::LineReader reader(in);
  csv::ExpectHeader(reader, kPredictionColumns);
  std::vector<PredictionRow> rows;
  std::string line;
  while (reader.Next(line)) {
    if (csv::Trim(line).empty()) continue;
    const std::size_t line_no = reader.line_no();
    const auto fields = csv::SplitLine(line, line_no);
    RequireFieldCount(fields, kPredictionColumns.size(), line_no);
    const auto v = Views(fields);
    PredictionRow row;
    row.image_a = RequireName(fields[0], line_no, "image_a");
    row.image_b = RequireName(fields[1], line_no, "image_b");
    row.pose.rotation = ParseQuaternion(std::span(v).subspan(2, 4), line_no);
    row.pose.translation = ParseVec3(std::span(v).subspan(6, 3), line_no);
    rows.push_back(std::move(row));
  }
  return rows;
}

void WritePredictionsFile(std::ostream& out,
                          std::span<const PredictionRow> rows) {
  out << csv::Join(kPredictionColumns) << '\n';
  for (const auto& r : rows) {
    std::vector<std::string> f = {csv::Escape(r.image_a),
                                  csv::Escape(r.image_b)};
    AppendQuaternion(f, r.pose.rotation);
    AppendVec3(f, r.pose.translation);
    out << csv::Join(f) << '\n';
  }
}

std::vector<FeatureRow> ReadFeaturesFile(std::istream& in) {
  csv::LineReader reader(in);
  std::string line;
  if (!reader.Next(line)) throw ParseError(1, "missing header line");
  const auto header = csv::SplitLine(line, 1);
  if (header.size() < 2 || csv::Trim(header[0]) != "image_a" ||
      csv::Trim(header[1]) != "image_b") {
    throw ParseError(1, "header must be image_a,image_b,f0,...");
  }
  for (std::size_t i = 2; i < header.size(); ++i) {
    if (csv::Trim(header[i]) != "f" + std::to_string(i - 2)) {
      throw ParseError(1, "feature column " + std::to_string(i - 2) +
                              " should be 'f" + std::to_string(i - 2) + "'");
    }
  }
  const std::size_t dim = header.size() - 2;
  std::vector<FeatureRow> rows;
  while (reader.Next(line)) {
    if (csv::Trim(line).empty()) continue;
    const std::size_t line_no = reader.line_no();
    const auto fields = csv::SplitLine(line, line_no);
    RequireFieldCount(fields, header.size(), line_no);
    FeatureRow row;
    row.image_a = RequireName(fields[0], line_no, "image_a");
    row.image_b = RequireName(fields[1], line_no, "image_b");
    row.features.resize(static_cast<Eigen::Index>(dim));
    for (std::size_t i = 0; i < dim; ++i) {
      row.features(static_cast<Eigen::Index>(i)) =
          ParseReal(fields[i + 2], line_no);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

void WriteFeaturesFile(std::ostream& out, std::span<const FeatureRow> rows) {
  const Eigen::Index dim = rows.empty() ? 0 : rows.front().features.size();
  if (dim == 0 && !rows.empty()) {
    throw InvariantViolation("feature rows must have at least one value");
  }
  std::vector<std::string> header = {"image_a", "image_b"};
  for (Eigen::Index i = 0; i < dim; ++i) header.push_back("f" + std::to_string(i));
  out << csv::Join(header) << '\n';
  for (const auto& r : rows) {
    if (r.features.size() != dim) {
      throw DimensionMismatch("feature rows have inconsistent dimensions");
    }
    std::vector<std::string> f = {csv::Escape(r.image_a),
                                  csv::Escape(r.image_b)};
    for (Eigen::Index i = 0; i < dim; ++i) f.push_back(FormatReal(r.features(i)));
    out << csv::Join(f) << '\n';
  }
}

std::ifstream OpenInputFile(const std::filesystem::path& path) {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) {
    throw FileError(path.string(), "no such file");
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FileError(path.string(), "cannot open for reading");
  return in;
}

std::ofstream OpenOutputFile(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FileError(path.string(), "cannot open for writing");
  return out;
}

}  // namespace relpose

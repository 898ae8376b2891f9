#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "relpose/pose_math.h"

namespace relpose {

// One entry of a COLMAP images.txt model. The pose is COLMAP's
// world-to-camera projection (q', t').
struct ColmapImageRecord {
  std::int64_t image_id = 0;
  Quaternion rotation;
  Vec3 translation_raw = Vec3::Zero();
  std::int64_t camera_id = 0;
  std::string name;

  friend bool operator==(const ColmapImageRecord&,
                         const ColmapImageRecord&) = default;
};

struct ColmapCameraRecord {
  std::int64_t camera_id = 0;
  std::string model_name;
  std::int64_t width = 0;
  std::int64_t height = 0;
  std::vector<double> params;

  friend bool operator==(const ColmapCameraRecord&,
                         const ColmapCameraRecord&) = default;
};

// Row of a Cambridge Landmarks style pose list ("ImageFile X Y Z W P Q R").
struct DatasetPoseRecord {
  std::string image_path;
  Vec3 translation = Vec3::Zero();
  Quaternion rotation;

  friend bool operator==(const DatasetPoseRecord&,
                         const DatasetPoseRecord&) = default;
};

// Absolute pose keyed by image, as written by `relpose convert`.
struct PoseTableRow {
  std::string image;
  std::string sequence_id;
  Quaternion rotation;
  Vec3 translation = Vec3::Zero();

  friend bool operator==(const PoseTableRow&, const PoseTableRow&) = default;
};

// An image pair with both label sets. The two labels share one rotation;
// label_normalized has a unit translation, label_metric the metric one.
struct PairFileRow {
  std::string image_a;
  std::string image_b;
  std::string sequence_id;
  RelativePose label_normalized;
  RelativePose label_metric;

  friend bool operator==(const PairFileRow&, const PairFileRow&) = default;
};

enum class LabelSet {
  // Unit translation (first set).
  kNormalized,
  // Metric translation (second set).
  kMetric,
};

inline const RelativePose& Label(const PairFileRow& row, LabelSet set) {
  return set == LabelSet::kNormalized ? row.label_normalized : row.label_metric;
}

struct PredictionRow {
  std::string image_a;
  std::string image_b;
  RelativePose pose;

  friend bool operator==(const PredictionRow&, const PredictionRow&) = default;
};

// Per-pair feature vector consumed by the regressor.
struct FeatureRow {
  std::string image_a;
  std::string image_b;
  Eigen::VectorXd features;

  friend bool operator==(const FeatureRow& a, const FeatureRow& b) {
    return a.image_a == b.image_a && a.image_b == b.image_b &&
           a.features.size() == b.features.size() &&
           a.features == b.features;
  }
};

// Number of intrinsic parameters for a known COLMAP camera model, or -1.
int ColmapModelParamCount(const std::string& model_name);

// COLMAP text model. Each image record spans two physical lines; the second
// (2D observations) is skipped. Lines starting with '#' are comments.
std::vector<ColmapImageRecord> ParseColmapImages(std::istream& in);
std::vector<ColmapCameraRecord> ParseColmapCameras(std::istream& in);
void WriteColmapImages(std::ostream& out,
                       std::span<const ColmapImageRecord> records);
void WriteColmapCameras(std::ostream& out,
                        std::span<const ColmapCameraRecord> cameras);

// Three header lines, then one whitespace-separated record per line.
std::vector<DatasetPoseRecord> ParseLandmarkPoses(std::istream& in);
void WriteLandmarkPoses(std::ostream& out,
                        std::span<const DatasetPoseRecord> records);

std::vector<PoseTableRow> ReadPoseTable(std::istream& in);
void WritePoseTable(std::ostream& out, std::span<const PoseTableRow> rows);

// Columns: image_a,image_b,sequence_id,qw,qx,qy,qz,tx,ty,tz,tnx,tny,tnz.
// Reading raises InvariantViolation when (tnx,tny,tnz) is not unit within
// 1e-9 or the quaternion is not unit within 1e-6.
std::vector<PairFileRow> ReadPairsFile(std::istream& in);
void WritePairsFile(std::ostream& out, std::span<const PairFileRow> rows);

// Columns: image_a,image_b,qw,qx,qy,qz,tx,ty,tz.
std::vector<PredictionRow> ReadPredictionsFile(std::istream& in);
void WritePredictionsFile(std::ostream& out,
                          std::span<const PredictionRow> rows);

// Columns: image_a,image_b,f0,...,f{D-1}. All rows share one dimension.
std::vector<FeatureRow> ReadFeaturesFile(std::istream& in);
void WriteFeaturesFile(std::ostream& out, std::span<const FeatureRow> rows);

// Opens a file for reading or writing; throws FileError naming the path.
std::ifstream OpenInputFile(const std::filesystem::path& path);
std::ofstream OpenOutputFile(const std::filesystem::path& path);

}  // namespace relpose

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "relpose/pose_math.h"
#include "relpose/sfm_io.h"

namespace relpose {

struct RigidTransform {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  static RigidTransform Identity() { return {}; }
  static RigidTransform FromPose(const AbsolutePose& pose);

  Mat4 Matrix() const { return ToHomogeneous(rotation, translation); }
  RigidTransform Inverse() const {
    return {rotation.transpose(), -(rotation.transpose() * translation)};
  }
  RigidTransform operator*(const RigidTransform& rhs) const {
    return {rotation * rhs.rotation, rotation * rhs.translation + translation};
  }
  RelativePose ToRelativePose() const {
    return {RotmatToQuat(rotation), translation};
  }
};

// Camera trajectory translation R'^-1 t' from a COLMAP record.
Vec3 ColmapTrajectoryTranslation(const ColmapImageRecord& record);

// (R_TRF, t_TRF) = (R'_ff^-1, -t_ff) built from the earliest frame.
struct FirstFrameTransform {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();
};
FirstFrameTransform ComputeFirstFrameTransform(const ColmapImageRecord& first);

// R_abs_i = R'_i R_TRF and t_abs_i = t_i + t_TRF for every record. Records
// must already be in timestamp order. Throws EmptySequence on no input.
std::vector<AbsolutePose> ApplyRereference(
    std::span<const ColmapImageRecord> records, const FirstFrameTransform& trf);

// Sorts by image name (natural order) and re-references to the first frame.
std::vector<AbsolutePose> RereferenceToFirstFrame(
    std::vector<ColmapImageRecord> records);

// T_rel_i = T_abs_i * T_abs_{i-1}^-1 for i = 2..N. Throws EmptySequence on
// no poses and SingleFrame on one.
std::vector<RigidTransform> ConsecutiveRelative(
    std::span<const AbsolutePose> poses);

// Orders names with embedded numbers by value: "f2" < "f10".
bool NaturalLess(std::string_view a, std::string_view b);
void SortByTimestamp(std::vector<ColmapImageRecord>& records);

enum class PairingMode { kRandomWithinSequence, kConsecutive };

struct PairingConfig {
  int pairs_per_image = 8;
  // Maximum |index_a - index_b| inside a sequence; unset means unlimited.
  std::optional<int> max_index_gap;
  std::uint64_t rng_seed = 0;
  PairingMode mode = PairingMode::kRandomWithinSequence;
  // Also emit every pair in reverse order (b, a).
  bool both_directions = false;
};

struct SequencePairCount {
  std::string sequence_id;
  std::size_t frames = 0;
  std::size_t pairs = 0;
  std::size_t degenerate_dropped = 0;
};

struct PairingSummary {
  std::uint64_t seed = 0;
  std::string mode;
  int pairs_per_image = 0;
  std::optional<int> max_index_gap;
  bool both_directions = false;
  std::size_t frames = 0;
  std::size_t pairs_emitted = 0;
  std::size_t degenerate_dropped = 0;
  std::vector<SequencePairCount> sequences;
  // Sequences with fewer than two frames.
  std::vector<std::string> skipped_sequences;

  std::string ToJson() const;
};

struct PairingResult {
  std::vector<PairFileRow> rows;
  PairingSummary summary;
};

// Pairs frames that share a sequence_id. Within a sequence, frames are put
// in natural name order and every pair is written (earlier, later). In
// random mode each frame draws min(k, eligible) distinct partners without
// replacement; the union of all draws is emitted once per unordered pair.
// Each sequence has its own RNG stream derived from (seed, sequence_id), so
// output does not depend on which other sequences are present.
// Pairs with |t_rel| < 1e-9 are dropped and counted.
PairingResult GeneratePairs(std::span<const PoseTableRow> poses,
                            const PairingConfig& cfg);

// (first set, second set): unit translation and metric translation, same
// unit rotation. Throws DegenerateTranslation when |t| <= 1e-9.
std::pair<RelativePose, RelativePose> MakeLabelSets(const RelativePose& rel);

}  // namespace relpose

#include "relpose/dataset_pipeline.h"

#include <algorithm>
#include <cctype>
#include <map>
#include <numeric>
#include <set>

#include <nlohmann/json.hpp>

#include "relpose/errors.h"
#include "relpose/random.h"

namespace relpose {

namespace {

bool IsDigit(char c) { return c >= '0' && c <= '9'; }

std::uint64_t Fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

const char* ModeName(PairingMode mode) {
  return mode == PairingMode::kConsecutive ? "consecutive"
                                           : "random-within-sequence";
}

// Index pairs (i < j) for one sequence of n frames.
std::vector<std::pair<std::size_t, std::size_t>> SelectPairs(
    std::size_t n, const PairingConfig& cfg, Rng& rng) {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  if (cfg.mode == PairingMode::kConsecutive) {
    for (std::size_t i = 0; i + 1 < n; ++i) pairs.emplace_back(i, i + 1);
    return pairs;
  }

  const std::size_t gap = cfg.max_index_gap
                              ? static_cast<std::size_t>(*cfg.max_index_gap)
                              : n;
  std::set<std::pair<std::size_t, std::size_t>> chosen;
  std::vector<std::size_t> candidates;
  for (std::size_t i = 0; i < n; ++i) {
    candidates.clear();
    const std::size_t lo = i > gap ? i - gap : 0;
    const std::size_t hi = std::min(n - 1, i + gap);
    for (std::size_t j = lo; j <= hi; ++j) {
      if (j != i) candidates.push_back(j);
    }
    const std::size_t draws = std::min(
        static_cast<std::size_t>(cfg.pairs_per_image), candidates.size());
    // Partial Fisher-Yates: the first `draws` slots become the sample.
    for (std::size_t d = 0; d < draws; ++d) {
      const std::size_t pick = d + rng.UniformIndex(candidates.size() - d);
      std::swap(candidates[d], candidates[pick]);
      const std::size_t j = candidates[d];
      chosen.emplace(std::min(i, j), std::max(i, j));
    }
  }
  pairs.assign(chosen.begin(), chosen.end());
  return pairs;
}

AbsolutePose ToAbsolute(const PoseTableRow& row) {
  return {QuatNormalize(row.rotation), row.translation, row.image};
}

}  // namespace

RigidTransform RigidTransform::FromPose(const AbsolutePose& pose) {
  return {QuatToRotmat(QuatNormalize(pose.rotation)), pose.translation};
}

Vec3 ColmapTrajectoryTranslation(const ColmapImageRecord& record) {
  const Mat3 R = QuatToRotmat(QuatNormalize(record.rotation));
  return R.transpose() * record.translation_raw;
}

FirstFrameTransform ComputeFirstFrameTransform(const ColmapImageRecord& first) {
  const Mat3 R_ff = QuatToRotmat(QuatNormalize(first.rotation));
  return {R_ff.transpose(), -ColmapTrajectoryTranslation(first)};
}

std::vector<AbsolutePose> ApplyRereference(
    std::span<const ColmapImageRecord> records, const FirstFrameTransform& trf) {
  if (records.empty()) throw EmptySequence("no records to re-reference");
  std::vector<AbsolutePose> poses;
  poses.reserve(records.size());
  for (const auto& rec : records) {
    const Mat3 R = QuatToRotmat(QuatNormalize(rec.rotation));
    AbsolutePose pose;
    pose.rotation = RotmatToQuat(R * trf.rotation);
    pose.translation = ColmapTrajectoryTranslation(rec) + trf.translation;
    pose.frame_id = rec.name;
    poses.push_back(std::move(pose));
  }
  return poses;
}

std::vector<AbsolutePose> RereferenceToFirstFrame(
    std::vector<ColmapImageRecord> records) {
  if (records.empty()) throw EmptySequence("no records to re-reference");
  SortByTimestamp(records);
  return ApplyRereference(records, ComputeFirstFrameTransform(records.front()));
}

std::vector<RigidTransform> ConsecutiveRelative(
    std::span<const AbsolutePose> poses) {
  if (poses.empty()) throw EmptySequence("no poses");
  if (poses.size() == 1) throw SingleFrame("need at least two poses");
  std::vector<RigidTransform> rel;
  rel.reserve(poses.size() - 1);
  RigidTransform prev = RigidTransform::FromPose(poses[0]);
  for (std::size_t i = 1; i < poses.size(); ++i) {
    const RigidTransform cur = RigidTransform::FromPose(poses[i]);
    rel.push_back(cur * prev.Inverse());
    prev = cur;
  }
  return rel;
}

bool NaturalLess(std::string_view a, std::string_view b) {
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (IsDigit(a[i]) && IsDigit(b[j])) {
      std::size_t ie = i, je = j;
      while (ie < a.size() && IsDigit(a[ie])) ++ie;
      while (je < b.size() && IsDigit(b[je])) ++je;
      std::string_view na = a.substr(i, ie - i), nb = b.substr(j, je - j);
      while (na.size() > 1 && na.front() == '0') na.remove_prefix(1);
      while (nb.size() > 1 && nb.front() == '0') nb.remove_prefix(1);
      if (na.size() != nb.size()) return na.size() < nb.size();
      if (na != nb) return na < nb;
      i = ie;
      j = je;
    } else {
      if (a[i] != b[j]) {
        return static_cast<unsigned char>(a[i]) <
               static_cast<unsigned char>(b[j]);
      }
      ++i;
      ++j;
    }
  }
  if ((a.size() - i) != (b.size() - j)) return (a.size() - i) < (b.size() - j);
  // Equal under natural order ("f01" vs "f1"): fall back to bytes.
  return a < b;
}

void SortByTimestamp(std::vector<ColmapImageRecord>& records) {
  std::stable_sort(records.begin(), records.end(),
                   [](const ColmapImageRecord& x, const ColmapImageRecord& y) {
                     return NaturalLess(x.name, y.name);
                   });
}

std::pair<RelativePose, RelativePose> MakeLabelSets(const RelativePose& rel) {
  const double norm = rel.translation.norm();
  if (!(norm > kAlgebraTol)) {
    throw DegenerateTranslation("relative translation is (near) zero");
  }
  const Quaternion q = QuatCanonicalize(QuatNormalize(rel.rotation));
  return {RelativePose{q, rel.translation / norm},
          RelativePose{q, rel.translation}};
}

PairingResult GeneratePairs(std::span<const PoseTableRow> poses,
                            const PairingConfig& cfg) {
  if (cfg.pairs_per_image < 1) {
    throw InvariantViolation("pairs_per_image must be positive");
  }
  if (cfg.max_index_gap && *cfg.max_index_gap < 1) {
    throw InvariantViolation("max_index_gap must be positive");
  }

  std::map<std::string, std::vector<const PoseTableRow*>> by_sequence;
  for (const auto& row : poses) by_sequence[row.sequence_id].push_back(&row);

  std::vector<std::string> sequence_ids;
  for (const auto& [id, rows] : by_sequence) sequence_ids.push_back(id);
  std::stable_sort(sequence_ids.begin(), sequence_ids.end(), NaturalLess);

  PairingResult result;
  PairingSummary& summary = result.summary;
  summary.seed = cfg.rng_seed;
  summary.mode = ModeName(cfg.mode);
  summary.pairs_per_image = cfg.pairs_per_image;
  summary.max_index_gap = cfg.max_index_gap;
  summary.both_directions = cfg.both_directions;
  summary.frames = poses.size();

  for (const auto& seq_id : sequence_ids) {
    auto frames = by_sequence[seq_id];
    if (frames.size() < 2) {
      summary.skipped_sequences.push_back(seq_id);
      continue;
    }
    std::stable_sort(frames.begin(), frames.end(),
                     [](const PoseTableRow* x, const PoseTableRow* y) {
                       return NaturalLess(x->image, y->image);
                     });

    Rng rng(cfg.rng_seed, Fnv1a(seq_id));
    SequencePairCount counts{seq_id, frames.size(), 0, 0};
    for (const auto& [i, j] : SelectPairs(frames.size(), cfg, rng)) {
      const AbsolutePose pa = ToAbsolute(*frames[i]);
      const AbsolutePose pb = ToAbsolute(*frames[j]);
      const RelativePose rel = ComputeRelativePose(pa, pb);
      if (rel.translation.norm() < kAlgebraTol) {
        ++counts.degenerate_dropped;
        continue;
      }
      const auto [first_set, second_set] = MakeLabelSets(rel);
      result.rows.push_back(
          {frames[i]->image, frames[j]->image, seq_id, first_set, second_set});
      ++counts.pairs;
      if (cfg.both_directions) {
        const auto [rev_first, rev_second] =
            MakeLabelSets(ComputeRelativePose(pb, pa));
        result.rows.push_back(
            {frames[j]->image, frames[i]->image, seq_id, rev_first, rev_second});
        ++counts.pairs;
      }
    }
    summary.pairs_emitted += counts.pairs;
    summary.degenerate_dropped += counts.degenerate_dropped;
    summary.sequences.push_back(std::move(counts));
  }
  return result;
}

std::string PairingSummary::ToJson() const {
  nlohmann::ordered_json j;
  j["seed"] = seed;
  j["mode"] = mode;
  j["pairs_per_image"] = pairs_per_image;
  j["max_index_gap"] =
      max_index_gap ? nlohmann::ordered_json(*max_index_gap)
                    : nlohmann::ordered_json(nullptr);
  j["both_directions"] = both_directions;
  j["frames"] = frames;
  j["pairs_emitted"] = pairs_emitted;
  j["degenerate_dropped"] = degenerate_dropped;
  j["skipped_sequences"] = skipped_sequences;
  auto& seqs = j["sequences"] = nlohmann::ordered_json::array();
  for (const auto& s : sequences) {
    seqs.push_back({{"sequence_id", s.sequence_id},
                    {"frames", s.frames},
                    {"pairs", s.pairs},
                    {"degenerate_dropped", s.degenerate_dropped}});
  }
  return j.dump(2) + "\n";
}

}  // namespace relpose

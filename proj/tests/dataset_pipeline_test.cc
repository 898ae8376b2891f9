#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <set>
#include <sstream>
#include <vector>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "relpose/dataset_pipeline.h"
#include "relpose/errors.h"
#include "relpose/random.h"
#include "relpose/sfm_io.h"
#include "test_util.h"

namespace relpose {
namespace {

using testing::Deg2Rad;
using testing::MaxAbs;

// Parametric camera path: centre on a helix, yaw follows the path.
struct PathSample {
  Mat3 rotation;  // world -> camera
  Vec3 centre;
};

PathSample SamplePath(double s) {
  PathSample p;
  p.centre = Vec3(3.0 * std::cos(s), 3.0 * std::sin(s), 0.2 * s);
  p.rotation = (Eigen::AngleAxisd(s + 0.3, Vec3::UnitY()) *
                Eigen::AngleAxisd(0.1 * std::sin(3 * s), Vec3::UnitX()))
                   .toRotationMatrix();
  return p;
}

ColmapImageRecord ToColmap(const PathSample& p, int id) {
  ColmapImageRecord r;
  r.image_id = id;
  const Eigen::Quaterniond q(p.rotation);
  r.rotation = {q.w(), q.x(), q.y(), q.z()};
  r.translation_raw = -(p.rotation * p.centre);
  r.camera_id = 1;
  r.name = "frame" + std::to_string(id) + ".png";
  return r;
}

std::vector<ColmapImageRecord> Trajectory(int n) {
  std::vector<ColmapImageRecord> recs;
  for (int i = 0; i < n; ++i) recs.push_back(ToColmap(SamplePath(0.05 * i), i + 1));
  return recs;
}

TEST(ColmapTrajectoryTranslation, Examples) {
  ColmapImageRecord r;
  r.translation_raw = {1, 2, 3};
  EXPECT_EQ(ColmapTrajectoryTranslation(r), Vec3(1, 2, 3));

  r.rotation = testing::EigenAxisAngle(Vec3::UnitZ(), Deg2Rad(90));
  r.translation_raw = {1, 0, 0};
  const Vec3 expected = testing::Rz(Deg2Rad(-90)) * Vec3(1, 0, 0);
  EXPECT_LT((ColmapTrajectoryTranslation(r) - expected).norm(), 1e-12);
  EXPECT_LT((ColmapTrajectoryTranslation(r) - Vec3(0, -1, 0)).norm(), 1e-12);

  Rng rng(51);
  for (int i = 0; i < 50; ++i) {
    r.rotation = rng.UnitQuaternion();
    r.translation_raw = Vec3::Zero();
    EXPECT_EQ(ColmapTrajectoryTranslation(r).norm(), 0.0);
  }
  r.rotation = {0, 0, 0, 0};
  EXPECT_THROW(ColmapTrajectoryTranslation(r), DegenerateQuaternion);
}

TEST(FirstFrameTransform, Definition) {
  ColmapImageRecord identity;
  const FirstFrameTransform id_trf = ComputeFirstFrameTransform(identity);
  EXPECT_EQ(id_trf.rotation, Mat3::Identity());
  EXPECT_EQ(id_trf.translation, Vec3::Zero());

  Rng rng(52);
  for (int i = 0; i < 100; ++i) {
    ColmapImageRecord r;
    r.rotation = rng.UnitQuaternion();
    r.translation_raw = rng.UnitVector() * 4.0;
    const FirstFrameTransform trf = ComputeFirstFrameTransform(r);
    EXPECT_LT(MaxAbs(trf.rotation * QuatToRotmat(r.rotation) - Mat3::Identity()), 1e-9);
    EXPECT_EQ(trf.translation, -ColmapTrajectoryTranslation(r));
  }
}

TEST(ApplyRereference, FirstFrameIsOrigin) {
  const auto recs = Trajectory(20);
  const auto poses = ApplyRereference(recs, ComputeFirstFrameTransform(recs.front()));
  ASSERT_EQ(poses.size(), 20u);
  EXPECT_LT(RotationErrorDeg(poses[0].rotation, Quaternion::Identity()), 1e-6);
  EXPECT_LT(poses[0].translation.norm(), 1e-12);

  const auto single = ApplyRereference(std::span(recs).first(1),
                                       ComputeFirstFrameTransform(recs.front()));
  ASSERT_EQ(single.size(), 1u);
  EXPECT_LT(MaxAbs(QuatToRotmat(single[0].rotation) - Mat3::Identity()), 1e-12);

  EXPECT_THROW(ApplyRereference({}, FirstFrameTransform{}), EmptySequence);
}

TEST(ApplyRereference, MatchesPathOracle) {
  // R_abs_i = R_i R_1^T and t_abs_i = R_i^T t'_i - R_1^T t'_1 = c_1 - c_i.
  const int n = 40;
  const auto recs = Trajectory(n);
  const auto poses = ApplyRereference(recs, ComputeFirstFrameTransform(recs.front()));
  const PathSample first = SamplePath(0);
  for (int i = 0; i < n; ++i) {
    const PathSample p = SamplePath(0.05 * i);
    EXPECT_LT(MaxAbs(QuatToRotmat(poses[i].rotation) -
                     p.rotation * first.rotation.transpose()),
              1e-9);
    EXPECT_LT((poses[i].translation - (first.centre - p.centre)).norm(), 1e-9);
  }
}

TEST(ApplyRereference, SecondApplicationIsIdentity) {
  const auto recs = Trajectory(30);
  const auto once = ApplyRereference(recs, ComputeFirstFrameTransform(recs.front()));
  // Feed the re-referenced poses back in as if they were a COLMAP model.
  std::vector<ColmapImageRecord> again = recs;
  for (std::size_t i = 0; i < again.size(); ++i) {
    again[i].rotation = once[i].rotation;
    again[i].translation_raw = QuatToRotmat(once[i].rotation) * once[i].translation;
  }
  const FirstFrameTransform trf2 = ComputeFirstFrameTransform(again.front());
  EXPECT_LT(MaxAbs(trf2.rotation - Mat3::Identity()), 1e-9);
  EXPECT_LT(trf2.translation.norm(), 1e-9);
  const auto twice = ApplyRereference(again, trf2);
  for (std::size_t i = 0; i < once.size(); ++i) {
    EXPECT_LT(RotationErrorDeg(once[i].rotation, twice[i].rotation), 1e-6);
    EXPECT_LT((once[i].translation - twice[i].translation).norm(), 1e-9);
  }
}

TEST(RereferenceToFirstFrame, SortsByNaturalName) {
  auto recs = Trajectory(12);
  std::vector<ColmapImageRecord> shuffled(recs.rbegin(), recs.rend());
  const auto from_sorted =
      ApplyRereference(recs, ComputeFirstFrameTransform(recs.front()));
  const auto from_shuffled = RereferenceToFirstFrame(shuffled);
  ASSERT_EQ(from_shuffled.size(), from_sorted.size());
  for (std::size_t i = 0; i < recs.size(); ++i) {
    EXPECT_EQ(from_shuffled[i].rotation, from_sorted[i].rotation);
    EXPECT_EQ(from_shuffled[i].translation, from_sorted[i].translation);
  }
}

TEST(NaturalLess, Ordering) {
  EXPECT_TRUE(NaturalLess("f2", "f10"));
  EXPECT_FALSE(NaturalLess("f10", "f2"));
  EXPECT_TRUE(NaturalLess("seq1/frame00009.png", "seq1/frame00010.png"));
  EXPECT_TRUE(NaturalLess("a", "b"));
  EXPECT_FALSE(NaturalLess("x", "x"));
  std::vector<std::string> names = {"img10", "img2", "img1", "img20", "img3"};
  std::sort(names.begin(), names.end(), NaturalLess);
  EXPECT_EQ(names, (std::vector<std::string>{"img1", "img2", "img3", "img10", "img20"}));
}

TEST(ConsecutiveRelative, Counts) {
  const auto recs = Trajectory(117);
  const auto poses = RereferenceToFirstFrame(recs);
  EXPECT_EQ(ConsecutiveRelative(poses).size(), 116u);
  EXPECT_THROW(ConsecutiveRelative({}), EmptySequence);
  EXPECT_THROW(ConsecutiveRelative(std::span(poses).first(1)), SingleFrame);
}

TEST(ConsecutiveRelative, IdenticalPosesGiveIdentity) {
  Rng rng(53);
  const AbsolutePose p = testing::RandomPose(rng);
  const std::vector<AbsolutePose> poses = {p, p};
  const auto rel = ConsecutiveRelative(poses);
  ASSERT_EQ(rel.size(), 1u);
  EXPECT_LT(MaxAbs(rel[0].Matrix() - Mat4::Identity()), 1e-12);
}

TEST(ConsecutiveRelative, ChainClosureAndPathOracle) {
  const int n = 117;
  const auto recs = Trajectory(n);
  const auto poses = RereferenceToFirstFrame(recs);
  const auto rel = ConsecutiveRelative(poses);

  // Generating relative transforms, straight from the path parameters.
  const PathSample first = SamplePath(0);
  auto abs_matrix = [&](int i) {
    const PathSample p = SamplePath(0.05 * i);
    Mat4 T = Mat4::Identity();
    T.topLeftCorner<3, 3>() = p.rotation * first.rotation.transpose();
    T.topRightCorner<3, 1>() = first.centre - p.centre;
    return T;
  };
  for (int i = 1; i < n; ++i) {
    const Mat4 expected = abs_matrix(i) * abs_matrix(i - 1).inverse();
    EXPECT_LT(MaxAbs(rel[i - 1].Matrix() - expected), 1e-9) << "i=" << i;
  }

  Mat4 chain = testing::EigenHomogeneous(poses.front());
  for (const auto& t : rel) chain = t.Matrix() * chain;
  EXPECT_LT(MaxAbs(chain - testing::EigenHomogeneous(poses.back())), 1e-9);
  EXPECT_EQ(chain.row(3), Eigen::RowVector4d(0, 0, 0, 1));
}

// ---- pair generation

std::vector<PoseTableRow> Sequence(const std::string& id, int n, Rng& rng) {
  std::vector<PoseTableRow> rows;
  for (int i = 0; i < n; ++i) {
    const AbsolutePose p = testing::RandomPose(rng);
    rows.push_back({id + "/f" + std::to_string(i), id, p.rotation, p.translation});
  }
  return rows;
}

std::string PairKey(const PairFileRow& r) { return r.image_a + "|" + r.image_b; }

TEST(GeneratePairs, TwoFramesGiveOnePair) {
  Rng rng(54);
  const auto rows = Sequence("s", 2, rng);
  const auto result = GeneratePairs(rows, PairingConfig{});
  ASSERT_EQ(result.rows.size(), 1u);
  EXPECT_EQ(result.rows[0].image_a, "s/f0");
  EXPECT_EQ(result.rows[0].image_b, "s/f1");
}

TEST(GeneratePairs, TenFramesWithNineDrawsIsComplete) {
  Rng rng(55);
  const auto rows = Sequence("s", 10, rng);
  PairingConfig cfg;
  cfg.pairs_per_image = 9;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    cfg.rng_seed = seed;
    EXPECT_EQ(GeneratePairs(rows, cfg).rows.size(), 45u);
  }
}

// Exact expected union size for n frames, k draws each, by enumerating
// every joint outcome of the per-frame draws.
double ExactExpectedPairs(int n, int k) {
  std::vector<std::vector<std::vector<int>>> subsets(n);
  for (int i = 0; i < n; ++i) {
    std::vector<int> others;
    for (int j = 0; j < n; ++j) if (j != i) others.push_back(j);
    std::vector<bool> mask(others.size(), false);
    std::fill(mask.begin(), mask.begin() + k, true);
    do {
      std::vector<int> s;
      for (std::size_t m = 0; m < mask.size(); ++m) if (mask[m]) s.push_back(others[m]);
      subsets[i].push_back(s);
    } while (std::prev_permutation(mask.begin(), mask.end()));
  }
  double total = 0;
  std::size_t outcomes = 0;
  std::vector<std::size_t> idx(n, 0);
  while (true) {
    std::set<std::pair<int, int>> u;
    for (int i = 0; i < n; ++i)
      for (int j : subsets[i][idx[i]]) u.insert({std::min(i, j), std::max(i, j)});
    total += static_cast<double>(u.size());
    ++outcomes;
    int d = 0;
    while (d < n && ++idx[d] == subsets[d].size()) idx[d++] = 0;
    if (d == n) break;
  }
  return total / static_cast<double>(outcomes);
}

void CheckMeanPairCount(int n, int k, double expected, int seeds) {
  Rng rng(56);
  const auto rows = Sequence("s", n, rng);
  PairingConfig cfg;
  cfg.pairs_per_image = k;
  double sum = 0, sum_sq = 0;
  for (int seed = 0; seed < seeds; ++seed) {
    cfg.rng_seed = static_cast<std::uint64_t>(seed);
    const auto result = GeneratePairs(rows, cfg);
    const double c = static_cast<double>(result.rows.size());
    sum += c;
    sum_sq += c * c;
    // Every frame appears in at least min(k, n-1) pairs.
    std::map<std::string, int> degree;
    for (const auto& r : result.rows) { ++degree[r.image_a]; ++degree[r.image_b]; }
    for (const auto& row : rows) EXPECT_GE(degree[row.image], std::min(k, n - 1));
  }
  const double mean = sum / seeds;
  const double var = sum_sq / seeds - mean * mean;
  const double stderr_mean = std::sqrt(std::max(var, 1e-12) / seeds);
  EXPECT_NEAR(mean, expected, 5 * stderr_mean + 1e-9);
}

TEST(GeneratePairs, SmallSequenceMatchesEnumeration) {
  CheckMeanPairCount(5, 2, ExactExpectedPairs(5, 2), 4000);
  CheckMeanPairCount(4, 1, ExactExpectedPairs(4, 1), 4000);
}

TEST(GeneratePairs, TenFramesEightDraws) {
  // A pair {i,j} is missing only if neither endpoint drew the other: (1/9)^2.
  const double expected = 45.0 * (1.0 - 1.0 / 81.0);
  CheckMeanPairCount(10, 8, expected, 4000);
}

TEST(GeneratePairs, IntraSequenceNoDuplicatesNoSelfPairs) {
  Rng rng(57);
  std::vector<PoseTableRow> rows;
  for (const char* id : {"seq1", "seq2", "seq10", "seq3"}) {
    const auto s = Sequence(id, 5 + static_cast<int>(rng.UniformIndex(30)), rng);
    rows.insert(rows.end(), s.begin(), s.end());
  }
  std::map<std::string, std::string> seq_of;
  for (const auto& r : rows) seq_of[r.image] = r.sequence_id;
  for (int gap : {0, 1, 3}) {
    PairingConfig cfg;
    cfg.rng_seed = 99;
    if (gap) cfg.max_index_gap = gap;
    const auto result = GeneratePairs(rows, cfg);
    std::set<std::pair<std::string, std::string>> seen;
    for (const auto& r : result.rows) {
      EXPECT_NE(r.image_a, r.image_b);
      EXPECT_EQ(seq_of[r.image_a], seq_of[r.image_b]);
      EXPECT_EQ(r.sequence_id, seq_of[r.image_a]);
      EXPECT_TRUE(NaturalLess(r.image_a, r.image_b));
      const auto key = std::minmax(r.image_a, r.image_b);
      EXPECT_TRUE(seen.insert({key.first, key.second}).second);
      if (gap) {
        const int ia = std::stoi(r.image_a.substr(r.image_a.find("/f") + 2));
        const int ib = std::stoi(r.image_b.substr(r.image_b.find("/f") + 2));
        EXPECT_LE(std::abs(ia - ib), gap);
      }
    }
  }
}

TEST(GeneratePairs, LabelsReproduceSecondPose) {
  Rng rng(58);
  const auto rows = Sequence("s", 25, rng);
  std::map<std::string, AbsolutePose> by_name;
  for (const auto& r : rows) by_name[r.image] = {r.rotation, r.translation, r.image};
  const auto result = GeneratePairs(rows, PairingConfig{});
  ASSERT_FALSE(result.rows.empty());
  for (const auto& r : result.rows) {
    const AbsolutePose& p1 = by_name[r.image_a];
    const AbsolutePose& p2 = by_name[r.image_b];
    const Mat4 recovered = ToHomogeneous(r.label_metric) * testing::EigenHomogeneous(p1);
    EXPECT_LT(MaxAbs(recovered - testing::EigenHomogeneous(p2)), 1e-9);
    EXPECT_EQ(r.label_normalized.rotation, r.label_metric.rotation);
    EXPECT_NEAR(r.label_normalized.translation.norm(), 1.0, 1e-12);
  }
}

TEST(GeneratePairs, Deterministic) {
  Rng rng(59);
  auto rows = Sequence("a", 30, rng);
  const auto extra = Sequence("b", 30, rng);
  rows.insert(rows.end(), extra.begin(), extra.end());
  PairingConfig cfg;
  cfg.rng_seed = 1234;
  std::ostringstream first, second;
  WritePairsFile(first, GeneratePairs(rows, cfg).rows);
  WritePairsFile(second, GeneratePairs(rows, cfg).rows);
  EXPECT_EQ(first.str(), second.str());

  // Per-sequence streams: sequence "a" is unaffected by the presence of "b".
  std::vector<PoseTableRow> only_a(rows.begin(), rows.begin() + 30);
  std::vector<PairFileRow> a_from_all;
  for (const auto& r : GeneratePairs(rows, cfg).rows)
    if (r.sequence_id == "a") a_from_all.push_back(r);
  EXPECT_EQ(GeneratePairs(only_a, cfg).rows, a_from_all);

  cfg.rng_seed = 1235;
  std::ostringstream other;
  WritePairsFile(other, GeneratePairs(rows, cfg).rows);
  EXPECT_NE(other.str(), first.str());
}

TEST(GeneratePairs, ConsecutiveModeAndReverse) {
  Rng rng(60);
  const auto rows = Sequence("s", 6, rng);
  PairingConfig cfg;
  cfg.mode = PairingMode::kConsecutive;
  const auto fwd = GeneratePairs(rows, cfg);
  ASSERT_EQ(fwd.rows.size(), 5u);
  for (int i = 0; i < 5; ++i) {
    EXPECT_EQ(fwd.rows[i].image_a, "s/f" + std::to_string(i));
    EXPECT_EQ(fwd.rows[i].image_b, "s/f" + std::to_string(i + 1));
  }
  cfg.both_directions = true;
  const auto both = GeneratePairs(rows, cfg);
  ASSERT_EQ(both.rows.size(), 10u);
  std::set<std::string> keys;
  for (const auto& r : both.rows) keys.insert(PairKey(r));
  for (const auto& r : fwd.rows) EXPECT_TRUE(keys.count(r.image_b + "|" + r.image_a));
}

TEST(GeneratePairs, DropsStationaryPairsAndSkipsShortSequences) {
  std::vector<PoseTableRow> rows = {
      {"s/f0", "s", Quaternion::Identity(), Vec3(1, 0, 0)},
      {"s/f1", "s", Quaternion::Identity(), Vec3(1, 0, 0)},
      {"s/f2", "s", Quaternion::Identity(), Vec3(2, 0, 0)},
      {"lonely/f0", "lonely", Quaternion::Identity(), Vec3::Zero()},
  };
  const auto result = GeneratePairs(rows, PairingConfig{});
  EXPECT_EQ(result.rows.size(), 2u);
  EXPECT_EQ(result.summary.degenerate_dropped, 1u);
  EXPECT_EQ(result.summary.skipped_sequences, std::vector<std::string>{"lonely"});
  for (const auto& r : result.rows) EXPECT_NE(PairKey(r), "s/f0|s/f1");

  const auto j = nlohmann::json::parse(result.summary.ToJson());
  EXPECT_EQ(j.at("pairs_emitted"), 2);
  EXPECT_EQ(j.at("degenerate_dropped"), 1);
  EXPECT_EQ(j.at("frames"), 4);
}

TEST(MakeLabelSets, Examples) {
  const auto [first, second] = MakeLabelSets({Quaternion::Identity(), Vec3(3, 4, 0)});
  EXPECT_LT((first.translation - Vec3(0.6, 0.8, 0)).norm(), 1e-15);
  EXPECT_EQ(second.translation, Vec3(3, 4, 0));
  EXPECT_EQ(first.rotation, second.rotation);

  Rng rng(61);
  for (int i = 0; i < 500; ++i) {
    const Vec3 t = rng.UnitVector() * std::exp(rng.Uniform(-15, 5));
    const RelativePose rel{rng.UnitQuaternion(), t};
    const auto [a, b] = MakeLabelSets(rel);
    EXPECT_NEAR(a.translation.norm(), 1.0, 1e-12);
    EXPECT_EQ(b.translation, t);
    EXPECT_EQ(a.rotation, b.rotation);
    EXPECT_NEAR(a.rotation.Norm(), 1.0, 1e-12);
  }
  EXPECT_THROW(MakeLabelSets({Quaternion::Identity(), Vec3::Zero()}),
               DegenerateTranslation);
  EXPECT_THROW(MakeLabelSets({Quaternion::Identity(), Vec3(1e-10, 0, 0)}),
               DegenerateTranslation);
}

}  // namespace
}  // namespace relpose

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "relpose/errors.h"
#include "relpose/eval_report.h"
#include "relpose/random.h"
#include "test_util.h"

namespace relpose {
namespace {

std::vector<double> RandomValues(Rng& rng, std::size_t n) {
  std::vector<double> v(n);
  for (double& x : v) x = std::abs(rng.Normal()) * 3 + (rng.Uniform() < 0.05 ? 20 : 0);
  return v;
}

// Sort-based oracles, written out independently of the library.
double SortedMedian(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

struct Quartiles { double q1, q3; };
Quartiles HalvesOracle(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  if (n == 1) return {v[0], v[0]};
  const std::size_t half = n / 2;
  std::vector<double> lo(v.begin(), v.begin() + half);
  std::vector<double> hi(v.end() - half, v.end());
  return {SortedMedian(lo), SortedMedian(hi)};
}

std::vector<PairFileRow> Labels(Rng& rng, int n, const std::string& seq) {
  std::vector<PairFileRow> rows;
  for (int i = 0; i < n; ++i) {
    PairFileRow r;
    r.image_a = seq + "/a" + std::to_string(i);
    r.image_b = seq + "/b" + std::to_string(i);
    r.sequence_id = seq;
    const Quaternion q = QuatCanonicalize(rng.UnitQuaternion());
    const Vec3 t = rng.UnitVector() * rng.Uniform(0.5, 3);
    r.label_metric = {q, t};
    r.label_normalized = {q, t / t.norm()};
    rows.push_back(r);
  }
  return rows;
}

std::vector<PredictionRow> Perfect(const std::vector<PairFileRow>& labels) {
  std::vector<PredictionRow> preds;
  for (const auto& l : labels) preds.push_back({l.image_a, l.image_b, l.label_metric});
  return preds;
}

TEST(Score, PerfectPredictionsGiveZeroErrors) {
  Rng rng(110);
  const auto labels = Labels(rng, 40, "seq1");
  auto preds = Perfect(labels);
  std::reverse(preds.begin(), preds.end());
  const auto samples = Score(preds, labels, "ours", "");
  ASSERT_EQ(samples.size(), labels.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    EXPECT_EQ(samples[i].pair_id, labels[i].image_a + "|" + labels[i].image_b);
    EXPECT_LT(samples[i].rotation_error_deg, 1e-6);
    EXPECT_EQ(samples[i].translation_error_m, 0.0);
    EXPECT_EQ(samples[i].scene_tag, "seq1");
    EXPECT_EQ(samples[i].model_tag, "ours");
  }
}

TEST(Score, KnownErrorsAndLabelSet) {
  Rng rng(111);
  auto labels = Labels(rng, 1, "s");
  auto preds = Perfect(labels);
  preds[0].pose.translation += Vec3(0, 3, 4);
  preds[0].pose.rotation = QuatMultiply(
      testing::EigenAxisAngle(Vec3::UnitX(), testing::Deg2Rad(10)), preds[0].pose.rotation);
  const auto s = Score(preds, labels, "m", "scene");
  EXPECT_NEAR(s[0].translation_error_m, 5.0, 1e-12);
  EXPECT_NEAR(s[0].rotation_error_deg, 10.0, 1e-6);
  EXPECT_EQ(s[0].scene_tag, "scene");

  auto unit_preds = preds;
  unit_preds[0].pose.translation = labels[0].label_normalized.translation;
  const auto u = Score(unit_preds, labels, "m", "", LabelSet::kNormalized);
  EXPECT_EQ(u[0].translation_error_m, 0.0);
}

TEST(Score, IdMismatch) {
  Rng rng(112);
  const auto labels = Labels(rng, 5, "s");
  auto preds = Perfect(labels);
  auto fewer = preds;
  fewer.pop_back();
  EXPECT_THROW(Score(fewer, labels), IdMismatch);
  auto dup = preds;
  dup.push_back(preds[0]);
  EXPECT_THROW(Score(dup, labels), IdMismatch);
  auto wrong = preds;
  wrong[2].image_b = "elsewhere";
  EXPECT_THROW(Score(wrong, labels), IdMismatch);
}

TEST(Median, Examples) {
  EXPECT_EQ(Median({1, 2, 3, 4}), 2.5);
  EXPECT_EQ(Median({7}), 7);
  EXPECT_EQ(Median({3, 1, 2}), 2);
  EXPECT_THROW(Median({}), EmptyInput);
  Rng rng(113);
  for (std::size_t n : {1000u, 1001u, 2u, 3u}) {
    const auto v = RandomValues(rng, n);
    EXPECT_EQ(Median(v), SortedMedian(v));
  }
}

TEST(MedianErrors, FormatsLikeTheTable) {
  EXPECT_EQ(FormatMedianErrors({1.51, 2.93}), "1.51m, 2.93°");
  EXPECT_EQ(FormatMedianErrors({0.64, 6.0}), "0.64m, 6.00°");

  // A scored group whose medians land on (1.51 m, 2.93 deg).
  std::vector<ErrorSample> s = {{"a", 2.0, 1.0, "m", "KingsCollege"},
                                {"b", 2.93, 1.51, "m", "KingsCollege"},
                                {"c", 4.0, 9.0, "m", "KingsCollege"}};
  const MedianErrors m = ComputeMedianErrors(s);
  EXPECT_EQ(FormatMedianErrors(m), "1.51m, 2.93°");
  EXPECT_THROW(ComputeMedianErrors({}), EmptyInput);
}

TEST(Cdf, Examples) {
  const std::vector<double> v = {1, 2, 3};
  const CdfSeries c = ComputeCdf(v);
  EXPECT_DOUBLE_EQ(c.FractionAtOrBelow(2), 2.0 / 3.0);
  EXPECT_EQ(c.fractions.back(), 1.0);
  EXPECT_EQ(c.FractionAtOrBelow(0.5), 0.0);
  EXPECT_EQ(c.FractionAtOrBelow(100), 1.0);

  const std::vector<double> constant(10, 4.2);
  const CdfSeries k = ComputeCdf(constant);
  ASSERT_EQ(k.thresholds.size(), 1u);
  EXPECT_EQ(k.thresholds[0], 4.2);
  EXPECT_EQ(k.fractions[0], 1.0);
  EXPECT_THROW(ComputeCdf(std::span<const double>{}), EmptyInput);
}

TEST(Cdf, AgreesWithCountingOracle) {
  Rng rng(114);
  auto v = RandomValues(rng, 777);
  for (int i = 0; i < 50; ++i) v.push_back(v[i]);  // ties
  const CdfSeries c = ComputeCdf(v);
  EXPECT_TRUE(std::is_sorted(c.thresholds.begin(), c.thresholds.end()));
  EXPECT_TRUE(std::adjacent_find(c.thresholds.begin(), c.thresholds.end()) ==
              c.thresholds.end());
  EXPECT_TRUE(std::is_sorted(c.fractions.begin(), c.fractions.end()));
  EXPECT_EQ(c.fractions.back(), 1.0);
  for (double x : {0.0, 0.5, 1.0, 2.0, 5.0, 25.0}) {
    const double count = static_cast<double>(std::count_if(v.begin(), v.end(),
                                                           [&](double y) { return y <= x; }));
    EXPECT_DOUBLE_EQ(c.FractionAtOrBelow(x), count / static_cast<double>(v.size()));
  }
}

TEST(Cdf, FromSamplesPicksMetric) {
  std::vector<ErrorSample> s = {{"a", 10, 1, "", ""}, {"b", 20, 2, "", ""}};
  EXPECT_EQ(ComputeCdf(s, ErrorMetric::kRotationDeg).thresholds,
            (std::vector<double>{10, 20}));
  EXPECT_EQ(ComputeCdf(s, ErrorMetric::kTranslationM).thresholds,
            (std::vector<double>{1, 2}));
}

TEST(BoxStats, HandEnumeration) {
  const std::vector<double> v = {1, 2, 3, 4, 5};
  const BoxStats b = ComputeBoxStats(v);
  EXPECT_EQ(b.q1, 1.5);
  EXPECT_EQ(b.median, 3);
  EXPECT_EQ(b.q3, 4.5);
  EXPECT_EQ(b.min, 1);
  EXPECT_EQ(b.max, 5);
  EXPECT_EQ(b.lower_whisker, 1);
  EXPECT_EQ(b.upper_whisker, 5);
  EXPECT_TRUE(b.outliers.empty());

  const std::vector<double> even = {1, 2, 3, 4, 5, 6};
  const BoxStats e = ComputeBoxStats(even);
  EXPECT_EQ(e.q1, 2);
  EXPECT_EQ(e.q3, 5);

  // IQR 1.5 around [1.5, 4.5] leaves 100 outside.
  const std::vector<double> outlier = {1, 2, 3, 4, 5, 100};
  const BoxStats o = ComputeBoxStats(outlier);
  EXPECT_EQ(o.outliers, std::vector<double>{100});
  EXPECT_EQ(o.upper_whisker, 5);
}

TEST(BoxStats, ConstantDataIsZeroWidth) {
  const std::vector<double> v(9, 2.5);
  const BoxStats b = ComputeBoxStats(v);
  EXPECT_EQ(b.q1, 2.5);
  EXPECT_EQ(b.q3, 2.5);
  EXPECT_EQ(b.lower_whisker, 2.5);
  EXPECT_EQ(b.upper_whisker, 2.5);
  EXPECT_TRUE(b.outliers.empty());
  EXPECT_THROW(ComputeBoxStats(std::span<const double>{}), EmptyInput);
}

TEST(BoxStats, RandomDataAgainstOracle) {
  Rng rng(115);
  for (int trial = 0; trial < 200; ++trial) {
    const auto v = RandomValues(rng, 1 + rng.UniformIndex(300));
    const BoxStats b = ComputeBoxStats(v);
    const Quartiles q = HalvesOracle(v);
    EXPECT_EQ(b.count, v.size());
    EXPECT_EQ(b.q1, q.q1);
    EXPECT_EQ(b.q3, q.q3);
    EXPECT_EQ(b.median, SortedMedian(v));
    EXPECT_LE(b.min, b.q1);
    EXPECT_LE(b.q1, b.median);
    EXPECT_LE(b.median, b.q3);
    EXPECT_LE(b.q3, b.max);
    const double lo = q.q1 - 1.5 * (q.q3 - q.q1), hi = q.q3 + 1.5 * (q.q3 - q.q1);
    std::size_t outside = 0;
    double wl = b.max, wh = b.min;
    for (double x : v) {
      if (x < lo || x > hi) { ++outside; continue; }
      wl = std::min(wl, x);
      wh = std::max(wh, x);
    }
    EXPECT_EQ(b.outliers.size(), outside);
    EXPECT_EQ(b.lower_whisker, wl);
    EXPECT_EQ(b.upper_whisker, wh);
  }
}

TEST(BoxStats, GroupsInFirstAppearanceOrder) {
  std::vector<ErrorSample> s = {{"1", 1, 1, "two", "B"}, {"2", 2, 2, "one", "A"},
                                {"3", 3, 3, "two", "B"}, {"4", 4, 4, "two", "A"}};
  const auto g = BoxStatsByGroup(s);
  ASSERT_EQ(g.size(), 3u);
  EXPECT_EQ(g[0].scene_tag, "B");
  EXPECT_EQ(g[0].model_tag, "two");
  EXPECT_EQ(g[0].rotation.count, 2u);
  EXPECT_EQ(g[1].scene_tag, "A");
  EXPECT_EQ(g[1].model_tag, "one");
  EXPECT_EQ(g[2].model_tag, "two");
}

TEST(PercentChange, TableRows) {
  EXPECT_NEAR(PercentChange(1.80, 1.51), 16.11, 0.01);
  EXPECT_NEAR(PercentChange(3.15, 2.24), 28.88, 0.01);
  EXPECT_NEAR(PercentChange(4.84, 2.31), 52.27, 0.01);
  // Exact rational values: 29/1.8, 91/3.15, 253/4.84.
  EXPECT_NEAR(PercentChange(1.80, 1.51), 145.0 / 9.0, 1e-12);
  EXPECT_NEAR(PercentChange(3.15, 2.24), 260.0 / 9.0, 1e-12);
  EXPECT_NEAR(PercentChange(4.84, 2.31), 575.0 / 11.0, 1e-12);
  EXPECT_EQ(PercentChange(2.0, 2.0), 0.0);
  EXPECT_LT(PercentChange(1.0, 1.5), 0.0);
  EXPECT_THROW(PercentChange(0.0, 1.0), ZeroBaseline);
  EXPECT_THROW(PercentChange(-1.0, 1.0), ZeroBaseline);
}

TEST(RenderReport, EmptyIsHeaderOnly) {
  const RenderedReport r = RenderReport({});
  EXPECT_EQ(r.csv,
            "scene,model,stage,pairs,median_translation_m,median_rotation_deg,"
            "percent_change_translation\n");
  EXPECT_EQ(std::count(r.text.begin(), r.text.end(), '\n'), 2);
}

std::vector<ReportGroup> FullGrid(Rng& rng) {
  std::vector<ReportGroup> groups;
  for (const char* scene : {"KingsCollege", "OldHospital", "ShopFacade", "StMarysChurch"})
    for (const char* model : {"individual", "shared"})
      for (const char* stage : {"two-stage", "one-stage"}) {
        ReportGroup g{scene, model, stage, {}, std::nullopt};
        for (int i = 0; i < 11; ++i) {
          g.samples.push_back({std::to_string(i), rng.Uniform(0, 10), rng.Uniform(0, 3),
                               model, scene});
        }
        if (std::string(stage) == "two-stage") g.baseline_translation_m = 3.0;
        groups.push_back(g);
      }
  return groups;
}

TEST(RenderReport, FullGridShapeAndDeterminism) {
  Rng rng(116);
  const auto groups = FullGrid(rng);
  const RenderedReport r = RenderReport(groups);
  EXPECT_EQ(std::count(r.csv.begin(), r.csv.end(), '\n'), 1 + 4 * 2 * 2);
  EXPECT_EQ(RenderReport(groups).csv, r.csv);
  EXPECT_EQ(RenderReport(groups).text, r.text);

  std::istringstream in(r.csv);
  std::string line;
  std::getline(in, line);
  std::getline(in, line);
  EXPECT_EQ(line.rfind("KingsCollege,individual,two-stage,11,", 0), 0u);
  const MedianErrors m = ComputeMedianErrors(groups[0].samples);
  EXPECT_NE(r.text.find(FormatMedianErrors(m)), std::string::npos);

  // Text rows line up: the "Model" column starts at the same offset on
  // every row.
  std::istringstream text(r.text);
  std::getline(text, line);
  const std::size_t model_col = line.find("Model");
  ASSERT_NE(model_col, std::string::npos);
  std::getline(text, line);  // rule
  while (std::getline(text, line)) {
    EXPECT_EQ(line.find_first_not_of(' ', line.find(' ')), model_col) << line;
  }
}

TEST(RenderReport, PercentChangeColumn) {
  ReportGroup g{"KingsCollege", "shared", "two-stage",
                {{"p", 2.93, 1.51, "shared", "KingsCollege"}}, 1.80};
  const RenderedReport r = RenderReport(std::vector<ReportGroup>{g});
  EXPECT_NE(r.csv.find("16.11"), std::string::npos);
  EXPECT_NE(r.text.find("1.51m, 2.93°"), std::string::npos);
}

TEST(Writers, ErrorSamplesCdfAndBox) {
  std::vector<ErrorSample> s = {{"a|b", 1.5, 0.25, "m", "s"}, {"c|d", 3.0, 0.5, "m", "s"}};
  std::ostringstream samples, cdf, box;
  WriteErrorSamples(samples, s);
  EXPECT_EQ(samples.str(),
            "pair_id,scene,model,rotation_error_deg,translation_error_m\n"
            "a|b,s,m,1.5,0.25\nc|d,s,m,3,0.5\n");
  WriteCdf(cdf, ComputeCdf(s, ErrorMetric::kRotationDeg));
  EXPECT_EQ(cdf.str(), "threshold,fraction\n1.5,0.5\n3,1\n");
  WriteBoxStats(box, BoxStatsByGroup(s));
  const std::string box_text = box.str();
  EXPECT_EQ(std::count(box_text.begin(), box_text.end(), '\n'), 3);
}

}  // namespace
}  // namespace relpose

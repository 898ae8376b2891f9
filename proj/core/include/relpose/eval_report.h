#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "relpose/sfm_io.h"

namespace relpose {

struct ErrorSample {
  std::string pair_id;  // "image_a|image_b"
  double rotation_error_deg = 0.0;
  double translation_error_m = 0.0;
  std::string model_tag;
  std::string scene_tag;
};

// Per-pair errors in label order. Predictions are matched on
// (image_a, image_b); any unmatched, duplicated or extra id throws
// IdMismatch. An empty scene_tag uses each pair's sequence_id.
std::vector<ErrorSample> Score(std::span<const PredictionRow> predictions,
                               std::span<const PairFileRow> labels,
                               const std::string& model_tag = "",
                               const std::string& scene_tag = "",
                               LabelSet label_set = LabelSet::kMetric);

// Mean of the two central order statistics for even counts.
// Throws EmptyInput.
double Median(std::vector<double> values);

struct MedianErrors {
  double translation_m = 0.0;
  double rotation_deg = 0.0;
};
MedianErrors ComputeMedianErrors(std::span<const ErrorSample> samples);

// "1.51m, 2.93°"
std::string FormatMedianErrors(const MedianErrors& m);

enum class ErrorMetric { kRotationDeg, kTranslationM };

// Empirical CDF: distinct sorted values and the fraction of samples <= each.
struct CdfSeries {
  std::vector<double> thresholds;
  std::vector<double> fractions;

  // Fraction of samples <= x, for any x.
  double FractionAtOrBelow(double x) const;
};
CdfSeries ComputeCdf(std::span<const double> values);
CdfSeries ComputeCdf(std::span<const ErrorSample> samples, ErrorMetric metric);

// Quartiles use the exclusive median-of-halves rule: the median of the lower
// and upper halves, leaving out the middle element for odd counts. Whiskers
// reach the most extreme data within 1.5 IQR of the box.
struct BoxStats {
  std::size_t count = 0;
  double min = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double max = 0.0;
  double lower_whisker = 0.0;
  double upper_whisker = 0.0;
  std::vector<double> outliers;
};
// Throws EmptyInput.
BoxStats ComputeBoxStats(std::span<const double> values);

struct GroupBoxStats {
  std::string scene_tag;
  std::string model_tag;
  BoxStats rotation;
  BoxStats translation;
};
// Groups by (scene_tag, model_tag) in order of first appearance.
std::vector<GroupBoxStats> BoxStatsByGroup(std::span<const ErrorSample> samples);

// 100 * (baseline - ours) / baseline. Throws ZeroBaseline unless baseline > 0.
double PercentChange(double baseline_m, double ours_m);

// One row of a comparison table: scene x model x training stage.
struct ReportGroup {
  std::string scene;
  std::string model;
  std::string stage;
  std::vector<ErrorSample> samples;
  // Baseline median translation for the "% change" column.
  std::optional<double> baseline_translation_m;
};

struct RenderedReport {
  std::string csv;
  std::string text;
};

// Rows keep the order of `groups`. Empty groups render blank medians.
RenderedReport RenderReport(std::span<const ReportGroup> groups);

// Columns: pair_id,scene,model,rotation_error_deg,translation_error_m.
void WriteErrorSamples(std::ostream& out, std::span<const ErrorSample> samples);
// Columns: threshold,fraction.
void WriteCdf(std::ostream& out, const CdfSeries& cdf);
// One row per group and metric.
void WriteBoxStats(std::ostream& out, std::span<const GroupBoxStats> stats);

}  // namespace relpose

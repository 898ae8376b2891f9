#include "relpose/eval_report.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>
#include <sstream>

#include "csv.h"
#include "relpose/errors.h"

namespace relpose {

namespace {

std::string Fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
  return buf;
}

double MedianOfSorted(std::span<const double> sorted) {
  const std::size_t n = sorted.size();
  if (n % 2 == 1) return sorted[n / 2];
  return 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
}

std::vector<double> Extract(std::span<const ErrorSample> samples,
                            ErrorMetric metric) {
  std::vector<double> v;
  v.reserve(samples.size());
  for (const auto& s : samples) {
    v.push_back(metric == ErrorMetric::kRotationDeg ? s.rotation_error_deg
                                                    : s.translation_error_m);
  }
  return v;
}

void WriteBoxRow(std::ostream& out, const GroupBoxStats& g, const char* metric,
                 const BoxStats& b) {
  out << csv::Escape(g.scene_tag) << ',' << csv::Escape(g.model_tag) << ','
      << metric << ',' << b.count << ',' << csv::FormatReal(b.min) << ','
      << csv::FormatReal(b.q1) << ',' << csv::FormatReal(b.median) << ','
      << csv::FormatReal(b.q3) << ',' << csv::FormatReal(b.max) << ','
      << csv::FormatReal(b.lower_whisker) << ','
      << csv::FormatReal(b.upper_whisker) << ',' << b.outliers.size() << '\n';
}

// Display width in code points; the tables contain "°".
std::size_t DisplayWidth(const std::string& s) {
  std::size_t n = 0;
  for (unsigned char c : s) n += (c & 0xC0) != 0x80;
  return n;
}

}  // namespace

std::vector<ErrorSample> Score(std::span<const PredictionRow> predictions,
                               std::span<const PairFileRow> labels,
                               const std::string& model_tag,
                               const std::string& scene_tag,
                               LabelSet label_set) {
  std::map<std::pair<std::string, std::string>, const PredictionRow*> by_key;
  for (const auto& p : predictions) {
    if (!by_key.emplace(std::pair(p.image_a, p.image_b), &p).second) {
      throw IdMismatch("duplicate prediction for " + p.image_a + " / " +
                       p.image_b);
    }
  }
  if (predictions.size() != labels.size()) {
    throw IdMismatch(std::to_string(predictions.size()) + " predictions for " +
                     std::to_string(labels.size()) + " labelled pairs");
  }
  std::vector<ErrorSample> samples;
  samples.reserve(labels.size());
  for (const auto& row : labels) {
    const auto it = by_key.find({row.image_a, row.image_b});
    if (it == by_key.end()) {
      throw IdMismatch("no prediction for pair " + row.image_a + " / " +
                       row.image_b);
    }
    const RelativePose& truth = Label(row, label_set);
    const RelativePose& pred = it->second->pose;
    samples.push_back({row.image_a + "|" + row.image_b,
                       RotationErrorDeg(pred.rotation, truth.rotation),
                       TranslationErrorM(pred.translation, truth.translation),
                       model_tag, scene_tag.empty() ? row.sequence_id : scene_tag});
  }
  return samples;
}

double Median(std::vector<double> values) {
  if (values.empty()) throw EmptyInput("median of no values");
  std::sort(values.begin(), values.end());
  return MedianOfSorted(values);
}

MedianErrors ComputeMedianErrors(std::span<const ErrorSample> samples) {
  if (samples.empty()) throw EmptyInput("no error samples");
  return {Median(Extract(samples, ErrorMetric::kTranslationM)),
          Median(Extract(samples, ErrorMetric::kRotationDeg))};
}

std::string FormatMedianErrors(const MedianErrors& m) {
  return Fixed(m.translation_m, 2) + "m, " + Fixed(m.rotation_deg, 2) + "°";
}

double CdfSeries::FractionAtOrBelow(double x) const {
  const auto it = std::upper_bound(thresholds.begin(), thresholds.end(), x);
  if (it == thresholds.begin()) return 0.0;
  return fractions[static_cast<std::size_t>(it - thresholds.begin()) - 1];
}

CdfSeries ComputeCdf(std::span<const double> values) {
  if (values.empty()) throw EmptyInput("CDF of no values");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  CdfSeries cdf;
  const double n = static_cast<double>(sorted.size());
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (i + 1 < sorted.size() && sorted[i + 1] == sorted[i]) continue;
    cdf.thresholds.push_back(sorted[i]);
    cdf.fractions.push_back(i + 1 == sorted.size()
                                ? 1.0
                                : static_cast<double>(i + 1) / n);
  }
  return cdf;
}

CdfSeries ComputeCdf(std::span<const ErrorSample> samples, ErrorMetric metric) {
  return ComputeCdf(Extract(samples, metric));
}

BoxStats ComputeBoxStats(std::span<const double> values) {
  if (values.empty()) throw EmptyInput("box statistics of no values");
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();

  BoxStats b;
  b.count = n;
  b.min = v.front();
  b.max = v.back();
  b.median = MedianOfSorted(v);
  const std::size_t half = n / 2;
  if (half == 0) {
    b.q1 = b.q3 = v.front();
  } else {
    const std::span<const double> all(v);
    b.q1 = MedianOfSorted(all.first(half));
    b.q3 = MedianOfSorted(all.last(half));
  }
  const double iqr = b.q3 - b.q1;
  const double lo = b.q1 - 1.5 * iqr, hi = b.q3 + 1.5 * iqr;
  b.lower_whisker = b.max;
  b.upper_whisker = b.min;
  for (double x : v) {
    if (x < lo || x > hi) {
      b.outliers.push_back(x);
    } else {
      b.lower_whisker = std::min(b.lower_whisker, x);
      b.upper_whisker = std::max(b.upper_whisker, x);
    }
  }
  return b;
}

std::vector<GroupBoxStats> BoxStatsByGroup(std::span<const ErrorSample> samples) {
  std::vector<std::pair<std::string, std::string>> order;
  std::map<std::pair<std::string, std::string>, std::vector<ErrorSample>> groups;
  for (const auto& s : samples) {
    auto key = std::pair(s.scene_tag, s.model_tag);
    auto [it, inserted] = groups.try_emplace(key);
    if (inserted) order.push_back(key);
    it->second.push_back(s);
  }
  std::vector<GroupBoxStats> out;
  for (const auto& key : order) {
    const auto& g = groups[key];
    out.push_back({key.first, key.second,
                   ComputeBoxStats(Extract(g, ErrorMetric::kRotationDeg)),
                   ComputeBoxStats(Extract(g, ErrorMetric::kTranslationM))});
  }
  return out;
}

double PercentChange(double baseline_m, double ours_m) {
  if (!(baseline_m > 0.0)) {
    throw ZeroBaseline("percent change needs a positive baseline");
  }
  return 100.0 * (baseline_m - ours_m) / baseline_m;
}

RenderedReport RenderReport(std::span<const ReportGroup> groups) {
  const std::vector<std::string> header = {
      "scene", "model", "stage", "pairs", "median_translation_m",
      "median_rotation_deg", "percent_change_translation"};
  std::ostringstream csv_out;
  csv_out << csv::Join(header) << '\n';

  std::vector<std::vector<std::string>> table = {
      {"Scene", "Model", "Stage", "Pairs", "Median error", "% Change"}};
  for (const auto& g : groups) {
    std::string m_t, m_r, pct, cell, pct_cell;
    if (!g.samples.empty()) {
      const MedianErrors m = ComputeMedianErrors(g.samples);
      m_t = csv::FormatReal(m.translation_m);
      m_r = csv::FormatReal(m.rotation_deg);
      cell = FormatMedianErrors(m);
      if (g.baseline_translation_m) {
        const double p = PercentChange(*g.baseline_translation_m, m.translation_m);
        pct = csv::FormatReal(p);
        pct_cell = Fixed(p, 2);
      }
    }
    csv_out << csv::Join({csv::Escape(g.scene), csv::Escape(g.model),
                          csv::Escape(g.stage), std::to_string(g.samples.size()),
                          m_t, m_r, pct})
            << '\n';
    table.push_back({g.scene, g.model, g.stage, std::to_string(g.samples.size()),
                     cell.empty() ? "-" : cell, pct_cell.empty() ? "-" : pct_cell});
  }

  std::vector<std::size_t> widths(table.front().size(), 0);
  for (const auto& row : table) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      widths[c] = std::max(widths[c], DisplayWidth(row[c]));
    }
  }
  std::ostringstream text;
  for (std::size_t r = 0; r < table.size(); ++r) {
    std::string line;
    for (std::size_t c = 0; c < table[r].size(); ++c) {
      if (c) line += "  ";
      line += table[r][c];
      line.append(widths[c] - DisplayWidth(table[r][c]), ' ');
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    text << line << '\n';
    if (r == 0) {
      std::size_t total = 0;
      for (std::size_t w : widths) total += w;
      text << std::string(total + 2 * (widths.size() - 1), '-') << '\n';
    }
  }
  return {csv_out.str(), text.str()};
}

void WriteErrorSamples(std::ostream& out, std::span<const ErrorSample> samples) {
  out << "pair_id,scene,model,rotation_error_deg,translation_error_m\n";
  for (const auto& s : samples) {
    out << csv::Escape(s.pair_id) << ',' << csv::Escape(s.scene_tag) << ','
        << csv::Escape(s.model_tag) << ',' << csv::FormatReal(s.rotation_error_deg)
        << ',' << csv::FormatReal(s.translation_error_m) << '\n';
  }
}

void WriteCdf(std::ostream& out, const CdfSeries& cdf) {
  out << "threshold,fraction\n";
  for (std::size_t i = 0; i < cdf.thresholds.size(); ++i) {
    out << csv::FormatReal(cdf.thresholds[i]) << ','
        << csv::FormatReal(cdf.fractions[i]) << '\n';
  }
}

void WriteBoxStats(std::ostream& out, std::span<const GroupBoxStats> stats) {
  out << "scene,model,metric,count,min,q1,median,q3,max,lower_whisker,"
         "upper_whisker,outliers\n";
  for (const auto& g : stats) {
    WriteBoxRow(out, g, "rotation_deg", g.rotation);
    WriteBoxRow(out, g, "translation_m", g.translation);
  }
}

}  // namespace relpose

#include <cmath>
#include <cstdio>
#include <numbers>

#include "relpose/dataset_pipeline.h"
#include "relpose/errors.h"
#include "relpose/random.h"
#include "relpose/regressor.h"

namespace relpose {

namespace {

constexpr int kLabelDim = 7;
// Keeps features around 0.1 in magnitude. Adam's fixed-size steps then move
// the first layer's (larger) weights by a smaller relative amount, which
// lowers the noise floor reached with the default learning rate.
constexpr double kMixingGain = 0.1;
constexpr std::uint64_t kMixingStream = 1;
constexpr std::uint64_t kLabelStream = 2;
constexpr std::uint64_t kNoiseStream = 3;

Eigen::VectorXd LabelVector(const RelativePose& rel) {
  Eigen::VectorXd v(kLabelDim);
  v << rel.translation, rel.rotation.w, rel.rotation.x, rel.rotation.y,
      rel.rotation.z;
  return v;
}

std::string PairName(std::size_t i, char side) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "synthetic/%06zu_%c", i, side);
  return buf;
}

}  // namespace

Eigen::MatrixXd SyntheticMixingMatrix(std::uint64_t seed, int feature_dim) {
  if (feature_dim < kLabelDim) {
    throw InvariantViolation("synthetic features need at least 7 dimensions");
  }
  Rng rng(seed, kMixingStream);
  Eigen::MatrixXd A(feature_dim, kLabelDim);
  const double scale = kMixingGain / std::sqrt(static_cast<double>(kLabelDim));
  for (Eigen::Index c = 0; c < A.cols(); ++c) {
    for (Eigen::Index r = 0; r < A.rows(); ++r) A(r, c) = scale * rng.Normal();
  }
  return A;
}

std::vector<FeatureRow> SynthesizeFeatures(const Eigen::MatrixXd& mixing,
                                           std::span<const PairFileRow> pairs,
                                           double noise_sigma,
                                           std::uint64_t noise_seed) {
  if (mixing.cols() != kLabelDim) {
    throw DimensionMismatch("mixing matrix must have 7 columns");
  }
  Rng noise(noise_seed, kNoiseStream);
  std::vector<FeatureRow> rows;
  rows.reserve(pairs.size());
  for (const auto& p : pairs) {
    FeatureRow row{p.image_a, p.image_b, mixing * LabelVector(p.label_metric)};
    if (noise_sigma > 0.0) {
      for (Eigen::Index i = 0; i < row.features.size(); ++i) {
        row.features(i) += noise_sigma * noise.Normal();
      }
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

SyntheticPairSet MakeSynthetic(std::uint64_t seed, std::size_t n_pairs,
                               int feature_dim, double noise_sigma) {
  SyntheticPairSet set;
  set.seed = seed;
  set.noise_sigma = noise_sigma;
  set.mixing = SyntheticMixingMatrix(seed, feature_dim);

  Rng rng(seed, kLabelStream);
  set.pairs.reserve(n_pairs);
  for (std::size_t i = 0; i < n_pairs; ++i) {
    RelativePose rel;
    rel.rotation = QuatCanonicalize(rng.BoundedRotation(std::numbers::pi / 2));
    rel.translation = rng.UnitVector() * rng.Uniform(0.5, 2.0);
    const auto [first_set, second_set] = MakeLabelSets(rel);
    set.pairs.push_back(
        {PairName(i, 'a'), PairName(i, 'b'), "synthetic", first_set, second_set});
  }
  set.features = SynthesizeFeatures(set.mixing, set.pairs, noise_sigma, seed);
  return set;
}

}  // namespace relpose

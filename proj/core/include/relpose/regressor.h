#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "relpose/pose_math.h"
#include "relpose/sfm_io.h"

namespace relpose {

struct DenseLayer {
  Eigen::MatrixXd weights;  // out x in
  Eigen::VectorXd bias;     // out
};

// Trunk of tanh dense layers followed by two linear heads reading the last
// hidden layer: translation (3 outputs) and raw rotation (4 outputs).
struct RegressorParameters {
  std::vector<DenseLayer> trunk;
  DenseLayer translation_head;
  DenseLayer rotation_head;

  std::size_t Count() const;
  // Concatenation of every layer as (weights column-major, bias), trunk
  // first, then translation head, then rotation head.
  Eigen::VectorXd Flatten() const;
  void Unflatten(const Eigen::VectorXd& flat);
};

struct RegressorModel {
  int input_dim = 0;
  std::vector<int> hidden_sizes;
  std::uint64_t seed = 0;
  RegressorParameters params;

  std::size_t ParameterCount() const { return params.Count(); }
};

// Weights ~ U(-sqrt(3 / fan_in), +sqrt(3 / fan_in)), biases zero.
RegressorModel InitModel(int input_dim, const std::vector<int>& hidden_sizes,
                         std::uint64_t seed);

// Column-per-sample outputs. rotation_raw is not normalized.
struct ForwardOutput {
  Eigen::MatrixXd translation;   // 3 x B
  Eigen::MatrixXd rotation_raw;  // 4 x B
};

// features: input_dim x B. Throws DimensionMismatch.
ForwardOutput Forward(const RegressorModel& model,
                      const Eigen::MatrixXd& features);

enum class LossNorm {
  // sum_i |t^_i - t_i| + |q^_i - q_i|
  kEuclidean,
  // Same with squared norms.
  kSquaredEuclidean,
};

// Targets as columns: translation 3 x B, rotation 4 x B.
struct BatchTargets {
  Eigen::MatrixXd translation;
  Eigen::MatrixXd rotation;
};

// Sum over the batch (not the mean). Throws EmptyBatch.
double Loss(const ForwardOutput& predicted, const BatchTargets& targets,
            LossNorm norm = LossNorm::kEuclidean);

// Guard on |r| in d|r|/dr = r / max(|r|, eps).
inline constexpr double kNormGradEps = 1e-12;

struct LossAndGradients {
  double loss = 0.0;
  RegressorParameters gradients;
};

LossAndGradients Backward(const RegressorModel& model,
                          const Eigen::MatrixXd& features,
                          const BatchTargets& targets,
                          LossNorm norm = LossNorm::kEuclidean);

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

class AdamOptimizer {
 public:
  AdamOptimizer(std::size_t parameter_count, const AdamConfig& config);

  void Step(Eigen::VectorXd& params, const Eigen::VectorXd& gradients);
  void Reset();
  std::int64_t steps() const { return steps_; }

 private:
  AdamConfig config_;
  Eigen::VectorXd m_;
  Eigen::VectorXd v_;
  std::int64_t steps_ = 0;
};

// Features and both label sets, one column per pair.
struct PairDataset {
  Eigen::MatrixXd features;       // D x N
  Eigen::MatrixXd t_normalized;   // 3 x N
  Eigen::MatrixXd t_metric;       // 3 x N
  Eigen::MatrixXd rotation;       // 4 x N
  std::vector<std::string> image_a;
  std::vector<std::string> image_b;

  Eigen::Index size() const { return features.cols(); }
  BatchTargets Targets(LabelSet set) const {
    return {set == LabelSet::kNormalized ? t_normalized : t_metric, rotation};
  }
  PairDataset Slice(Eigen::Index begin, Eigen::Index count) const;
};

// Joins label rows with feature rows on (image_a, image_b). Throws IdMismatch
// when a pair lacks features or a feature row has no pair.
PairDataset MakePairDataset(std::span<const PairFileRow> pairs,
                            std::span<const FeatureRow> features);

struct TrainConfig {
  int stage1_epochs = 30;
  int stage2_epochs = 20;
  int one_stage_epochs = 50;
  int batch_size = 64;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::uint64_t seed = 0;
  LossNorm loss_norm = LossNorm::kEuclidean;
  // Fresh Adam moments at the stage-2 boundary; false carries them over.
  bool reset_optimizer_between_stages = true;
  // Seeded per-epoch permutation of the training pairs.
  bool shuffle = true;

  // Throws InvariantViolation on non-positive values.
  void Validate() const;
};

struct EpochLog {
  int epoch = 0;  // 1-based, counted across stages
  int stage = 1;
  LabelSet label_set = LabelSet::kMetric;
  // Mean per-pair loss over the epoch's batches.
  double loss = 0.0;
  double wall_time_s = 0.0;
  // True on the first epoch of a stage that started with fresh moments.
  bool optimizer_reset = false;
};

struct TrainResult {
  RegressorModel model;
  std::vector<EpochLog> log;
};

// Stage 1 on unit translations for stage1_epochs, then stage 2 on metric
// translations for stage2_epochs, continuing from the stage-1 weights.
TrainResult TrainTwoStage(RegressorModel model, const PairDataset& data,
                          const TrainConfig& cfg);
// Metric translations for one_stage_epochs.
TrainResult TrainOneStage(RegressorModel model, const PairDataset& data,
                          const TrainConfig& cfg);

// One JSON object per line. Wall time is omitted when include_wall_time is
// false so that logs of identical runs compare equal byte for byte.
std::string FormatTrainingLog(std::span<const EpochLog> log,
                              bool include_wall_time);

// Normalized, canonical rotation and raw translation per column.
// Throws DegenerateQuaternion when a raw rotation output is ~0.
std::vector<RelativePose> Predict(const RegressorModel& model,
                                  const Eigen::MatrixXd& features);
RelativePose PredictOne(const RegressorModel& model,
                        const Eigen::VectorXd& features);

// JSON checkpoint, format "relpose-regressor" version 1.
std::string SerializeCheckpoint(const RegressorModel& model);
// Throws ParseError on malformed JSON and InvariantViolation on shape or
// finiteness problems.
RegressorModel ParseCheckpoint(std::string_view text);

// Stand-in for image features: features = A [t; q] + sigma * noise with a
// seeded Gaussian mixing matrix A (feature_dim x 7, entries with standard
// deviation 0.1 / sqrt(7)).
struct SyntheticPairSet {
  std::uint64_t seed = 0;
  double noise_sigma = 0.0;
  Eigen::MatrixXd mixing;
  std::vector<PairFileRow> pairs;
  std::vector<FeatureRow> features;

  PairDataset Dataset() const { return MakePairDataset(pairs, features); }
};

// Rotation angles are uniform in [0, 90] degrees about a random axis;
// translations have a random direction and norm uniform in [0.5, 2].
// Throws InvariantViolation unless feature_dim >= 7.
SyntheticPairSet MakeSynthetic(std::uint64_t seed, std::size_t n_pairs,
                               int feature_dim, double noise_sigma);

// The mixing matrix MakeSynthetic uses for (seed, feature_dim).
Eigen::MatrixXd SyntheticMixingMatrix(std::uint64_t seed, int feature_dim);

// Features for existing labelled pairs (metric translation and rotation).
std::vector<FeatureRow> SynthesizeFeatures(const Eigen::MatrixXd& mixing,
                                           std::span<const PairFileRow> pairs,
                                           double noise_sigma,
                                           std::uint64_t noise_seed);

}  // namespace relpose

#include "relpose/regressor.h"

#include <chrono>
#include <map>
#include <numeric>
#include <utility>

#include <nlohmann/json.hpp>

#include "relpose/errors.h"
#include "relpose/random.h"

namespace relpose {

namespace {

// Stream id for the batch-order RNG, kept apart from initialization.
constexpr std::uint64_t kShuffleStream = 0x53485546464c45ull;

struct Stage {
  int number;
  int epochs;
  LabelSet labels;
};

Eigen::MatrixXd GatherColumns(const Eigen::MatrixXd& m,
                              std::span<const Eigen::Index> cols) {
  Eigen::MatrixXd out(m.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t i = 0; i < cols.size(); ++i) {
    out.col(static_cast<Eigen::Index>(i)) = m.col(cols[i]);
  }
  return out;
}

TrainResult RunStages(RegressorModel model, const PairDataset& data,
                      const TrainConfig& cfg, std::span<const Stage> stages) {
  cfg.Validate();
  if (data.size() == 0) throw EmptyBatch("training set is empty");
  if (data.features.rows() != model.input_dim) {
    throw DimensionMismatch("training features do not match the model");
  }

  const AdamConfig adam{cfg.learning_rate, cfg.beta1, cfg.beta2, cfg.epsilon};
  AdamOptimizer optimizer(model.ParameterCount(), adam);
  Rng shuffle_rng(cfg.seed, kShuffleStream);

  std::vector<Eigen::Index> order(static_cast<std::size_t>(data.size()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});

  TrainResult result;
  Eigen::VectorXd flat = model.params.Flatten();
  int epoch = 0;
  for (std::size_t s = 0; s < stages.size(); ++s) {
    const Stage& stage = stages[s];
    bool reset = s == 0;
    if (s > 0 && cfg.reset_optimizer_between_stages) {
      optimizer.Reset();
      reset = true;
    }
    const BatchTargets targets = data.Targets(stage.labels);

    for (int e = 0; e < stage.epochs; ++e) {
      const auto start = std::chrono::steady_clock::now();
      if (cfg.shuffle) {
        for (std::size_t i = order.size(); i > 1; --i) {
          std::swap(order[i - 1], order[shuffle_rng.UniformIndex(i)]);
        }
      }
      double epoch_loss = 0.0;
      for (std::size_t begin = 0; begin < order.size();
           begin += static_cast<std::size_t>(cfg.batch_size)) {
        const std::size_t count = std::min(
            static_cast<std::size_t>(cfg.batch_size), order.size() - begin);
        const std::span<const Eigen::Index> idx(order.data() + begin, count);
        const BatchTargets batch{GatherColumns(targets.translation, idx),
                                 GatherColumns(targets.rotation, idx)};
        const LossAndGradients lg = Backward(
            model, GatherColumns(data.features, idx), batch, cfg.loss_norm);
        epoch_loss += lg.loss;
        optimizer.Step(flat, lg.gradients.Flatten());
        model.params.Unflatten(flat);
      }
      const std::chrono::duration<double> elapsed =
          std::chrono::steady_clock::now() - start;

      EpochLog entry;
      entry.epoch = ++epoch;
      entry.stage = stage.number;
      entry.label_set = stage.labels;
      entry.loss = epoch_loss / static_cast<double>(order.size());
      entry.wall_time_s = elapsed.count();
      entry.optimizer_reset = reset && e == 0;
      result.log.push_back(entry);
    }
  }
  result.model = std::move(model);
  return result;
}

}  // namespace

PairDataset PairDataset::Slice(Eigen::Index begin, Eigen::Index count) const {
  PairDataset out;
  out.features = features.middleCols(begin, count);
  out.t_normalized = t_normalized.middleCols(begin, count);
  out.t_metric = t_metric.middleCols(begin, count);
  out.rotation = rotation.middleCols(begin, count);
  out.image_a.assign(image_a.begin() + begin, image_a.begin() + begin + count);
  out.image_b.assign(image_b.begin() + begin, image_b.begin() + begin + count);
  return out;
}

PairDataset MakePairDataset(std::span<const PairFileRow> pairs,
                            std::span<const FeatureRow> features) {
  std::map<std::pair<std::string, std::string>, const FeatureRow*> by_key;
  for (const auto& f : features) {
    if (!by_key.emplace(std::pair(f.image_a, f.image_b), &f).second) {
      throw IdMismatch("duplicate feature row for " + f.image_a + " / " +
                       f.image_b);
    }
  }
  if (features.size() != pairs.size()) {
    throw IdMismatch("have " + std::to_string(features.size()) +
                     " feature rows for " + std::to_string(pairs.size()) +
                     " pairs");
  }
  const Eigen::Index n = static_cast<Eigen::Index>(pairs.size());
  const Eigen::Index dim = features.empty() ? 0 : features.front().features.size();

  PairDataset data;
  data.features.resize(dim, n);
  data.t_normalized.resize(3, n);
  data.t_metric.resize(3, n);
  data.rotation.resize(4, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const PairFileRow& row = pairs[static_cast<std::size_t>(i)];
    const auto it = by_key.find({row.image_a, row.image_b});
    if (it == by_key.end()) {
      throw IdMismatch("no features for pair " + row.image_a + " / " +
                       row.image_b);
    }
    if (it->second->features.size() != dim) {
      throw DimensionMismatch("feature rows have inconsistent dimensions");
    }
    data.features.col(i) = it->second->features;
    data.t_normalized.col(i) = row.label_normalized.translation;
    data.t_metric.col(i) = row.label_metric.translation;
    data.rotation.col(i) = row.label_metric.rotation.ToVector();
    data.image_a.push_back(row.image_a);
    data.image_b.push_back(row.image_b);
  }
  return data;
}

void TrainConfig::Validate() const {
  if (stage1_epochs <= 0 || stage2_epochs <= 0 || one_stage_epochs <= 0 ||
      batch_size <= 0 || !(learning_rate > 0.0) || !(epsilon > 0.0) ||
      !(beta1 > 0.0 && beta1 < 1.0) || !(beta2 > 0.0 && beta2 < 1.0)) {
    throw InvariantViolation("training configuration values must be positive");
  }
}

TrainResult TrainTwoStage(RegressorModel model, const PairDataset& data,
                          const TrainConfig& cfg) {
  const Stage stages[] = {{1, cfg.stage1_epochs, LabelSet::kNormalized},
                          {2, cfg.stage2_epochs, LabelSet::kMetric}};
  return RunStages(std::move(model), data, cfg, stages);
}

TrainResult TrainOneStage(RegressorModel model, const PairDataset& data,
                          const TrainConfig& cfg) {
  const Stage stages[] = {{1, cfg.one_stage_epochs, LabelSet::kMetric}};
  return RunStages(std::move(model), data, cfg, stages);
}

std::string FormatTrainingLog(std::span<const EpochLog> log,
                              bool include_wall_time) {
  std::string out;
  for (const auto& e : log) {
    nlohmann::ordered_json j;
    j["epoch"] = e.epoch;
    j["stage"] = e.stage;
    j["label_set"] = e.label_set == LabelSet::kNormalized ? "first" : "second";
    j["loss"] = e.loss;
    j["optimizer_reset"] = e.optimizer_reset;
    if (include_wall_time) j["wall_time_s"] = e.wall_time_s;
    out += j.dump();
    out += '\n';
  }
  return out;
}

}  // namespace relpose

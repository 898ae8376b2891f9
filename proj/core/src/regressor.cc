#include "relpose/regressor.h"

#include <cmath>

#include <nlohmann/json.hpp>

#include "relpose/errors.h"
#include "relpose/random.h"

namespace relpose {

namespace {

constexpr const char* kCheckpointFormat = "relpose-regressor";
constexpr int kCheckpointVersion = 1;

std::size_t LayerSize(const DenseLayer& layer) {
  return static_cast<std::size_t>(layer.weights.size() + layer.bias.size());
}

template <typename Fn>
void ForEachLayer(const RegressorParameters& p, Fn&& fn) {
  for (const auto& layer : p.trunk) fn(layer);
  fn(p.translation_head);
  fn(p.rotation_head);
}

template <typename Fn>
void ForEachLayer(RegressorParameters& p, Fn&& fn) {
  for (auto& layer : p.trunk) fn(layer);
  fn(p.translation_head);
  fn(p.rotation_head);
}

DenseLayer InitLayer(int in, int out, Rng& rng) {
  DenseLayer layer;
  layer.weights.resize(out, in);
  layer.bias = Eigen::VectorXd::Zero(out);
  const double limit = std::sqrt(3.0 / in);
  for (Eigen::Index c = 0; c < layer.weights.cols(); ++c) {
    for (Eigen::Index r = 0; r < layer.weights.rows(); ++r) {
      layer.weights(r, c) = rng.Uniform(-limit, limit);
    }
  }
  return layer;
}

// Hidden activations a_0 = input, a_l = tanh(W_l a_{l-1} + b_l).
std::vector<Eigen::MatrixXd> TrunkActivations(const RegressorModel& model,
                                              const Eigen::MatrixXd& features) {
  if (features.rows() != model.input_dim) {
    throw DimensionMismatch("model expects " + std::to_string(model.input_dim) +
                            " features, got " + std::to_string(features.rows()));
  }
  std::vector<Eigen::MatrixXd> acts;
  acts.reserve(model.params.trunk.size() + 1);
  acts.push_back(features);
  for (const auto& layer : model.params.trunk) {
    Eigen::MatrixXd z = layer.weights * acts.back();
    z.colwise() += layer.bias;
    acts.push_back(z.array().tanh().matrix());
  }
  return acts;
}

ForwardOutput Heads(const RegressorParameters& p, const Eigen::MatrixXd& h) {
  ForwardOutput out;
  out.translation = p.translation_head.weights * h;
  out.translation.colwise() += p.translation_head.bias;
  out.rotation_raw = p.rotation_head.weights * h;
  out.rotation_raw.colwise() += p.rotation_head.bias;
  return out;
}

void CheckTargets(const ForwardOutput& predicted, const BatchTargets& targets) {
  const Eigen::Index n = predicted.translation.cols();
  if (n == 0) throw EmptyBatch("loss over an empty batch");
  if (targets.translation.rows() != 3 || targets.rotation.rows() != 4 ||
      targets.translation.cols() != n || targets.rotation.cols() != n) {
    throw DimensionMismatch("targets do not match the prediction batch");
  }
}

double NormTerm(const Eigen::MatrixXd& residual, Eigen::Index col,
                LossNorm norm) {
  const double sq = residual.col(col).squaredNorm();
  return norm == LossNorm::kEuclidean ? std::sqrt(sq) : sq;
}

// dL/dpred for one residual column.
Eigen::VectorXd NormGrad(const Eigen::VectorXd& r, LossNorm norm) {
  if (norm == LossNorm::kSquaredEuclidean) return 2.0 * r;
  return r / std::max(r.norm(), kNormGradEps);
}

nlohmann::ordered_json LayerToJson(const std::string& name, const DenseLayer& layer) {
  std::vector<double> w;
  w.reserve(static_cast<std::size_t>(layer.weights.size()));
  for (Eigen::Index r = 0; r < layer.weights.rows(); ++r) {
    for (Eigen::Index c = 0; c < layer.weights.cols(); ++c) {
      w.push_back(layer.weights(r, c));
    }
  }
  nlohmann::ordered_json j;
  j["name"] = name;
  j["rows"] = layer.weights.rows();
  j["cols"] = layer.weights.cols();
  j["weights"] = w;
  j["bias"] = std::vector<double>(layer.bias.data(),
                                  layer.bias.data() + layer.bias.size());
  return j;
}

DenseLayer LayerFromJson(const nlohmann::json& j, const std::string& name,
                         Eigen::Index rows, Eigen::Index cols) {
  if (j.at("name").get<std::string>() != name) {
    throw InvariantViolation("checkpoint layer order: expected " + name);
  }
  if (j.at("rows").get<Eigen::Index>() != rows ||
      j.at("cols").get<Eigen::Index>() != cols) {
    throw InvariantViolation("checkpoint layer " + name + " has wrong shape");
  }
  const auto w = j.at("weights").get<std::vector<double>>();
  const auto b = j.at("bias").get<std::vector<double>>();
  if (w.size() != static_cast<std::size_t>(rows * cols) ||
      b.size() != static_cast<std::size_t>(rows)) {
    throw InvariantViolation("checkpoint layer " + name +
                             " has wrong parameter count");
  }
  DenseLayer layer;
  layer.weights.resize(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      layer.weights(r, c) = w[static_cast<std::size_t>(r * cols + c)];
    }
  }
  layer.bias = Eigen::Map<const Eigen::VectorXd>(b.data(), rows);
  if (!layer.weights.allFinite() || !layer.bias.allFinite()) {
    throw InvariantViolation("checkpoint layer " + name +
                             " has non-finite values");
  }
  return layer;
}

}  // namespace

std::size_t RegressorParameters::Count() const {
  std::size_t n = 0;
  ForEachLayer(*this, [&](const DenseLayer& l) { n += LayerSize(l); });
  return n;
}

Eigen::VectorXd RegressorParameters::Flatten() const {
  Eigen::VectorXd flat(static_cast<Eigen::Index>(Count()));
  Eigen::Index pos = 0;
  ForEachLayer(*this, [&](const DenseLayer& l) {
    flat.segment(pos, l.weights.size()) =
        Eigen::Map<const Eigen::VectorXd>(l.weights.data(), l.weights.size());
    pos += l.weights.size();
    flat.segment(pos, l.bias.size()) = l.bias;
    pos += l.bias.size();
  });
  return flat;
}

void RegressorParameters::Unflatten(const Eigen::VectorXd& flat) {
  if (flat.size() != static_cast<Eigen::Index>(Count())) {
    throw DimensionMismatch("flat parameter vector has the wrong length");
  }
  Eigen::Index pos = 0;
  ForEachLayer(*this, [&](DenseLayer& l) {
    Eigen::Map<Eigen::VectorXd>(l.weights.data(), l.weights.size()) =
        flat.segment(pos, l.weights.size());
    pos += l.weights.size();
    l.bias = flat.segment(pos, l.bias.size());
    pos += l.bias.size();
  });
}

RegressorModel InitModel(int input_dim, const std::vector<int>& hidden_sizes,
                         std::uint64_t seed) {
  if (input_dim <= 0 || hidden_sizes.empty()) {
    throw InvariantViolation("model needs a positive input size and at least "
                             "one hidden layer");
  }
  for (int h : hidden_sizes) {
    if (h <= 0) throw InvariantViolation("hidden layer sizes must be positive");
  }
  RegressorModel model;
  model.input_dim = input_dim;
  model.hidden_sizes = hidden_sizes;
  model.seed = seed;
  Rng rng(seed);
  int in = input_dim;
  for (int h : hidden_sizes) {
    model.params.trunk.push_back(InitLayer(in, h, rng));
    in = h;
  }
  model.params.translation_head = InitLayer(in, 3, rng);
  model.params.rotation_head = InitLayer(in, 4, rng);
  return model;
}

ForwardOutput Forward(const RegressorModel& model,
                      const Eigen::MatrixXd& features) {
  const auto acts = TrunkActivations(model, features);
  return Heads(model.params, acts.back());
}

double Loss(const ForwardOutput& predicted, const BatchTargets& targets,
            LossNorm norm) {
  CheckTargets(predicted, targets);
  const Eigen::MatrixXd rt = predicted.translation - targets.translation;
  const Eigen::MatrixXd rq = predicted.rotation_raw - targets.rotation;
  double total = 0.0;
  for (Eigen::Index i = 0; i < rt.cols(); ++i) {
    total += NormTerm(rt, i, norm) + NormTerm(rq, i, norm);
  }
  return total;
}

LossAndGradients Backward(const RegressorModel& model,
                          const Eigen::MatrixXd& features,
                          const BatchTargets& targets, LossNorm norm) {
  const auto acts = TrunkActivations(model, features);
  const RegressorParameters& p = model.params;
  const ForwardOutput out = Heads(p, acts.back());

  LossAndGradients result;
  result.loss = Loss(out, targets, norm);

  const Eigen::MatrixXd rt = out.translation - targets.translation;
  const Eigen::MatrixXd rq = out.rotation_raw - targets.rotation;
  Eigen::MatrixXd gt(3, rt.cols()), gq(4, rq.cols());
  for (Eigen::Index i = 0; i < rt.cols(); ++i) {
    gt.col(i) = NormGrad(rt.col(i), norm);
    gq.col(i) = NormGrad(rq.col(i), norm);
  }

  RegressorParameters& g = result.gradients;
  const Eigen::MatrixXd& h = acts.back();
  g.translation_head.weights = gt * h.transpose();
  g.translation_head.bias = gt.rowwise().sum();
  g.rotation_head.weights = gq * h.transpose();
  g.rotation_head.bias = gq.rowwise().sum();

  Eigen::MatrixXd upstream = p.translation_head.weights.transpose() * gt +
                             p.rotation_head.weights.transpose() * gq;
  g.trunk.resize(p.trunk.size());
  for (std::size_t l = p.trunk.size(); l-- > 0;) {
    const Eigen::MatrixXd& a = acts[l + 1];
    const Eigen::MatrixXd dz =
        (upstream.array() * (1.0 - a.array().square())).matrix();
    g.trunk[l].weights = dz * acts[l].transpose();
    g.trunk[l].bias = dz.rowwise().sum();
    if (l > 0) upstream = p.trunk[l].weights.transpose() * dz;
  }
  return result;
}

AdamOptimizer::AdamOptimizer(std::size_t parameter_count,
                             const AdamConfig& config)
    : config_(config),
      m_(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(parameter_count))),
      v_(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(parameter_count))) {}

void AdamOptimizer::Step(Eigen::VectorXd& params,
                         const Eigen::VectorXd& gradients) {
  if (params.size() != m_.size() || gradients.size() != m_.size()) {
    throw DimensionMismatch("optimizer state does not match parameters");
  }
  ++steps_;
  const double b1 = config_.beta1, b2 = config_.beta2;
  m_ = b1 * m_ + (1.0 - b1) * gradients;
  v_ = b2 * v_ + (1.0 - b2) * gradients.cwiseProduct(gradients);
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(steps_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(steps_));
  params.array() -= config_.learning_rate * (m_.array() / c1) /
                    ((v_.array() / c2).sqrt() + config_.epsilon);
}

void AdamOptimizer::Reset() {
  m_.setZero();
  v_.setZero();
  steps_ = 0;
}

std::vector<RelativePose> Predict(const RegressorModel& model,
                                  const Eigen::MatrixXd& features) {
  const ForwardOutput out = Forward(model, features);
  std::vector<RelativePose> poses;
  poses.reserve(static_cast<std::size_t>(out.translation.cols()));
  for (Eigen::Index i = 0; i < out.translation.cols(); ++i) {
    const Quaternion q = Quaternion::FromVector(out.rotation_raw.col(i));
    poses.push_back({QuatCanonicalize(QuatNormalize(q)), out.translation.col(i)});
  }
  return poses;
}

RelativePose PredictOne(const RegressorModel& model,
                        const Eigen::VectorXd& features) {
  return Predict(model, Eigen::MatrixXd(features)).front();
}

std::string SerializeCheckpoint(const RegressorModel& model) {
  nlohmann::ordered_json j;
  j["format"] = kCheckpointFormat;
  j["version"] = kCheckpointVersion;
  j["input_dim"] = model.input_dim;
  j["hidden_sizes"] = model.hidden_sizes;
  j["activation"] = "tanh";
  j["seed"] = model.seed;
  auto& layers = j["layers"] = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < model.params.trunk.size(); ++i) {
    layers.push_back(LayerToJson("trunk." + std::to_string(i),
                                 model.params.trunk[i]));
  }
  layers.push_back(LayerToJson("translation_head", model.params.translation_head));
  layers.push_back(LayerToJson("rotation_head", model.params.rotation_head));
  return j.dump(1) + "\n";
}

RegressorModel ParseCheckpoint(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(1, std::string("checkpoint is not valid JSON: ") + e.what());
  }
  try {
    if (j.at("format").get<std::string>() != kCheckpointFormat) {
      throw InvariantViolation("not a relpose regressor checkpoint");
    }
    if (j.at("version").get<int>() != kCheckpointVersion) {
      throw InvariantViolation("unsupported checkpoint version");
    }
    if (j.at("activation").get<std::string>() != "tanh") {
      throw InvariantViolation("unsupported activation");
    }
    RegressorModel model;
    model.input_dim = j.at("input_dim").get<int>();
    model.hidden_sizes = j.at("hidden_sizes").get<std::vector<int>>();
    model.seed = j.at("seed").get<std::uint64_t>();
    if (model.input_dim <= 0 || model.hidden_sizes.empty()) {
      throw InvariantViolation("checkpoint has invalid dimensions");
    }
    const auto& layers = j.at("layers");
    if (!layers.is_array() || layers.size() != model.hidden_sizes.size() + 2) {
      throw InvariantViolation("checkpoint has the wrong number of layers");
    }
    Eigen::Index in = model.input_dim;
    for (std::size_t i = 0; i < model.hidden_sizes.size(); ++i) {
      const Eigen::Index out = model.hidden_sizes[i];
      if (out <= 0) throw InvariantViolation("hidden sizes must be positive");
      model.params.trunk.push_back(
          LayerFromJson(layers[i], "trunk." + std::to_string(i), out, in));
      in = out;
    }
    const std::size_t heads = model.hidden_sizes.size();
    model.params.translation_head =
        LayerFromJson(layers[heads], "translation_head", 3, in);
    model.params.rotation_head =
        LayerFromJson(layers[heads + 1], "rotation_head", 4, in);
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw InvariantViolation(std::string("malformed checkpoint: ") + e.what());
  }
}

}  // namespace relpose

#include "cli.h"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "relpose/dataset_pipeline.h"
#include "relpose/epipolar.h"
#include "relpose/errors.h"
#include "relpose/eval_report.h"
#include "relpose/regressor.h"
#include "relpose/sfm_io.h"

namespace relpose::cli {
namespace {

namespace fs = std::filesystem;

// Strips the "line N: " prefix ParseError adds, so the path can go in front.
std::string WithoutLinePrefix(const std::string& what) {
  if (what.rfind("line ", 0) != 0) return what;
  const auto colon = what.find(": ");
  return colon == std::string::npos ? what : what.substr(colon + 2);
}

// Runs `parse` over a file and prefixes any failure with "path:line:".
template <typename Parse>
auto ReadFile(const fs::path& path, Parse parse) {
  std::ifstream in = OpenInputFile(path);
  try {
    return parse(in);
  } catch (const ParseError& e) {
    throw InputError(path.string() + ":" + std::to_string(e.line()) + ": " +
                     WithoutLinePrefix(e.what()));
  } catch (const InputError& e) {
    throw InputError(path.string() + ": " + e.what());
  } catch (const Error& e) {
    throw Error(path.string() + ": " + e.what());
  }
}

std::string Slurp(const fs::path& path) {
  std::ifstream in = OpenInputFile(path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// Output is rendered in memory first so a failing command leaves no
// half-written file behind.
void WriteText(const fs::path& path, const std::string& text) {
  if (path.has_parent_path() && !fs::exists(path.parent_path())) {
    throw FileError(path.string(), "parent directory does not exist");
  }
  std::ofstream out = OpenOutputFile(path);
  out << text;
  out.flush();
  if (!out) throw FileError(path.string(), "write failed");
}

template <typename Writer, typename Rows>
std::string Render(Writer write, const Rows& rows) {
  std::ostringstream s;
  write(s, rows);
  return s.str();
}

std::string SequenceFromName(const std::string& name) {
  const std::string parent = fs::path(name).parent_path().generic_string();
  return parent.empty() ? "default" : parent;
}

PairingMode ParsePairingMode(const std::string& s) {
  return s == "consecutive" ? PairingMode::kConsecutive
                            : PairingMode::kRandomWithinSequence;
}

// ---- subcommand state

struct Global {
  bool quiet = false;
};

struct ConvertArgs {
  std::string colmap_dir;
  std::string landmark_file;
  bool reref = false;
  std::string sequence;
  std::string output;
};

struct PairsArgs {
  std::string poses;
  std::string output;
  std::string summary;
  int pairs_per_image = 8;
  int max_gap = 0;
  std::uint64_t seed = 0;
  std::string mode = "random";
  bool both_directions = false;
};

struct TrainArgs {
  std::string pairs;
  std::string features;
  std::size_t synthetic = 0;
  int dim = 32;
  double noise = 0.0;
  std::string mode = "two-stage";
  std::uint64_t seed = 0;
  std::vector<int> hidden = {128, 128};
  TrainConfig cfg;
  std::string loss = "euclidean";
  bool carry_optimizer = false;
  bool no_shuffle = false;
  std::string checkpoint;
  std::string log;
  bool no_wall_time = false;
};

struct EvalArgs {
  std::string pairs;
  std::string checkpoint;
  std::string features;
  std::string predictions;
  std::string predictions_out;
  std::string out_dir;
  std::string label_set = "metric";
  std::string model_tag = "model";
  std::string scene_tag;
  std::string stage;
  std::optional<double> baseline_m;
};

struct EpilinesArgs {
  std::string pairs;
  std::string keypoints;
  std::string output;
  std::int64_t width = 0;
  std::int64_t height = 0;
  double fov = 0.0;
  std::string colmap_cameras;
  std::int64_t camera_id = 0;
  std::vector<std::string> sources = {"gt"};
  std::string predictions;
  std::string fundamentals;
};

struct SynthArgs {
  std::size_t n = 0;
  std::string from_pairs;
  int dim = 32;
  double noise = 0.0;
  std::uint64_t seed = 0;
  std::optional<std::uint64_t> noise_seed;
  std::string pairs_out;
  std::string features_out;
};

// ---- convert

int RunConvert(const ConvertArgs& a, const Global& g, std::ostream& out) {
  if (a.colmap_dir.empty() == a.landmark_file.empty()) {
    throw InputError("convert needs exactly one of --colmap or --landmark");
  }
  if (a.reref && a.colmap_dir.empty()) {
    throw InputError("--reref applies to COLMAP models only");
  }
  std::vector<PoseTableRow> rows;
  auto sequence_for = [&](const std::string& name) {
    return a.sequence.empty() ? SequenceFromName(name) : a.sequence;
  };

  if (!a.colmap_dir.empty()) {
    auto records = ReadFile(fs::path(a.colmap_dir) / "images.txt", ParseColmapImages);
    SortByTimestamp(records);
    if (a.reref) {
      if (records.empty()) throw InputError(a.colmap_dir + ": model has no images");
      const auto poses =
          ApplyRereference(records, ComputeFirstFrameTransform(records.front()));
      for (std::size_t i = 0; i < records.size(); ++i) {
        rows.push_back({records[i].name, sequence_for(records[i].name),
                        poses[i].rotation, poses[i].translation});
      }
    } else {
      for (const auto& r : records) {
        rows.push_back({r.name, sequence_for(r.name), r.rotation, r.translation_raw});
      }
    }
  } else {
    for (const auto& r : ReadFile(a.landmark_file, ParseLandmarkPoses)) {
      rows.push_back({r.image_path, sequence_for(r.image_path), r.rotation, r.translation});
    }
  }

  WriteText(a.output, Render(WritePoseTable, rows));
  if (!g.quiet) out << "wrote " << rows.size() << " poses to " << a.output << '\n';
  return kExitOk;
}

// ---- pairs

int RunPairs(const PairsArgs& a, const Global& g, std::ostream& out) {
  PairingConfig cfg;
  cfg.pairs_per_image = a.pairs_per_image;
  if (a.max_gap > 0) cfg.max_index_gap = a.max_gap;
  cfg.rng_seed = a.seed;
  cfg.mode = ParsePairingMode(a.mode);
  cfg.both_directions = a.both_directions;

  const auto poses = ReadFile(a.poses, ReadPoseTable);
  const PairingResult result = GeneratePairs(poses, cfg);
  const std::string pairs_text = Render(WritePairsFile, result.rows);
  const std::string summary = result.summary.ToJson() + "\n";

  WriteText(a.output, pairs_text);
  if (!a.summary.empty()) {
    WriteText(a.summary, summary);
  } else if (!g.quiet) {
    out << summary;
  }
  if (!g.quiet) {
    out << "wrote " << result.rows.size() << " pairs to " << a.output << '\n';
    for (const auto& s : result.summary.skipped_sequences) {
      out << "skipped sequence " << s << " (fewer than two frames)\n";
    }
  }
  return kExitOk;
}

// ---- synth

int RunSynth(const SynthArgs& a, const Global& g, std::ostream& out) {
  if ((a.n > 0) == !a.from_pairs.empty()) {
    throw InputError("synth needs exactly one of --n or --from-pairs");
  }
  if (a.features_out.empty()) throw InputError("--features-out is required");
  if (a.dim < 7) throw InputError("--dim must be at least 7");
  if (a.noise < 0) throw InputError("--noise must be non-negative");

  if (a.n > 0) {
    if (a.pairs_out.empty()) throw InputError("--pairs-out is required with --n");
    const SyntheticPairSet set = MakeSynthetic(a.seed, a.n, a.dim, a.noise);
    const std::string pairs_text = Render(WritePairsFile, set.pairs);
    const std::string features_text = Render(WriteFeaturesFile, set.features);
    WriteText(a.pairs_out, pairs_text);
    WriteText(a.features_out, features_text);
    if (!g.quiet) out << "wrote " << set.pairs.size() << " synthetic pairs\n";
    return kExitOk;
  }

  const auto pairs = ReadFile(a.from_pairs, ReadPairsFile);
  const auto features = SynthesizeFeatures(SyntheticMixingMatrix(a.seed, a.dim), pairs,
                                           a.noise, a.noise_seed.value_or(a.seed));
  WriteText(a.features_out, Render(WriteFeaturesFile, features));
  if (!g.quiet) out << "wrote features for " << features.size() << " pairs\n";
  return kExitOk;
}

// ---- train

int RunTrain(TrainArgs a, const Global& g, std::ostream& out) {
  const bool from_files = !a.pairs.empty() || !a.features.empty();
  if (from_files == (a.synthetic > 0)) {
    throw InputError("train needs --pairs and --features, or --synthetic");
  }
  if (from_files && (a.pairs.empty() || a.features.empty())) {
    throw InputError("--pairs and --features go together");
  }
  a.cfg.seed = a.seed;
  a.cfg.loss_norm = a.loss == "squared" ? LossNorm::kSquaredEuclidean : LossNorm::kEuclidean;
  a.cfg.reset_optimizer_between_stages = !a.carry_optimizer;
  a.cfg.shuffle = !a.no_shuffle;
  try {
    a.cfg.Validate();
  } catch (const InvariantViolation& e) {
    throw InputError(e.what());
  }
  for (int h : a.hidden) {
    if (h <= 0) throw InputError("--hidden sizes must be positive");
  }

  PairDataset data;
  if (from_files) {
    const auto pairs = ReadFile(a.pairs, ReadPairsFile);
    const auto features = ReadFile(a.features, ReadFeaturesFile);
    data = MakePairDataset(pairs, features);
  } else {
    data = MakeSynthetic(a.seed, a.synthetic, a.dim, a.noise).Dataset();
  }
  if (data.size() == 0) throw InputError("no training pairs");

  const RegressorModel init =
      InitModel(static_cast<int>(data.features.rows()), a.hidden, a.seed);
  const TrainResult result = a.mode == "one-stage" ? TrainOneStage(init, data, a.cfg)
                                                   : TrainTwoStage(init, data, a.cfg);

  WriteText(a.checkpoint, SerializeCheckpoint(result.model));
  if (!a.log.empty()) WriteText(a.log, FormatTrainingLog(result.log, !a.no_wall_time));
  if (!g.quiet) {
    out << a.mode << ": " << result.log.size() << " epochs on " << data.size()
        << " pairs, final loss " << std::setprecision(6) << result.log.back().loss << '\n';
  }
  return kExitOk;
}

// ---- eval

std::vector<PredictionRow> PredictFromCheckpoint(const EvalArgs& a,
                                                 const std::vector<PairFileRow>& labels) {
  const RegressorModel model = [&] {
    const std::string text = Slurp(a.checkpoint);
    try {
      return ParseCheckpoint(text);
    } catch (const Error& e) {
      throw InputError(a.checkpoint + ": " + e.what());
    }
  }();
  const auto features = ReadFile(a.features, ReadFeaturesFile);
  const PairDataset data = MakePairDataset(labels, features);
  const auto poses = Predict(model, data.features);
  std::vector<PredictionRow> rows;
  for (std::size_t i = 0; i < poses.size(); ++i) {
    rows.push_back({data.image_a[i], data.image_b[i], poses[i]});
  }
  return rows;
}

int RunEval(const EvalArgs& a, const Global& g, std::ostream& out) {
  const bool from_model = !a.checkpoint.empty() || !a.features.empty();
  if (from_model == !a.predictions.empty()) {
    throw InputError("eval needs --checkpoint with --features, or --predictions");
  }
  if (from_model && (a.checkpoint.empty() || a.features.empty())) {
    throw InputError("--checkpoint and --features go together");
  }
  if (a.baseline_m && !(*a.baseline_m > 0)) {
    throw InputError("--baseline-m must be positive");
  }
  if (!a.out_dir.empty() && fs::exists(a.out_dir) && !fs::is_directory(a.out_dir)) {
    throw FileError(a.out_dir, "not a directory");
  }

  const auto labels = ReadFile(a.pairs, ReadPairsFile);
  const auto predictions = from_model ? PredictFromCheckpoint(a, labels)
                                      : ReadFile(a.predictions, ReadPredictionsFile);
  const LabelSet set = a.label_set == "normalized" ? LabelSet::kNormalized : LabelSet::kMetric;
  const auto samples = Score(predictions, labels, a.model_tag, a.scene_tag, set);

  // One report row per scene, in order of first appearance.
  std::vector<ReportGroup> groups;
  std::map<std::string, std::size_t> index;
  for (const auto& s : samples) {
    auto [it, fresh] = index.try_emplace(s.scene_tag, groups.size());
    if (fresh) groups.push_back({s.scene_tag, a.model_tag, a.stage, {}, a.baseline_m});
    groups[it->second].samples.push_back(s);
  }
  const RenderedReport report = RenderReport(groups);

  if (!a.predictions_out.empty()) {
    WriteText(a.predictions_out, Render(WritePredictionsFile, predictions));
  }
  if (!a.out_dir.empty()) {
    const fs::path dir(a.out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw FileError(a.out_dir, ec.message());
    WriteText(dir / "errors.csv", Render(WriteErrorSamples, samples));
    if (!samples.empty()) {
      std::ostringstream rot, trans;
      WriteCdf(rot, ComputeCdf(samples, ErrorMetric::kRotationDeg));
      WriteCdf(trans, ComputeCdf(samples, ErrorMetric::kTranslationM));
      WriteText(dir / "cdf_rotation.csv", rot.str());
      WriteText(dir / "cdf_translation.csv", trans.str());
    }
    WriteText(dir / "box.csv", Render(WriteBoxStats, BoxStatsByGroup(samples)));
    WriteText(dir / "summary.csv", report.csv);
    WriteText(dir / "summary.txt", report.text);
  }
  if (!g.quiet) out << report.text;
  return kExitOk;
}

// ---- epilines

CameraIntrinsics ResolveIntrinsics(const EpilinesArgs& a, const Global& g, std::ostream& out) {
  const bool approx = a.width > 0 || a.height > 0 || a.fov > 0;
  std::optional<CameraIntrinsics> from_approx, from_colmap;
  if (approx) {
    if (a.width <= 0 || a.height <= 0 || a.fov <= 0) {
      throw InputError("--width, --height and --fov go together");
    }
    from_approx = ApproxIntrinsics(a.width, a.height, a.fov);
  }
  if (!a.colmap_cameras.empty()) {
    const auto cams = ReadFile(a.colmap_cameras, ParseColmapCameras);
    const auto it = std::find_if(cams.begin(), cams.end(), [&](const auto& c) {
      return a.camera_id == 0 || c.camera_id == a.camera_id;
    });
    if (it == cams.end()) {
      throw InputError(a.colmap_cameras + ": no camera with id " + std::to_string(a.camera_id));
    }
    from_colmap = IntrinsicsFromColmap(*it);
  }
  if (!from_approx && !from_colmap) {
    throw InputError("intrinsics needed: --width/--height/--fov or --colmap-cameras");
  }
  if (from_approx && from_colmap && !g.quiet) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "focal length: approx %.3f px, colmap %.3f px, diff %.3f px\n",
                  from_approx->f, from_colmap->f, from_approx->f - from_colmap->f);
    out << buf;
  }
  return from_colmap ? *from_colmap : *from_approx;
}

int RunEpilines(const EpilinesArgs& a, const Global& g, std::ostream& out, std::ostream& err) {
  bool want_gt = false, want_pred = false, want_ext = false;
  for (const auto& s : a.sources) {
    if (s == "gt") want_gt = true;
    else if (s == "pred") want_pred = true;
    else if (s == "external") want_ext = true;
  }
  if (want_pred && a.predictions.empty()) throw InputError("source pred needs --predictions");
  if (want_ext && a.fundamentals.empty()) throw InputError("source external needs --fundamentals");

  const CameraIntrinsics K = ResolveIntrinsics(a, g, out);
  const auto pairs = ReadFile(a.pairs, ReadPairsFile);
  const auto keypoints = ReadFile(a.keypoints, ReadKeypointsFile);

  std::map<std::string, RelativePose> predicted;
  if (want_pred) {
    for (const auto& p : ReadFile(a.predictions, ReadPredictionsFile)) {
      predicted[p.image_a + "|" + p.image_b] = p.pose;
    }
  }
  std::map<std::string, Mat3> external;
  if (want_ext) {
    for (const auto& f : ReadFile(a.fundamentals, ReadFundamentalFile)) {
      external[f.image_a + "|" + f.image_b] = f.matrix;
    }
  }

  std::size_t skipped = 0;
  std::vector<PairFundamentals> fundamentals;
  for (const auto& p : pairs) {
    const std::string key = p.image_a + "|" + p.image_b;
    PairFundamentals pf{p.image_a, p.image_b, {}};
    if (want_gt) pf.sources.emplace_back("gt", FundamentalFromPose(K, K, p.label_metric));
    if (want_pred) {
      const auto it = predicted.find(key);
      try {
        if (it == predicted.end()) throw IdMismatch("no prediction");
        pf.sources.emplace_back("pred", FundamentalFromPose(K, K, it->second));
      } catch (const Error& e) {
        ++skipped;
        err << "warning: " << key << ": pred skipped (" << e.what() << ")\n";
      }
    }
    if (want_ext) {
      const auto it = external.find(key);
      try {
        if (it == external.end()) throw IdMismatch("no external matrix");
        pf.sources.emplace_back("external", FundamentalMatrix::Normalized(it->second));
      } catch (const Error& e) {
        ++skipped;
        err << "warning: " << key << ": external skipped (" << e.what() << ")\n";
      }
    }
    fundamentals.push_back(std::move(pf));
  }

  const EpilineReport report = BuildEpilineReport(fundamentals, keypoints, K);
  std::ostringstream text;
  WriteEpilineReport(text, report);
  WriteText(a.output, text.str());
  if (!g.quiet) {
    out << "wrote " << report.records.size() << " epipolar lines to " << a.output << '\n';
    if (report.keypoints_outside_image) {
      out << report.keypoints_outside_image << " keypoints lie outside the image\n";
    }
    if (report.degenerate_lines) {
      out << report.degenerate_lines << " keypoints sit on the epipole\n";
    }
    if (skipped) out << skipped << " pair sources skipped\n";
  }
  return kExitOk;
}

}  // namespace

int Run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Relative camera pose toolkit: pose conversion, pairing, training, "
               "evaluation and epipolar checks.",
               "relpose"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "relpose 0.1.0");
  Global global;
  app.add_flag("-q,--quiet", global.quiet, "Suppress informational output");

  ConvertArgs convert;
  auto* c = app.add_subcommand("convert", "COLMAP model or landmark pose file to a pose CSV");
  c->add_option("--colmap", convert.colmap_dir, "COLMAP text model directory (images.txt)")
      ->check(CLI::ExistingDirectory);
  c->add_option("--landmark", convert.landmark_file, "Landmark-style pose list");
  c->add_flag("--reref", convert.reref, "Re-reference poses to the first frame");
  c->add_option("--sequence", convert.sequence,
                "Sequence id for every row (default: image parent directory)");
  c->add_option("-o,--output", convert.output, "Pose CSV to write")->required();

  PairsArgs pairs;
  auto* p = app.add_subcommand("pairs", "Pose CSV to a pairs CSV with both label sets");
  p->add_option("--poses", pairs.poses, "Pose CSV from convert")->required();
  p->add_option("-o,--output", pairs.output, "Pairs CSV to write")->required();
  p->add_option("--summary", pairs.summary, "JSON summary to write (default: stdout)");
  p->add_option("--pairs-per-image", pairs.pairs_per_image, "Partners drawn per image")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  p->add_option("--max-gap", pairs.max_gap, "Maximum frame index gap (default: unlimited)")
      ->check(CLI::PositiveNumber);
  p->add_option("--seed", pairs.seed, "Sampling seed")->capture_default_str();
  p->add_option("--mode", pairs.mode, "Pairing mode")
      ->capture_default_str()
      ->check(CLI::IsMember({"random", "consecutive"}));
  p->add_flag("--both-directions", pairs.both_directions, "Also emit each pair reversed");

  TrainArgs train;
  auto* t = app.add_subcommand("train", "Train the pose regressor");
  t->add_option("--pairs", train.pairs, "Pairs CSV (labels)");
  t->add_option("--features", train.features, "Features CSV");
  t->add_option("--synthetic", train.synthetic, "Train on N generated synthetic pairs")
      ->check(CLI::PositiveNumber);
  t->add_option("--dim", train.dim, "Feature dimension for --synthetic")->capture_default_str();
  t->add_option("--noise", train.noise, "Feature noise for --synthetic")->capture_default_str();
  t->add_option("--mode", train.mode, "Training protocol")
      ->capture_default_str()
      ->check(CLI::IsMember({"two-stage", "one-stage"}));
  t->add_option("--seed", train.seed, "Initialization and shuffle seed")->capture_default_str();
  t->add_option("--hidden", train.hidden, "Hidden layer sizes")
      ->delimiter(',')
      ->capture_default_str();
  t->add_option("--stage1-epochs", train.cfg.stage1_epochs, "Epochs on unit translations")->capture_default_str();
  t->add_option("--stage2-epochs", train.cfg.stage2_epochs, "Epochs on metric translations")->capture_default_str();
  t->add_option("--epochs", train.cfg.one_stage_epochs, "Epochs for one-stage")
      ->capture_default_str();
  t->add_option("--batch-size", train.cfg.batch_size, "Pairs per Adam step")->capture_default_str();
  t->add_option("--lr", train.cfg.learning_rate, "Adam learning rate")->capture_default_str();
  t->add_option("--loss", train.loss, "Residual norm")
      ->capture_default_str()
      ->check(CLI::IsMember({"euclidean", "squared"}));
  t->add_flag("--carry-optimizer", train.carry_optimizer,
              "Keep Adam moments across the stage boundary");
  t->add_flag("--no-shuffle", train.no_shuffle, "Keep pair order fixed across epochs");
  t->add_option("--checkpoint", train.checkpoint, "Checkpoint JSON to write")->required();
  t->add_option("--log", train.log, "JSON-lines training log to write");
  t->add_flag("--no-wall-time", train.no_wall_time, "Leave wall time out of the log");

  EvalArgs eval;
  auto* e = app.add_subcommand("eval", "Score predictions against pair labels");
  e->add_option("--pairs", eval.pairs, "Pairs CSV (labels)")->required();
  e->add_option("--checkpoint", eval.checkpoint, "Model checkpoint");
  e->add_option("--features", eval.features, "Features CSV for --checkpoint");
  e->add_option("--predictions", eval.predictions, "Predictions CSV");
  e->add_option("--predictions-out", eval.predictions_out, "Write model predictions here");
  e->add_option("--out-dir", eval.out_dir, "Directory for errors, CDF, box and summary files");
  e->add_option("--label-set", eval.label_set, "Labels to score against")
      ->capture_default_str()
      ->check(CLI::IsMember({"metric", "normalized"}));
  e->add_option("--model-tag", eval.model_tag)->capture_default_str();
  e->add_option("--scene-tag", eval.scene_tag, "Scene name (default: sequence id)");
  e->add_option("--stage", eval.stage, "Stage label for the report");
  e->add_option("--baseline-m", eval.baseline_m, "Baseline median translation for % change");

  EpilinesArgs epi;
  auto* l = app.add_subcommand("epilines", "Epipolar lines for keypoints, per F source");
  l->add_option("--pairs", epi.pairs, "Pairs CSV")->required();
  l->add_option("--keypoints", epi.keypoints, "Keypoints CSV (image,u,v,keypoint_id)")
      ->required();
  l->add_option("-o,--output", epi.output, "Line-set CSV to write")->required();
  l->add_option("--width", epi.width, "Image width in pixels");
  l->add_option("--height", epi.height, "Image height in pixels");
  l->add_option("--fov", epi.fov, "Horizontal field of view in degrees");
  l->add_option("--colmap-cameras", epi.colmap_cameras, "COLMAP cameras.txt");
  l->add_option("--camera-id", epi.camera_id, "Camera in cameras.txt (default: first)");
  l->add_option("--sources", epi.sources, "F sources")
      ->delimiter(',')
      ->capture_default_str()
      ->check(CLI::IsMember({"gt", "pred", "external"}));
  l->add_option("--predictions", epi.predictions, "Predictions CSV for source pred");
  l->add_option("--fundamentals", epi.fundamentals, "External F CSV for source external");

  SynthArgs synth;
  auto* s = app.add_subcommand("synth", "Synthetic pairs and features");
  s->add_option("--n", synth.n, "Generate this many labelled pairs")->check(CLI::PositiveNumber);
  s->add_option("--from-pairs", synth.from_pairs, "Synthesize features for an existing pairs CSV");
  s->add_option("--dim", synth.dim, "Feature dimension")->capture_default_str();
  s->add_option("--noise", synth.noise, "Feature noise sigma")->capture_default_str();
  s->add_option("--seed", synth.seed, "Seed for labels and mixing matrix")->capture_default_str();
  s->add_option("--noise-seed", synth.noise_seed, "Noise seed for --from-pairs (default: --seed)");
  s->add_option("--pairs-out", synth.pairs_out, "Pairs CSV to write (with --n)");
  s->add_option("--features-out", synth.features_out, "Features CSV to write");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& ex) {
    app.exit(ex, out, err);
    return kExitOk;
  } catch (const CLI::ParseError& ex) {
    app.exit(ex, out, err);
    return kExitInputError;
  }

  try {
    if (*c) return RunConvert(convert, global, out);
    if (*p) return RunPairs(pairs, global, out);
    if (*t) return RunTrain(train, global, out);
    if (*e) return RunEval(eval, global, out);
    if (*l) return RunEpilines(epi, global, out, err);
    if (*s) return RunSynth(synth, global, out);
  } catch (const InputError& ex) {
    err << "error: " << ex.what() << '\n';
    return kExitInputError;
  } catch (const Error& ex) {
    err << "error: " << ex.what() << '\n';
    return kExitInvariant;
  } catch (const std::exception& ex) {
    err << "error: " << ex.what() << '\n';
    return kExitInvariant;
  }
  return kExitInputError;
}

}  // namespace relpose::cli

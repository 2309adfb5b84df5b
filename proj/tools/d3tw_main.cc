/* Copyright 2026 The D3TW Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

// d3tw: generate synthetic data, train, align, segment and evaluate.
//
// Exit status: 0 on success, 1 on validation errors (bad flags, invalid
// configuration, incompatible inputs), 2 on runtime failures.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "d3tw/data.h"
#include "d3tw/error.h"
#include "d3tw/io.h"
#include "d3tw/model.h"
#include "d3tw/tasks.h"
#include "d3tw/trainer.h"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Thrown for problems that are the caller's fault rather than the run's.
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct GenFlags {
  d3tw::SynthConfig synth;
  std::string out;
};

struct TrainFlags {
  std::string data;
  std::string out;
  std::string checkpoint;
  std::uint64_t seed = 7;
  double gamma = 0.1;
  // With no margin the hinge goes flat as soon as the positive wins and
  // training drifts into single-frame segments on the synthetic fixture.
  double beta = 5.0;
  std::string hinge = "margin";
  int negatives = 1;
  std::string neg_strategy = "pool";
  std::string loss = "d3tw";
  double lr = 1e-2;
  int epochs = 30;
  int batch = 8;
  int subsample = 1;
  bool sparse = false;
  std::string split = "train";
  std::string heldout = "test";
};

struct DecodeFlags {
  std::string data;
  std::string checkpoint;
  std::string out;
  double gamma = 0.1;
  int subsample = 1;
  bool sparse = false;
  std::string split = "test";
  std::string candidates_split = "train";
};

struct EvalFlags {
  std::string predictions;
  std::string data;
  std::string out;
  std::string split = "test";
  int subsample = 1;
};

d3tw::Dataset load(const std::string& path, int subsample) {
  if (subsample < 1) throw ValidationError("--subsample must be >= 1");
  return d3tw::load_dataset(path, subsample);
}

void check_compatible(const d3tw::Dataset& ds, const d3tw::ModelParams& params) {
  if (ds.vocabulary.size() != params.num_actions() || ds.feature_dim != params.feature_dim()) {
    throw ValidationError("dataset has " + std::to_string(ds.vocabulary.size()) + " classes and " +
                          std::to_string(ds.feature_dim) + "-dim features; checkpoint expects " +
                          std::to_string(params.num_actions()) + " and " +
                          std::to_string(params.feature_dim()));
  }
}

int run_gen(const GenFlags& f) {
  try {
    f.synth.validate();
  } catch (const d3tw::Error& e) {
    throw ValidationError(e.what());
  }
  const d3tw::SyntheticDataset synth = d3tw::generate_synthetic(f.synth);
  d3tw::save_dataset(synth.dataset, f.out);

  std::size_t records = 0;
  double frames = 0.0;
  double length = 0.0;
  for (const auto& [name, split] : synth.dataset.splits) {
    for (const auto& r : split) {
      ++records;
      frames += static_cast<double>(r.num_frames());
      length += static_cast<double>(r.transcript.size());
    }
  }
  std::printf("wrote %zu records (%d classes, dim %d) to %s\n", records,
              synth.dataset.vocabulary.size(), synth.dataset.feature_dim, f.out.c_str());
  for (const auto& [name, split] : synth.dataset.splits) {
    std::printf("  %-6s %zu records\n", name.c_str(), split.size());
  }
  std::printf("mean T %.2f, mean L %.2f\n", frames / static_cast<double>(records),
              length / static_cast<double>(records));
  return 0;
}

int run_train(const TrainFlags& f) {
  const d3tw::Dataset ds = load(f.data, f.subsample);
  const auto& records = ds.split(f.split);
  const std::vector<d3tw::SequenceRecord> none;
  const auto& heldout = ds.splits.count(f.heldout) ? ds.split(f.heldout) : none;

  d3tw::TrainerOptions options;
  options.epochs = f.epochs;
  options.batch_size = f.batch;
  options.seed = f.seed;
  options.use_sparse = f.sparse;
  d3tw::TrainConfig& step = options.step;
  step.learning_rate = f.lr;
  step.objective = f.loss == "generative" ? d3tw::Objective::kGenerative : d3tw::Objective::kD3tw;
  step.loss.gamma = f.gamma;
  step.loss.beta = f.beta;
  step.loss.negatives_per_sample = f.negatives;
  step.loss.hinge_variant =
      f.hinge == "paper" ? d3tw::HingeVariant::kPaperLiteral : d3tw::HingeVariant::kStandardMargin;
  step.loss.sampling_strategy = f.neg_strategy == "shuffle" ? d3tw::SamplingStrategy::kShuffle
                                : f.neg_strategy == "walk"  ? d3tw::SamplingStrategy::kRandomWalk
                                                            : d3tw::SamplingStrategy::kPool;
  try {
    step.validate();
  } catch (const d3tw::Error& e) {
    throw ValidationError(e.what());
  }
  if (f.epochs < 0) throw ValidationError("--epochs must be >= 0");
  if (f.batch < 1) throw ValidationError("--batch must be >= 1");

  d3tw::Checkpoint ckpt;
  if (!f.checkpoint.empty()) {
    ckpt = d3tw::load_checkpoint(f.checkpoint);
    check_compatible(ds, ckpt.params);
  } else {
    ckpt.params = d3tw::ModelParams::init(ds.feature_dim, ds.vocabulary.size(), f.seed);
    ckpt.prior = d3tw::ClassPrior::uniform(ds.vocabulary.size());
  }
  const std::int64_t start_step = ckpt.params.optimizer.step;

  d3tw::train(records, heldout, ckpt.params, ckpt.prior, options, [](const d3tw::EpochLog& log) {
    if (log.heldout_frame_accuracy) {
      std::printf("epoch %3d  loss %.6f  heldout alignment facc %.4f\n", log.epoch, log.mean_loss,
                  *log.heldout_frame_accuracy);
    } else {
      std::printf("epoch %3d  loss %.6f\n", log.epoch, log.mean_loss);
    }
    std::fflush(stdout);
  });

  ckpt.config = {
      {"command", "train"},
      {"data", f.data},
      {"split", f.split},
      {"seed", f.seed},
      {"gamma", f.gamma},
      {"beta", f.beta},
      {"hinge", f.hinge},
      {"negatives", f.negatives},
      {"neg_strategy", f.neg_strategy},
      {"loss", f.loss},
      {"lr", f.lr},
      {"epochs", f.epochs},
      {"batch", f.batch},
      {"subsample", f.subsample},
      {"sparse", f.sparse},
      {"resumed_from_step", start_step},
      {"adam", {{"beta1", step.adam_beta1}, {"beta2", step.adam_beta2}, {"epsilon", step.adam_epsilon}}},
      {"prior_smoothing", step.prior_smoothing},
      {"dataset_generation", ds.generation},
  };
  d3tw::save_checkpoint(ckpt, f.out);
  std::printf("wrote checkpoint %s (step %lld)\n", f.out.c_str(),
              static_cast<long long>(ckpt.params.optimizer.step));
  return 0;
}

int run_decode(const DecodeFlags& f, d3tw::TaskMode mode) {
  if (!(f.gamma >= 0.0)) throw ValidationError("--gamma must be >= 0");
  const d3tw::Dataset ds = load(f.data, f.subsample);
  const d3tw::Checkpoint ckpt = d3tw::load_checkpoint(f.checkpoint);
  check_compatible(ds, ckpt.params);
  const auto& records = ds.split(f.split);

  json config = {
      {"command", mode == d3tw::TaskMode::kAlignment ? "align" : "segment"},
      {"data", f.data},
      {"checkpoint", f.checkpoint},
      {"split", f.split},
      {"gamma", f.gamma},
      {"subsample", f.subsample},
      {"model_config", ckpt.config},
  };
  std::optional<d3tw::CandidateSet> candidates;
  if (mode == d3tw::TaskMode::kSegmentation) {
    if (!ds.splits.count(f.candidates_split)) {
      throw ValidationError("no split '" + f.candidates_split + "' to draw candidate transcripts from");
    }
    candidates.emplace(d3tw::distinct_transcripts(ds.split(f.candidates_split)));
    config["candidates_split"] = f.candidates_split;
    config["candidate_count"] = candidates->size();
  } else {
    config["sparse"] = f.sparse;
  }

  fs::create_directories(f.out);
  for (const auto& r : records) {
    d3tw::Segmentation s;
    try {
      const d3tw::Matrix posteriors = d3tw::forward(r.features, ckpt.params);
      if (mode == d3tw::TaskMode::kAlignment) {
        d3tw::PathConstraint constraint;
        if (f.sparse && r.sparse_annotations) {
          constraint = d3tw::constraints_from_annotations(r.transcript, *r.sparse_annotations,
                                                          r.num_frames());
        }
        s = d3tw::align(posteriors, ckpt.prior, r.transcript, f.gamma, constraint);
      } else {
        s = d3tw::segment(posteriors, ckpt.prior, *candidates, f.gamma).segmentation;
      }
    } catch (const d3tw::Error& e) {
      throw d3tw::Error(e.code(), "record '" + r.id + "': " + e.what());
    }
    const json pred = d3tw::prediction_to_json(r.id, s, ds.vocabulary, config);
    d3tw::write_text_file(fs::path(f.out) / (r.id + ".pred.json"), pred.dump(2) + "\n");
  }
  std::printf("wrote %zu predictions to %s\n", records.size(), f.out.c_str());
  return 0;
}

int run_eval(const EvalFlags& f) {
  const d3tw::Dataset ds = load(f.data, f.subsample);
  const auto& records = ds.split(f.split);
  std::map<std::string, std::vector<d3tw::ActionId>> predicted;
  json config;
  for (const auto& r : records) {
    const fs::path path = fs::path(f.predictions) / (r.id + ".pred.json");
    if (!fs::exists(path)) continue;
    d3tw::Prediction p;
    try {
      p = d3tw::prediction_from_json(d3tw::read_json_file(path), ds.vocabulary);
    } catch (const d3tw::Error& e) {
      throw d3tw::Error(e.code(), path.string() + ": " + e.what());
    }
    if (config.is_null()) config = p.config;
    predicted[r.id] = std::move(p.frame_labels);
  }
  const d3tw::MetricsReport report = d3tw::score_predictions(records, predicted);

  std::printf("%-16s %8s %8s %8s %8s\n", "sequence", "frames", "facc", "uacc", "iod");
  json rows = json::array();
  for (const auto& s : report.sequences) {
    if (!s.error.empty()) {
      std::printf("%-16s %8zu  ERROR: %s\n", s.id.c_str(), s.frames, s.error.c_str());
      rows.push_back({{"id", s.id}, {"frames", s.frames}, {"error", s.error}});
      continue;
    }
    std::printf("%-16s %8zu %8.4f %8.4f %8.4f\n", s.id.c_str(), s.frames, s.frame_accuracy,
                s.unit_accuracy, s.mean_iod);
    rows.push_back({{"id", s.id},
                    {"frames", s.frames},
                    {"frame_accuracy", s.frame_accuracy},
                    {"unit_accuracy", s.unit_accuracy},
                    {"mean_iod", s.mean_iod},
                    {"gt_intervals", s.gt_intervals}});
  }
  std::printf("%-16s %8s %8.4f %8.4f %8.4f\n", "TOTAL", "", report.frame_accuracy,
              report.unit_accuracy, report.mean_iod);

  const json metrics = {
      {"frame_accuracy", report.frame_accuracy},
      {"unit_accuracy", report.unit_accuracy},
      {"mean_iod", report.mean_iod},
      {"errors", report.error_count},
      {"sequences", rows},
      {"config", {{"command", "eval"}, {"data", f.data}, {"split", f.split},
                  {"subsample", f.subsample}, {"prediction_config", config}}},
  };
  const fs::path out = f.out.empty() ? fs::path(f.predictions) / "metrics.json" : fs::path(f.out);
  d3tw::write_text_file(out, metrics.dump(2) + "\n");
  if (report.error_count > 0) {
    std::fprintf(stderr, "error: %zu record(s) could not be scored\n", report.error_count);
    return 2;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Discriminative differentiable DTW for weakly supervised sequence alignment"};
  app.set_config("--config", "", "Read flags from a TOML/INI config file");
  app.require_subcommand(1);

  GenFlags gen;
  auto* gen_cmd = app.add_subcommand("gen", "Generate a synthetic dataset");
  gen_cmd->add_option("--classes", gen.synth.num_actions, "Number of action classes")->capture_default_str();
  gen_cmd->add_option("--dim", gen.synth.feature_dim, "Feature dimension")->capture_default_str();
  gen_cmd->add_option("--sigma-between", gen.synth.sigma_between, "Class-mean scale")->capture_default_str();
  gen_cmd->add_option("--sigma-within", gen.synth.sigma_within, "Per-frame noise")->capture_default_str();
  gen_cmd->add_option("--min-len", gen.synth.min_transcript_length, "Shortest transcript")->capture_default_str();
  gen_cmd->add_option("--max-len", gen.synth.max_transcript_length, "Longest transcript")->capture_default_str();
  gen_cmd->add_option("--min-seg", gen.synth.min_segment_length, "Shortest segment")->capture_default_str();
  gen_cmd->add_option("--max-seg", gen.synth.max_segment_length, "Longest segment")->capture_default_str();
  gen_cmd->add_option("--train", gen.synth.train_count, "Training records")->capture_default_str();
  gen_cmd->add_option("--test", gen.synth.test_count, "Test records")->capture_default_str();
  gen_cmd->add_option("--sparse-fraction", gen.synth.sparse_fraction,
                      "Fraction of frames given sparse labels")->capture_default_str();
  gen_cmd->add_option("--seed", gen.synth.seed, "Random seed")->capture_default_str();
  gen_cmd->add_option("--out", gen.out, "Output dataset directory")->required();

  TrainFlags train;
  auto* train_cmd = app.add_subcommand("train", "Train the frame classifier from transcripts");
  train_cmd->add_option("--data", train.data, "Dataset directory")->required();
  train_cmd->add_option("--out", train.out, "Checkpoint to write")->required();
  train_cmd->add_option("--checkpoint", train.checkpoint, "Checkpoint to resume from");
  train_cmd->add_option("--seed", train.seed, "Random seed")->capture_default_str();
  train_cmd->add_option("--gamma", train.gamma, "Softmin smoothing")->capture_default_str();
  train_cmd->add_option("--beta", train.beta, "Hinge margin")->capture_default_str();
  train_cmd->add_option("--hinge", train.hinge, "Hinge form")
      ->check(CLI::IsMember({"paper", "margin"}))->capture_default_str();
  train_cmd->add_option("--negatives", train.negatives, "Negatives per sequence")->capture_default_str();
  train_cmd->add_option("--neg-strategy", train.neg_strategy, "Negative sampling")
      ->check(CLI::IsMember({"pool", "shuffle", "walk"}))->capture_default_str();
  train_cmd->add_option("--loss", train.loss, "Objective")
      ->check(CLI::IsMember({"d3tw", "generative"}))->capture_default_str();
  train_cmd->add_option("--lr", train.lr, "Learning rate")->capture_default_str();
  train_cmd->add_option("--epochs", train.epochs, "Epochs")->capture_default_str();
  train_cmd->add_option("--batch", train.batch, "Batch size")->capture_default_str();
  train_cmd->add_option("--subsample", train.subsample, "Keep every M-th frame")->capture_default_str();
  train_cmd->add_flag("--sparse", train.sparse, "Constrain positives with sparse annotations");
  train_cmd->add_option("--split", train.split, "Training split")->capture_default_str();
  train_cmd->add_option("--heldout", train.heldout, "Split used for per-epoch accuracy")->capture_default_str();

  DecodeFlags align;
  DecodeFlags seg;
  auto add_decode = [&](CLI::App* cmd, DecodeFlags& f) {
    cmd->add_option("--data", f.data, "Dataset directory")->required();
    cmd->add_option("--checkpoint", f.checkpoint, "Trained checkpoint")->required();
    cmd->add_option("--out", f.out, "Prediction directory")->required();
    cmd->add_option("--gamma", f.gamma, "Softmin smoothing")->capture_default_str();
    cmd->add_option("--subsample", f.subsample, "Keep every M-th frame")->capture_default_str();
    cmd->add_option("--split", f.split, "Split to decode")->capture_default_str();
  };
  auto* align_cmd = app.add_subcommand("align", "Align each record to its own transcript");
  add_decode(align_cmd, align);
  align_cmd->add_flag("--sparse", align.sparse, "Constrain decoding with sparse annotations");
  auto* seg_cmd = app.add_subcommand("segment", "Segment by searching training transcripts");
  add_decode(seg_cmd, seg);
  seg_cmd->add_option("--candidates", seg.candidates_split, "Split providing candidate transcripts")
      ->capture_default_str();

  EvalFlags eval;
  auto* eval_cmd = app.add_subcommand("eval", "Score predictions against ground truth");
  eval_cmd->add_option("--predictions", eval.predictions, "Prediction directory")->required();
  eval_cmd->add_option("--data", eval.data, "Dataset directory")->required();
  eval_cmd->add_option("--out", eval.out, "metrics.json path (default: inside --predictions)");
  eval_cmd->add_option("--split", eval.split, "Split to score")->capture_default_str();
  eval_cmd->add_option("--subsample", eval.subsample, "Keep every M-th frame")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (*gen_cmd) return run_gen(gen);
    if (*train_cmd) return run_train(train);
    if (*align_cmd) return run_decode(align, d3tw::TaskMode::kAlignment);
    if (*seg_cmd) return run_decode(seg, d3tw::TaskMode::kSegmentation);
    if (*eval_cmd) return run_eval(eval);
  } catch (const ValidationError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 1;
}

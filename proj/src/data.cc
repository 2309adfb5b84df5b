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

#include "d3tw/data.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "d3tw/error.h"

namespace d3tw {
namespace fs = std::filesystem;

Vocabulary::Vocabulary(std::vector<std::string> names) : names_(std::move(names)) {
  for (std::size_t i = 0; i < names_.size(); ++i) {
    const std::string& n = names_[i];
    if (n.empty()) throw Error(ErrorCode::kInvalidInput, "empty action name");
    if (std::any_of(n.begin(), n.end(), [](unsigned char c) { return std::isspace(c); })) {
      throw Error(ErrorCode::kInvalidInput, "action name '" + n + "' contains whitespace");
    }
    if (!ids_.emplace(n, static_cast<ActionId>(i)).second) {
      throw Error(ErrorCode::kInvalidInput, "duplicate action name '" + n + "'");
    }
  }
}

std::optional<ActionId> Vocabulary::find(const std::string& name) const {
  auto it = ids_.find(name);
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

bool SequenceRecord::operator==(const SequenceRecord& other) const {
  return id == other.id && features.rows() == other.features.rows() &&
         features.cols() == other.features.cols() && features == other.features &&
         transcript == other.transcript && gt_frame_labels == other.gt_frame_labels &&
         sparse_annotations == other.sparse_annotations;
}

const std::vector<SequenceRecord>& Dataset::split(const std::string& name) const {
  auto it = splits.find(name);
  if (it == splits.end()) throw Error(ErrorCode::kInvalidInput, "dataset has no split '" + name + "'");
  return it->second;
}

void validate_record(const SequenceRecord& record, const Vocabulary& vocabulary, int feature_dim) {
  auto fail = [&](const std::string& what) {
    throw Error(ErrorCode::kInvalidInput, "record '" + record.id + "': " + what);
  };
  if (record.id.empty() || record.id.find_first_of("/\\ \t\n") != std::string::npos) {
    fail("ids must be nonempty and free of separators and whitespace");
  }
  if (record.features.rows() < 1 || record.features.cols() != feature_dim) {
    fail("features must be T x " + std::to_string(feature_dim) + " with T >= 1");
  }
  if (!record.features.allFinite()) fail("non-finite feature value");
  validate_transcript(record.transcript, vocabulary.size());
  const std::size_t T = record.num_frames();
  auto valid_id = [&](ActionId a) { return a >= 0 && a < vocabulary.size(); };
  if (record.gt_frame_labels) {
    const auto& gt = *record.gt_frame_labels;
    if (gt.size() != T) fail("ground-truth labels do not cover every frame");
    if (!std::all_of(gt.begin(), gt.end(), valid_id)) fail("invalid ground-truth action id");
    if (collapse_labels(gt) != record.transcript.actions) {
      fail("ground-truth labels do not collapse to the transcript");
    }
  }
  if (record.sparse_annotations) {
    for (const auto& [frame, action] : *record.sparse_annotations) {
      if (frame >= T) fail("sparse annotation on frame " + std::to_string(frame) + " past the end");
      if (!valid_id(action)) fail("invalid sparse annotation action id");
      if (record.gt_frame_labels && (*record.gt_frame_labels)[frame] != action) {
        fail("sparse annotation at frame " + std::to_string(frame) + " disagrees with ground truth");
      }
    }
  }
}

void validate_dataset(const Dataset& dataset) {
  if (dataset.vocabulary.size() < 1) throw Error(ErrorCode::kInvalidInput, "empty vocabulary");
  if (dataset.feature_dim < 1) throw Error(ErrorCode::kInvalidInput, "feature dim must be positive");
  std::set<std::string> seen;
  for (const auto& [name, records] : dataset.splits) {
    if (name.empty() || name.find_first_of("/\\ \t\n") != std::string::npos) {
      throw Error(ErrorCode::kInvalidInput, "bad split name '" + name + "'");
    }
    for (const SequenceRecord& r : records) {
      validate_record(r, dataset.vocabulary, dataset.feature_dim);
      if (!seen.insert(r.id).second) {
        throw Error(ErrorCode::kInvalidInput, "record id '" + r.id + "' appears more than once");
      }
    }
  }
}

void SynthConfig::validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::kInvalidInput, what); };
  if (num_actions < 2) fail("synthetic data needs at least 2 classes");
  if (feature_dim < 1) fail("feature dim must be positive");
  if (!(sigma_between > 0.0) || !std::isfinite(sigma_between)) fail("sigma_between must be positive");
  if (!(sigma_within >= 0.0) || !std::isfinite(sigma_within)) fail("sigma_within must be nonnegative");
  if (min_transcript_length < 1 || min_transcript_length > max_transcript_length) {
    fail("transcript length range must satisfy 1 <= min <= max");
  }
  if (min_segment_length < 1 || min_segment_length > max_segment_length) {
    fail("segment length range must satisfy 1 <= min <= max");
  }
  if (train_count < 0 || test_count < 0 || train_count + test_count < 1) {
    fail("sequence counts must be nonnegative with at least one record");
  }
  if (!(sparse_fraction >= 0.0 && sparse_fraction <= 1.0)) fail("sparse fraction must lie in [0, 1]");
}

nlohmann::json SynthConfig::to_json() const {
  return {
      {"classes", num_actions},
      {"dim", feature_dim},
      {"sigma_between", sigma_between},
      {"sigma_within", sigma_within},
      {"min_transcript_length", min_transcript_length},
      {"max_transcript_length", max_transcript_length},
      {"min_segment_length", min_segment_length},
      {"max_segment_length", max_segment_length},
      {"train_count", train_count},
      {"test_count", test_count},
      {"sparse_fraction", sparse_fraction},
      {"seed", seed},
  };
}

SynthConfig SynthConfig::from_json(const nlohmann::json& j) {
  SynthConfig c;
  try {
    c.num_actions = j.at("classes").get<int>();
    c.feature_dim = j.at("dim").get<int>();
    c.sigma_between = j.at("sigma_between").get<double>();
    c.sigma_within = j.at("sigma_within").get<double>();
    c.min_transcript_length = j.at("min_transcript_length").get<int>();
    c.max_transcript_length = j.at("max_transcript_length").get<int>();
    c.min_segment_length = j.at("min_segment_length").get<int>();
    c.max_segment_length = j.at("max_segment_length").get<int>();
    c.train_count = j.at("train_count").get<int>();
    c.test_count = j.at("test_count").get<int>();
    c.sparse_fraction = j.at("sparse_fraction").get<double>();
    c.seed = j.at("seed").get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("synthetic config: ") + e.what());
  }
  return c;
}

namespace {

SequenceRecord synth_record(const SynthConfig& config, const Matrix& means, std::string id,
                            std::mt19937_64& rng, std::uint64_t sparse_seed) {
  std::uniform_int_distribution<int> length(config.min_transcript_length,
                                            config.max_transcript_length);
  std::uniform_int_distribution<int> seg_length(config.min_segment_length,
                                                config.max_segment_length);
  std::uniform_int_distribution<ActionId> first(0, config.num_actions - 1);
  std::uniform_int_distribution<ActionId> other(0, config.num_actions - 2);
  std::normal_distribution<double> noise(0.0, 1.0);

  SequenceRecord r;
  r.id = std::move(id);
  const int L = length(rng);
  for (int i = 0; i < L; ++i) {
    ActionId a = 0;
    if (i == 0) {
      a = first(rng);
    } else {
      // Uniform over the A - 1 actions that differ from the previous one.
      a = other(rng);
      if (a >= r.transcript.actions.back()) ++a;
    }
    r.transcript.actions.push_back(a);
  }
  std::vector<ActionId> labels;
  for (ActionId a : r.transcript.actions) labels.insert(labels.end(), seg_length(rng), a);

  const Eigen::Index T = static_cast<Eigen::Index>(labels.size());
  r.features.resize(T, config.feature_dim);
  for (Eigen::Index t = 0; t < T; ++t) {
    for (Eigen::Index c = 0; c < config.feature_dim; ++c) {
      r.features(t, c) = means(labels[static_cast<std::size_t>(t)], c) + config.sigma_within * noise(rng);
    }
  }

  if (config.sparse_fraction > 0.0) {
    // Separate stream so the annotation level never perturbs the features.
    std::mt19937_64 sparse_rng(sparse_seed);
    std::vector<std::size_t> frames(labels.size());
    for (std::size_t t = 0; t < frames.size(); ++t) frames[t] = t;
    std::shuffle(frames.begin(), frames.end(), sparse_rng);
    const auto count = static_cast<std::size_t>(
        std::llround(config.sparse_fraction * static_cast<double>(labels.size())));
    std::map<std::size_t, ActionId> sparse;
    for (std::size_t n = 0; n < count; ++n) sparse[frames[n]] = labels[frames[n]];
    r.sparse_annotations = std::move(sparse);
  }
  r.gt_frame_labels = std::move(labels);
  return r;
}

std::string record_id(const std::string& split, int index) {
  std::ostringstream os;
  os << split << '_';
  os.width(4);
  os.fill('0');
  os << index;
  return os.str();
}

}  // namespace

SyntheticDataset generate_synthetic(const SynthConfig& config) {
  config.validate();
  std::mt19937_64 rng(config.seed);
  std::normal_distribution<double> noise(0.0, 1.0);

  SyntheticDataset out;
  out.class_means.resize(config.num_actions, config.feature_dim);
  for (Eigen::Index k = 0; k < config.num_actions; ++k) {
    for (Eigen::Index c = 0; c < config.feature_dim; ++c) {
      out.class_means(k, c) = config.sigma_between * noise(rng);
    }
  }

  std::vector<std::string> names;
  for (int k = 0; k < config.num_actions; ++k) names.push_back("action" + std::to_string(k));
  Dataset& ds = out.dataset;
  ds.vocabulary = Vocabulary(std::move(names));
  ds.feature_dim = config.feature_dim;
  ds.generation = config.to_json();

  std::uint64_t index = 0;
  for (const auto& [split, count] : {std::pair<std::string, int>{"train", config.train_count},
                                     std::pair<std::string, int>{"test", config.test_count}}) {
    auto& records = ds.splits[split];
    for (int n = 0; n < count; ++n) {
      const std::uint64_t sparse_seed = config.seed ^ (0x9e3779b97f4a7c15ULL * ++index);
      records.push_back(synth_record(config, out.class_means, record_id(split, n), rng, sparse_seed));
    }
  }
  return out;
}

std::vector<ActionId> collapse_labels(std::span<const ActionId> frame_labels) {
  std::vector<ActionId> units;
  for (ActionId a : frame_labels) {
    if (units.empty() || units.back() != a) units.push_back(a);
  }
  return units;
}

std::vector<ActionId> expand_transcript_uniform(const Transcript& transcript,
                                                std::size_t num_frames) {
  const std::size_t L = transcript.size();
  if (L == 0) throw Error(ErrorCode::kInvalidInput, "empty transcript");
  if (num_frames < L) {
    throw Error(ErrorCode::kInfeasible, "cannot spread " + std::to_string(L) +
                                            " actions over " + std::to_string(num_frames) + " frames");
  }
  std::vector<ActionId> labels(num_frames);
  for (std::size_t i = 0; i < L; ++i) {
    const std::size_t begin = i * num_frames / L;
    const std::size_t end = (i + 1) * num_frames / L;
    std::fill(labels.begin() + static_cast<std::ptrdiff_t>(begin),
              labels.begin() + static_cast<std::ptrdiff_t>(end), transcript[i]);
  }
  return labels;
}

Dataset subsample(const Dataset& dataset, int every) {
  if (every < 1) throw Error(ErrorCode::kInvalidInput, "subsample factor must be positive");
  if (every == 1) return dataset;
  Dataset out = dataset;
  const auto step = static_cast<std::size_t>(every);
  for (auto& [split, records] : out.splits) {
    for (SequenceRecord& r : records) {
      const std::size_t T = r.num_frames();
      const std::size_t kept = (T + step - 1) / step;
      Matrix features(static_cast<Eigen::Index>(kept), r.features.cols());
      for (std::size_t n = 0; n < kept; ++n) {
        features.row(static_cast<Eigen::Index>(n)) = r.features.row(static_cast<Eigen::Index>(n * step));
      }
      r.features = std::move(features);
      if (r.gt_frame_labels) {
        std::vector<ActionId> labels(kept);
        for (std::size_t n = 0; n < kept; ++n) labels[n] = (*r.gt_frame_labels)[n * step];
        r.gt_frame_labels = std::move(labels);
      }
      if (r.sparse_annotations) {
        std::map<std::size_t, ActionId> sparse;
        for (const auto& [frame, action] : *r.sparse_annotations) {
          if (frame % step == 0) sparse[frame / step] = action;
        }
        r.sparse_annotations = std::move(sparse);
      }
      if (r.gt_frame_labels && collapse_labels(*r.gt_frame_labels) != r.transcript.actions) {
        throw Error(ErrorCode::kInvalidInput,
                    "record '" + r.id + "': subsampling by " + std::to_string(every) +
                        " drops an entire action segment");
      }
    }
  }
  if (out.generation.is_object()) out.generation["subsample"] = every;
  return out;
}

std::string format_double(double value) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, end);
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

void write_file(const fs::path& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kMissingFile, "cannot write " + path.string());
  out << contents;
  if (!out) throw Error(ErrorCode::kMissingFile, "failed writing " + path.string());
}

std::vector<std::string> read_lines(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kMissingFile, path.string() + ": file not found");
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
  }
  return lines;
}

std::string where(const fs::path& path, std::size_t line) {
  return path.string() + ":" + std::to_string(line + 1);
}

std::vector<std::string> split_whitespace(const std::string& s) {
  std::istringstream is(s);
  std::vector<std::string> out;
  std::string tok;
  while (is >> tok) out.push_back(tok);
  return out;
}

ActionId lookup(const Vocabulary& vocab, const std::string& name, const fs::path& path,
                std::size_t line) {
  auto id = vocab.find(name);
  if (!id) {
    throw Error(ErrorCode::kUnknownAction,
                where(path, line) + ": action '" + name + "' is not in vocab.txt");
  }
  return *id;
}

Matrix read_features(const fs::path& path, int dim) {
  std::vector<std::string> lines = read_lines(path);
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  if (lines.empty()) throw Error(ErrorCode::kParse, path.string() + ": no feature rows");
  Matrix m(static_cast<Eigen::Index>(lines.size()), dim);
  for (std::size_t n = 0; n < lines.size(); ++n) {
    const std::string& line = lines[n];
    std::size_t pos = 0;
    for (int c = 0; c < dim; ++c) {
      const std::size_t stop = c + 1 < dim ? line.find(',', pos) : line.size();
      if (stop == std::string::npos) {
        throw Error(ErrorCode::kParse, where(path, n) + ":" + std::to_string(line.size() + 1) +
                                           ": expected " + std::to_string(dim) + " values");
      }
      if (c + 1 == dim && line.find(',', pos) != std::string::npos) {
        throw Error(ErrorCode::kParse, where(path, n) + ":" + std::to_string(line.find(',', pos) + 1) +
                                           ": more than " + std::to_string(dim) + " values");
      }
      std::size_t a = pos;
      std::size_t b = stop;
      while (a < b && line[a] == ' ') ++a;
      while (b > a && line[b - 1] == ' ') --b;
      double value = 0.0;
      auto [ptr, ec] = std::from_chars(line.data() + a, line.data() + b, value);
      if (ec != std::errc() || ptr != line.data() + b || a == b || !std::isfinite(value)) {
        throw Error(ErrorCode::kParse, where(path, n) + ":" + std::to_string(pos + 1) +
                                           ": '" + line.substr(pos, stop - pos) +
                                           "' is not a number");
      }
      m(static_cast<Eigen::Index>(n), c) = value;
      pos = stop + 1;
    }
  }
  return m;
}

}  // namespace

void save_dataset(const Dataset& dataset, const fs::path& root) {
  validate_dataset(dataset);
  fs::create_directories(root);
  std::string vocab;
  for (const std::string& n : dataset.vocabulary.names()) vocab += n + "\n";
  write_file(root / "vocab.txt", vocab);

  nlohmann::json manifest;
  manifest["format"] = "d3tw-dataset";
  manifest["version"] = 1;
  manifest["vocabulary"] = "vocab.txt";
  manifest["feature_dim"] = dataset.feature_dim;
  manifest["splits"] = nlohmann::json::object();
  manifest["generation"] = dataset.generation;
  const Vocabulary& v = dataset.vocabulary;
  for (const auto& [split, records] : dataset.splits) {
    fs::create_directories(root / split);
    auto ids = nlohmann::json::array();
    for (const SequenceRecord& r : records) {
      ids.push_back(r.id);
      const fs::path base = root / split / r.id;
      std::string features;
      for (Eigen::Index t = 0; t < r.features.rows(); ++t) {
        for (Eigen::Index c = 0; c < r.features.cols(); ++c) {
          if (c > 0) features += ',';
          features += format_double(r.features(t, c));
        }
        features += '\n';
      }
      write_file(base.string() + ".features.csv", features);
      std::string transcript;
      for (std::size_t i = 0; i < r.transcript.size(); ++i) {
        if (i > 0) transcript += ' ';
        transcript += v.name(r.transcript[i]);
      }
      write_file(base.string() + ".transcript.txt", transcript + "\n");
      if (r.gt_frame_labels) {
        std::string labels;
        for (ActionId a : *r.gt_frame_labels) labels += v.name(a) + "\n";
        write_file(base.string() + ".labels.txt", labels);
      }
      if (r.sparse_annotations) {
        std::string sparse;
        for (const auto& [frame, a] : *r.sparse_annotations) {
          sparse += std::to_string(frame) + "\t" + v.name(a) + "\n";
        }
        write_file(base.string() + ".sparse.txt", sparse);
      }
    }
    manifest["splits"][split] = std::move(ids);
  }
  write_file(root / "dataset.json", manifest.dump(2) + "\n");
}

Dataset load_dataset(const fs::path& root, int subsample_every) {
  const fs::path manifest_path = root / "dataset.json";
  nlohmann::json manifest;
  {
    std::ifstream in(manifest_path);
    if (!in) throw Error(ErrorCode::kMissingFile, manifest_path.string() + ": file not found");
    try {
      manifest = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kParse, manifest_path.string() + ": " + e.what());
    }
  }

  Dataset ds;
  fs::path vocab_path;
  try {
    vocab_path = root / manifest.at("vocabulary").get<std::string>();
    ds.feature_dim = manifest.at("feature_dim").get<int>();
    ds.generation = manifest.value("generation", nlohmann::json());
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, manifest_path.string() + ": " + e.what());
  }
  if (ds.feature_dim < 1) {
    throw Error(ErrorCode::kParse, manifest_path.string() + ": feature_dim must be positive");
  }

  std::vector<std::string> names = read_lines(vocab_path);
  while (!names.empty() && names.back().empty()) names.pop_back();
  for (std::size_t n = 0; n < names.size(); ++n) {
    if (names[n].empty() || split_whitespace(names[n]).size() != 1 ||
        split_whitespace(names[n])[0] != names[n]) {
      throw Error(ErrorCode::kParse, where(vocab_path, n) + ": bad action name '" + names[n] + "'");
    }
  }
  try {
    ds.vocabulary = Vocabulary(std::move(names));
  } catch (const Error& e) {
    throw Error(ErrorCode::kParse, vocab_path.string() + ": " + e.what());
  }
  const Vocabulary& v = ds.vocabulary;

  const nlohmann::json& splits = manifest.contains("splits") ? manifest["splits"] : nlohmann::json();
  if (!splits.is_object()) throw Error(ErrorCode::kParse, manifest_path.string() + ": missing splits");
  for (const auto& [split, ids] : splits.items()) {
    auto& records = ds.splits[split];
    for (const auto& id_json : ids) {
      if (!id_json.is_string()) {
        throw Error(ErrorCode::kParse, manifest_path.string() + ": record ids must be strings");
      }
      SequenceRecord r;
      r.id = id_json.get<std::string>();
      const std::string base = (root / split / r.id).string();

      r.features = read_features(base + ".features.csv", ds.feature_dim);

      const fs::path transcript_path = base + ".transcript.txt";
      std::vector<std::string> lines = read_lines(transcript_path);
      if (lines.empty() || split_whitespace(lines[0]).empty()) {
        throw Error(ErrorCode::kParse, where(transcript_path, 0) + ": empty transcript");
      }
      for (std::size_t n = 1; n < lines.size(); ++n) {
        if (!split_whitespace(lines[n]).empty()) {
          throw Error(ErrorCode::kParse, where(transcript_path, n) + ": transcript must be one line");
        }
      }
      for (const std::string& name : split_whitespace(lines[0])) {
        r.transcript.actions.push_back(lookup(v, name, transcript_path, 0));
      }

      const fs::path labels_path = base + ".labels.txt";
      if (fs::exists(labels_path)) {
        std::vector<std::string> label_lines = read_lines(labels_path);
        while (!label_lines.empty() && label_lines.back().empty()) label_lines.pop_back();
        std::vector<ActionId> labels;
        for (std::size_t n = 0; n < label_lines.size(); ++n) {
          const auto tokens = split_whitespace(label_lines[n]);
          if (tokens.size() != 1) {
            throw Error(ErrorCode::kParse, where(labels_path, n) + ": expected one action name");
          }
          labels.push_back(lookup(v, tokens[0], labels_path, n));
        }
        if (labels.size() != r.num_frames()) {
          throw Error(ErrorCode::kInconsistentLength,
                      labels_path.string() + ": " + std::to_string(labels.size()) +
                          " labels for " + std::to_string(r.num_frames()) + " feature rows");
        }
        r.gt_frame_labels = std::move(labels);
      }

      const fs::path sparse_path = base + ".sparse.txt";
      if (fs::exists(sparse_path)) {
        std::map<std::size_t, ActionId> sparse;
        const std::vector<std::string> sparse_lines = read_lines(sparse_path);
        for (std::size_t n = 0; n < sparse_lines.size(); ++n) {
          const std::string& line = sparse_lines[n];
          if (line.empty()) continue;
          const std::size_t tab = line.find('\t');
          std::size_t frame = 0;
          auto [ptr, ec] = std::from_chars(line.data(), line.data() + std::min(tab, line.size()), frame);
          if (tab == std::string::npos || ec != std::errc() || ptr != line.data() + tab) {
            throw Error(ErrorCode::kParse, where(sparse_path, n) + ":1: expected frame<TAB>action");
          }
          if (frame >= r.num_frames()) {
            throw Error(ErrorCode::kInconsistentLength,
                        where(sparse_path, n) + ": frame " + std::to_string(frame) +
                            " past the last of " + std::to_string(r.num_frames()) + " frames");
          }
          sparse[frame] = lookup(v, line.substr(tab + 1), sparse_path, n);
        }
        r.sparse_annotations = std::move(sparse);
      }
      records.push_back(std::move(r));
    }
  }
  validate_dataset(ds);
  return subsample_every > 1 ? subsample(ds, subsample_every) : ds;
}

}  // namespace d3tw

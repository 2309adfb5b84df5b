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

// Dataset model, synthetic weak-supervision data and the on-disk layout:
//
//   <root>/vocab.txt                    one action name per line, id = line
//   <root>/dataset.json                 manifest
//   <root>/<split>/<id>.features.csv    T lines of dim comma-separated floats
//   <root>/<split>/<id>.transcript.txt  space-separated action names
//   <root>/<split>/<id>.labels.txt      optional, T lines of action names
//   <root>/<split>/<id>.sparse.txt      optional, frame<TAB>action lines

#ifndef D3TW_DATA_H_
#define D3TW_DATA_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "d3tw/matrix.h"
#include "d3tw/transcript.h"

namespace d3tw {

class Vocabulary {
 public:
  Vocabulary() = default;
  // Throws kInvalidInput on empty, duplicate or whitespace-containing names.
  explicit Vocabulary(std::vector<std::string> names);

  int size() const { return static_cast<int>(names_.size()); }
  const std::string& name(ActionId id) const { return names_.at(static_cast<std::size_t>(id)); }
  std::optional<ActionId> find(const std::string& name) const;
  const std::vector<std::string>& names() const { return names_; }

  bool operator==(const Vocabulary& other) const { return names_ == other.names_; }

 private:
  std::vector<std::string> names_;
  std::map<std::string, ActionId> ids_;
};

struct SequenceRecord {
  std::string id;
  Matrix features;  // T x dim
  Transcript transcript;
  std::optional<std::vector<ActionId>> gt_frame_labels;
  std::optional<std::map<std::size_t, ActionId>> sparse_annotations;

  std::size_t num_frames() const { return static_cast<std::size_t>(features.rows()); }
  bool operator==(const SequenceRecord& other) const;
};

struct Dataset {
  Vocabulary vocabulary;
  int feature_dim = 0;
  // Split name -> records, e.g. "train" and "test".
  std::map<std::string, std::vector<SequenceRecord>> splits;
  // Echo of whatever produced the data; null when unknown.
  nlohmann::json generation;

  const std::vector<SequenceRecord>& split(const std::string& name) const;
  bool operator==(const Dataset&) const = default;
};

// Throws kInvalidInput on any violated record or dataset invariant.
void validate_record(const SequenceRecord& record, const Vocabulary& vocabulary, int feature_dim);
void validate_dataset(const Dataset& dataset);

struct SynthConfig {
  int num_actions = 5;
  int feature_dim = 3;
  double sigma_between = 4.0;
  double sigma_within = 0.5;
  int min_transcript_length = 3;
  int max_transcript_length = 6;
  int min_segment_length = 10;
  int max_segment_length = 16;
  int train_count = 200;
  int test_count = 50;
  // Fraction of frames per record that receive a sparse ground-truth label.
  double sparse_fraction = 0.0;
  std::uint64_t seed = 7;

  void validate() const;
  nlohmann::json to_json() const;
  static SynthConfig from_json(const nlohmann::json& j);
};

struct SyntheticDataset {
  Dataset dataset;
  Matrix class_means;  // A x dim
};

SyntheticDataset generate_synthetic(const SynthConfig& config);

// Merges adjacent equal labels.
std::vector<ActionId> collapse_labels(std::span<const ActionId> frame_labels);

// Entry i covers frames [floor(i*T/L), floor((i+1)*T/L)).
std::vector<ActionId> expand_transcript_uniform(const Transcript& transcript,
                                                std::size_t num_frames);

// Keeps frames 0, M, 2M, ... in features, labels and sparse annotations.
Dataset subsample(const Dataset& dataset, int every);

void save_dataset(const Dataset& dataset, const std::filesystem::path& root);

// `subsample_every` > 1 applies subsample() after loading.
Dataset load_dataset(const std::filesystem::path& root, int subsample_every = 1);

// Shortest round-trip decimal form of a double.
std::string format_double(double value);

}  // namespace d3tw

#endif  // D3TW_DATA_H_

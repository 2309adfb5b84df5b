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

#include "d3tw/io.h"

#include <fstream>

#include "d3tw/error.h"

namespace d3tw {
namespace {

nlohmann::json flat(const Matrix& m) {
  auto a = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) a.push_back(m(r, c));
  }
  return a;
}

nlohmann::json flat(const Vector& v) {
  auto a = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

Matrix read_matrix(const nlohmann::json& j, const char* key, Eigen::Index rows, Eigen::Index cols) {
  const auto values = j.at(key).get<std::vector<double>>();
  if (values.size() != static_cast<std::size_t>(rows * cols)) {
    throw Error(ErrorCode::kParse, std::string("checkpoint field '") + key + "' has " +
                                       std::to_string(values.size()) + " values, expected " +
                                       std::to_string(rows * cols));
  }
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = values[static_cast<std::size_t>(r * cols + c)];
  }
  return m;
}

Vector read_vector(const nlohmann::json& j, const char* key, Eigen::Index size) {
  const Matrix m = read_matrix(j, key, size, 1);
  return m.col(0);
}

}  // namespace

nlohmann::json checkpoint_to_json(const Checkpoint& checkpoint) {
  const ModelParams& p = checkpoint.params;
  const AdamState& s = p.optimizer;
  nlohmann::json j;
  j["format"] = "d3tw-checkpoint";
  j["vocab_size"] = p.num_actions();
  j["feature_dim"] = p.feature_dim();
  j["weights"] = flat(p.weights);
  j["bias"] = flat(p.bias);
  j["prior"] = flat(checkpoint.prior.probs);
  j["optimizer_state"] = {
      {"m_weights", flat(s.m_weights)},
      {"v_weights", flat(s.v_weights)},
      {"m_bias", flat(s.m_bias)},
      {"v_bias", flat(s.v_bias)},
      {"prior_counts", flat(checkpoint.prior.counts)},
  };
  j["step"] = s.step;
  j["config"] = checkpoint.config;
  return j;
}

Checkpoint checkpoint_from_json(const nlohmann::json& j) {
  Checkpoint c;
  try {
    const int A = j.at("vocab_size").get<int>();
    const int dim = j.at("feature_dim").get<int>();
    if (A < 1 || dim < 1) throw Error(ErrorCode::kParse, "checkpoint shapes must be positive");
    ModelParams& p = c.params;
    p.weights = read_matrix(j, "weights", dim, A);
    p.bias = read_vector(j, "bias", A);
    const nlohmann::json& s = j.at("optimizer_state");
    p.optimizer.m_weights = read_matrix(s, "m_weights", dim, A);
    p.optimizer.v_weights = read_matrix(s, "v_weights", dim, A);
    p.optimizer.m_bias = read_vector(s, "m_bias", A);
    p.optimizer.v_bias = read_vector(s, "v_bias", A);
    p.optimizer.step = j.at("step").get<std::int64_t>();
    c.prior.probs = read_vector(j, "prior", A);
    c.prior.counts = read_vector(s, "prior_counts", A);
    c.config = j.value("config", nlohmann::json());
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("checkpoint: ") + e.what());
  }
  if (!c.params.weights.allFinite() || !c.params.bias.allFinite()) {
    throw Error(ErrorCode::kParse, "checkpoint holds non-finite parameters");
  }
  if (!(c.prior.probs.minCoeff() > 0.0) || std::abs(c.prior.probs.sum() - 1.0) > 1e-6) {
    throw Error(ErrorCode::kParse, "checkpoint prior is not a positive distribution");
  }
  return c;
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kMissingFile, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorCode::kMissingFile, "failed writing " + path.string());
}

nlohmann::json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kMissingFile, path.string() + ": file not found");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, path.string() + ": " + e.what());
  }
}

void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path) {
  write_text_file(path, checkpoint_to_json(checkpoint).dump(2) + "\n");
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  try {
    return checkpoint_from_json(read_json_file(path));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kParse) throw Error(ErrorCode::kParse, path.string() + ": " + e.what());
    throw;
  }
}

nlohmann::json prediction_to_json(const std::string& id, const Segmentation& segmentation,
                                  const Vocabulary& vocabulary, const nlohmann::json& config) {
  nlohmann::json j;
  j["id"] = id;
  auto labels = nlohmann::json::array();
  for (ActionId a : segmentation.frame_labels) labels.push_back(vocabulary.name(a));
  j["frame_labels"] = std::move(labels);
  auto segments = nlohmann::json::array();
  for (const Segment& s : segmentation.segments) {
    segments.push_back({vocabulary.name(s.action), s.start, s.end});
  }
  j["segments"] = std::move(segments);
  auto transcript = nlohmann::json::array();
  for (ActionId a : segmentation.source_transcript.actions) transcript.push_back(vocabulary.name(a));
  j["transcript"] = std::move(transcript);
  j["cost"] = segmentation.alignment_cost;
  j["config"] = config;
  return j;
}

Prediction prediction_from_json(const nlohmann::json& j, const Vocabulary& vocabulary) {
  auto id_of = [&](const std::string& name) {
    auto id = vocabulary.find(name);
    if (!id) throw Error(ErrorCode::kUnknownAction, "prediction names unknown action '" + name + "'");
    return *id;
  };
  Prediction p;
  try {
    p.id = j.value("id", std::string());
    for (const auto& name : j.at("frame_labels")) p.frame_labels.push_back(id_of(name.get<std::string>()));
    for (const auto& name : j.at("transcript")) p.transcript.actions.push_back(id_of(name.get<std::string>()));
    p.cost = j.at("cost").get<double>();
    p.config = j.value("config", nlohmann::json());
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("prediction: ") + e.what());
  }
  return p;
}

}  // namespace d3tw

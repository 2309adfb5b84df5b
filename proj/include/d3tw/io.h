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

// JSON artifacts: model checkpoints (model.json) and per-record predictions
// (<id>.pred.json). Both embed the resolved configuration that produced them
// under "config".

#ifndef D3TW_IO_H_
#define D3TW_IO_H_

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "d3tw/data.h"
#include "d3tw/model.h"
#include "d3tw/tasks.h"

namespace d3tw {

struct Checkpoint {
  ModelParams params;
  ClassPrior prior;
  nlohmann::json config;
};

nlohmann::json checkpoint_to_json(const Checkpoint& checkpoint);
Checkpoint checkpoint_from_json(const nlohmann::json& j);

void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

struct Prediction {
  std::string id;
  std::vector<ActionId> frame_labels;
  Transcript transcript;
  double cost = 0.0;
  nlohmann::json config;
};

nlohmann::json prediction_to_json(const std::string& id, const Segmentation& segmentation,
                                  const Vocabulary& vocabulary, const nlohmann::json& config);
Prediction prediction_from_json(const nlohmann::json& j, const Vocabulary& vocabulary);

// Writes `text` to `path`, replacing any existing file.
void write_text_file(const std::filesystem::path& path, const std::string& text);
nlohmann::json read_json_file(const std::filesystem::path& path);

}  // namespace d3tw

#endif  // D3TW_IO_H_

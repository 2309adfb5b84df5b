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

// Epoch loop over a training split.

#ifndef D3TW_TRAINER_H_
#define D3TW_TRAINER_H_

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "d3tw/data.h"
#include "d3tw/model.h"

namespace d3tw {

struct TrainerOptions {
  TrainConfig step;
  int epochs = 30;
  int batch_size = 8;
  std::uint64_t seed = 7;
  // Use each record's sparse annotations as path constraints on the positive.
  bool use_sparse = false;
};

struct EpochLog {
  int epoch = 0;
  double mean_loss = 0.0;
  // Alignment frame accuracy on the held-out records, when they carry labels.
  std::optional<double> heldout_frame_accuracy;
};

// Distinct transcripts of `records`, in lexicographic order.
std::vector<Transcript> distinct_transcripts(std::span<const SequenceRecord> records);

// Runs `options.epochs` passes of seeded shuffled mini-batches, mutating
// `params` and `prior`. Resuming from a checkpoint continues the optimizer
// step counter and reseeds the shuffle from (seed, step).
std::vector<EpochLog> train(std::span<const SequenceRecord> records,
                            std::span<const SequenceRecord> heldout, ModelParams& params,
                            ClassPrior& prior, const TrainerOptions& options,
                            const std::function<void(const EpochLog&)>& on_epoch = {});

}  // namespace d3tw

#endif  // D3TW_TRAINER_H_

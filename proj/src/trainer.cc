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

#include "d3tw/trainer.h"

#include <algorithm>
#include <numeric>
#include <random>
#include <set>

#include "d3tw/error.h"
#include "d3tw/tasks.h"

namespace d3tw {

std::vector<Transcript> distinct_transcripts(std::span<const SequenceRecord> records) {
  std::set<Transcript> distinct;
  for (const SequenceRecord& r : records) distinct.insert(r.transcript);
  return {distinct.begin(), distinct.end()};
}

std::vector<EpochLog> train(std::span<const SequenceRecord> records,
                            std::span<const SequenceRecord> heldout, ModelParams& params,
                            ClassPrior& prior, const TrainerOptions& options,
                            const std::function<void(const EpochLog&)>& on_epoch) {
  options.step.validate();
  if (options.epochs < 0) throw Error(ErrorCode::kInvalidInput, "epochs must be nonnegative");
  if (options.batch_size < 1) throw Error(ErrorCode::kInvalidInput, "batch size must be positive");
  if (records.empty() && options.epochs > 0) {
    throw Error(ErrorCode::kInvalidInput, "empty training split");
  }

  const std::vector<Transcript> pool = distinct_transcripts(records);
  std::vector<PathConstraint> constraints(records.size());
  if (options.use_sparse) {
    for (std::size_t n = 0; n < records.size(); ++n) {
      const SequenceRecord& r = records[n];
      if (r.sparse_annotations) {
        constraints[n] = constraints_from_annotations(r.transcript, *r.sparse_annotations, r.num_frames());
      }
    }
  }

  std::seed_seq seq{static_cast<std::uint64_t>(options.seed),
                    static_cast<std::uint64_t>(params.optimizer.step)};
  std::mt19937_64 rng(seq);
  std::vector<std::size_t> order(records.size());
  std::vector<EpochLog> logs;
  for (int epoch = 1; epoch <= options.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(options.batch_size)) {
      const std::size_t stop =
          std::min(order.size(), start + static_cast<std::size_t>(options.batch_size));
      std::vector<TrainExample> batch;
      for (std::size_t n = start; n < stop; ++n) {
        const SequenceRecord& r = records[order[n]];
        batch.push_back({&r.features, &r.transcript,
                         constraints[order[n]].empty() ? nullptr : &constraints[order[n]]});
      }
      try {
        loss_sum += train_step(batch, params, prior, options.step, pool, rng).loss;
      } catch (const Error& e) {
        throw Error(e.code(), "epoch " + std::to_string(epoch) + ": " + e.what());
      }
      ++batches;
    }
    EpochLog log;
    log.epoch = epoch;
    log.mean_loss = loss_sum / static_cast<double>(batches);
    const bool labeled = !heldout.empty() && std::all_of(heldout.begin(), heldout.end(),
                                                         [](const SequenceRecord& r) {
                                                           return r.gt_frame_labels.has_value();
                                                         });
    if (labeled) {
      EvalOptions eval;
      eval.mode = TaskMode::kAlignment;
      eval.gamma = 0.0;
      log.heldout_frame_accuracy = evaluate(heldout, params, prior, eval).report.frame_accuracy;
    }
    if (on_epoch) on_epoch(log);
    logs.push_back(log);
  }
  return logs;
}

}  // namespace d3tw

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

// Inference on top of the alignment engine: aligning a known transcript,
// segmenting by searching a candidate set, semi-supervised constraints and
// dataset-level evaluation.

#ifndef D3TW_TASKS_H_
#define D3TW_TASKS_H_

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "d3tw/data.h"
#include "d3tw/metrics.h"
#include "d3tw/model.h"
#include "d3tw/soft_dtw.h"
#include "d3tw/transcript.h"

namespace d3tw {

struct Segmentation {
  std::vector<ActionId> frame_labels;
  std::vector<Segment> segments;
  Transcript source_transcript;
  double alignment_cost = 0.0;
  // Soft expected alignment at the requested gamma, for inspection only.
  std::optional<Matrix> expected_alignment;
};

Segmentation segmentation_from_path(const Transcript& transcript, const AlignmentPath& path,
                                    double cost);

// Hard-decodes `delta` (L x T for `transcript`). With gamma > 0 the soft
// expected alignment is attached as well.
Segmentation align_distances(const Matrix& delta, const Transcript& transcript, double gamma,
                             const PathConstraint& constraint = {});

// Builds emission distances from posteriors and aligns. Throws kInfeasible
// when T < L or the constraint leaves no path.
Segmentation align(const Matrix& posteriors, const ClassPrior& prior, const Transcript& transcript,
                   double gamma, const PathConstraint& constraint = {},
                   double epsilon = kPosteriorFloor);

// Distinct transcripts in lexicographic order of their action ids.
class CandidateSet {
 public:
  // Deduplicates and sorts; throws kNoCandidate when empty.
  explicit CandidateSet(std::vector<Transcript> transcripts);

  const std::vector<Transcript>& transcripts() const { return transcripts_; }
  std::size_t size() const { return transcripts_.size(); }
  bool contains(const Transcript& t) const;

 private:
  std::vector<Transcript> transcripts_;
};

struct SegmentResult {
  Transcript best;
  std::size_t best_index = 0;
  Segmentation segmentation;
  // psi_gamma per candidate in candidate order; +inf when L > T.
  std::vector<double> costs;
};

// Ranks candidates by psi_gamma (earliest wins ties) and hard-aligns the
// winner. Throws kNoCandidate when no candidate fits the frame count.
SegmentResult segment(const Matrix& posteriors, const ClassPrior& prior,
                      const CandidateSet& candidates, double gamma,
                      double epsilon = kPosteriorFloor);
SegmentResult segment_distances(std::span<const Matrix> deltas, const CandidateSet& candidates,
                                double gamma);

// Frame j annotated with action a may only visit rows i with l_i == a.
// Throws kInconsistentAnnotation if a does not occur in the transcript.
PathConstraint constraints_from_annotations(const Transcript& transcript,
                                            const std::map<std::size_t, ActionId>& sparse_labels,
                                            std::size_t num_frames);

struct SequenceMetrics {
  std::string id;
  std::size_t frames = 0;
  double frame_accuracy = 0.0;
  double unit_accuracy = 0.0;
  double mean_iod = 0.0;
  std::size_t gt_intervals = 0;
  double iod_sum = 0.0;
  // Nonempty when the sequence could not be scored.
  std::string error;
};

struct MetricsReport {
  double frame_accuracy = 0.0;  // frame-weighted
  double unit_accuracy = 0.0;   // sequence-averaged
  double mean_iod = 0.0;        // ground-truth-interval-averaged
  std::vector<SequenceMetrics> sequences;
  std::size_t error_count = 0;
};

// Scores predicted frame labels against records carrying ground truth.
// Records without a prediction become error rows. Throws kInvalidInput when
// `records` is empty or nothing could be scored.
MetricsReport score_predictions(std::span<const SequenceRecord> records,
                                const std::map<std::string, std::vector<ActionId>>& predictions);

enum class TaskMode { kAlignment, kSegmentation };

struct EvalOptions {
  TaskMode mode = TaskMode::kAlignment;
  double gamma = 0.1;
  // Required for kSegmentation.
  const CandidateSet* candidates = nullptr;
  // Alignment only: constrain decoding with each record's sparse labels.
  bool use_sparse = false;
  double epsilon = kPosteriorFloor;
};

struct Evaluation {
  MetricsReport report;
  std::vector<Segmentation> predictions;  // parallel to the records
};

// Runs align or segment per record and scores the result. Per-record
// failures are rethrown with the record id attached.
Evaluation evaluate(std::span<const SequenceRecord> records, const ModelParams& params,
                    const ClassPrior& prior, const EvalOptions& options);

}  // namespace d3tw

#endif  // D3TW_TASKS_H_

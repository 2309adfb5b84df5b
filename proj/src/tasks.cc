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

#include "d3tw/tasks.h"

#include <algorithm>
#include <set>

#include "d3tw/error.h"

namespace d3tw {

Segmentation segmentation_from_path(const Transcript& transcript, const AlignmentPath& path,
                                    double cost) {
  Segmentation s;
  s.frame_labels.reserve(path.rows.size());
  for (std::size_t row : path.rows) s.frame_labels.push_back(transcript[row]);
  s.segments = segments_from_labels(s.frame_labels);
  s.source_transcript = transcript;
  s.alignment_cost = cost;
  return s;
}

Segmentation align_distances(const Matrix& delta, const Transcript& transcript, double gamma,
                             const PathConstraint& constraint) {
  if (delta.rows() != static_cast<Eigen::Index>(transcript.size())) {
    throw Error(ErrorCode::kInvalidInput, "distance rows do not match the transcript");
  }
  if (delta.cols() < delta.rows()) {
    throw Error(ErrorCode::kInfeasible, "transcript of length " + std::to_string(delta.rows()) +
                                            " is longer than " + std::to_string(delta.cols()) +
                                            " frames");
  }
  HardAlignment hard = hard_align(delta, constraint);
  Segmentation s = segmentation_from_path(transcript, hard.path, hard.cost);
  if (gamma > 0.0) {
    ForwardResult fwd = forward_cost(delta, gamma, constraint);
    s.expected_alignment = backward_gradient(fwd.cache);
  }
  return s;
}

Segmentation align(const Matrix& posteriors, const ClassPrior& prior, const Transcript& transcript,
                   double gamma, const PathConstraint& constraint, double epsilon) {
  return align_distances(emission_distance(posteriors, prior, transcript, epsilon), transcript,
                         gamma, constraint);
}

CandidateSet::CandidateSet(std::vector<Transcript> transcripts) {
  std::set<Transcript> distinct(transcripts.begin(), transcripts.end());
  transcripts_.assign(distinct.begin(), distinct.end());
  if (transcripts_.empty()) throw Error(ErrorCode::kNoCandidate, "empty candidate set");
  for (const Transcript& t : transcripts_) {
    if (t.actions.empty()) throw Error(ErrorCode::kInvalidInput, "empty candidate transcript");
  }
}

bool CandidateSet::contains(const Transcript& t) const {
  return std::binary_search(transcripts_.begin(), transcripts_.end(), t);
}

SegmentResult segment_distances(std::span<const Matrix> deltas, const CandidateSet& candidates,
                                double gamma) {
  if (deltas.size() != candidates.size()) {
    throw Error(ErrorCode::kInvalidInput, "one distance matrix per candidate is required");
  }
  SegmentResult result;
  result.costs.reserve(candidates.size());
  double best = kInf;
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    const Matrix& d = deltas[c];
    const double cost = d.rows() > d.cols() ? kInf : forward_cost(d, gamma).cost;
    result.costs.push_back(cost);
    if (cost < best) {
      best = cost;
      result.best_index = c;
    }
  }
  if (best == kInf) {
    throw Error(ErrorCode::kNoCandidate, "no candidate transcript fits the frame count");
  }
  result.best = candidates.transcripts()[result.best_index];
  result.segmentation = align_distances(deltas[result.best_index], result.best, 0.0);
  return result;
}

SegmentResult segment(const Matrix& posteriors, const ClassPrior& prior,
                      const CandidateSet& candidates, double gamma, double epsilon) {
  std::vector<Matrix> deltas;
  deltas.reserve(candidates.size());
  for (const Transcript& t : candidates.transcripts()) {
    deltas.push_back(emission_distance(posteriors, prior, t, epsilon));
  }
  return segment_distances(deltas, candidates, gamma);
}

PathConstraint constraints_from_annotations(const Transcript& transcript,
                                            const std::map<std::size_t, ActionId>& sparse_labels,
                                            std::size_t num_frames) {
  PathConstraint constraint;
  for (const auto& [frame, action] : sparse_labels) {
    if (frame >= num_frames) {
      throw Error(ErrorCode::kInvalidInput,
                  "annotated frame " + std::to_string(frame) + " outside [0, " +
                      std::to_string(num_frames) + ")");
    }
    std::set<std::size_t> rows;
    for (std::size_t i = 0; i < transcript.size(); ++i) {
      if (transcript[i] == action) rows.insert(i);
    }
    if (rows.empty()) {
      throw Error(ErrorCode::kInconsistentAnnotation,
                  "frame " + std::to_string(frame) + " is annotated with action " +
                      std::to_string(action) + ", which the transcript does not contain");
    }
    constraint.restrict_frame(frame, std::move(rows));
  }
  return constraint;
}

MetricsReport score_predictions(std::span<const SequenceRecord> records,
                                const std::map<std::string, std::vector<ActionId>>& predictions) {
  if (records.empty()) throw Error(ErrorCode::kInvalidInput, "nothing to evaluate: empty split");
  MetricsReport report;
  std::size_t frames = 0;
  std::size_t hits_weighted = 0;
  double unit_sum = 0.0;
  std::size_t scored = 0;
  std::size_t intervals = 0;
  double iod_sum = 0.0;
  for (const SequenceRecord& r : records) {
    SequenceMetrics row;
    row.id = r.id;
    row.frames = r.num_frames();
    auto it = predictions.find(r.id);
    std::size_t hits = 0;
    try {
      if (!r.gt_frame_labels) throw Error(ErrorCode::kInvalidInput, "no ground-truth labels");
      if (it == predictions.end()) throw Error(ErrorCode::kMissingFile, "no prediction");
      const auto& pred = it->second;
      const auto& gt = *r.gt_frame_labels;
      row.frame_accuracy = frame_accuracy(pred, gt);
      for (std::size_t t = 0; t < gt.size(); ++t) hits += pred[t] == gt[t];
      row.unit_accuracy = unit_accuracy(pred, gt);
      const std::vector<Segment> gt_segments = segments_from_labels(gt);
      const std::vector<double> scores = iod_scores(pred, gt_segments);
      row.gt_intervals = scores.size();
      for (double s : scores) row.iod_sum += s;
      row.mean_iod = row.iod_sum / static_cast<double>(row.gt_intervals);
    } catch (const Error& e) {
      row.error = e.what();
      ++report.error_count;
      report.sequences.push_back(std::move(row));
      continue;
    }
    frames += row.frames;
    hits_weighted += hits;
    unit_sum += row.unit_accuracy;
    intervals += row.gt_intervals;
    iod_sum += row.iod_sum;
    ++scored;
    report.sequences.push_back(std::move(row));
  }
  if (scored == 0) throw Error(ErrorCode::kInvalidInput, "no sequence could be scored");
  report.frame_accuracy = static_cast<double>(hits_weighted) / static_cast<double>(frames);
  report.unit_accuracy = unit_sum / static_cast<double>(scored);
  report.mean_iod = iod_sum / static_cast<double>(intervals);
  return report;
}

Evaluation evaluate(std::span<const SequenceRecord> records, const ModelParams& params,
                    const ClassPrior& prior, const EvalOptions& options) {
  if (records.empty()) throw Error(ErrorCode::kInvalidInput, "nothing to evaluate: empty split");
  if (options.mode == TaskMode::kSegmentation && options.candidates == nullptr) {
    throw Error(ErrorCode::kInvalidInput, "segmentation needs a candidate set");
  }
  Evaluation out;
  std::map<std::string, std::vector<ActionId>> predicted;
  for (const SequenceRecord& r : records) {
    try {
      const Matrix posteriors = forward(r.features, params);
      Segmentation s;
      if (options.mode == TaskMode::kAlignment) {
        PathConstraint constraint;
        if (options.use_sparse && r.sparse_annotations) {
          constraint = constraints_from_annotations(r.transcript, *r.sparse_annotations, r.num_frames());
        }
        s = align(posteriors, prior, r.transcript, options.gamma, constraint, options.epsilon);
      } else {
        s = segment(posteriors, prior, *options.candidates, options.gamma, options.epsilon).segmentation;
      }
      predicted[r.id] = s.frame_labels;
      out.predictions.push_back(std::move(s));
    } catch (const Error& e) {
      throw Error(e.code(), "sequence '" + r.id + "': " + e.what());
    }
  }
  out.report = score_predictions(records, predicted);
  return out;
}

}  // namespace d3tw

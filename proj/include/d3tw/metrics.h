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

// Frame-level evaluation metrics for predicted action labelings.

#ifndef D3TW_METRICS_H_
#define D3TW_METRICS_H_

#include <cstddef>
#include <span>
#include <vector>

#include "d3tw/transcript.h"

namespace d3tw {

// A labeled half-open frame interval [start, end).
struct Segment {
  ActionId action;
  std::size_t start;
  std::size_t end;

  std::size_t length() const { return end - start; }
  bool operator==(const Segment&) const = default;
};

// Maximal runs of equal labels, in order.
std::vector<Segment> segments_from_labels(std::span<const ActionId> frame_labels);

// Fraction of frames with matching labels.
double frame_accuracy(std::span<const ActionId> predicted, std::span<const ActionId> truth);

// Unit-level edit distance (substitution, insertion, deletion, cost 1 each).
std::size_t levenshtein(std::span<const ActionId> a, std::span<const ActionId> b);

// Both labelings are collapsed to unit sequences; returns
// max(0, 1 - D / |truth units|) with D the edit distance between them.
double unit_accuracy(std::span<const ActionId> predicted, std::span<const ActionId> truth);

// Intersection over detection per ground-truth interval I*: the predicted
// interval I is the segment of the same action overlapping I* the most, and
// the score is |I n I*| / |I| (0 when no such segment overlaps).
std::vector<double> iod_scores(std::span<const ActionId> predicted,
                               std::span<const Segment> truth);

// Mean of iod_scores. Throws kInvalidInput for an empty, malformed or
// overlapping ground truth.
double iod(std::span<const ActionId> predicted, std::span<const Segment> truth);

}  // namespace d3tw

#endif  // D3TW_METRICS_H_

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

#include "d3tw/metrics.h"

#include <algorithm>
#include <string>

#include "d3tw/data.h"
#include "d3tw/error.h"

namespace d3tw {
namespace {

void check_lengths(std::span<const ActionId> predicted, std::span<const ActionId> truth) {
  if (predicted.size() != truth.size()) {
    throw Error(ErrorCode::kInconsistentLength,
                std::to_string(predicted.size()) + " predicted labels for " +
                    std::to_string(truth.size()) + " ground-truth frames");
  }
  if (truth.empty()) throw Error(ErrorCode::kInvalidInput, "empty label sequence");
}

}  // namespace

std::vector<Segment> segments_from_labels(std::span<const ActionId> frame_labels) {
  std::vector<Segment> out;
  for (std::size_t t = 0; t < frame_labels.size(); ++t) {
    if (out.empty() || out.back().action != frame_labels[t]) {
      out.push_back({frame_labels[t], t, t + 1});
    } else {
      out.back().end = t + 1;
    }
  }
  return out;
}

double frame_accuracy(std::span<const ActionId> predicted, std::span<const ActionId> truth) {
  check_lengths(predicted, truth);
  std::size_t hits = 0;
  for (std::size_t t = 0; t < truth.size(); ++t) hits += predicted[t] == truth[t];
  return static_cast<double>(hits) / static_cast<double>(truth.size());
}

std::size_t levenshtein(std::span<const ActionId> a, std::span<const ActionId> b) {
  std::vector<std::size_t> prev(b.size() + 1);
  std::vector<std::size_t> cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

double unit_accuracy(std::span<const ActionId> predicted, std::span<const ActionId> truth) {
  check_lengths(predicted, truth);
  const std::vector<ActionId> p = collapse_labels(predicted);
  const std::vector<ActionId> g = collapse_labels(truth);
  const double d = static_cast<double>(levenshtein(p, g));
  return std::max(0.0, 1.0 - d / static_cast<double>(g.size()));
}

std::vector<double> iod_scores(std::span<const ActionId> predicted,
                               std::span<const Segment> truth) {
  if (truth.empty()) throw Error(ErrorCode::kInvalidInput, "no ground-truth intervals");
  std::size_t last_end = 0;
  for (const Segment& s : truth) {
    if (s.start >= s.end || s.end > predicted.size() || s.start < last_end) {
      throw Error(ErrorCode::kInvalidInput,
                  "ground-truth interval [" + std::to_string(s.start) + ", " +
                      std::to_string(s.end) + ") is empty, out of range or overlapping");
    }
    last_end = s.end;
  }
  const std::vector<Segment> pred = segments_from_labels(predicted);
  std::vector<double> scores;
  scores.reserve(truth.size());
  for (const Segment& gt : truth) {
    std::size_t best_overlap = 0;
    std::size_t best_length = 0;
    for (const Segment& p : pred) {
      if (p.action != gt.action) continue;
      const std::size_t lo = std::max(p.start, gt.start);
      const std::size_t hi = std::min(p.end, gt.end);
      const std::size_t overlap = hi > lo ? hi - lo : 0;
      if (overlap > best_overlap) {
        best_overlap = overlap;
        best_length = p.length();
      }
    }
    scores.push_back(best_overlap == 0 ? 0.0
                                       : static_cast<double>(best_overlap) /
                                             static_cast<double>(best_length));
  }
  return scores;
}

double iod(std::span<const ActionId> predicted, std::span<const Segment> truth) {
  const std::vector<double> scores = iod_scores(predicted, truth);
  double sum = 0.0;
  for (double s : scores) sum += s;
  return sum / static_cast<double>(scores.size());
}

}  // namespace d3tw

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

// Entropy-smoothed dynamic time warping between a transcript (rows) and a
// frame sequence (columns).
//
// A distance matrix `delta` is L x T: delta(i, j) is the cost of assigning
// frame j to transcript entry i. Entries are extended reals, +infinity marks
// a forbidden cell. Eligible alignments start at (0, 0), end at (L-1, T-1)
// and move with either a horizontal step (same row, next frame) or a
// diagonal step (next row, next frame), so every frame gets exactly one row.
//
// All row and frame indices in this API are 0-based.

#ifndef D3TW_SOFT_DTW_H_
#define D3TW_SOFT_DTW_H_

#include <cstddef>
#include <map>
#include <set>
#include <span>
#include <vector>

#include "d3tw/matrix.h"

namespace d3tw {

// min_gamma{a_1..a_n}. gamma == 0 is the hard minimum; otherwise
// -gamma * log(sum_i exp(-a_i / gamma)), evaluated after shifting by the
// minimum. +infinity terms drop out; all-infinite input yields +infinity.
double softmin(std::span<const double> values, double gamma);

// Gradient of softmin with respect to its inputs for gamma > 0: a softmax of
// -values / gamma. Infinite inputs get weight 0.
std::vector<double> softmin_weights(std::span<const double> values, double gamma);

// Sparse per-frame restriction of the rows an alignment may visit.
class PathConstraint {
 public:
  PathConstraint() = default;

  // Restricts `frame` to `rows`, replacing any previous restriction.
  void restrict_frame(std::size_t frame, std::set<std::size_t> rows);

  bool empty() const { return allowed_.empty(); }
  bool allows(std::size_t row, std::size_t frame) const;
  const std::map<std::size_t, std::set<std::size_t>>& frames() const { return allowed_; }

  // Throws kInvalidInput unless every restricted frame is < num_frames and
  // every allowed set is a nonempty subset of [0, num_rows).
  void validate(std::size_t num_rows, std::size_t num_frames) const;

 private:
  std::map<std::size_t, std::set<std::size_t>> allowed_;
};

struct AlignmentPath {
  // rows[j] is the transcript row frame j is aligned to.
  std::vector<std::size_t> rows;

  bool operator==(const AlignmentPath&) const = default;
};

// Structural check of the move rules for an L x T grid.
bool is_valid_path(const AlignmentPath& path, std::size_t num_rows, std::size_t num_frames);

// <Y, delta> for the binary alignment matrix Y of `path`.
double path_cost(const Matrix& delta, const AlignmentPath& path);

// The binary alignment matrix of `path`. This is the subgradient to use for
// gamma == 0, where backward_gradient is not defined.
Matrix path_indicator(const AlignmentPath& path, std::size_t num_rows);

// Throws kInvalidInput for empty shapes, NaN or -infinity entries.
void validate_distance_matrix(const Matrix& delta);

// Forward tables of the dynamic program; produced only by forward_cost.
class DpCache {
 public:
  double gamma() const { return gamma_; }
  double cost() const { return values_(values_.rows() - 1, values_.cols() - 1); }
  std::size_t num_rows() const { return static_cast<std::size_t>(values_.rows()) - 1; }
  std::size_t num_frames() const { return static_cast<std::size_t>(values_.cols()) - 1; }

  // (L+1) x (T+1) table with the border row/column at index 0.
  const Matrix& values() const { return values_; }
  // Softmin weights of the horizontal predecessor v(i, j-1) and the diagonal
  // predecessor v(i-1, j-1), same shape as values(). Zero at infinite cells.
  const Matrix& horizontal_weights() const { return horizontal_; }
  const Matrix& diagonal_weights() const { return diagonal_; }

 private:
  friend struct DpCacheBuilder;
  DpCache() = default;

  double gamma_ = 0.0;
  Matrix values_;
  Matrix horizontal_;
  Matrix diagonal_;
};

struct ForwardResult {
  double cost;
  DpCache cache;
};

// psi_gamma over every eligible alignment that respects `constraint`.
// Throws kInfeasibleShape when T < L. An over-constrained problem returns
// +infinity rather than throwing.
ForwardResult forward_cost(const Matrix& delta, double gamma,
                           const PathConstraint& constraint = {});

// d psi_gamma / d delta: the expected alignment matrix under the Gibbs
// distribution over paths. Requires gamma > 0 and a finite cost.
Matrix backward_gradient(const DpCache& cache);

struct HardAlignment {
  double cost;
  AlignmentPath path;
};

// Minimum-cost alignment. On exact ties the diagonal move wins. Throws
// kInfeasible when no path survives the constraint.
HardAlignment hard_align(const Matrix& delta, const PathConstraint& constraint = {});

// Copy of `delta` with disallowed cells of constrained frames set to +inf.
Matrix apply_constraint(const Matrix& delta, const PathConstraint& constraint);

}  // namespace d3tw

#endif  // D3TW_SOFT_DTW_H_

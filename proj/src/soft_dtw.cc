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

#include "d3tw/soft_dtw.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "d3tw/error.h"

namespace d3tw {
namespace {

void check_softmin_args(std::span<const double> values, double gamma) {
  if (values.empty()) {
    throw Error(ErrorCode::kInvalidInput, "softmin of an empty sequence");
  }
  if (!(gamma >= 0.0) || std::isinf(gamma)) {
    throw Error(ErrorCode::kInvalidInput, "gamma must be a finite nonnegative number");
  }
  for (double v : values) {
    if (std::isnan(v)) throw Error(ErrorCode::kInvalidInput, "NaN cost");
    if (v == -kInf) throw Error(ErrorCode::kInvalidInput, "-infinity cost");
  }
}

// Two-argument softmin used inside the recursion. Writes the gradient
// weights of (a, b); both are zero when a and b are infinite.
double softmin2(double a, double b, double gamma, double* wa, double* wb) {
  const double m = std::min(a, b);
  if (m == kInf) {
    *wa = 0.0;
    *wb = 0.0;
    return kInf;
  }
  if (gamma == 0.0) {
    // Ties go to b, the diagonal predecessor.
    const bool take_b = b <= a;
    *wa = take_b ? 0.0 : 1.0;
    *wb = take_b ? 1.0 : 0.0;
    return m;
  }
  const double ea = std::exp(-(a - m) / gamma);
  const double eb = std::exp(-(b - m) / gamma);
  const double s = ea + eb;
  *wa = ea / s;
  *wb = eb / s;
  return m - gamma * std::log(s);
}

}  // namespace

double softmin(std::span<const double> values, double gamma) {
  check_softmin_args(values, gamma);
  const double m = *std::min_element(values.begin(), values.end());
  if (gamma == 0.0 || m == kInf) return m;
  double s = 0.0;
  for (double v : values) s += std::exp(-(v - m) / gamma);
  return m - gamma * std::log(s);
}

std::vector<double> softmin_weights(std::span<const double> values, double gamma) {
  check_softmin_args(values, gamma);
  if (gamma == 0.0) {
    throw Error(ErrorCode::kInvalidInput, "softmin weights need gamma > 0");
  }
  const double m = *std::min_element(values.begin(), values.end());
  if (m == kInf) {
    throw Error(ErrorCode::kDegenerateInput, "softmin weights of all-infinite values");
  }
  std::vector<double> w(values.size());
  double s = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    w[i] = std::exp(-(values[i] - m) / gamma);
    s += w[i];
  }
  for (double& x : w) x /= s;
  return w;
}

void PathConstraint::restrict_frame(std::size_t frame, std::set<std::size_t> rows) {
  allowed_[frame] = std::move(rows);
}

bool PathConstraint::allows(std::size_t row, std::size_t frame) const {
  auto it = allowed_.find(frame);
  return it == allowed_.end() || it->second.count(row) > 0;
}

void PathConstraint::validate(std::size_t num_rows, std::size_t num_frames) const {
  for (const auto& [frame, rows] : allowed_) {
    if (frame >= num_frames) {
      throw Error(ErrorCode::kInvalidInput,
                  "constraint on frame " + std::to_string(frame) + " outside [0, " +
                      std::to_string(num_frames) + ")");
    }
    if (rows.empty()) {
      throw Error(ErrorCode::kInvalidInput,
                  "empty allowed-row set at frame " + std::to_string(frame));
    }
    if (*rows.rbegin() >= num_rows) {
      throw Error(ErrorCode::kInvalidInput,
                  "constraint at frame " + std::to_string(frame) + " names row " +
                      std::to_string(*rows.rbegin()) + " of " + std::to_string(num_rows));
    }
  }
}

bool is_valid_path(const AlignmentPath& path, std::size_t num_rows, std::size_t num_frames) {
  const auto& r = path.rows;
  if (num_rows == 0 || r.size() != num_frames || r.empty()) return false;
  if (r.front() != 0 || r.back() != num_rows - 1) return false;
  for (std::size_t j = 1; j < r.size(); ++j) {
    if (r[j] != r[j - 1] && r[j] != r[j - 1] + 1) return false;
  }
  return true;
}

double path_cost(const Matrix& delta, const AlignmentPath& path) {
  double cost = 0.0;
  for (std::size_t j = 0; j < path.rows.size(); ++j) {
    cost += delta(static_cast<Eigen::Index>(path.rows[j]), static_cast<Eigen::Index>(j));
  }
  return cost;
}

Matrix path_indicator(const AlignmentPath& path, std::size_t num_rows) {
  Matrix y = Matrix::Zero(static_cast<Eigen::Index>(num_rows),
                          static_cast<Eigen::Index>(path.rows.size()));
  for (std::size_t j = 0; j < path.rows.size(); ++j) {
    y(static_cast<Eigen::Index>(path.rows[j]), static_cast<Eigen::Index>(j)) = 1.0;
  }
  return y;
}

void validate_distance_matrix(const Matrix& delta) {
  if (delta.rows() < 1 || delta.cols() < 1) {
    throw Error(ErrorCode::kInvalidInput, "distance matrix must be at least 1x1");
  }
  for (Eigen::Index i = 0; i < delta.rows(); ++i) {
    for (Eigen::Index j = 0; j < delta.cols(); ++j) {
      const double d = delta(i, j);
      if (std::isnan(d) || d == -kInf) {
        throw Error(ErrorCode::kInvalidInput,
                    "distance (" + std::to_string(i) + ", " + std::to_string(j) +
                        ") is NaN or -infinity");
      }
    }
  }
}

Matrix apply_constraint(const Matrix& delta, const PathConstraint& constraint) {
  validate_distance_matrix(delta);
  constraint.validate(static_cast<std::size_t>(delta.rows()),
                      static_cast<std::size_t>(delta.cols()));
  Matrix masked = delta;
  for (const auto& [frame, rows] : constraint.frames()) {
    for (Eigen::Index i = 0; i < masked.rows(); ++i) {
      if (rows.count(static_cast<std::size_t>(i)) == 0) {
        masked(i, static_cast<Eigen::Index>(frame)) = kInf;
      }
    }
  }
  return masked;
}

struct DpCacheBuilder {
  static DpCache run(const Matrix& d, double gamma) {
    const Eigen::Index L = d.rows();
    const Eigen::Index T = d.cols();
    DpCache cache;
    cache.gamma_ = gamma;
    cache.values_ = Matrix::Constant(L + 1, T + 1, kInf);
    cache.horizontal_ = Matrix::Zero(L + 1, T + 1);
    cache.diagonal_ = Matrix::Zero(L + 1, T + 1);
    Matrix& v = cache.values_;
    v(0, 0) = 0.0;
    for (Eigen::Index i = 1; i <= L; ++i) {
      for (Eigen::Index j = 1; j <= T; ++j) {
        const double cell = d(i - 1, j - 1);
        if (cell == kInf) continue;
        double wh = 0.0;
        double wd = 0.0;
        const double best = softmin2(v(i, j - 1), v(i - 1, j - 1), gamma, &wh, &wd);
        if (best == kInf) continue;
        v(i, j) = cell + best;
        cache.horizontal_(i, j) = wh;
        cache.diagonal_(i, j) = wd;
      }
    }
    return cache;
  }
};

ForwardResult forward_cost(const Matrix& delta, double gamma, const PathConstraint& constraint) {
  validate_distance_matrix(delta);
  if (!(gamma >= 0.0) || std::isinf(gamma)) {
    throw Error(ErrorCode::kInvalidInput, "gamma must be a finite nonnegative number");
  }
  if (delta.cols() < delta.rows()) {
    throw Error(ErrorCode::kInfeasibleShape,
                "transcript of length " + std::to_string(delta.rows()) +
                    " cannot align to " + std::to_string(delta.cols()) + " frames");
  }
  DpCache cache = constraint.empty()
                      ? DpCacheBuilder::run(delta, gamma)
                      : DpCacheBuilder::run(apply_constraint(delta, constraint), gamma);
  const double cost = cache.cost();
  return {cost, std::move(cache)};
}

Matrix backward_gradient(const DpCache& cache) {
  if (cache.gamma() <= 0.0) {
    throw Error(ErrorCode::kInvalidCache,
                "backward pass needs gamma > 0; use hard_align for gamma = 0");
  }
  if (cache.cost() == kInf) {
    throw Error(ErrorCode::kInvalidCache, "backward pass on an infeasible problem");
  }
  const Eigen::Index L = static_cast<Eigen::Index>(cache.num_rows());
  const Eigen::Index T = static_cast<Eigen::Index>(cache.num_frames());
  const Matrix& qh = cache.horizontal_weights();
  const Matrix& qd = cache.diagonal_weights();

  // Weights past the last row/frame are 0 except the virtual successor of
  // (L, T), which passes the full unit of mass back.
  auto horizontal = [&](Eigen::Index i, Eigen::Index j) { return j > T ? 0.0 : qh(i, j); };
  auto diagonal = [&](Eigen::Index i, Eigen::Index j) {
    if (i > L || j > T) return (i == L + 1 && j == T + 1) ? 1.0 : 0.0;
    return qd(i, j);
  };

  Matrix r = Matrix::Zero(L + 2, T + 2);
  r(L + 1, T + 1) = 1.0;
  for (Eigen::Index j = T; j >= 1; --j) {
    for (Eigen::Index i = L; i >= 1; --i) {
      r(i, j) = horizontal(i, j + 1) * r(i, j + 1) + diagonal(i + 1, j + 1) * r(i + 1, j + 1);
    }
  }
  return r.block(1, 1, L, T);
}

HardAlignment hard_align(const Matrix& delta, const PathConstraint& constraint) {
  ForwardResult fwd = forward_cost(delta, 0.0, constraint);
  if (fwd.cost == kInf) {
    throw Error(ErrorCode::kInfeasible, "no alignment satisfies the path constraint");
  }
  const Matrix& qd = fwd.cache.diagonal_weights();
  const std::size_t T = fwd.cache.num_frames();
  AlignmentPath path;
  path.rows.resize(T);
  Eigen::Index i = static_cast<Eigen::Index>(fwd.cache.num_rows());
  for (Eigen::Index j = static_cast<Eigen::Index>(T); j >= 1; --j) {
    path.rows[static_cast<std::size_t>(j - 1)] = static_cast<std::size_t>(i - 1);
    if (qd(i, j) == 1.0) --i;
  }
  return {fwd.cost, std::move(path)};
}

}  // namespace d3tw

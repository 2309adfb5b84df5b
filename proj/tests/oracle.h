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

// Reference computations shared by the test binaries. Nothing here calls into
// the dynamic program; costs and expectations come from explicit path lists.

#ifndef D3TW_TESTS_ORACLE_H_
#define D3TW_TESTS_ORACLE_H_

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "d3tw/matrix.h"

namespace d3tw::testing {

// Every row sequence r of length T with r[0] = 0, r[T-1] = L-1 and steps in
// {0, 1}, built by plain recursion.
inline std::vector<std::vector<std::size_t>> all_paths(std::size_t L, std::size_t T) {
  std::vector<std::vector<std::size_t>> out;
  std::vector<std::size_t> cur;
  std::function<void(std::size_t)> rec = [&](std::size_t row) {
    cur.push_back(row);
    if (cur.size() == T) {
      if (row == L - 1) out.push_back(cur);
    } else {
      rec(row);
      if (row + 1 < L) rec(row + 1);
    }
    cur.pop_back();
  };
  if (L >= 1 && T >= L) rec(0);
  return out;
}

inline double cost_of(const Matrix& delta, const std::vector<std::size_t>& rows) {
  double c = 0.0;
  for (std::size_t j = 0; j < rows.size(); ++j) {
    c += delta(static_cast<Eigen::Index>(rows[j]), static_cast<Eigen::Index>(j));
  }
  return c;
}

// -gamma log sum exp(-c / gamma), or the minimum at gamma == 0.
inline double soft_minimum(const std::vector<double>& costs, double gamma) {
  const double m = *std::min_element(costs.begin(), costs.end());
  if (gamma == 0.0 || std::isinf(m)) return m;
  long double s = 0.0L;
  for (double c : costs) s += std::exp(-static_cast<long double>(c - m) / gamma);
  return m - gamma * static_cast<double>(std::log(s));
}

// Gibbs expectation of the alignment matrix.
inline Matrix expected_alignment(const Matrix& delta, double gamma) {
  const auto paths = all_paths(static_cast<std::size_t>(delta.rows()),
                               static_cast<std::size_t>(delta.cols()));
  std::vector<double> costs;
  for (const auto& p : paths) costs.push_back(cost_of(delta, p));
  const double m = *std::min_element(costs.begin(), costs.end());
  Matrix e = Matrix::Zero(delta.rows(), delta.cols());
  double z = 0.0;
  for (std::size_t k = 0; k < paths.size(); ++k) {
    const double w = std::exp(-(costs[k] - m) / gamma);
    z += w;
    for (std::size_t j = 0; j < paths[k].size(); ++j) {
      e(static_cast<Eigen::Index>(paths[k][j]), static_cast<Eigen::Index>(j)) += w;
    }
  }
  return e / z;
}

inline double n_choose_k(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

inline Matrix uniform_matrix(Eigen::Index rows, Eigen::Index cols, double lo, double hi,
                             std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(lo, hi);
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = u(rng);
  }
  return m;
}

// Central differences of f around x, one coordinate at a time.
inline Matrix central_difference(const std::function<double(const Matrix&)>& f, const Matrix& x,
                                 double h) {
  Matrix g(x.rows(), x.cols());
  Matrix probe = x;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      probe(i, j) = x(i, j) + h;
      const double up = f(probe);
      probe(i, j) = x(i, j) - h;
      const double down = f(probe);
      probe(i, j) = x(i, j);
      g(i, j) = (up - down) / (2.0 * h);
    }
  }
  return g;
}

// Largest elementwise |a - b| / max(|a|, |b|, floor). The floor keeps
// entries that are zero up to rounding from dividing noise by noise.
inline double max_relative_error(const Matrix& a, const Matrix& b, double floor) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      const double scale = std::max({std::abs(a(i, j)), std::abs(b(i, j)), floor});
      worst = std::max(worst, std::abs(a(i, j) - b(i, j)) / scale);
    }
  }
  return worst;
}

}  // namespace d3tw::testing

#endif  // D3TW_TESTS_ORACLE_H_

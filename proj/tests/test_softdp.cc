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

#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "d3tw/alignment_oracle.h"
#include "d3tw/error.h"
#include "d3tw/soft_dtw.h"
#include "oracle.h"

namespace d3tw {
namespace {

Matrix two_by_three() {
  Matrix d(2, 3);
  d << 1, 3, 4,
       2, 1, 1;
  return d;
}

template <typename F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no d3tw::Error thrown";
  return ErrorCode::kInvalidInput;
}

TEST(Softmin, HardMinimumAtZeroGamma) {
  const std::vector<double> v = {1.0, 2.0};
  EXPECT_EQ(softmin(v, 0.0), 1.0);
}

TEST(Softmin, SingleElement) {
  const std::vector<double> v = {3.0};
  EXPECT_DOUBLE_EQ(softmin(v, 1.0), 3.0);
}

TEST(Softmin, TwoZeros) {
  const std::vector<double> v = {0.0, 0.0};
  EXPECT_NEAR(softmin(v, 1.0), -std::log(2.0), 1e-15);
  EXPECT_NEAR(softmin(v, 1.0), -0.693147, 1e-6);
}

TEST(Softmin, InfiniteTermsDropOut) {
  const std::vector<double> v = {2.0, kInf};
  EXPECT_DOUBLE_EQ(softmin(v, 0.5), 2.0);
  const std::vector<double> all = {kInf, kInf};
  EXPECT_EQ(softmin(all, 0.5), kInf);
}

TEST(Softmin, LargeValuesDoNotOverflow) {
  const std::vector<double> v = {1e6, 1e6 + 1.0};
  EXPECT_NEAR(softmin(v, 1e-3), 1e6, 1e-9);
}

TEST(Softmin, RejectsNanAndNegativeInfinity) {
  const std::vector<double> nan = {1.0, std::nan("")};
  EXPECT_EQ(code_of([&] { softmin(nan, 1.0); }), ErrorCode::kInvalidInput);
  const std::vector<double> minf = {-kInf};
  EXPECT_EQ(code_of([&] { softmin(minf, 1.0); }), ErrorCode::kInvalidInput);
  const std::vector<double> ok = {1.0};
  EXPECT_EQ(code_of([&] { softmin(ok, -1.0); }), ErrorCode::kInvalidInput);
}

TEST(SoftminWeights, Examples) {
  const std::vector<double> sym = {0.0, 0.0};
  EXPECT_EQ(softmin_weights(sym, 1.0), (std::vector<double>{0.5, 0.5}));

  const std::vector<double> excluded = {4.0, kInf};
  EXPECT_EQ(softmin_weights(excluded, 1.0), (std::vector<double>{1.0, 0.0}));

  const std::vector<double> v = {3.0, 5.0};
  const auto w = softmin_weights(v, 1.0);
  const double e2 = std::exp(2.0);
  EXPECT_NEAR(w[0], e2 / (e2 + 1.0), 1e-15);
  EXPECT_NEAR(w[1], 1.0 / (e2 + 1.0), 1e-15);
  EXPECT_NEAR(w[0], 0.880797, 1e-6);
  EXPECT_NEAR(w[1], 0.119203, 1e-6);
}

TEST(SoftminWeights, Errors) {
  const std::vector<double> all = {kInf, kInf};
  EXPECT_EQ(code_of([&] { softmin_weights(all, 1.0); }), ErrorCode::kDegenerateInput);
  const std::vector<double> v = {1.0, 2.0};
  EXPECT_EQ(code_of([&] { softmin_weights(v, 0.0); }), ErrorCode::kInvalidInput);
}

TEST(ForwardCost, SingleRowSumsTheRow) {
  Matrix d(1, 3);
  d << 1, 2, 3;
  for (double g : {0.0, 0.1, 1.0, 10.0}) EXPECT_DOUBLE_EQ(forward_cost(d, g).cost, 6.0);
}

TEST(ForwardCost, SquareIsTheDiagonal) {
  std::mt19937_64 rng(1);
  const Matrix d = testing::uniform_matrix(3, 3, 0, 10, rng);
  for (double g : {0.0, 0.5, 2.0}) {
    EXPECT_NEAR(forward_cost(d, g).cost, d(0, 0) + d(1, 1) + d(2, 2), 1e-12);
  }
}

TEST(ForwardCost, TwoByThree) {
  const Matrix d = two_by_three();
  EXPECT_DOUBLE_EQ(forward_cost(d, 0.0).cost, 3.0);
  EXPECT_NEAR(forward_cost(d, 1.0).cost, -std::log(std::exp(-5.0) + std::exp(-3.0)), 1e-12);
  EXPECT_NEAR(forward_cost(d, 1.0).cost, 2.873072, 1e-6);
}

TEST(ForwardCost, CacheShapes) {
  const ForwardResult r = forward_cost(two_by_three(), 1.0);
  EXPECT_EQ(r.cache.num_rows(), 2u);
  EXPECT_EQ(r.cache.num_frames(), 3u);
  EXPECT_EQ(r.cache.values().rows(), 3);
  EXPECT_EQ(r.cache.values().cols(), 4);
  EXPECT_EQ(r.cache.values()(0, 0), 0.0);
  EXPECT_EQ(r.cache.values()(0, 1), kInf);
  EXPECT_EQ(r.cache.values()(1, 0), kInf);
}

TEST(ForwardCost, Errors) {
  Matrix wide(3, 2);
  wide.setOnes();
  EXPECT_EQ(code_of([&] { forward_cost(wide, 1.0); }), ErrorCode::kInfeasibleShape);
  Matrix bad = two_by_three();
  bad(0, 1) = std::nan("");
  EXPECT_EQ(code_of([&] { forward_cost(bad, 1.0); }), ErrorCode::kInvalidInput);
  bad(0, 1) = -kInf;
  EXPECT_EQ(code_of([&] { forward_cost(bad, 1.0); }), ErrorCode::kInvalidInput);
  EXPECT_EQ(code_of([&] { forward_cost(Matrix(0, 0), 1.0); }), ErrorCode::kInvalidInput);
  EXPECT_EQ(code_of([&] { forward_cost(two_by_three(), -0.1); }), ErrorCode::kInvalidInput);
  PathConstraint c;
  c.restrict_frame(7, {0});
  EXPECT_EQ(code_of([&] { forward_cost(two_by_three(), 1.0, c); }), ErrorCode::kInvalidInput);
}

TEST(ForwardCost, OverConstrainedIsInfinite) {
  PathConstraint c;
  c.restrict_frame(0, {1});  // every path starts on row 0
  EXPECT_EQ(forward_cost(two_by_three(), 1.0, c).cost, kInf);
  EXPECT_EQ(code_of([&] { hard_align(two_by_three(), c); }), ErrorCode::kInfeasible);
}

TEST(ForwardCost, InfiniteCellsAreForbidden) {
  Matrix d = two_by_three();
  d(1, 1) = kInf;  // kills the cheaper path
  EXPECT_DOUBLE_EQ(forward_cost(d, 1.0).cost, 5.0);
  EXPECT_DOUBLE_EQ(forward_cost(d, 0.0).cost, 5.0);
}

TEST(BackwardGradient, SingleRowIsAllOnes) {
  Matrix d(1, 4);
  d << 0.3, 1, 2, 5;
  const Matrix e = backward_gradient(forward_cost(d, 0.7).cache);
  EXPECT_TRUE(e.isApprox(Matrix::Ones(1, 4)));
}

TEST(BackwardGradient, TwoByThree) {
  const Matrix e = backward_gradient(forward_cost(two_by_three(), 1.0).cache);
  const double p = 1.0 / (1.0 + std::exp(2.0));
  EXPECT_NEAR(e(0, 0), 1.0, 1e-15);
  EXPECT_NEAR(e(1, 2), 1.0, 1e-15);
  EXPECT_NEAR(e(0, 1), p, 1e-15);
  EXPECT_NEAR(e(1, 1), 1.0 - p, 1e-15);
  EXPECT_NEAR(e(0, 1), 0.119203, 1e-6);
  EXPECT_NEAR(e(1, 1), 0.880797, 1e-6);
  EXPECT_EQ(e(1, 0), 0.0);
  EXPECT_EQ(e(0, 2), 0.0);
}

TEST(BackwardGradient, Errors) {
  EXPECT_EQ(code_of([&] { backward_gradient(forward_cost(two_by_three(), 0.0).cache); }),
            ErrorCode::kInvalidCache);
  PathConstraint c;
  c.restrict_frame(0, {1});
  EXPECT_EQ(code_of([&] { backward_gradient(forward_cost(two_by_three(), 1.0, c).cache); }),
            ErrorCode::kInvalidCache);
}

TEST(BackwardGradient, MatchesEnumeratedExpectation) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 40; ++trial) {
    const int L = 1 + static_cast<int>(rng() % 4);
    const int T = L + static_cast<int>(rng() % 5);
    const Matrix d = testing::uniform_matrix(L, T, 0, 5, rng);
    for (double g : {0.2, 1.0, 3.0}) {
      const Matrix e = backward_gradient(forward_cost(d, g).cache);
      EXPECT_LT((e - testing::expected_alignment(d, g)).cwiseAbs().maxCoeff(), 1e-12);
    }
  }
}

TEST(BackwardGradient, ColumnsSumToOne) {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 50; ++trial) {
    const int L = 1 + static_cast<int>(rng() % 8);
    const int T = L + static_cast<int>(rng() % 30);
    const Matrix d = testing::uniform_matrix(L, T, 0, 10, rng);
    const Matrix e = backward_gradient(forward_cost(d, 0.3).cache);
    for (Eigen::Index j = 0; j < T; ++j) EXPECT_NEAR(e.col(j).sum(), 1.0, 1e-10);
    EXPECT_GE(e.minCoeff(), 0.0);
  }
}

TEST(BackwardGradient, MatchesFiniteDifferences) {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 30; ++trial) {
    const int L = 1 + static_cast<int>(rng() % 4);
    const int T = L + static_cast<int>(rng() % 5);
    const Matrix d = testing::uniform_matrix(L, T, 0, 3, rng);
    const double g = 0.5;
    const Matrix e = backward_gradient(forward_cost(d, g).cache);
    const Matrix fd = testing::central_difference(
        [&](const Matrix& x) { return forward_cost(x, g).cost; }, d, 1e-5);
    EXPECT_LT(testing::max_relative_error(e, fd, 1e-4), 1e-4);
  }
}

TEST(HardAlign, TwoByThree) {
  const HardAlignment h = hard_align(two_by_three());
  EXPECT_EQ(h.cost, 3.0);
  EXPECT_EQ(h.path.rows, (std::vector<std::size_t>{0, 1, 1}));
}

TEST(HardAlign, SquareAndZeroMatrices) {
  Matrix sq = Matrix::Constant(4, 4, 2.0);
  EXPECT_EQ(hard_align(sq).path.rows, (std::vector<std::size_t>{0, 1, 2, 3}));
  const HardAlignment z = hard_align(Matrix::Zero(2, 2));
  EXPECT_EQ(z.path.rows, (std::vector<std::size_t>{0, 1}));
  EXPECT_EQ(z.cost, 0.0);
}

TEST(HardAlign, TiesPreferTheDiagonal) {
  // Both paths cost 0. Walking back from the end the first tie is taken
  // diagonally, so the advance lands as late as possible.
  const HardAlignment h = hard_align(Matrix::Zero(2, 3));
  EXPECT_EQ(h.path.rows, (std::vector<std::size_t>{0, 0, 1}));
}

TEST(HardAlign, AttainsTheEnumeratedMinimum) {
  std::mt19937_64 rng(14);
  for (int trial = 0; trial < 100; ++trial) {
    const int L = 1 + static_cast<int>(rng() % 5);
    const int T = L + static_cast<int>(rng() % 6);
    const Matrix d = testing::uniform_matrix(L, T, 0, 10, rng);
    const HardAlignment h = hard_align(d);
    double best = kInf;
    for (const auto& p : testing::all_paths(L, T)) best = std::min(best, testing::cost_of(d, p));
    EXPECT_EQ(h.cost, best);
    EXPECT_TRUE(is_valid_path(h.path, L, T));
    EXPECT_EQ(path_cost(d, h.path), best);
  }
}

TEST(Enumerate, Counts) {
  EXPECT_EQ(enumerate_alignments(1, 5).size(), 1u);
  EXPECT_EQ(enumerate_alignments(3, 3).size(), 1u);
  EXPECT_EQ(enumerate_alignments(2, 4).size(), 3u);
  EXPECT_EQ(count_alignments(2, 4), 3u);
  EXPECT_EQ(count_alignments(5, 10), 126u);
  EXPECT_EQ(count_alignments(4, 3), 0u);
  EXPECT_EQ(binomial(10, 3), 120u);
}

TEST(Enumerate, AgreesWithRecursiveListing) {
  for (std::size_t L = 1; L <= 5; ++L) {
    for (std::size_t T = L; T <= 10; ++T) {
      const auto got = enumerate_alignments(L, T);
      const auto want = testing::all_paths(L, T);
      ASSERT_EQ(got.size(), want.size());
      EXPECT_EQ(static_cast<double>(got.size()), testing::n_choose_k(T - 1, L - 1));
      for (std::size_t k = 0; k < got.size(); ++k) {
        EXPECT_EQ(got[k].rows, want[k]);
        EXPECT_TRUE(is_valid_path(got[k], L, T));
      }
    }
  }
}

TEST(Enumerate, Errors) {
  EXPECT_EQ(code_of([] { enumerate_alignments(3, 2); }), ErrorCode::kInfeasibleShape);
  EXPECT_EQ(code_of([] { enumerate_alignments(0, 2); }), ErrorCode::kInvalidInput);
  EXPECT_EQ(code_of([] { enumerate_alignments(2, 5, 3); }), ErrorCode::kOracleTooLarge);
  EXPECT_EQ(code_of([] { enumerate_alignments(15, 40); }), ErrorCode::kOracleTooLarge);
}

TEST(PathHelpers, ValidityAndIndicator) {
  EXPECT_TRUE(is_valid_path({{0, 0, 1}}, 2, 3));
  EXPECT_FALSE(is_valid_path({{0, 1, 0}}, 2, 3));
  EXPECT_FALSE(is_valid_path({{0, 2, 2}}, 3, 3));
  EXPECT_FALSE(is_valid_path({{1, 1, 1}}, 2, 3));
  EXPECT_FALSE(is_valid_path({{0, 1}}, 2, 3));
  Matrix y = path_indicator({{0, 0, 1}}, 2);
  Matrix want(2, 3);
  want << 1, 1, 0,
          0, 0, 1;
  EXPECT_EQ(y, want);
  EXPECT_EQ(path_cost(two_by_three(), {{0, 0, 1}}), 5.0);
}

TEST(Constraint, EmptyLeavesDeltaUnchanged) {
  EXPECT_EQ(apply_constraint(two_by_three(), PathConstraint{}), two_by_three());
}

TEST(Constraint, MasksDisallowedRows) {
  PathConstraint c;
  c.restrict_frame(1, {1});
  const Matrix m = apply_constraint(two_by_three(), c);
  EXPECT_EQ(m(0, 1), kInf);
  EXPECT_EQ(m(1, 1), 1.0);
  EXPECT_TRUE(c.allows(1, 1));
  EXPECT_FALSE(c.allows(0, 1));
  EXPECT_TRUE(c.allows(0, 0));
}

TEST(Constraint, Validation) {
  PathConstraint empty_set;
  empty_set.restrict_frame(0, {});
  EXPECT_EQ(code_of([&] { empty_set.validate(2, 3); }), ErrorCode::kInvalidInput);
  PathConstraint bad_row;
  bad_row.restrict_frame(0, {2});
  EXPECT_EQ(code_of([&] { bad_row.validate(2, 3); }), ErrorCode::kInvalidInput);
}

TEST(Constraint, FullySpecifiedPathIsTheOnlyOne) {
  std::mt19937_64 rng(15);
  for (int trial = 0; trial < 30; ++trial) {
    const int L = 1 + static_cast<int>(rng() % 4);
    const int T = L + static_cast<int>(rng() % 6);
    const Matrix d = testing::uniform_matrix(L, T, 0, 10, rng);
    const auto paths = testing::all_paths(L, T);
    const auto& pick = paths[rng() % paths.size()];
    PathConstraint c;
    for (int j = 0; j < T; ++j) c.restrict_frame(j, {pick[j]});
    EXPECT_NEAR(forward_cost(d, 0.0, c).cost, testing::cost_of(d, pick), 1e-12);
    EXPECT_NEAR(forward_cost(d, 1.0, c).cost, testing::cost_of(d, pick), 1e-12);
    EXPECT_EQ(hard_align(d, c).path.rows, pick);
  }
}

TEST(Constraint, SoftCostOnlySeesAllowedPaths) {
  std::mt19937_64 rng(16);
  for (int trial = 0; trial < 40; ++trial) {
    const int L = 2 + static_cast<int>(rng() % 3);
    const int T = L + 1 + static_cast<int>(rng() % 5);
    const Matrix d = testing::uniform_matrix(L, T, 0, 5, rng);
    PathConstraint c;
    const std::size_t frame = rng() % T;
    c.restrict_frame(frame, {static_cast<std::size_t>(rng() % L)});
    std::vector<double> costs;
    for (const auto& p : testing::all_paths(L, T)) {
      bool ok = true;
      for (int j = 0; j < T; ++j) ok = ok && c.allows(p[j], j);
      if (ok) costs.push_back(testing::cost_of(d, p));
    }
    const ForwardResult r = forward_cost(d, 0.5, c);
    if (costs.empty()) {
      EXPECT_EQ(r.cost, kInf);
      continue;
    }
    EXPECT_NEAR(r.cost, testing::soft_minimum(costs, 0.5), 1e-9 * std::abs(r.cost) + 1e-12);
    const Matrix e = backward_gradient(r.cache);
    for (int i = 0; i < L; ++i) {
      if (!c.allows(i, frame)) EXPECT_EQ(e(i, frame), 0.0);
    }
  }
}

TEST(Sandwich, SoftCostIsBoundedByHardCost) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 100; ++trial) {
    const int L = 1 + static_cast<int>(rng() % 6);
    const int T = L + static_cast<int>(rng() % 12);
    const Matrix d = testing::uniform_matrix(L, T, 0, 10, rng);
    const double hard = forward_cost(d, 0.0).cost;
    for (double g : {0.01, 0.5, 2.0}) {
      const double gap = hard - forward_cost(d, g).cost;
      EXPECT_GE(gap, -1e-12);
      EXPECT_LE(gap, g * std::log(testing::n_choose_k(T - 1, L - 1)) + 1e-12);
    }
  }
}

TEST(Sandwich, SoftCostApproachesHardCost) {
  const Matrix d = two_by_three();
  EXPECT_NEAR(forward_cost(d, 1e-4).cost, 3.0, 1e-9);
}

}  // namespace
}  // namespace d3tw

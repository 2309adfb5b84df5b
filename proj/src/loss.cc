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

#include "d3tw/loss.h"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include "d3tw/error.h"
#include "d3tw/soft_dtw.h"

namespace d3tw {

void validate_transcript(const Transcript& transcript, int num_actions) {
  if (transcript.actions.empty()) {
    throw Error(ErrorCode::kInvalidInput, "empty transcript");
  }
  for (ActionId a : transcript.actions) {
    if (a < 0 || a >= num_actions) {
      throw Error(ErrorCode::kInvalidInput,
                  "action id " + std::to_string(a) + " outside vocabulary of " +
                      std::to_string(num_actions));
    }
  }
}

void LossConfig::validate() const {
  if (!(gamma > 0.0) || std::isinf(gamma)) {
    throw Error(ErrorCode::kInvalidInput, "loss gamma must be positive and finite");
  }
  if (!(beta >= 0.0) || std::isinf(beta)) {
    throw Error(ErrorCode::kInvalidInput, "hinge margin beta must be nonnegative and finite");
  }
  if (negatives_per_sample < 1) {
    throw Error(ErrorCode::kInvalidInput, "at least one negative per sample is required");
  }
}

std::vector<Transcript> sample_negatives(const Transcript& positive,
                                         std::span<const Transcript> pool, int k,
                                         SamplingStrategy strategy, int num_actions,
                                         std::mt19937_64& rng) {
  if (k < 1) throw Error(ErrorCode::kInvalidInput, "k must be positive");
  if (positive.actions.empty()) throw Error(ErrorCode::kInvalidInput, "empty positive");

  std::vector<Transcript> out;
  out.reserve(static_cast<std::size_t>(k));
  switch (strategy) {
    case SamplingStrategy::kPool: {
      std::set<Transcript> distinct(pool.begin(), pool.end());
      distinct.erase(positive);
      std::erase_if(distinct, [](const Transcript& t) { return t.actions.empty(); });
      if (distinct.empty()) {
        throw Error(ErrorCode::kEmptyPool, "pool has no transcript other than the positive");
      }
      const std::vector<Transcript> candidates(distinct.begin(), distinct.end());
      std::uniform_int_distribution<std::size_t> pick(0, candidates.size() - 1);
      for (int n = 0; n < k; ++n) out.push_back(candidates[pick(rng)]);
      break;
    }
    case SamplingStrategy::kShuffle: {
      const auto& a = positive.actions;
      if (std::adjacent_find(a.begin(), a.end(), std::not_equal_to<>()) == a.end()) {
        throw Error(ErrorCode::kDegeneratePositive,
                    "every permutation of a single repeated action equals the positive");
      }
      for (int n = 0; n < k; ++n) {
        Transcript t = positive;
        do {
          std::shuffle(t.actions.begin(), t.actions.end(), rng);
        } while (t == positive);
        out.push_back(std::move(t));
      }
      break;
    }
    case SamplingStrategy::kRandomWalk: {
      if (num_actions < 1) throw Error(ErrorCode::kInvalidInput, "empty vocabulary");
      if (num_actions == 1) {
        throw Error(ErrorCode::kDegeneratePositive,
                    "a one-action vocabulary cannot produce a different sequence");
      }
      std::uniform_int_distribution<ActionId> pick(0, num_actions - 1);
      for (int n = 0; n < k; ++n) {
        Transcript t;
        t.actions.resize(positive.size());
        do {
          for (ActionId& x : t.actions) x = pick(rng);
        } while (t == positive);
        out.push_back(std::move(t));
      }
      break;
    }
  }
  return out;
}

std::vector<Transcript> sample_negatives(const Transcript& positive,
                                         std::span<const Transcript> pool, int k,
                                         SamplingStrategy strategy, int num_actions,
                                         std::uint64_t rng_seed) {
  std::mt19937_64 rng(rng_seed);
  return sample_negatives(positive, pool, k, strategy, num_actions, rng);
}

LossResult d3tw_loss(const Matrix& delta_pos, std::span<const Matrix> delta_negs,
                     const LossConfig& config) {
  config.validate();
  for (const Matrix& d : delta_negs) {
    if (d.cols() != delta_pos.cols()) {
      throw Error(ErrorCode::kInvalidInput, "negative distance matrix has a different frame count");
    }
  }

  ForwardResult pos = forward_cost(delta_pos, config.gamma);
  if (pos.cost == kInf) {
    throw Error(ErrorCode::kInvalidPositive, "positive transcript has no feasible alignment");
  }

  LossResult result;
  result.positive_cost = pos.cost;
  result.positive_alignment = backward_gradient(pos.cache);
  result.grad_pos = Matrix::Zero(delta_pos.rows(), delta_pos.cols());

  const bool literal = config.hinge_variant == HingeVariant::kPaperLiteral;
  const double flat = literal ? config.beta : 0.0;
  int active_count = 0;
  for (const Matrix& delta_neg : delta_negs) {
    ForwardResult neg = forward_cost(delta_neg, config.gamma);
    result.negative_costs.push_back(neg.cost);
    if (neg.cost == kInf) {
      result.value += flat;
      result.active_mask.push_back(false);
      result.grad_negs.push_back(Matrix::Zero(delta_neg.rows(), delta_neg.cols()));
      continue;
    }
    const double diff = pos.cost - neg.cost;
    const double arg = literal ? diff : diff + config.beta;
    result.kink_distance = std::min(result.kink_distance, std::abs(arg - flat));
    // Exactly at the kink the flat branch is the subgradient.
    const bool active = arg > flat;
    result.active_mask.push_back(active);
    if (active) {
      result.value += arg;
      result.grad_negs.push_back(-backward_gradient(neg.cache));
      ++active_count;
    } else {
      result.value += flat;
      result.grad_negs.push_back(Matrix::Zero(delta_neg.rows(), delta_neg.cols()));
    }
  }
  result.grad_pos = static_cast<double>(active_count) * result.positive_alignment;
  return result;
}

GenerativeResult generative_loss(const Matrix& delta_pos, double gamma) {
  if (!(gamma > 0.0)) {
    throw Error(ErrorCode::kInvalidInput, "generative loss needs gamma > 0");
  }
  ForwardResult fwd = forward_cost(delta_pos, gamma);
  if (fwd.cost == kInf) {
    throw Error(ErrorCode::kInvalidPositive, "positive transcript has no feasible alignment");
  }
  return {fwd.cost, backward_gradient(fwd.cache)};
}

}  // namespace d3tw

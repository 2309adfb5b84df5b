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

// Discriminative hinge loss over relaxed alignment costs, and the
// non-discriminative (generative) ablation.

#ifndef D3TW_LOSS_H_
#define D3TW_LOSS_H_

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "d3tw/matrix.h"
#include "d3tw/transcript.h"

namespace d3tw {

enum class HingeVariant {
  // max(d, beta): the loss is floored at beta.
  kPaperLiteral,
  // max(d + beta, 0).
  kStandardMargin,
};

enum class SamplingStrategy {
  kPool,        // distinct members of a transcript pool
  kShuffle,     // permutations of the positive
  kRandomWalk,  // uniform random sequences of the positive's length
};

struct LossConfig {
  double gamma = 1.0;
  double beta = 0.0;
  int negatives_per_sample = 1;
  HingeVariant hinge_variant = HingeVariant::kPaperLiteral;
  SamplingStrategy sampling_strategy = SamplingStrategy::kPool;

  // Throws kInvalidInput on gamma <= 0, beta < 0 or no negatives.
  void validate() const;
};

struct LossResult {
  double value = 0.0;
  Matrix grad_pos;
  std::vector<Matrix> grad_negs;
  std::vector<bool> active_mask;

  double positive_cost = 0.0;
  std::vector<double> negative_costs;
  // E[Y+], independent of how many terms are active.
  Matrix positive_alignment;
  // Smallest |argument - kink| over all terms; +inf when there are none.
  double kink_distance = kInf;
};

// Draws `k` transcripts that differ from `positive`. `num_actions` bounds the
// ids produced by kRandomWalk. Throws kEmptyPool if the pool has no usable
// member, kDegeneratePositive if shuffling or a single-action vocabulary
// cannot produce a different sequence.
std::vector<Transcript> sample_negatives(const Transcript& positive,
                                         std::span<const Transcript> pool, int k,
                                         SamplingStrategy strategy, int num_actions,
                                         std::mt19937_64& rng);
std::vector<Transcript> sample_negatives(const Transcript& positive,
                                         std::span<const Transcript> pool, int k,
                                         SamplingStrategy strategy, int num_actions,
                                         std::uint64_t rng_seed);

// Sum over negatives of hinge(psi(delta_pos) - psi(delta_neg)). All
// matrices share T. Throws kInvalidPositive when psi(delta_pos) is infinite;
// infeasible negatives sit on the flat branch.
LossResult d3tw_loss(const Matrix& delta_pos, std::span<const Matrix> delta_negs,
                     const LossConfig& config);

struct GenerativeResult {
  double value;
  Matrix grad;
};

// psi_gamma(delta_pos) and its expected alignment.
GenerativeResult generative_loss(const Matrix& delta_pos, double gamma);

}  // namespace d3tw

#endif  // D3TW_LOSS_H_

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

// Frame classifier, emission distances and the weakly supervised training
// step.
//
// Shapes: features are T x dim, posteriors and logits are T x A, distance
// matrices are L x T. The classifier is a per-frame linear map followed by a
// softmax; anything that can map d loss / d logits back to its parameters can
// stand in for it, since logit_gradient does not depend on the classifier.

#ifndef D3TW_MODEL_H_
#define D3TW_MODEL_H_

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "d3tw/loss.h"
#include "d3tw/matrix.h"
#include "d3tw/soft_dtw.h"
#include "d3tw/transcript.h"

namespace d3tw {

inline constexpr double kPosteriorFloor = 1e-12;

// Running estimate of p(k) from accumulated per-class frame mass.
struct ClassPrior {
  Vector probs;
  Vector counts;

  static ClassPrior uniform(int num_actions);
  int num_actions() const { return static_cast<int>(probs.size()); }
};

struct AdamState {
  Matrix m_weights;
  Matrix v_weights;
  Vector m_bias;
  Vector v_bias;
  std::int64_t step = 0;
};

struct ModelParams {
  Matrix weights;  // dim x A
  Vector bias;     // A
  AdamState optimizer;

  // Weights drawn from N(0, init_scale^2), zero bias, zeroed optimizer.
  static ModelParams init(int feature_dim, int num_actions, std::uint64_t seed,
                          double init_scale = 0.01);
  int feature_dim() const { return static_cast<int>(weights.rows()); }
  int num_actions() const { return static_cast<int>(weights.cols()); }
};

struct ParamGradient {
  Matrix weights;
  Vector bias;
};

Matrix logits(const Matrix& features, const ModelParams& params);

// Row-wise softmax of the logits, shifted by each row's max.
Matrix forward(const Matrix& features, const ModelParams& params);

// delta(i, j) = -log(max(p(l_i | x_j), epsilon)) + log p(l_i).
Matrix emission_distance(const Matrix& posteriors, const ClassPrior& prior,
                         const Transcript& transcript, double epsilon = kPosteriorFloor);

// Adds the expected frame mass per class (row sums of `soft_alignment`
// mapped through the transcript) to the counters and renormalizes with
// additive smoothing `alpha` per class.
ClassPrior update_prior(const ClassPrior& prior, const Matrix& soft_alignment,
                        const Transcript& transcript, double alpha = 1.0);

// d loss / d delta for one transcript.
struct DistanceGradient {
  const Transcript* transcript;
  Matrix grad;  // L x T
};

// d loss / d logits (T x A) through the log-softmax, with the posterior clamp
// treated as a stop-gradient.
Matrix logit_gradient(const Matrix& posteriors, std::span<const DistanceGradient> terms,
                      double epsilon = kPosteriorFloor);

ParamGradient backprop_to_params(const Matrix& features, const Matrix& posteriors,
                                 std::span<const DistanceGradient> terms,
                                 const ClassPrior& prior, const ModelParams& params,
                                 double epsilon = kPosteriorFloor);

enum class Objective { kD3tw, kGenerative };

struct TrainConfig {
  LossConfig loss;
  Objective objective = Objective::kD3tw;
  double learning_rate = 1e-2;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  double prior_smoothing = 1.0;
  double posterior_floor = kPosteriorFloor;
  // Attempts per negative before giving up on finding one with L <= T.
  int resample_cap = 100;

  void validate() const;
};

struct TrainExample {
  const Matrix* features = nullptr;
  const Transcript* transcript = nullptr;
  // Optional frame annotations, applied to the positive only.
  const PathConstraint* constraint = nullptr;
};

struct SequenceLoss {
  double value = 0.0;
  ParamGradient grad;
  Matrix positive_alignment;
  double kink_distance = kInf;
};

// Full pipeline for one sequence with fixed negatives: features ->
// posteriors -> distances -> loss, and its gradient in the parameters.
SequenceLoss sequence_loss(const TrainExample& example, std::span<const Transcript> negatives,
                           const ClassPrior& prior, const ModelParams& params,
                           const TrainConfig& config);

// One adaptive-moment step on `params`.
void adam_update(ModelParams& params, const ParamGradient& grad, const TrainConfig& config);

struct StepResult {
  double loss = 0.0;  // mean over the batch
};

// Samples negatives from `negative_pool`, averages the sequence losses and
// gradients over the batch in order, takes one optimizer step and then
// folds the positive alignments into the prior. Throws kSamplingFailure if
// no negative with L <= T is found within the retry cap.
StepResult train_step(std::span<const TrainExample> batch, ModelParams& params,
                      ClassPrior& prior, const TrainConfig& config,
                      std::span<const Transcript> negative_pool, std::mt19937_64& rng);

}  // namespace d3tw

#endif  // D3TW_MODEL_H_

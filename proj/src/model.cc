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

#include "d3tw/model.h"

#include <cmath>
#include <string>

#include "d3tw/error.h"

namespace d3tw {
namespace {

void check_posteriors(const Matrix& posteriors, int num_actions) {
  if (posteriors.rows() < 1 || posteriors.cols() != num_actions) {
    throw Error(ErrorCode::kInvalidInput,
                "posteriors must be T x " + std::to_string(num_actions));
  }
}

}  // namespace

ClassPrior ClassPrior::uniform(int num_actions) {
  if (num_actions < 1) throw Error(ErrorCode::kInvalidInput, "empty vocabulary");
  ClassPrior prior;
  prior.probs = Vector::Constant(num_actions, 1.0 / num_actions);
  prior.counts = Vector::Zero(num_actions);
  return prior;
}

ModelParams ModelParams::init(int feature_dim, int num_actions, std::uint64_t seed,
                              double init_scale) {
  if (feature_dim < 1 || num_actions < 1) {
    throw Error(ErrorCode::kInvalidInput, "feature dim and class count must be positive");
  }
  ModelParams params;
  params.weights = Matrix::Zero(feature_dim, num_actions);
  if (init_scale > 0.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, init_scale);
    for (Eigen::Index r = 0; r < params.weights.rows(); ++r) {
      for (Eigen::Index c = 0; c < params.weights.cols(); ++c) params.weights(r, c) = noise(rng);
    }
  }
  params.bias = Vector::Zero(num_actions);
  params.optimizer.m_weights = Matrix::Zero(feature_dim, num_actions);
  params.optimizer.v_weights = Matrix::Zero(feature_dim, num_actions);
  params.optimizer.m_bias = Vector::Zero(num_actions);
  params.optimizer.v_bias = Vector::Zero(num_actions);
  return params;
}

Matrix logits(const Matrix& features, const ModelParams& params) {
  if (features.rows() < 1 || features.cols() != params.weights.rows()) {
    throw Error(ErrorCode::kInvalidInput,
                "features have dim " + std::to_string(features.cols()) + ", model expects " +
                    std::to_string(params.weights.rows()));
  }
  if (params.bias.size() != params.weights.cols()) {
    throw Error(ErrorCode::kInvalidInput, "bias does not match the class count");
  }
  Matrix z = features * params.weights;
  z.rowwise() += params.bias.transpose();
  return z;
}

Matrix forward(const Matrix& features, const ModelParams& params) {
  Matrix z = logits(features, params);
  for (Eigen::Index t = 0; t < z.rows(); ++t) {
    auto row = z.row(t);
    row.array() -= row.maxCoeff();
    row = row.array().exp().matrix();
    row /= row.sum();
  }
  return z;
}

Matrix emission_distance(const Matrix& posteriors, const ClassPrior& prior,
                         const Transcript& transcript, double epsilon) {
  check_posteriors(posteriors, prior.num_actions());
  validate_transcript(transcript, prior.num_actions());
  if (!(epsilon > 0.0)) throw Error(ErrorCode::kInvalidInput, "epsilon must be positive");
  const Eigen::Index L = static_cast<Eigen::Index>(transcript.size());
  const Eigen::Index T = posteriors.rows();
  Matrix delta(L, T);
  for (Eigen::Index i = 0; i < L; ++i) {
    const ActionId k = transcript[static_cast<std::size_t>(i)];
    const double p_k = prior.probs(k);
    if (!(p_k > 0.0)) throw Error(ErrorCode::kInvalidInput, "class prior must be positive");
    const double log_prior = std::log(p_k);
    for (Eigen::Index j = 0; j < T; ++j) {
      delta(i, j) = -std::log(std::max(posteriors(j, k), epsilon)) + log_prior;
    }
  }
  return delta;
}

ClassPrior update_prior(const ClassPrior& prior, const Matrix& soft_alignment,
                        const Transcript& transcript, double alpha) {
  validate_transcript(transcript, prior.num_actions());
  if (soft_alignment.rows() != static_cast<Eigen::Index>(transcript.size())) {
    throw Error(ErrorCode::kInvalidInput, "soft alignment rows do not match the transcript");
  }
  if (!(alpha >= 0.0)) throw Error(ErrorCode::kInvalidInput, "smoothing must be nonnegative");
  ClassPrior next = prior;
  for (Eigen::Index i = 0; i < soft_alignment.rows(); ++i) {
    next.counts(transcript[static_cast<std::size_t>(i)]) += soft_alignment.row(i).sum();
  }
  const double total = next.counts.sum() + alpha * next.num_actions();
  next.probs = (next.counts.array() + alpha) / total;
  if (!(total > 0.0) || !(next.probs.minCoeff() > 0.0)) {
    throw Error(ErrorCode::kInvalidInput, "prior update produced a non-positive class prior");
  }
  return next;
}

Matrix logit_gradient(const Matrix& posteriors, std::span<const DistanceGradient> terms,
                      double epsilon) {
  Matrix dz = Matrix::Zero(posteriors.rows(), posteriors.cols());
  for (const DistanceGradient& term : terms) {
    const Transcript& transcript = *term.transcript;
    if (term.grad.rows() != static_cast<Eigen::Index>(transcript.size()) ||
        term.grad.cols() != posteriors.rows()) {
      throw Error(ErrorCode::kInvalidInput, "distance gradient shape mismatch");
    }
    // d delta(i, j) / d z(j, k) = p(k | x_j) - [k == l_i].
    for (Eigen::Index i = 0; i < term.grad.rows(); ++i) {
      const ActionId label = transcript[static_cast<std::size_t>(i)];
      for (Eigen::Index j = 0; j < term.grad.cols(); ++j) {
        const double g = term.grad(i, j);
        if (g == 0.0 || posteriors(j, label) < epsilon) continue;
        dz.row(j) += g * posteriors.row(j);
        dz(j, label) -= g;
      }
    }
  }
  return dz;
}

ParamGradient backprop_to_params(const Matrix& features, const Matrix& posteriors,
                                 std::span<const DistanceGradient> terms,
                                 const ClassPrior& prior, const ModelParams& params,
                                 double epsilon) {
  check_posteriors(posteriors, params.num_actions());
  if (prior.num_actions() != params.num_actions()) {
    throw Error(ErrorCode::kInvalidInput, "prior and model disagree on the class count");
  }
  if (features.rows() != posteriors.rows() || features.cols() != params.feature_dim()) {
    throw Error(ErrorCode::kInvalidInput, "features do not match posteriors or model");
  }
  const Matrix dz = logit_gradient(posteriors, terms, epsilon);
  ParamGradient grad;
  grad.weights = features.transpose() * dz;
  grad.bias = dz.colwise().sum().transpose();
  return grad;
}

void TrainConfig::validate() const {
  loss.validate();
  if (!(learning_rate >= 0.0) || std::isinf(learning_rate)) {
    throw Error(ErrorCode::kInvalidInput, "learning rate must be nonnegative and finite");
  }
  if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0) || !(adam_beta2 >= 0.0 && adam_beta2 < 1.0)) {
    throw Error(ErrorCode::kInvalidInput, "moment decay rates must lie in [0, 1)");
  }
  if (!(adam_epsilon > 0.0) || !(posterior_floor > 0.0)) {
    throw Error(ErrorCode::kInvalidInput, "epsilons must be positive");
  }
  if (!(prior_smoothing >= 0.0)) {
    throw Error(ErrorCode::kInvalidInput, "prior smoothing must be nonnegative");
  }
  if (resample_cap < 1) throw Error(ErrorCode::kInvalidInput, "resample cap must be positive");
}

SequenceLoss sequence_loss(const TrainExample& example, std::span<const Transcript> negatives,
                           const ClassPrior& prior, const ModelParams& params,
                           const TrainConfig& config) {
  const Matrix& features = *example.features;
  const Transcript& positive = *example.transcript;
  const Matrix posteriors = forward(features, params);
  Matrix delta_pos = emission_distance(posteriors, prior, positive, config.posterior_floor);
  if (example.constraint != nullptr && !example.constraint->empty()) {
    delta_pos = apply_constraint(delta_pos, *example.constraint);
  }

  SequenceLoss out;
  std::vector<DistanceGradient> terms;
  if (config.objective == Objective::kGenerative) {
    GenerativeResult g = generative_loss(delta_pos, config.loss.gamma);
    out.value = g.value;
    out.positive_alignment = g.grad;
    terms.push_back({&positive, std::move(g.grad)});
  } else {
    std::vector<Matrix> delta_negs;
    delta_negs.reserve(negatives.size());
    for (const Transcript& neg : negatives) {
      delta_negs.push_back(emission_distance(posteriors, prior, neg, config.posterior_floor));
    }
    LossResult r = d3tw_loss(delta_pos, delta_negs, config.loss);
    out.value = r.value;
    out.kink_distance = r.kink_distance;
    out.positive_alignment = std::move(r.positive_alignment);
    terms.push_back({&positive, std::move(r.grad_pos)});
    for (std::size_t n = 0; n < negatives.size(); ++n) {
      terms.push_back({&negatives[n], std::move(r.grad_negs[n])});
    }
  }
  out.grad = backprop_to_params(features, posteriors, terms, prior, params,
                                config.posterior_floor);
  return out;
}

void adam_update(ModelParams& params, const ParamGradient& grad, const TrainConfig& config) {
  AdamState& s = params.optimizer;
  const double b1 = config.adam_beta1;
  const double b2 = config.adam_beta2;
  s.step += 1;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(s.step));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(s.step));
  const double lr = config.learning_rate;
  const double eps = config.adam_epsilon;

  s.m_weights = b1 * s.m_weights + (1.0 - b1) * grad.weights;
  s.v_weights = b2 * s.v_weights + (1.0 - b2) * grad.weights.cwiseAbs2();
  s.m_bias = b1 * s.m_bias + (1.0 - b1) * grad.bias;
  s.v_bias = b2 * s.v_bias + (1.0 - b2) * grad.bias.cwiseAbs2();

  params.weights.array() -=
      lr * (s.m_weights.array() / c1) / ((s.v_weights.array() / c2).sqrt() + eps);
  params.bias.array() -= lr * (s.m_bias.array() / c1) / ((s.v_bias.array() / c2).sqrt() + eps);
}

StepResult train_step(std::span<const TrainExample> batch, ModelParams& params,
                      ClassPrior& prior, const TrainConfig& config,
                      std::span<const Transcript> negative_pool, std::mt19937_64& rng) {
  config.validate();
  if (batch.empty()) throw Error(ErrorCode::kInvalidInput, "empty batch");

  ParamGradient total{Matrix::Zero(params.weights.rows(), params.weights.cols()),
                      Vector::Zero(params.bias.size())};
  StepResult result;
  std::vector<Matrix> alignments;
  alignments.reserve(batch.size());
  const double scale = 1.0 / static_cast<double>(batch.size());

  for (const TrainExample& example : batch) {
    const std::size_t num_frames = static_cast<std::size_t>(example.features->rows());
    std::vector<Transcript> negatives;
    if (config.objective == Objective::kD3tw) {
      for (int n = 0; n < config.loss.negatives_per_sample; ++n) {
        bool found = false;
        for (int attempt = 0; attempt < config.resample_cap && !found; ++attempt) {
          std::vector<Transcript> draw =
              sample_negatives(*example.transcript, negative_pool, 1,
                               config.loss.sampling_strategy, params.num_actions(), rng);
          if (draw.front().size() <= num_frames) {
            negatives.push_back(std::move(draw.front()));
            found = true;
          }
        }
        if (!found) {
          throw Error(ErrorCode::kSamplingFailure,
                      "no negative transcript fits " + std::to_string(num_frames) +
                          " frames within " + std::to_string(config.resample_cap) + " draws");
        }
      }
    }
    SequenceLoss sl = sequence_loss(example, negatives, prior, params, config);
    result.loss += scale * sl.value;
    total.weights += scale * sl.grad.weights;
    total.bias += scale * sl.grad.bias;
    alignments.push_back(std::move(sl.positive_alignment));
  }

  adam_update(params, total, config);
  for (std::size_t b = 0; b < batch.size(); ++b) {
    prior = update_prior(prior, alignments[b], *batch[b].transcript, config.prior_smoothing);
  }
  return result;
}

}  // namespace d3tw

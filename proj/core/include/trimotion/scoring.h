// Copyright 2026 The trimotion Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef TRIMOTION_SCORING_H_
#define TRIMOTION_SCORING_H_

#include <cstddef>
#include <span>
#include <vector>

#include <torch/torch.h>

#include "trimotion/kinematics.h"

namespace trimotion {

// Learnable mixing weights of the two heuristic scores.
struct ScoreWeights {
  double w_alpha = 0.5;
  double w_beta = 0.5;
};

// Per-candidate heuristic scores for one agent. Indices are 0-based.
struct CandidateScores {
  std::vector<double> dc;        // directional consistency, in [-1, 1]
  std::vector<double> sim;       // acceleration similarity, >= 0, lower is better
  std::vector<double> combined;  // learnable combination, argmax wins
  std::size_t selected_index = 0;
};

namespace scoring {

// Cosine between the historical global velocity and the first predicted
// velocity. Zero-norm inputs (stationary agents) score 0.
double directional_consistency(const Vec2& v_global, const Vec2& first_pred_vel);

// Distance between the (mean, population std) of acceleration magnitudes.
double accel_similarity(const AccelSeq& hist_accel, const AccelSeq& pred_accel);

// w_alpha * softmax(dc) + w_beta * softmax(-sim). Sim is negated so that the
// more similar (smaller) candidate scores higher.
std::vector<double> combined_scores(std::span<const double> dc, std::span<const double> sim,
                                    const ScoreWeights& w);

// Index of the maximum; ties go to the lowest index.
std::size_t select_best(std::span<const double> scores);

// Scores K velocity/acceleration candidate pairs of one agent against its
// observed positions (at least 3).
CandidateScores score_candidates(const PositionSeq& observed,
                                 const std::vector<VelocitySeq>& velocities,
                                 const std::vector<AccelSeq>& accels, const ScoreWeights& w);

// Batched versions. The heuristics are evaluations only: DC and Sim are
// computed on detached inputs and carry no gradient. Shapes: v_global [M, 2], first_vel [M, K, 2] -> [M, K];
// hist_accel [M, L, 2], pred_accel [M, K, T', 2] -> [M, K];
// dc, sim [M, K] with scalar weight tensors -> [M, K].
torch::Tensor directional_consistency(const torch::Tensor& v_global,
                                      const torch::Tensor& first_vel);
torch::Tensor accel_similarity(const torch::Tensor& hist_accel, const torch::Tensor& pred_accel);
torch::Tensor combined_scores(const torch::Tensor& dc, const torch::Tensor& sim,
                              const torch::Tensor& w_alpha, const torch::Tensor& w_beta);
// Row-wise argmax over the last dim, lowest index on ties -> int64 [M].
torch::Tensor select_best(const torch::Tensor& scores);

}  // namespace scoring
}  // namespace trimotion

#endif  // TRIMOTION_SCORING_H_

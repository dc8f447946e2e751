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

#ifndef TRIMOTION_LOSSES_H_
#define TRIMOTION_LOSSES_H_

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>

#include <torch/torch.h>

namespace trimotion {

enum class PositionLossMode {
  kTolerance,  // tolerance-interval DIFF over all K plus candidate variance
  kMseBestOfK, // plain MSE on the candidate closest to the ground truth
};

enum class VaSelection {
  kHeuristic,  // largest DC for velocity, smallest Sim for acceleration
  kOracle,     // candidate with the lowest loss against the ground truth
};

struct LossConfig {
  double epsilon = 0.05;  // tolerance margin, position units
  double alpha = 0.2;
  double beta = 0.8;
  double lambda = 0.1;
  double huber_delta = 1.0;
  bool enable_pos = true;
  bool enable_va = true;
  bool enable_cons1 = true;
  bool enable_cons2 = true;
  PositionLossMode pos_mode = PositionLossMode::kTolerance;
  VaSelection va_selection = VaSelection::kHeuristic;

  // Throws InvalidInput on a negative epsilon, non-positive weights, or when
  // every term is disabled.
  void validate() const;
};

struct LossReport {
  double pos = 0.0;
  double va = 0.0;
  double cons1 = 0.0;
  double cons2 = 0.0;
  double total = 0.0;
};

// One line-delimited training log record:
// {"step":N,"pos":..,"va":..,"cons1":..,"cons2":..,"total":..}
std::string to_log_line(int64_t step, const LossReport& r);
// Throws DataError when the line is not a loss record.
std::pair<int64_t, LossReport> parse_log_line(std::string_view line);

namespace losses {

// Three-branch tolerance error: 0 inside [gt - eps, gt + eps], distance to
// the nearer interval edge outside it.
double diff_tolerance(double pred, double gt, double epsilon);
torch::Tensor diff_tolerance(const torch::Tensor& pred, const torch::Tensor& gt, double epsilon);

// preds [M, K, T', 2], gt [M, T', 2].
// mean_i [ alpha * sum_k mean_{t,c} DIFF + beta * mean_{t,c} Var_k ].
torch::Tensor position_loss(const torch::Tensor& preds, const torch::Tensor& gt,
                            const LossConfig& cfg);
torch::Tensor mse_best_of_k_loss(const torch::Tensor& preds, const torch::Tensor& gt);

// Mean elementwise Huber on velocity plus the same on acceleration.
// All inputs [M, T', 2].
torch::Tensor va_loss(const torch::Tensor& sel_vel, const torch::Tensor& gt_vel,
                      const torch::Tensor& sel_acc, const torch::Tensor& gt_acc,
                      const LossConfig& cfg);

// MSE between the pseudo acceleration of each velocity candidate and the
// acceleration candidate sharing its index, averaged over agents and K.
// pred_vels, pred_accs [M, K, T', 2]; last_obs_vel [M, 2].
torch::Tensor cons1_loss(const torch::Tensor& pred_vels, const torch::Tensor& pred_accs,
                         const torch::Tensor& last_obs_vel);

// Per-row cross-entropy of softmax(-d) against the one-hot at argmin d.
// distances [M, K] -> [M]. The argmin index carries no gradient.
torch::Tensor consistency_ce(const torch::Tensor& distances);

// Candidate-to-target L2 distance over the flattened (T', 2) sequence.
// candidates [M, K, T', 2], target [M, T', 2] -> [M, K].
torch::Tensor candidate_distances(const torch::Tensor& candidates, const torch::Tensor& target);

// 1/(2M) * sum_i [CE(pseudo velocities vs sel_vel) + CE(pseudo accels vs sel_acc)].
torch::Tensor cons2_loss(const torch::Tensor& pseudo_vels, const torch::Tensor& pseudo_accs,
                         const torch::Tensor& sel_vel, const torch::Tensor& sel_acc);

// pos + va + cons1 + lambda * cons2 over the enabled terms.
template <typename T>
T weighted_total(const T& pos, const T& va, const T& cons1, const T& cons2,
                 const LossConfig& cfg) {
  T total = pos * (cfg.enable_pos ? 1.0 : 0.0);
  total = total + va * (cfg.enable_va ? 1.0 : 0.0);
  total = total + cons1 * (cfg.enable_cons1 ? 1.0 : 0.0);
  total = total + cons2 * (cfg.enable_cons2 ? cfg.lambda : 0.0);
  return total;
}

// Zeroes disabled terms and fills in `total`.
LossReport total_loss(const LossReport& parts, const LossConfig& cfg);

}  // namespace losses
}  // namespace trimotion

#endif  // TRIMOTION_LOSSES_H_

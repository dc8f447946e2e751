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

#ifndef TRIMOTION_TRAINING_H_
#define TRIMOTION_TRAINING_H_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>
#include <torch/torch.h>

#include "trimotion/data.h"
#include "trimotion/losses.h"
#include "trimotion/model.h"

namespace trimotion {

struct DatasetConfig {
  std::filesystem::path manifest;
  // Overrides the manifest's leave-one-out scene when non-empty.
  std::string held_out;
  std::size_t train_stride = 1;
  std::size_t eval_stride = 0;  // 0 means obs_len + pred_len
};

struct TrainConfig {
  double learning_rate = 1e-4;
  int64_t epochs = 500;
  int64_t batch_size = 32;
  uint64_t seed = 0;
  int64_t max_steps = 0;  // 0: no limit beyond epochs
  double grad_clip = 1.0;
  double val_fraction = 0.1;
  bool deterministic = true;  // single intra-op thread
  std::string ablation = "none";
  LossConfig loss;
  ModelConfig model;
  DatasetConfig dataset;
  std::filesystem::path checkpoint_path = "checkpoints/model.pt";
  std::filesystem::path log_path = "train_log.jsonl";

  void validate() const;
};

void to_json(nlohmann::json& j, const TrainConfig& c);
void from_json(const nlohmann::json& j, TrainConfig& c);
void to_json(nlohmann::json& j, const LossConfig& c);
void from_json(const nlohmann::json& j, LossConfig& c);

namespace training {

// Loss terms of one forward pass. Disabled terms are zero tensors.
struct StepLosses {
  torch::Tensor pos;
  torch::Tensor va;
  torch::Tensor cons1;
  torch::Tensor cons2;
  torch::Tensor total;

  LossReport report() const;
};

// Heuristic scores and the selections made from them for one batch, over the
// M unpadded agents in batch order.
struct Selections {
  torch::Tensor dc;             // [M, K]
  torch::Tensor sim;            // [M, K]
  torch::Tensor scores;         // [M, K] combined
  torch::Tensor va_vel_index;   // [M] used by the Huber term
  torch::Tensor va_acc_index;   // [M]
  torch::Tensor shared_index;   // [M] argmax of the combined score
};

// Forward-independent loss computation: scores candidates, selects, and
// evaluates every enabled term.
StepLosses compute_losses(const TrajectoryNet& net, const SceneBatch& batch,
                          const PredictionTensors& out, const LossConfig& cfg,
                          Selections* selections = nullptr);

class Trainer {
 public:
  // Seeds torch, builds the model and the Adam optimizer.
  explicit Trainer(TrainConfig cfg);

  // One forward pass, loss evaluation, clipped Adam update. Throws
  // NumericalError naming the first non-finite term.
  LossReport train_step(std::span<const SceneWindow> batch);

  // Loss of the current parameters without updating them.
  LossReport evaluate_loss(std::span<const SceneWindow> batch);

  TrajectoryNet& model() { return net_; }
  const TrainConfig& config() const { return cfg_; }
  int64_t steps() const { return steps_; }

 private:
  TrainConfig cfg_;
  TrajectoryNet net_{nullptr};
  std::unique_ptr<torch::optim::Adam> optimizer_;
  int64_t steps_ = 0;
};

struct FitResult {
  std::filesystem::path checkpoint;
  double best_val_ade = 0.0;  // NaN when no validation split was held back
  int64_t steps = 0;
  LossReport last;
};

// Trains on `windows`, holding back a seeded validation fraction, logging
// every step to cfg.log_path and checkpointing the best validation min-ADE
// (the final model when the validation split is empty).
FitResult fit(const std::vector<SceneWindow>& windows, const TrainConfig& cfg,
              std::ostream* progress = nullptr);

// Known names: none, no_pos, no_cons1, no_va, no_cons2, no_injection,
// mse_pos, manual_va_select.
std::vector<std::string> ablation_names();
TrainConfig ablation_variant(std::string_view name, TrainConfig base = {});

}  // namespace training
}  // namespace trimotion

#endif  // TRIMOTION_TRAINING_H_

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

#ifndef TRIMOTION_MODEL_H_
#define TRIMOTION_MODEL_H_

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>
#include <torch/torch.h>

#include "trimotion/data.h"
#include "trimotion/kinematics.h"

namespace trimotion {

struct ModelConfig {
  int64_t d_model = 64;
  int64_t n_heads = 4;
  int64_t ff_dim = 256;
  int64_t n_layers_enc = 4;
  int64_t n_layers_dec = 4;
  int64_t k = 20;
  int64_t obs_len = 8;
  int64_t pred_len = 12;
  double dropout = 0.1;
  bool inject_features = true;

  void validate() const;
};

void to_json(nlohmann::json& j, const ModelConfig& c);
void from_json(const nlohmann::json& j, ModelConfig& c);

// Dense, padded view of a batch of windows. Agents of window b occupy rows
// [b, 0, ...] .. [b, n_b - 1, ...]; `mask` is true for real agents.
struct SceneBatch {
  torch::Tensor obs_pos;  // [B, N, T, 2]
  torch::Tensor obs_vel;  // [B, N, T, 2], left-padded
  torch::Tensor obs_acc;  // [B, N, T, 2], left-padded
  torch::Tensor fut_pos;  // [B, N, T', 2]
  torch::Tensor mask;     // [B, N] bool

  int64_t batch_size() const { return obs_pos.size(0); }
  int64_t max_agents() const { return obs_pos.size(1); }
};

// Throws InvalidInput on an empty span or inconsistent window lengths.
SceneBatch collate(std::span<const SceneWindow> windows,
                   torch::ScalarType dtype = torch::kFloat32);

// Raw network outputs, each [B, N, K, T', 2]. Index k is the same decoder
// query slot across the three streams.
struct PredictionTensors {
  torch::Tensor positions;  // absolute coordinates
  torch::Tensor velocities;
  torch::Tensor accels;
};

// Temporal encoder for one stream: linear embedding, fixed sinusoidal time
// encoding, then self-attention over time independently per agent.
class StreamEncoderImpl : public torch::nn::Module {
 public:
  explicit StreamEncoderImpl(const ModelConfig& cfg);
  // seq [S, T, 2] -> [S, T, d_model]. Throws DataError on NaN input.
  torch::Tensor forward(const torch::Tensor& seq);

 private:
  torch::nn::Linear embed_{nullptr};
  torch::nn::TransformerEncoder layers_{nullptr};
  torch::Tensor time_code_;
};
TORCH_MODULE(StreamEncoder);

// Cross-attention where the injected (higher-order) stream queries the
// target stream; the result is residual-added to the target.
class FeatureInjectionImpl : public torch::nn::Module {
 public:
  explicit FeatureInjectionImpl(const ModelConfig& cfg);
  // target, source [S, T, d] -> [S, T, d].
  torch::Tensor forward(const torch::Tensor& target, const torch::Tensor& source);

  torch::nn::MultiheadAttention& attention() { return attn_; }

 private:
  torch::nn::MultiheadAttention attn_{nullptr};
};
TORCH_MODULE(FeatureInjection);

// K learnable queries; each is added to every agent's pooled feature and the
// resulting per-scene sequence runs through self-attention over agents.
class SocialDecoderImpl : public torch::nn::Module {
 public:
  explicit SocialDecoderImpl(const ModelConfig& cfg);
  // agent_features [B, N, d], mask [B, N] -> [B, N, K, T', 2].
  torch::Tensor forward(const torch::Tensor& agent_features, const torch::Tensor& mask);

 private:
  int64_t k_;
  int64_t pred_len_;
  torch::Tensor queries_;
  torch::nn::TransformerEncoder layers_{nullptr};
  torch::nn::Linear head_{nullptr};
};
TORCH_MODULE(SocialDecoder);

class TrajectoryNetImpl : public torch::nn::Module {
 public:
  explicit TrajectoryNetImpl(const ModelConfig& cfg);

  PredictionTensors forward(const SceneBatch& batch);

  // Per-stream encoder features for the batch, after injection. [B*N, T, d].
  struct StreamFeatures {
    torch::Tensor pos;
    torch::Tensor vel;
    torch::Tensor acc;
  };
  StreamFeatures encode(const SceneBatch& batch);

  const ModelConfig& config() const { return cfg_; }
  const torch::Tensor& w_alpha() const { return w_alpha_; }
  const torch::Tensor& w_beta() const { return w_beta_; }

  StreamEncoder pos_encoder{nullptr}, vel_encoder{nullptr}, acc_encoder{nullptr};
  FeatureInjection inject_pos{nullptr}, inject_vel{nullptr};
  SocialDecoder pos_decoder{nullptr}, vel_decoder{nullptr}, acc_decoder{nullptr};

 private:
  ModelConfig cfg_;
  torch::Tensor w_alpha_;
  torch::Tensor w_beta_;
};
TORCH_MODULE(TrajectoryNet);

// K candidate triples for every agent of one window.
struct AgentPrediction {
  std::vector<PositionSeq> positions;
  std::vector<VelocitySeq> velocities;
  std::vector<AccelSeq> accels;
};

struct PredictionSet {
  std::vector<AgentPrediction> agents;
};

// Runs the network in inference mode over `windows`, batch by batch.
std::vector<PredictionSet> predict(TrajectoryNet& net, const std::vector<SceneWindow>& windows,
                                   std::size_t batch_size = 32);

// Checkpoint archive: every parameter and buffer under its hierarchical name,
// plus `schema_version` and the JSON-encoded ModelConfig.
inline constexpr int64_t kCheckpointSchemaVersion = 1;
void save_checkpoint(TrajectoryNet& net, const std::filesystem::path& path);
TrajectoryNet load_checkpoint(const std::filesystem::path& path);
ModelConfig read_checkpoint_config(const std::filesystem::path& path);

}  // namespace trimotion

#endif  // TRIMOTION_MODEL_H_

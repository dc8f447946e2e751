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

#include "trimotion/model.h"

#include <cmath>
#include <string>

#include "trimotion/errors.h"

namespace trimotion {
namespace {

torch::Tensor sinusoid_table(int64_t length, int64_t d_model) {
  torch::Tensor table = torch::zeros({length, d_model});
  auto acc = table.accessor<float, 2>();
  for (int64_t t = 0; t < length; ++t) {
    for (int64_t i = 0; i < d_model; ++i) {
      const double rate = std::pow(10000.0, -static_cast<double>(2 * (i / 2)) / d_model);
      acc[t][i] = static_cast<float>(i % 2 == 0 ? std::sin(t * rate) : std::cos(t * rate));
    }
  }
  return table;
}

torch::nn::TransformerEncoder make_stack(const ModelConfig& cfg, int64_t n_layers) {
  torch::nn::TransformerEncoderLayerOptions layer(cfg.d_model, cfg.n_heads);
  layer.dim_feedforward(cfg.ff_dim).dropout(cfg.dropout);
  return torch::nn::TransformerEncoder(torch::nn::TransformerEncoderOptions(layer, n_layers));
}

// Activations are checked in debug builds only.
void debug_check_finite([[maybe_unused]] const torch::Tensor& t,
                        [[maybe_unused]] const char* what) {
#ifndef NDEBUG
  if (!torch::isfinite(t).all().item<bool>()) {
    throw NumericalError(std::string("non-finite activation in ") + what);
  }
#endif
}

}  // namespace

void ModelConfig::validate() const {
  if (d_model <= 0 || n_heads <= 0 || d_model % n_heads != 0) {
    throw InvalidInput("model config: d_model must be a positive multiple of n_heads");
  }
  if (n_layers_enc != 4 || n_layers_dec != 4) {
    throw InvalidInput("model config: encoder and decoder use exactly 4 layers");
  }
  if (k < 1) throw InvalidInput("model config: k must be >= 1");
  if (obs_len < 3 || pred_len < 1) {
    throw InvalidInput("model config: need obs_len >= 3 and pred_len >= 1");
  }
  if (ff_dim <= 0 || dropout < 0.0 || dropout >= 1.0) {
    throw InvalidInput("model config: ff_dim must be positive and dropout in [0, 1)");
  }
}

void to_json(nlohmann::json& j, const ModelConfig& c) {
  j = nlohmann::json{{"d_model", c.d_model},       {"n_heads", c.n_heads},
                     {"ff_dim", c.ff_dim},         {"n_layers_enc", c.n_layers_enc},
                     {"n_layers_dec", c.n_layers_dec}, {"k", c.k},
                     {"obs_len", c.obs_len},       {"pred_len", c.pred_len},
                     {"dropout", c.dropout},       {"inject_features", c.inject_features}};
}

void from_json(const nlohmann::json& j, ModelConfig& c) {
  ModelConfig d;
  c.d_model = j.value("d_model", d.d_model);
  c.n_heads = j.value("n_heads", d.n_heads);
  c.ff_dim = j.value("ff_dim", d.ff_dim);
  c.n_layers_enc = j.value("n_layers_enc", d.n_layers_enc);
  c.n_layers_dec = j.value("n_layers_dec", d.n_layers_dec);
  c.k = j.value("k", d.k);
  c.obs_len = j.value("obs_len", d.obs_len);
  c.pred_len = j.value("pred_len", d.pred_len);
  c.dropout = j.value("dropout", d.dropout);
  c.inject_features = j.value("inject_features", d.inject_features);
}

SceneBatch collate(std::span<const SceneWindow> windows, torch::ScalarType dtype) {
  if (windows.empty()) throw InvalidInput("collate: empty batch");
  const int64_t b = static_cast<int64_t>(windows.size());
  const int64_t t_obs = static_cast<int64_t>(windows.front().obs_len());
  const int64_t t_fut = static_cast<int64_t>(windows.front().pred_len());
  int64_t n = 0;
  for (const SceneWindow& w : windows) {
    if (w.num_agents() == 0) throw InvalidInput("collate: window without agents");
    if (static_cast<int64_t>(w.obs_len()) != t_obs ||
        static_cast<int64_t>(w.pred_len()) != t_fut) {
      throw InvalidInput("collate: windows disagree on observed/predicted length");
    }
    n = std::max(n, static_cast<int64_t>(w.num_agents()));
  }

  auto opts = torch::TensorOptions().dtype(torch::kFloat64);
  torch::Tensor pos = torch::zeros({b, n, t_obs, 2}, opts);
  torch::Tensor vel = torch::zeros({b, n, t_obs, 2}, opts);
  torch::Tensor acc = torch::zeros({b, n, t_obs, 2}, opts);
  torch::Tensor fut = torch::zeros({b, n, t_fut, 2}, opts);
  torch::Tensor mask = torch::zeros({b, n}, torch::TensorOptions().dtype(torch::kBool));
  auto pa = pos.accessor<double, 4>();
  auto va = vel.accessor<double, 4>();
  auto aa = acc.accessor<double, 4>();
  auto fa = fut.accessor<double, 4>();
  auto ma = mask.accessor<bool, 2>();
  for (int64_t i = 0; i < b; ++i) {
    const SceneWindow& w = windows[static_cast<std::size_t>(i)];
    for (std::size_t a = 0; a < w.num_agents(); ++a) {
      const KinematicTriple& o = w.observed[a];
      if (static_cast<int64_t>(o.velocity.size()) != t_obs ||
          static_cast<int64_t>(o.accel.size()) != t_obs ||
          static_cast<int64_t>(w.future[a].size()) != t_fut) {
        throw InvalidInput("collate: agent sequences are not aligned to the window length");
      }
      const auto ai = static_cast<int64_t>(a);
      ma[i][ai] = true;
      for (int64_t t = 0; t < t_obs; ++t) {
        const auto ts = static_cast<std::size_t>(t);
        pa[i][ai][t][0] = o.position[ts].x;
        pa[i][ai][t][1] = o.position[ts].y;
        va[i][ai][t][0] = o.velocity[ts].x;
        va[i][ai][t][1] = o.velocity[ts].y;
        aa[i][ai][t][0] = o.accel[ts].x;
        aa[i][ai][t][1] = o.accel[ts].y;
      }
      for (int64_t t = 0; t < t_fut; ++t) {
        fa[i][ai][t][0] = w.future[a][static_cast<std::size_t>(t)].x;
        fa[i][ai][t][1] = w.future[a][static_cast<std::size_t>(t)].y;
      }
    }
  }
  return {pos.to(dtype), vel.to(dtype), acc.to(dtype), fut.to(dtype), mask};
}

StreamEncoderImpl::StreamEncoderImpl(const ModelConfig& cfg) {
  cfg.validate();
  embed_ = register_module("embed", torch::nn::Linear(2, cfg.d_model));
  layers_ = register_module("layers", make_stack(cfg, cfg.n_layers_enc));
  time_code_ = register_buffer("time_code", sinusoid_table(cfg.obs_len, cfg.d_model));
}

torch::Tensor StreamEncoderImpl::forward(const torch::Tensor& seq) {
  if (seq.dim() != 3 || seq.size(2) != 2) {
    throw InvalidInput("stream encoder: expected input [S, T, 2]");
  }
  if (seq.size(1) > time_code_.size(0)) {
    throw InvalidInput("stream encoder: sequence longer than the configured obs_len");
  }
  if (torch::isnan(seq).any().item<bool>()) {
    throw DataError("stream encoder: NaN in input sequence");
  }
  torch::Tensor x = embed_(seq) + time_code_.narrow(0, 0, seq.size(1)).unsqueeze(0);
  x = layers_(x.transpose(0, 1)).transpose(0, 1);
  debug_check_finite(x, "stream encoder");
  return x;
}

FeatureInjectionImpl::FeatureInjectionImpl(const ModelConfig& cfg) {
  cfg.validate();
  attn_ = register_module(
      "attn", torch::nn::MultiheadAttention(
                  torch::nn::MultiheadAttentionOptions(cfg.d_model, cfg.n_heads)
                      .dropout(cfg.dropout)));
}

torch::Tensor FeatureInjectionImpl::forward(const torch::Tensor& target,
                                            const torch::Tensor& source) {
  if (target.sizes() != source.sizes() || target.dim() != 3) {
    throw InvalidInput("feature injection: target and source must share shape [S, T, d]");
  }
  const torch::Tensor kv = target.transpose(0, 1);
  const torch::Tensor q = source.transpose(0, 1);
  const torch::Tensor attended = std::get<0>(attn_->forward(q, kv, kv, torch::Tensor(), /*need_weights=*/false));
  torch::Tensor out = target + attended.transpose(0, 1);
  debug_check_finite(out, "feature injection");
  return out;
}

SocialDecoderImpl::SocialDecoderImpl(const ModelConfig& cfg) : k_(cfg.k), pred_len_(cfg.pred_len) {
  cfg.validate();
  queries_ = register_parameter("queries", torch::randn({cfg.k, cfg.d_model}));
  layers_ = register_module("layers", make_stack(cfg, cfg.n_layers_dec));
  head_ = register_module("head", torch::nn::Linear(cfg.d_model, cfg.pred_len * 2));
}

torch::Tensor SocialDecoderImpl::forward(const torch::Tensor& agent_features,
                                         const torch::Tensor& mask) {
  if (agent_features.dim() != 3 || mask.dim() != 2 ||
      agent_features.size(0) != mask.size(0) || agent_features.size(1) != mask.size(1)) {
    throw InvalidInput("social decoder: expected features [B, N, d] and mask [B, N]");
  }
  if (!mask.any(1).all().item<bool>()) {
    throw InvalidInput("social decoder: a scene has no unpadded agents");
  }
  const int64_t b = agent_features.size(0);
  const int64_t n = agent_features.size(1);
  const int64_t d = agent_features.size(2);
  // One token sequence over the scene's agents per (scene, query) pair.
  torch::Tensor x = agent_features.unsqueeze(1) + queries_.view({1, k_, 1, d});
  x = x.reshape({b * k_, n, d}).transpose(0, 1);
  const torch::Tensor padding = mask.logical_not().unsqueeze(1).expand({b, k_, n}).reshape({b * k_, n});
  x = layers_->forward(x, torch::Tensor(), padding).transpose(0, 1).reshape({b, k_, n, d});
  debug_check_finite(x, "social decoder");
  return head_(x).view({b, k_, n, pred_len_, 2}).permute({0, 2, 1, 3, 4});
}

TrajectoryNetImpl::TrajectoryNetImpl(const ModelConfig& cfg) : cfg_(cfg) {
  cfg_.validate();
  pos_encoder = register_module("pos_encoder", StreamEncoder(cfg_));
  vel_encoder = register_module("vel_encoder", StreamEncoder(cfg_));
  acc_encoder = register_module("acc_encoder", StreamEncoder(cfg_));
  inject_pos = register_module("inject_pos", FeatureInjection(cfg_));
  inject_vel = register_module("inject_vel", FeatureInjection(cfg_));
  pos_decoder = register_module("pos_decoder", SocialDecoder(cfg_));
  vel_decoder = register_module("vel_decoder", SocialDecoder(cfg_));
  acc_decoder = register_module("acc_decoder", SocialDecoder(cfg_));
  w_alpha_ = register_parameter("w_alpha", torch::full({}, 0.5));
  w_beta_ = register_parameter("w_beta", torch::full({}, 0.5));
}

TrajectoryNetImpl::StreamFeatures TrajectoryNetImpl::encode(const SceneBatch& batch) {
  const int64_t b = batch.batch_size();
  const int64_t n = batch.max_agents();
  const int64_t t = batch.obs_pos.size(2);
  if (t != cfg_.obs_len) {
    throw InvalidInput("model: batch has " + std::to_string(t) + " observed steps, model expects " +
                       std::to_string(cfg_.obs_len));
  }
  // Positions are encoded relative to the last observed point.
  const torch::Tensor last = batch.obs_pos.select(2, t - 1).unsqueeze(2);
  StreamFeatures f;
  f.pos = pos_encoder(batch.obs_pos.sub(last).reshape({b * n, t, 2}));
  f.vel = vel_encoder(batch.obs_vel.reshape({b * n, t, 2}));
  f.acc = acc_encoder(batch.obs_acc.reshape({b * n, t, 2}));
  if (cfg_.inject_features) {
    f.vel = inject_vel(f.vel, f.acc);
    f.pos = inject_pos(f.pos, f.vel);
  }
  return f;
}

PredictionTensors TrajectoryNetImpl::forward(const SceneBatch& batch) {
  const int64_t b = batch.batch_size();
  const int64_t n = batch.max_agents();
  const StreamFeatures f = encode(batch);
  auto pool = [&](const torch::Tensor& x) { return x.mean(1).view({b, n, cfg_.d_model}); };
  // Decoders predict residuals over constant-velocity extrapolation from the
  // last observed state.
  const torch::Tensor last_pos = batch.obs_pos.select(2, cfg_.obs_len - 1).view({b, n, 1, 1, 2});
  const torch::Tensor last_vel = batch.obs_vel.select(2, cfg_.obs_len - 1).view({b, n, 1, 1, 2});
  const torch::Tensor steps =
      torch::arange(1, cfg_.pred_len + 1, batch.obs_pos.options()).view({1, 1, 1, cfg_.pred_len, 1});
  PredictionTensors out;
  out.positions = pos_decoder(pool(f.pos), batch.mask) + last_pos + steps * last_vel;
  out.velocities = vel_decoder(pool(f.vel), batch.mask) + last_vel;
  out.accels = acc_decoder(pool(f.acc), batch.mask);
  return out;
}

std::vector<PredictionSet> predict(TrajectoryNet& net, const std::vector<SceneWindow>& windows,
                                   std::size_t batch_size) {
  if (batch_size == 0) throw InvalidInput("predict: batch size must be positive");
  const bool was_training = net->is_training();
  net->eval();
  torch::NoGradGuard no_grad;
  std::vector<PredictionSet> out;
  out.reserve(windows.size());
  const auto to_seq = [](const torch::Tensor& s) {  // [T', 2] double
    std::vector<Vec2> v(static_cast<std::size_t>(s.size(0)));
    auto acc = s.accessor<double, 2>();
    for (int64_t t = 0; t < s.size(0); ++t) v[static_cast<std::size_t>(t)] = {acc[t][0], acc[t][1]};
    return v;
  };
  for (std::size_t start = 0; start < windows.size(); start += batch_size) {
    const std::size_t count = std::min(batch_size, windows.size() - start);
    const std::span<const SceneWindow> chunk(windows.data() + start, count);
    const PredictionTensors p = net->forward(collate(chunk));
    const torch::Tensor pos = p.positions.to(torch::kFloat64);
    const torch::Tensor vel = p.velocities.to(torch::kFloat64);
    const torch::Tensor acc = p.accels.to(torch::kFloat64);
    for (std::size_t i = 0; i < count; ++i) {
      PredictionSet set;
      for (std::size_t a = 0; a < chunk[i].num_agents(); ++a) {
        AgentPrediction ap;
        const auto bi = static_cast<int64_t>(i);
        const auto ai = static_cast<int64_t>(a);
        for (int64_t k = 0; k < pos.size(2); ++k) {
          PositionSeq ps;
          ps.points = to_seq(pos[bi][ai][k]);
          if (!chunk[i].future.empty()) ps.frame_interval = chunk[i].future[a].frame_interval;
          ap.positions.push_back(std::move(ps));
          ap.velocities.push_back({to_seq(vel[bi][ai][k])});
          ap.accels.push_back({to_seq(acc[bi][ai][k])});
        }
        set.agents.push_back(std::move(ap));
      }
      out.push_back(std::move(set));
    }
  }
  net->train(was_training);
  return out;
}

void save_checkpoint(TrajectoryNet& net, const std::filesystem::path& path) {
  torch::serialize::OutputArchive archive;
  net->save(archive);
  archive.write("schema_version", c10::IValue(kCheckpointSchemaVersion));
  archive.write("model_config", c10::IValue(nlohmann::json(net->config()).dump()));
  try {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    archive.save_to(path.string());
  } catch (const std::exception& e) {
    throw DataError("cannot write checkpoint " + path.string() + ": " + e.what());
  }
}

namespace {

ModelConfig config_from_archive(torch::serialize::InputArchive& archive,
                                const std::filesystem::path& path) {
  c10::IValue version;
  c10::IValue config;
  if (!archive.try_read("schema_version", version) || !archive.try_read("model_config", config)) {
    throw DataError("checkpoint " + path.string() + " lacks schema metadata");
  }
  if (version.toInt() != kCheckpointSchemaVersion) {
    throw DataError("checkpoint " + path.string() + " has schema version " +
                    std::to_string(version.toInt()) + ", expected " +
                    std::to_string(kCheckpointSchemaVersion));
  }
  ModelConfig cfg;
  try {
    cfg = nlohmann::json::parse(config.toStringRef()).get<ModelConfig>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError("checkpoint " + path.string() + " has a malformed config: " + e.what());
  }
  cfg.validate();
  return cfg;
}

torch::serialize::InputArchive open_archive(const std::filesystem::path& path) {
  torch::serialize::InputArchive archive;
  try {
    archive.load_from(path.string());
  } catch (const std::exception& e) {
    throw DataError("cannot read checkpoint " + path.string() + ": " + e.what());
  }
  return archive;
}

}  // namespace

ModelConfig read_checkpoint_config(const std::filesystem::path& path) {
  torch::serialize::InputArchive archive = open_archive(path);
  return config_from_archive(archive, path);
}

TrajectoryNet load_checkpoint(const std::filesystem::path& path) {
  torch::serialize::InputArchive archive = open_archive(path);
  TrajectoryNet net(config_from_archive(archive, path));
  try {
    net->load(archive);
  } catch (const std::exception& e) {
    throw DataError("checkpoint " + path.string() + " does not match its config: " + e.what());
  }
  return net;
}

}  // namespace trimotion

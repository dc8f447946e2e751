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

#include "trimotion/training.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>

#include "trimotion/errors.h"
#include "trimotion/evaluation.h"
#include "trimotion/scoring.h"
#include "trimotion/tensor_kinematics.h"

namespace trimotion {

void to_json(nlohmann::json& j, const LossConfig& c) {
  j = nlohmann::json{{"epsilon", c.epsilon},
                     {"alpha", c.alpha},
                     {"beta", c.beta},
                     {"lambda", c.lambda},
                     {"huber_delta", c.huber_delta},
                     {"enable_pos", c.enable_pos},
                     {"enable_va", c.enable_va},
                     {"enable_cons1", c.enable_cons1},
                     {"enable_cons2", c.enable_cons2},
                     {"pos_mode", c.pos_mode == PositionLossMode::kTolerance ? "tolerance"
                                                                              : "mse_best_of_k"},
                     {"va_selection",
                      c.va_selection == VaSelection::kHeuristic ? "heuristic" : "oracle"}};
}

void from_json(const nlohmann::json& j, LossConfig& c) {
  LossConfig d;
  c.epsilon = j.value("epsilon", d.epsilon);
  c.alpha = j.value("alpha", d.alpha);
  c.beta = j.value("beta", d.beta);
  c.lambda = j.value("lambda", d.lambda);
  c.huber_delta = j.value("huber_delta", d.huber_delta);
  c.enable_pos = j.value("enable_pos", d.enable_pos);
  c.enable_va = j.value("enable_va", d.enable_va);
  c.enable_cons1 = j.value("enable_cons1", d.enable_cons1);
  c.enable_cons2 = j.value("enable_cons2", d.enable_cons2);
  const std::string pos_mode = j.value("pos_mode", std::string("tolerance"));
  if (pos_mode == "tolerance") {
    c.pos_mode = PositionLossMode::kTolerance;
  } else if (pos_mode == "mse_best_of_k") {
    c.pos_mode = PositionLossMode::kMseBestOfK;
  } else {
    throw InvalidInput("loss config: unknown pos_mode '" + pos_mode + "'");
  }
  const std::string sel = j.value("va_selection", std::string("heuristic"));
  if (sel == "heuristic") {
    c.va_selection = VaSelection::kHeuristic;
  } else if (sel == "oracle") {
    c.va_selection = VaSelection::kOracle;
  } else {
    throw InvalidInput("loss config: unknown va_selection '" + sel + "'");
  }
}

void to_json(nlohmann::json& j, const TrainConfig& c) {
  j = nlohmann::json{
      {"learning_rate", c.learning_rate},
      {"epochs", c.epochs},
      {"batch_size", c.batch_size},
      {"seed", c.seed},
      {"max_steps", c.max_steps},
      {"grad_clip", c.grad_clip},
      {"val_fraction", c.val_fraction},
      {"deterministic", c.deterministic},
      {"ablation", c.ablation},
      {"loss", c.loss},
      {"model", c.model},
      {"dataset",
       {{"manifest", c.dataset.manifest.string()},
        {"held_out", c.dataset.held_out},
        {"train_stride", c.dataset.train_stride},
        {"eval_stride", c.dataset.eval_stride}}},
      {"checkpoint_path", c.checkpoint_path.string()},
      {"log_path", c.log_path.string()}};
}

void from_json(const nlohmann::json& j, TrainConfig& c) {
  TrainConfig d;
  c.learning_rate = j.value("learning_rate", d.learning_rate);
  c.epochs = j.value("epochs", d.epochs);
  c.batch_size = j.value("batch_size", d.batch_size);
  c.seed = j.value("seed", d.seed);
  c.max_steps = j.value("max_steps", d.max_steps);
  c.grad_clip = j.value("grad_clip", d.grad_clip);
  c.val_fraction = j.value("val_fraction", d.val_fraction);
  c.deterministic = j.value("deterministic", d.deterministic);
  c.ablation = j.value("ablation", d.ablation);
  c.loss = j.contains("loss") ? j.at("loss").get<LossConfig>() : d.loss;
  c.model = j.contains("model") ? j.at("model").get<ModelConfig>() : d.model;
  if (j.contains("dataset")) {
    const auto& ds = j.at("dataset");
    c.dataset.manifest = ds.value("manifest", std::string());
    c.dataset.held_out = ds.value("held_out", std::string());
    c.dataset.train_stride = ds.value("train_stride", d.dataset.train_stride);
    c.dataset.eval_stride = ds.value("eval_stride", d.dataset.eval_stride);
  }
  c.checkpoint_path = j.value("checkpoint_path", d.checkpoint_path.string());
  c.log_path = j.value("log_path", d.log_path.string());
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0) || epochs <= 0 || batch_size <= 0 || !(grad_clip > 0.0) ||
      max_steps < 0) {
    throw InvalidInput(
        "train config: learning_rate, epochs, batch_size and grad_clip must be positive");
  }
  if (!(val_fraction >= 0.0 && val_fraction < 1.0)) {
    throw InvalidInput("train config: val_fraction must lie in [0, 1)");
  }
  if (dataset.train_stride == 0) throw InvalidInput("train config: train_stride must be >= 1");
  const auto names = training::ablation_names();
  if (std::find(names.begin(), names.end(), ablation) == names.end()) {
    throw InvalidInput("train config: unknown ablation '" + ablation + "'");
  }
  loss.validate();
  model.validate();
}

namespace training {
namespace {

// Picks candidate index[m] from [M, K, T, 2].
torch::Tensor take_candidate(const torch::Tensor& cands, const torch::Tensor& index) {
  const int64_t m = cands.size(0);
  return cands.gather(1, index.view({m, 1, 1, 1}).expand({m, 1, cands.size(2), cands.size(3)}))
      .squeeze(1);
}

// Per-candidate Huber against a shared target, [M, K].
torch::Tensor per_candidate_huber(const torch::Tensor& cands, const torch::Tensor& target,
                                  double delta) {
  return torch::huber_loss(cands, target.unsqueeze(1).expand_as(cands), at::Reduction::None, delta)
      .mean({2, 3});
}

void require_finite(const torch::Tensor& t, const char* name, int64_t step) {
  if (!std::isfinite(t.item<double>())) {
    throw NumericalError(std::string("non-finite loss term '") + name + "' at step " +
                         std::to_string(step));
  }
}

}  // namespace

LossReport StepLosses::report() const {
  return {pos.item<double>(), va.item<double>(), cons1.item<double>(), cons2.item<double>(),
          total.item<double>()};
}

StepLosses compute_losses(const TrajectoryNet& net, const SceneBatch& batch,
                          const PredictionTensors& out, const LossConfig& cfg,
                          Selections* selections) {
  const torch::Tensor& mask = batch.mask;
  const int64_t t_obs = batch.obs_pos.size(2);
  const auto agents = [&](const torch::Tensor& t) { return t.index({mask}); };

  const torch::Tensor pos = agents(out.positions);  // [M, K, T', 2]
  const torch::Tensor vel = agents(out.velocities);
  const torch::Tensor acc = agents(out.accels);
  const torch::Tensor gt = agents(batch.fut_pos).to(pos.scalar_type());
  const torch::Tensor obs_pos = agents(batch.obs_pos).to(pos.scalar_type());
  const torch::Tensor obs_vel = agents(batch.obs_vel).to(pos.scalar_type());
  const torch::Tensor obs_acc = agents(batch.obs_acc).to(pos.scalar_type());
  if (gt.size(1) != pos.size(2)) {
    throw InvalidInput("compute_losses: ground-truth horizon does not match the predictions");
  }

  const torch::Tensor last_pos = obs_pos.select(1, t_obs - 1);
  const torch::Tensor last_vel = obs_vel.select(1, t_obs - 1);
  // The first two entries of the padded acceleration are copies.
  const torch::Tensor hist_acc = obs_acc.narrow(1, 2, t_obs - 2);
  const torch::Tensor gt_vel = kinematics::pseudo_velocity(gt, last_pos);
  const torch::Tensor gt_acc = kinematics::pseudo_accel(gt_vel, last_vel);

  Selections sel;
  sel.dc = scoring::directional_consistency(kinematics::global_velocity(obs_pos), vel.select(2, 0));
  sel.sim = scoring::accel_similarity(hist_acc, acc);
  sel.scores = scoring::combined_scores(sel.dc, sel.sim, net->w_alpha(), net->w_beta());
  sel.shared_index = scoring::select_best(sel.scores.detach());
  if (cfg.va_selection == VaSelection::kHeuristic) {
    sel.va_vel_index = scoring::select_best(sel.dc);
    sel.va_acc_index = scoring::select_best(-sel.sim);
  } else {
    sel.va_vel_index =
        scoring::select_best(-per_candidate_huber(vel.detach(), gt_vel, cfg.huber_delta));
    sel.va_acc_index =
        scoring::select_best(-per_candidate_huber(acc.detach(), gt_acc, cfg.huber_delta));
  }

  const torch::Tensor zero = torch::zeros({}, pos.options());
  StepLosses l;
  l.pos = zero;
  if (cfg.enable_pos) {
    l.pos = cfg.pos_mode == PositionLossMode::kTolerance ? losses::position_loss(pos, gt, cfg)
                                                         : losses::mse_best_of_k_loss(pos, gt);
  }
  l.va = cfg.enable_va ? losses::va_loss(take_candidate(vel, sel.va_vel_index), gt_vel,
                                         take_candidate(acc, sel.va_acc_index), gt_acc, cfg)
                       : zero;
  l.cons1 = cfg.enable_cons1 ? losses::cons1_loss(vel, acc, last_vel) : zero;
  l.cons2 = zero;
  if (cfg.enable_cons2) {
    // Straight-through selection: the forward value is exactly the argmax
    // candidate, the backward pass reaches the score weights through the
    // softmax of the combined score. Selected candidates act as targets.
    const int64_t k = sel.scores.size(1);
    const torch::Tensor soft = torch::softmax(sel.scores, 1);
    const torch::Tensor hard = torch::one_hot(sel.shared_index, k).to(soft.scalar_type());
    const torch::Tensor weight = (hard + soft - soft.detach()).unsqueeze(-1).unsqueeze(-1);
    const torch::Tensor sel_vel = (weight * vel.detach()).sum(1);
    const torch::Tensor sel_acc = (weight * acc.detach()).sum(1);
    const torch::Tensor pseudo_v = kinematics::pseudo_velocity(pos, last_pos);
    const torch::Tensor pseudo_a = kinematics::pseudo_accel(pseudo_v, last_vel);
    l.cons2 = losses::cons2_loss(pseudo_v, pseudo_a, sel_vel, sel_acc);
  }
  l.total = losses::weighted_total(l.pos, l.va, l.cons1, l.cons2, cfg);
  if (selections != nullptr) *selections = std::move(sel);
  return l;
}

Trainer::Trainer(TrainConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.validate();
  if (cfg_.deterministic) at::set_num_threads(1);
  torch::manual_seed(cfg_.seed);
  net_ = TrajectoryNet(cfg_.model);
  net_->train();
  optimizer_ = std::make_unique<torch::optim::Adam>(
      net_->parameters(), torch::optim::AdamOptions(cfg_.learning_rate));
}

LossReport Trainer::train_step(std::span<const SceneWindow> batch) {
  net_->train();
  const SceneBatch b = collate(batch);
  optimizer_->zero_grad();
  const StepLosses l = compute_losses(net_, b, net_->forward(b), cfg_.loss);
  ++steps_;
  require_finite(l.pos, "pos", steps_);
  require_finite(l.va, "va", steps_);
  require_finite(l.cons1, "cons1", steps_);
  require_finite(l.cons2, "cons2", steps_);
  require_finite(l.total, "total", steps_);
  l.total.backward();
  torch::nn::utils::clip_grad_norm_(net_->parameters(), cfg_.grad_clip);
  optimizer_->step();
  return l.report();
}

LossReport Trainer::evaluate_loss(std::span<const SceneWindow> batch) {
  const bool was_training = net_->is_training();
  net_->eval();
  torch::NoGradGuard no_grad;
  const SceneBatch b = collate(batch);
  const LossReport r = compute_losses(net_, b, net_->forward(b), cfg_.loss).report();
  net_->train(was_training);
  return r;
}

FitResult fit(const std::vector<SceneWindow>& windows, const TrainConfig& cfg,
              std::ostream* progress) {
  cfg.validate();
  if (windows.empty()) throw DataError("fit: no training windows");

  std::vector<std::size_t> order(windows.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(cfg.seed);
  std::shuffle(order.begin(), order.end(), rng);
  const auto n_val = static_cast<std::size_t>(
      std::floor(cfg.val_fraction * static_cast<double>(windows.size())));
  std::vector<SceneWindow> val;
  std::vector<SceneWindow> train;
  for (std::size_t i = 0; i < order.size(); ++i) {
    (i < n_val ? val : train).push_back(windows[order[i]]);
  }
  if (train.empty()) throw DataError("fit: validation split leaves no training windows");

  if (cfg.log_path.has_parent_path()) {
    std::filesystem::create_directories(cfg.log_path.parent_path());
  }
  std::ofstream log(cfg.log_path);
  if (!log) throw DataError("cannot open training log " + cfg.log_path.string());

  Trainer trainer(cfg);
  FitResult result;
  result.checkpoint = cfg.checkpoint_path;
  result.best_val_ade = std::numeric_limits<double>::quiet_NaN();
  double best = std::numeric_limits<double>::infinity();
  std::vector<std::size_t> train_order(train.size());
  std::iota(train_order.begin(), train_order.end(), std::size_t{0});
  std::vector<SceneWindow> batch;
  bool done = false;
  for (int64_t epoch = 0; epoch < cfg.epochs && !done; ++epoch) {
    std::shuffle(train_order.begin(), train_order.end(), rng);
    for (std::size_t start = 0; start < train_order.size() && !done;
         start += static_cast<std::size_t>(cfg.batch_size)) {
      batch.clear();
      const std::size_t end =
          std::min(train_order.size(), start + static_cast<std::size_t>(cfg.batch_size));
      for (std::size_t i = start; i < end; ++i) batch.push_back(train[train_order[i]]);
      result.last = trainer.train_step(batch);
      log << to_log_line(trainer.steps(), result.last) << '\n';
      done = cfg.max_steps > 0 && trainer.steps() >= cfg.max_steps;
    }
    log.flush();
    if (!log) throw DataError("write failed for training log " + cfg.log_path.string());

    if (!val.empty()) {
      const EvalResult r = evaluation::evaluate(trainer.model(), val, cfg.model.k,
                                                cfg.model.pred_len);
      if (r.ade < best) {
        best = r.ade;
        result.best_val_ade = r.ade;
        save_checkpoint(trainer.model(), cfg.checkpoint_path);
      }
      if (progress != nullptr) {
        *progress << "epoch " << epoch + 1 << " step " << trainer.steps() << " total "
                  << result.last.total << " val_ade " << r.ade << '\n';
      }
    } else if (progress != nullptr) {
      *progress << "epoch " << epoch + 1 << " step " << trainer.steps() << " total "
                << result.last.total << '\n';
    }
  }
  if (val.empty()) save_checkpoint(trainer.model(), cfg.checkpoint_path);
  result.steps = trainer.steps();
  return result;
}

std::vector<std::string> ablation_names() {
  return {"none",         "no_pos",  "no_cons1", "no_va", "no_cons2",
          "no_injection", "mse_pos", "manual_va_select"};
}

TrainConfig ablation_variant(std::string_view name, TrainConfig base) {
  if (name == "none") {
  } else if (name == "no_pos") {
    base.loss.enable_pos = false;
  } else if (name == "no_cons1") {
    base.loss.enable_cons1 = false;
  } else if (name == "no_va") {
    base.loss.enable_va = false;
  } else if (name == "no_cons2") {
    base.loss.enable_cons2 = false;
  } else if (name == "no_injection") {
    base.model.inject_features = false;
  } else if (name == "mse_pos") {
    base.loss.pos_mode = PositionLossMode::kMseBestOfK;
  } else if (name == "manual_va_select") {
    base.loss.va_selection = VaSelection::kOracle;
  } else {
    throw InvalidInput("unknown ablation '" + std::string(name) + "'");
  }
  base.ablation = std::string(name);
  return base;
}

}  // namespace training
}  // namespace trimotion

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

#include "trimotion/losses.h"

#include <cmath>
#include <string>

#include <nlohmann/json.hpp>

#include "trimotion/errors.h"
#include "trimotion/tensor_kinematics.h"

namespace trimotion {

void LossConfig::validate() const {
  if (!(epsilon >= 0.0)) throw InvalidInput("loss config: epsilon must be >= 0");
  if (!(alpha > 0.0) || !(beta > 0.0) || !(lambda > 0.0) || !(huber_delta > 0.0)) {
    throw InvalidInput("loss config: alpha, beta, lambda and huber_delta must be > 0");
  }
  if (!enable_pos && !enable_va && !enable_cons1 && !enable_cons2) {
    throw InvalidInput("loss config: at least one loss term must be enabled");
  }
}

std::string to_log_line(int64_t step, const LossReport& r) {
  return nlohmann::json{{"step", step},   {"pos", r.pos},     {"va", r.va},
                        {"cons1", r.cons1}, {"cons2", r.cons2}, {"total", r.total}}
      .dump();
}

std::pair<int64_t, LossReport> parse_log_line(std::string_view line) {
  try {
    const nlohmann::json j = nlohmann::json::parse(line);
    LossReport r;
    r.pos = j.at("pos").get<double>();
    r.va = j.at("va").get<double>();
    r.cons1 = j.at("cons1").get<double>();
    r.cons2 = j.at("cons2").get<double>();
    r.total = j.at("total").get<double>();
    return {j.at("step").get<int64_t>(), r};
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("not a loss log record: ") + e.what());
  }
}

namespace losses {
namespace {

void require_candidates(const torch::Tensor& cands, const torch::Tensor& target,
                        const char* what) {
  if (cands.dim() != 4 || target.dim() != 3 || cands.size(0) != target.size(0) ||
      cands.size(2) != target.size(1) || cands.size(3) != target.size(2) ||
      cands.size(1) == 0) {
    throw InvalidInput(std::string(what) + ": expected candidates [M, K, T, 2] and target " +
                       "[M, T, 2] with matching M and T");
  }
}

void require_same_shape(const torch::Tensor& a, const torch::Tensor& b, const char* what) {
  if (a.sizes() != b.sizes()) throw InvalidInput(std::string(what) + ": shape mismatch");
}

}  // namespace

double diff_tolerance(double pred, double gt, double epsilon) {
  if (epsilon < 0.0) throw InvalidInput("diff_tolerance: negative epsilon");
  if (pred > gt + epsilon) return std::abs(pred - (gt + epsilon));
  if (pred < gt - epsilon) return std::abs(pred - (gt - epsilon));
  return 0.0;
}

torch::Tensor diff_tolerance(const torch::Tensor& pred, const torch::Tensor& gt, double epsilon) {
  if (epsilon < 0.0) throw InvalidInput("diff_tolerance: negative epsilon");
  // relu has a zero subgradient at the interval edges.
  return torch::relu(pred - (gt + epsilon)) + torch::relu((gt - epsilon) - pred);
}

torch::Tensor position_loss(const torch::Tensor& preds, const torch::Tensor& gt,
                            const LossConfig& cfg) {
  require_candidates(preds, gt, "position_loss");
  const torch::Tensor diff = diff_tolerance(preds, gt.unsqueeze(1), cfg.epsilon);
  const torch::Tensor diff_sum = diff.mean({2, 3}).sum(1);                  // [M]
  const torch::Tensor var = preds.var(1, /*unbiased=*/false).mean({1, 2});  // [M]
  return (cfg.alpha * diff_sum + cfg.beta * var).mean();
}

torch::Tensor mse_best_of_k_loss(const torch::Tensor& preds, const torch::Tensor& gt) {
  require_candidates(preds, gt, "mse_best_of_k_loss");
  const torch::Tensor per_k = (preds - gt.unsqueeze(1)).pow(2).mean({2, 3});  // [M, K]
  const torch::Tensor best = per_k.detach().argmin(1, /*keepdim=*/true);
  return per_k.gather(1, best).mean();
}

torch::Tensor va_loss(const torch::Tensor& sel_vel, const torch::Tensor& gt_vel,
                      const torch::Tensor& sel_acc, const torch::Tensor& gt_acc,
                      const LossConfig& cfg) {
  require_same_shape(sel_vel, gt_vel, "va_loss velocity");
  require_same_shape(sel_acc, gt_acc, "va_loss acceleration");
  return torch::huber_loss(sel_vel, gt_vel, at::Reduction::Mean, cfg.huber_delta) +
         torch::huber_loss(sel_acc, gt_acc, at::Reduction::Mean, cfg.huber_delta);
}

torch::Tensor cons1_loss(const torch::Tensor& pred_vels, const torch::Tensor& pred_accs,
                         const torch::Tensor& last_obs_vel) {
  if (pred_vels.dim() != 4 || pred_vels.sizes() != pred_accs.sizes()) {
    throw InvalidInput("cons1_loss: velocity and acceleration candidate sets differ in shape");
  }
  const torch::Tensor pseudo = kinematics::pseudo_accel(pred_vels, last_obs_vel);
  // Equal-sized groups, so the global mean equals the mean of per-(i, k) MSEs.
  return (pseudo - pred_accs).pow(2).mean();
}

torch::Tensor consistency_ce(const torch::Tensor& distances) {
  if (distances.dim() != 2 || distances.size(1) == 0) {
    throw InvalidInput("consistency_ce: expected non-empty distances [M, K]");
  }
  const torch::Tensor target = distances.detach().argmin(1, /*keepdim=*/true);
  return -torch::log_softmax(-distances, 1).gather(1, target).squeeze(1);
}

torch::Tensor candidate_distances(const torch::Tensor& candidates, const torch::Tensor& target) {
  require_candidates(candidates, target, "candidate_distances");
  return (candidates - target.unsqueeze(1)).pow(2).sum({2, 3}).clamp_min(1e-24).sqrt();
}

torch::Tensor cons2_loss(const torch::Tensor& pseudo_vels, const torch::Tensor& pseudo_accs,
                         const torch::Tensor& sel_vel, const torch::Tensor& sel_acc) {
  const torch::Tensor ce_v = consistency_ce(candidate_distances(pseudo_vels, sel_vel));
  const torch::Tensor ce_a = consistency_ce(candidate_distances(pseudo_accs, sel_acc));
  return (ce_v + ce_a).mean() / 2.0;
}

LossReport total_loss(const LossReport& parts, const LossConfig& cfg) {
  LossReport out;
  out.pos = cfg.enable_pos ? parts.pos : 0.0;
  out.va = cfg.enable_va ? parts.va : 0.0;
  out.cons1 = cfg.enable_cons1 ? parts.cons1 : 0.0;
  out.cons2 = cfg.enable_cons2 ? parts.cons2 : 0.0;
  out.total = weighted_total(out.pos, out.va, out.cons1, out.cons2, cfg);
  return out;
}

}  // namespace losses
}  // namespace trimotion

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

#include "trimotion/scoring.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "trimotion/errors.h"

namespace trimotion::scoring {
namespace {

struct MagnitudeStats {
  double mean = 0.0;
  double stddev = 0.0;
};

MagnitudeStats magnitude_stats(const AccelSeq& a) {
  double sum = 0.0;
  for (const Vec2& v : a.vectors) sum += v.norm();
  const double n = static_cast<double>(a.size());
  const double mean = sum / n;
  double sq = 0.0;
  for (const Vec2& v : a.vectors) {
    const double d = v.norm() - mean;
    sq += d * d;
  }
  return {mean, std::sqrt(sq / n)};
}

std::vector<double> softmax(std::span<const double> x, double sign) {
  double peak = -INFINITY;
  for (double v : x) peak = std::max(peak, sign * v);
  std::vector<double> out(x.size());
  double total = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    out[i] = std::exp(sign * x[i] - peak);
    total += out[i];
  }
  for (double& v : out) v /= total;
  return out;
}

}  // namespace

double directional_consistency(const Vec2& v_global, const Vec2& first_pred_vel) {
  const double denom = v_global.norm() * first_pred_vel.norm();
  if (denom == 0.0) return 0.0;
  return std::clamp(v_global.dot(first_pred_vel) / denom, -1.0, 1.0);
}

double accel_similarity(const AccelSeq& hist_accel, const AccelSeq& pred_accel) {
  if (hist_accel.vectors.empty() || pred_accel.vectors.empty()) {
    throw InvalidInput("accel_similarity: empty acceleration sequence");
  }
  const MagnitudeStats h = magnitude_stats(hist_accel);
  const MagnitudeStats p = magnitude_stats(pred_accel);
  return std::hypot(h.mean - p.mean, h.stddev - p.stddev);
}

std::vector<double> combined_scores(std::span<const double> dc, std::span<const double> sim,
                                    const ScoreWeights& w) {
  if (dc.empty() || dc.size() != sim.size()) {
    throw InvalidInput("combined_scores: dc has " + std::to_string(dc.size()) +
                       " entries, sim has " + std::to_string(sim.size()));
  }
  const std::vector<double> sd = softmax(dc, 1.0);
  const std::vector<double> ss = softmax(sim, -1.0);
  std::vector<double> out(dc.size());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = w.w_alpha * sd[k] + w.w_beta * ss[k];
  return out;
}

std::size_t select_best(std::span<const double> scores) {
  if (scores.empty()) throw InvalidInput("select_best: empty score list");
  std::size_t best = 0;
  for (std::size_t k = 0; k < scores.size(); ++k) {
    if (!std::isfinite(scores[k])) {
      throw InvalidInput("select_best: non-finite score at index " + std::to_string(k));
    }
    if (scores[k] > scores[best]) best = k;
  }
  return best;
}

CandidateScores score_candidates(const PositionSeq& observed,
                                 const std::vector<VelocitySeq>& velocities,
                                 const std::vector<AccelSeq>& accels, const ScoreWeights& w) {
  if (velocities.empty() || velocities.size() != accels.size()) {
    throw InvalidInput("score_candidates: velocity and acceleration candidate counts differ");
  }
  const Vec2 v_global = kinematics::global_velocity(observed);
  const AccelSeq hist = kinematics::derive_accel(kinematics::derive_velocity(observed));
  CandidateScores out;
  for (std::size_t k = 0; k < velocities.size(); ++k) {
    if (velocities[k].vectors.empty()) throw InvalidInput("score_candidates: empty velocity");
    out.dc.push_back(directional_consistency(v_global, velocities[k][0]));
    out.sim.push_back(accel_similarity(hist, accels[k]));
  }
  out.combined = combined_scores(out.dc, out.sim, w);
  out.selected_index = select_best(out.combined);
  return out;
}

torch::Tensor directional_consistency(const torch::Tensor& v_global,
                                      const torch::Tensor& first_vel) {
  const torch::Tensor g = v_global.detach().unsqueeze(-2);  // [M, 1, 2]
  const torch::Tensor f = first_vel.detach();
  const torch::Tensor dot = (g * f).sum(-1);
  const torch::Tensor denom = g.norm(2, -1) * f.norm(2, -1);
  const torch::Tensor positive = denom > 0;
  const torch::Tensor safe = torch::where(positive, denom, torch::ones_like(denom));
  return torch::where(positive, dot / safe, torch::zeros_like(dot)).clamp(-1.0, 1.0);
}

torch::Tensor accel_similarity(const torch::Tensor& hist_accel, const torch::Tensor& pred_accel) {
  if (hist_accel.size(-2) == 0 || pred_accel.size(-2) == 0) {
    throw InvalidInput("accel_similarity: empty acceleration sequence");
  }
  const torch::Tensor hist_mag = hist_accel.detach().norm(2, -1);  // [M, L]
  const torch::Tensor pred_mag = pred_accel.detach().norm(2, -1);  // [M, K, T']
  const torch::Tensor hist_mu = hist_mag.mean(-1, true);
  const torch::Tensor hist_sd = hist_mag.std(-1, /*unbiased=*/false, /*keepdim=*/true);
  const torch::Tensor pred_mu = pred_mag.mean(-1);
  const torch::Tensor pred_sd = pred_mag.std(-1, /*unbiased=*/false, /*keepdim=*/false);
  return ((hist_mu - pred_mu).pow(2) + (hist_sd - pred_sd).pow(2)).sqrt();
}

torch::Tensor combined_scores(const torch::Tensor& dc, const torch::Tensor& sim,
                              const torch::Tensor& w_alpha, const torch::Tensor& w_beta) {
  if (dc.sizes() != sim.sizes() || dc.size(-1) == 0) {
    throw InvalidInput("combined_scores: dc and sim shapes differ");
  }
  return w_alpha * torch::softmax(dc, -1) + w_beta * torch::softmax(-sim, -1);
}

torch::Tensor select_best(const torch::Tensor& scores) {
  if (scores.numel() == 0) throw InvalidInput("select_best: empty score tensor");
  const torch::Tensor peak = std::get<0>(scores.max(-1, /*keepdim=*/true));
  const torch::Tensor index =
      torch::arange(scores.size(-1), torch::TensorOptions().dtype(torch::kLong))
          .expand(scores.sizes());
  const torch::Tensor sentinel = torch::full_like(index, scores.size(-1));
  return std::get<0>(torch::where(scores == peak, index, sentinel).min(-1));
}

}  // namespace trimotion::scoring

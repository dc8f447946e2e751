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

#include "trimotion/evaluation.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "trimotion/errors.h"

namespace trimotion {

void to_json(nlohmann::json& j, const EvalResult& r) {
  nlohmann::json scenes = nlohmann::json::object();
  for (const auto& [name, m] : r.per_scene) {
    scenes[name] = {{"ade", m.ade}, {"fde", m.fde}, {"agents", m.agents}};
  }
  j = nlohmann::json{{"record", "eval_result"},
                     {"ade", r.ade},
                     {"fde", r.fde},
                     {"k", r.k},
                     {"pred_len", r.pred_len},
                     {"agents", r.agents},
                     {"min_mode", r.mode == MinMode::kJoint ? "joint" : "independent"},
                     {"per_scene", scenes}};
}

void from_json(const nlohmann::json& j, EvalResult& r) {
  r.ade = j.at("ade").get<double>();
  r.fde = j.at("fde").get<double>();
  r.k = j.at("k").get<int64_t>();
  r.pred_len = j.at("pred_len").get<int64_t>();
  r.agents = j.value("agents", std::size_t{0});
  r.mode = j.value("min_mode", std::string("independent")) == "joint" ? MinMode::kJoint
                                                                    : MinMode::kIndependent;
  r.per_scene.clear();
  for (const auto& [name, m] : j.at("per_scene").items()) {
    r.per_scene[name] = {m.at("ade").get<double>(), m.at("fde").get<double>(),
                         m.value("agents", std::size_t{0})};
  }
}

namespace evaluation {

double ade(const PositionSeq& pred, const PositionSeq& gt) {
  if (pred.size() != gt.size() || gt.size() == 0) {
    throw InvalidInput("ade: prediction has " + std::to_string(pred.size()) +
                       " steps, ground truth " + std::to_string(gt.size()));
  }
  double sum = 0.0;
  for (std::size_t t = 0; t < gt.size(); ++t) sum += (pred[t] - gt[t]).norm();
  return sum / static_cast<double>(gt.size());
}

double fde(const PositionSeq& pred, const PositionSeq& gt) {
  if (pred.size() != gt.size() || gt.size() == 0) {
    throw InvalidInput("fde: prediction has " + std::to_string(pred.size()) +
                       " steps, ground truth " + std::to_string(gt.size()));
  }
  return (pred.points.back() - gt.points.back()).norm();
}

double min_of_k(const std::vector<PositionSeq>& preds, const PositionSeq& gt, Metric metric) {
  if (preds.empty()) throw InvalidInput("min_of_k: empty candidate set");
  double best = std::numeric_limits<double>::infinity();
  for (const PositionSeq& p : preds) {
    best = std::min(best, metric == Metric::kAde ? ade(p, gt) : fde(p, gt));
  }
  return best;
}

MinPair best_of_k(const std::vector<PositionSeq>& preds, const PositionSeq& gt, MinMode mode) {
  if (mode == MinMode::kIndependent) {
    return {min_of_k(preds, gt, Metric::kAde), min_of_k(preds, gt, Metric::kFde)};
  }
  if (preds.empty()) throw InvalidInput("best_of_k: empty candidate set");
  MinPair best{std::numeric_limits<double>::infinity(), 0.0};
  for (const PositionSeq& p : preds) {
    const double a = ade(p, gt);
    if (a < best.ade) best = {a, fde(p, gt)};
  }
  return best;
}

EvalResult evaluate_predictions(const std::vector<SceneWindow>& windows,
                                const std::vector<PredictionSet>& predictions, int64_t k,
                                MinMode mode) {
  if (windows.size() != predictions.size()) {
    throw InvalidInput("evaluate: prediction count does not match window count");
  }
  if (windows.empty()) throw InvalidInput("evaluate: no test windows");
  if (k < 1) throw InvalidInput("evaluate: k must be >= 1");
  EvalResult r;
  r.k = k;
  r.mode = mode;
  r.pred_len = static_cast<int64_t>(windows.front().pred_len());
  double ade_sum = 0.0;
  double fde_sum = 0.0;
  for (std::size_t i = 0; i < windows.size(); ++i) {
    const SceneWindow& w = windows[i];
    if (predictions[i].agents.size() != w.num_agents()) {
      throw InvalidInput("evaluate: agent count mismatch in window " + std::to_string(i));
    }
    SceneMetrics& scene = r.per_scene[w.scene_id];
    for (std::size_t a = 0; a < w.num_agents(); ++a) {
      const auto& cands = predictions[i].agents[a].positions;
      if (static_cast<int64_t>(cands.size()) < k) {
        throw InvalidInput("evaluate: fewer than k candidates available");
      }
      const std::vector<PositionSeq> first_k(cands.begin(), cands.begin() + k);
      const MinPair m = best_of_k(first_k, w.future[a], mode);
      ade_sum += m.ade;
      fde_sum += m.fde;
      scene.ade += m.ade;
      scene.fde += m.fde;
      ++scene.agents;
      ++r.agents;
    }
  }
  for (auto& [name, s] : r.per_scene) {
    s.ade /= static_cast<double>(s.agents);
    s.fde /= static_cast<double>(s.agents);
  }
  r.ade = ade_sum / static_cast<double>(r.agents);
  r.fde = fde_sum / static_cast<double>(r.agents);
  return r;
}

EvalResult evaluate(TrajectoryNet& net, const std::vector<SceneWindow>& windows, int64_t k,
                    int64_t pred_len, MinMode mode, std::size_t batch_size) {
  const ModelConfig& cfg = net->config();
  if (pred_len != cfg.pred_len) {
    throw InvalidInput("evaluate: horizon " + std::to_string(pred_len) +
                       " does not match the model horizon " + std::to_string(cfg.pred_len));
  }
  if (k > cfg.k) {
    throw InvalidInput("evaluate: k=" + std::to_string(k) + " exceeds the model's " +
                       std::to_string(cfg.k) + " candidates");
  }
  for (const SceneWindow& w : windows) {
    if (static_cast<int64_t>(w.pred_len()) != pred_len) {
      throw InvalidInput("evaluate: window horizon does not match " + std::to_string(pred_len));
    }
  }
  if (windows.empty()) throw InvalidInput("evaluate: no test windows");
  return evaluate_predictions(windows, predict(net, windows, batch_size), k, mode);
}

std::string format_report(const EvalResult& r) {
  std::ostringstream out;
  char line[160];
  std::snprintf(line, sizeof(line), "best-of-%lld, horizon %lld, %s minimum, %zu agents\n",
                static_cast<long long>(r.k), static_cast<long long>(r.pred_len),
                r.mode == MinMode::kJoint ? "joint" : "independent", r.agents);
  out << line;
  std::snprintf(line, sizeof(line), "%-24s %8s %8s %8s\n", "scene", "ADE", "FDE", "agents");
  out << line;
  for (const auto& [name, s] : r.per_scene) {
    std::snprintf(line, sizeof(line), "%-24s %8.4f %8.4f %8zu\n", name.c_str(), s.ade, s.fde,
                  s.agents);
    out << line;
  }
  std::snprintf(line, sizeof(line), "%-24s %8.4f %8.4f %8zu\n", "ALL", r.ade, r.fde, r.agents);
  out << line;
  return out.str();
}

}  // namespace evaluation
}  // namespace trimotion

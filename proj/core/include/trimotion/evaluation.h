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

#ifndef TRIMOTION_EVALUATION_H_
#define TRIMOTION_EVALUATION_H_

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "trimotion/data.h"
#include "trimotion/kinematics.h"
#include "trimotion/model.h"

namespace trimotion {

enum class Metric { kAde, kFde };

// How best-of-K pairs ADE with FDE. Independent takes each minimum on its
// own (possibly different candidates); joint reports the FDE of the min-ADE
// candidate.
enum class MinMode { kIndependent, kJoint };

struct SceneMetrics {
  double ade = 0.0;
  double fde = 0.0;
  std::size_t agents = 0;
};

struct EvalResult {
  double ade = 0.0;
  double fde = 0.0;
  std::map<std::string, SceneMetrics> per_scene;
  int64_t k = 0;
  int64_t pred_len = 0;
  std::size_t agents = 0;
  MinMode mode = MinMode::kIndependent;
};

void to_json(nlohmann::json& j, const EvalResult& r);
void from_json(const nlohmann::json& j, EvalResult& r);

namespace evaluation {

// Mean Euclidean distance over steps; throws InvalidInput on length mismatch.
double ade(const PositionSeq& pred, const PositionSeq& gt);
// Euclidean distance at the last step.
double fde(const PositionSeq& pred, const PositionSeq& gt);

double min_of_k(const std::vector<PositionSeq>& preds, const PositionSeq& gt, Metric metric);

struct MinPair {
  double ade = 0.0;
  double fde = 0.0;
};
MinPair best_of_k(const std::vector<PositionSeq>& preds, const PositionSeq& gt, MinMode mode);

// Scores precomputed predictions. Only the first `k` candidates of each
// agent are used; `predictions[i]` belongs to `windows[i]`.
EvalResult evaluate_predictions(const std::vector<SceneWindow>& windows,
                                const std::vector<PredictionSet>& predictions, int64_t k,
                                MinMode mode = MinMode::kIndependent);

// Mean per-agent best-of-K ADE/FDE over all test agents. Throws InvalidInput
// when `pred_len` differs from the model or the windows, or `k` exceeds the
// model's candidate count.
EvalResult evaluate(TrajectoryNet& net, const std::vector<SceneWindow>& windows, int64_t k,
                    int64_t pred_len, MinMode mode = MinMode::kIndependent,
                    std::size_t batch_size = 32);

std::string format_report(const EvalResult& r);

}  // namespace evaluation
}  // namespace trimotion

#endif  // TRIMOTION_EVALUATION_H_

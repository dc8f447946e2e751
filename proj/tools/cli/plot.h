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

#ifndef TRIMOTION_TOOLS_PLOT_H_
#define TRIMOTION_TOOLS_PLOT_H_

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "trimotion/data.h"
#include "trimotion/evaluation.h"
#include "trimotion/losses.h"

namespace trimotion::cli {

enum class ColorMode { kUniform, kSpeed };
ColorMode parse_color_mode(std::string_view s);

// Candidate fans of one window: candidates[a][k] is candidate k of agent a.
// `window` supplies observed tracks and ground truth when non-null. In speed
// mode every segment is shaded from blue (slow) to red (fast).
std::string render_trajectories(const SceneWindow* window,
                                const std::vector<std::vector<PositionSeq>>& candidates,
                                ColorMode mode, const std::string& title);

std::string render_loss_curves(const std::vector<std::pair<int64_t, LossReport>>& log,
                               const std::string& title);

std::string render_eval_bars(const EvalResult& result, const std::string& title);

}  // namespace trimotion::cli

#endif  // TRIMOTION_TOOLS_PLOT_H_

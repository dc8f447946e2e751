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

#ifndef TRIMOTION_TOOLS_RECORDS_H_
#define TRIMOTION_TOOLS_RECORDS_H_

#include <cstdint>
#include <iosfwd>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "trimotion/data.h"
#include "trimotion/model.h"

namespace trimotion::cli {

// Prediction record file:
//
//   # trimotion-predictions 1
//   # {"obs_len":8,"pred_len":12,"k":20,...}
//   # window_id agent_id candidate_id step x y
//   0 3 0 0 1.25 -0.5
//
// One line per predicted point. `step` counts from 0 at the first future
// frame. Coordinates are written in shortest round-trip form.
inline constexpr std::string_view kPredictionsMagic = "# trimotion-predictions 1";

struct PredictionRecord {
  int64_t window_id = 0;
  int64_t agent_id = 0;
  int64_t candidate_id = 0;
  int64_t step = 0;
  double x = 0.0;
  double y = 0.0;
};

struct PredictionFile {
  nlohmann::json meta = nlohmann::json::object();
  std::vector<PredictionRecord> records;
};

void write_predictions(const std::vector<SceneWindow>& windows,
                       const std::vector<PredictionSet>& predictions,
                       const nlohmann::json& meta, std::ostream& out);

// Throws DataError naming the line on malformed input or a missing header.
PredictionFile read_predictions(std::istream& in, std::string_view source = "<stream>");

}  // namespace trimotion::cli

#endif  // TRIMOTION_TOOLS_RECORDS_H_

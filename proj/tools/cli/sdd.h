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

#ifndef TRIMOTION_TOOLS_SDD_H_
#define TRIMOTION_TOOLS_SDD_H_

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>

namespace trimotion::cli {

// Stanford Drone annotation rows are
//   track_id xmin ymin xmax ymax frame lost occluded generated "label"
// at 30 fps. Conversion keeps one label, takes the bounding-box center and
// keeps frames with frame % frame_step == phase.
struct SddOptions {
  std::string label = "Pedestrian";
  int64_t frame_step = 12;  // 0.4 s at 30 fps
  int64_t phase = 0;
  bool keep_lost = false;
};

struct SddStats {
  std::size_t rows = 0;
  std::size_t written = 0;
  std::size_t agents = 0;
};

// Writes canonical `frame_id agent_id x y` records sorted by frame, then
// agent. Throws DataError naming `source` and the line on malformed rows.
SddStats convert_sdd(std::istream& in, std::ostream& out, const SddOptions& opts,
                     std::string_view source = "<stream>");

}  // namespace trimotion::cli

#endif  // TRIMOTION_TOOLS_SDD_H_

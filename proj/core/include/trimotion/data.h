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

#ifndef TRIMOTION_DATA_H_
#define TRIMOTION_DATA_H_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "trimotion/kinematics.h"

namespace trimotion {

enum class Units { kMeters, kPixels, kSynthetic };
enum class TrackFormat { kEthUcyTxt, kSddTxt };

std::string_view to_string(Units u);
Units parse_units(std::string_view s);
std::string_view to_string(TrackFormat f);
TrackFormat parse_track_format(std::string_view s);

struct RawTrack {
  int64_t agent_id = 0;
  std::vector<int64_t> frames;  // strictly increasing
  std::vector<Vec2> coords;
};

// One temporal window of a scene. Every agent is present in all T + T'
// frames; observed triples have V and A left-padded to T.
struct SceneWindow {
  std::string scene_id;
  int64_t start_frame = 0;
  std::vector<int64_t> agent_ids;
  std::vector<KinematicTriple> observed;
  std::vector<PositionSeq> future;
  Units units = Units::kMeters;

  std::size_t num_agents() const { return agent_ids.size(); }
  std::size_t obs_len() const { return observed.empty() ? 0 : observed.front().size(); }
  std::size_t pred_len() const { return future.empty() ? 0 : future.front().size(); }
};

struct SplitSpec {
  enum class Protocol { kLeaveOneOut, kFixed };
  Protocol protocol = Protocol::kLeaveOneOut;
  std::string held_out;                 // leave-one-out
  std::vector<std::string> train_scenes; // fixed
  std::vector<std::string> test_scenes;  // fixed
};

struct WindowOptions {
  std::size_t obs_len = 8;
  std::size_t pred_len = 12;
  std::size_t stride = 1;  // in steps
  // Frame-id spacing of one step; 0 infers it from the tracks.
  int64_t frame_step = 0;
  double frame_interval = 0.4;
};

struct ManifestEntry {
  std::string name;
  std::filesystem::path path;
  Units units = Units::kMeters;
  TrackFormat format = TrackFormat::kEthUcyTxt;
};

struct Manifest {
  std::vector<ManifestEntry> scenes;
  std::optional<SplitSpec> split;
};

namespace data {

// Canonical text layout: one `frame_id agent_id x y` record per line,
// whitespace-separated, `#` comments and blank lines ignored.
std::vector<RawTrack> parse_tracks(std::string_view text, std::string_view source = "<memory>");
std::vector<RawTrack> load_tracks(const std::filesystem::path& path, TrackFormat format);

// Smallest positive frame-id gap inside any track (1 when undetermined).
int64_t infer_frame_step(const std::vector<RawTrack>& tracks);

// Sliding windows of obs_len + pred_len steps. Agents missing any frame of a
// window are excluded; windows with no agents are dropped. Agents are listed
// in ascending id order.
std::vector<SceneWindow> window_scenes(const std::vector<RawTrack>& tracks,
                                       const std::string& scene_id, Units units,
                                       const WindowOptions& opts);

// Partitions windows by scene. Throws DataError when a named scene is absent
// or when the resulting train set is empty.
std::pair<std::vector<SceneWindow>, std::vector<SceneWindow>> make_splits(
    const std::vector<SceneWindow>& windows, const SplitSpec& spec);

// Reads a JSON manifest. Relative scene paths resolve against `data_root`
// when given, else against the manifest's directory.
Manifest load_manifest(const std::filesystem::path& path,
                       const std::optional<std::filesystem::path>& data_root = std::nullopt);

// Loads and windows every scene in the manifest.
std::vector<SceneWindow> load_windows(const Manifest& manifest, const WindowOptions& opts);

enum class SynthKind { kConstantVelocity, kConstantAccel, kTurn, kStop };
std::string_view to_string(SynthKind k);
SynthKind parse_synth_kind(std::string_view s);

struct SynthOptions {
  std::size_t obs_len = 8;
  std::size_t pred_len = 12;
  double noise_sigma = 0.0;
};

// Deterministic synthetic scene. "turn" rotates the heading mid-window,
// "stop" decays speed to zero mid-window.
SceneWindow synth_scene(SynthKind kind, std::size_t n_agents, uint64_t seed,
                        const SynthOptions& opts = {});

// Writes windows to the canonical text format. Window w occupies its own
// frame block and agent ids are renumbered to be unique across windows, so
// re-windowing with stride obs_len + pred_len recovers the windows.
void write_tracks(const std::vector<SceneWindow>& windows, std::ostream& out,
                  int64_t frame_step = 10);

}  // namespace data
}  // namespace trimotion

#endif  // TRIMOTION_DATA_H_

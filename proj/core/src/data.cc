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

#include "trimotion/data.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <ostream>
#include <random>
#include <cctype>
#include <set>
#include <sstream>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "trimotion/errors.h"

namespace trimotion {

std::string_view to_string(Units u) {
  switch (u) {
    case Units::kMeters: return "meters";
    case Units::kPixels: return "pixels";
    case Units::kSynthetic: return "synthetic";
  }
  return "meters";
}

Units parse_units(std::string_view s) {
  if (s == "meters") return Units::kMeters;
  if (s == "pixels") return Units::kPixels;
  if (s == "synthetic") return Units::kSynthetic;
  throw DataError("unknown units tag '" + std::string(s) + "'");
}

std::string_view to_string(TrackFormat f) {
  return f == TrackFormat::kEthUcyTxt ? "ethucy_txt" : "sdd_txt";
}

TrackFormat parse_track_format(std::string_view s) {
  if (s == "ethucy_txt") return TrackFormat::kEthUcyTxt;
  if (s == "sdd_txt") return TrackFormat::kSddTxt;
  throw DataError("unknown track format '" + std::string(s) + "'");
}

namespace data {
namespace {

std::string where(std::string_view source, std::size_t line) {
  return std::string(source) + ":" + std::to_string(line);
}

bool parse_double(std::string_view tok, double& out) {
  const char* end = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(tok.data(), end, out);
  return ec == std::errc() && ptr == end && std::isfinite(out);
}

// Ids may be written as "780" or "780.0"; anything non-integral is rejected.
bool parse_id(std::string_view tok, int64_t& out) {
  double v = 0.0;
  if (!parse_double(tok, v) || v != std::floor(v) || std::abs(v) > 9.0e15) return false;
  out = static_cast<int64_t>(v);
  return true;
}

void append_number(std::ostream& out, double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  out.write(buf, ptr - buf);
}

Vec2 rotate(const Vec2& v, double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  return {c * v.x - s * v.y, s * v.x + c * v.y};
}

}  // namespace

std::vector<RawTrack> parse_tracks(std::string_view text, std::string_view source) {
  std::map<int64_t, std::map<int64_t, Vec2>> by_agent;
  std::map<std::pair<int64_t, int64_t>, std::size_t> seen;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }

    std::vector<std::string_view> fields;
    std::size_t i = 0;
    while (i < line.size()) {
      while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
      const std::size_t start = i;
      while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
      if (i > start) fields.push_back(line.substr(start, i - start));
    }
    if (fields.empty()) continue;
    if (fields.size() != 4) {
      throw DataError(where(source, line_no) + ": expected 4 fields `frame agent x y`, got " +
                      std::to_string(fields.size()));
    }
    int64_t frame = 0;
    int64_t agent = 0;
    Vec2 p;
    if (!parse_id(fields[0], frame) || !parse_id(fields[1], agent) ||
        !parse_double(fields[2], p.x) || !parse_double(fields[3], p.y)) {
      throw DataError(where(source, line_no) + ": unparseable record '" + std::string(line) +
                      "'");
    }
    const auto [it, inserted] = seen.emplace(std::make_pair(frame, agent), line_no);
    if (!inserted) {
      throw DataError(where(source, line_no) + ": duplicate (frame " + std::to_string(frame) +
                      ", agent " + std::to_string(agent) + "), first seen on line " +
                      std::to_string(it->second));
    }
    by_agent[agent][frame] = p;
  }

  std::vector<RawTrack> tracks;
  tracks.reserve(by_agent.size());
  for (const auto& [agent, frames] : by_agent) {
    RawTrack t;
    t.agent_id = agent;
    for (const auto& [f, p] : frames) {
      t.frames.push_back(f);
      t.coords.push_back(p);
    }
    tracks.push_back(std::move(t));
  }
  return tracks;
}

std::vector<RawTrack> load_tracks(const std::filesystem::path& path, TrackFormat format) {
  (void)format;  // both formats share the canonical layout after conversion
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open track file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_tracks(ss.str(), path.string());
}

int64_t infer_frame_step(const std::vector<RawTrack>& tracks) {
  int64_t step = 0;
  for (const RawTrack& t : tracks) {
    for (std::size_t i = 1; i < t.frames.size(); ++i) {
      const int64_t d = t.frames[i] - t.frames[i - 1];
      if (d > 0 && (step == 0 || d < step)) step = d;
    }
  }
  return step == 0 ? 1 : step;
}

std::vector<SceneWindow> window_scenes(const std::vector<RawTrack>& tracks,
                                       const std::string& scene_id, Units units,
                                       const WindowOptions& opts) {
  if (opts.obs_len < 3 || opts.pred_len < 1 || opts.stride < 1) {
    throw InvalidInput("window_scenes: need obs_len >= 3, pred_len >= 1, stride >= 1");
  }
  std::vector<SceneWindow> windows;
  if (tracks.empty()) return windows;

  const int64_t step = opts.frame_step > 0 ? opts.frame_step : infer_frame_step(tracks);
  const int64_t len = static_cast<int64_t>(opts.obs_len + opts.pred_len);

  // Sorted by agent id so the output does not depend on input order.
  std::map<int64_t, std::unordered_map<int64_t, Vec2>> lookup;
  int64_t first = INT64_MAX;
  int64_t last = INT64_MIN;
  for (const RawTrack& t : tracks) {
    auto& m = lookup[t.agent_id];
    for (std::size_t i = 0; i < t.frames.size(); ++i) {
      m[t.frames[i]] = t.coords[i];
      first = std::min(first, t.frames[i]);
      last = std::max(last, t.frames[i]);
    }
  }

  const int64_t stride_frames = static_cast<int64_t>(opts.stride) * step;
  for (int64_t start = first; start + (len - 1) * step <= last; start += stride_frames) {
    SceneWindow w;
    w.scene_id = scene_id;
    w.start_frame = start;
    w.units = units;
    for (const auto& [agent, frames] : lookup) {
      PositionSeq obs;
      PositionSeq fut;
      obs.frame_interval = fut.frame_interval = opts.frame_interval;
      bool complete = true;
      for (int64_t j = 0; j < len && complete; ++j) {
        const auto it = frames.find(start + j * step);
        if (it == frames.end()) {
          complete = false;
        } else if (j < static_cast<int64_t>(opts.obs_len)) {
          obs.points.push_back(it->second);
        } else {
          fut.points.push_back(it->second);
        }
      }
      if (!complete) continue;
      w.agent_ids.push_back(agent);
      w.observed.push_back(kinematics::observed_triple(obs));
      w.future.push_back(std::move(fut));
    }
    if (!w.agent_ids.empty()) windows.push_back(std::move(w));
  }
  return windows;
}

std::pair<std::vector<SceneWindow>, std::vector<SceneWindow>> make_splits(
    const std::vector<SceneWindow>& windows, const SplitSpec& spec) {
  std::set<std::string> present;
  for (const SceneWindow& w : windows) present.insert(w.scene_id);

  std::vector<SceneWindow> train;
  std::vector<SceneWindow> test;
  if (spec.protocol == SplitSpec::Protocol::kLeaveOneOut) {
    if (!present.contains(spec.held_out)) {
      throw DataError("held-out scene '" + spec.held_out + "' is absent from the corpus");
    }
    for (const SceneWindow& w : windows) {
      (w.scene_id == spec.held_out ? test : train).push_back(w);
    }
  } else {
    const std::set<std::string> train_set(spec.train_scenes.begin(), spec.train_scenes.end());
    const std::set<std::string> test_set(spec.test_scenes.begin(), spec.test_scenes.end());
    for (const std::string& s : test_set) {
      if (train_set.contains(s)) throw DataError("scene '" + s + "' is in both train and test");
    }
    for (const auto* names : {&train_set, &test_set}) {
      for (const std::string& s : *names) {
        if (!present.contains(s)) throw DataError("split scene '" + s + "' is absent");
      }
    }
    for (const SceneWindow& w : windows) {
      if (train_set.contains(w.scene_id)) train.push_back(w);
      if (test_set.contains(w.scene_id)) test.push_back(w);
    }
  }
  if (train.empty()) throw DataError("split leaves the training set empty");
  return {std::move(train), std::move(test)};
}

Manifest load_manifest(const std::filesystem::path& path,
                       const std::optional<std::filesystem::path>& data_root) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open manifest " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("manifest " + path.string() + ": " + e.what());
  }
  const std::filesystem::path base = data_root ? *data_root : path.parent_path();
  Manifest m;
  try {
    for (const auto& s : j.at("scenes")) {
      ManifestEntry e;
      e.name = s.at("name").get<std::string>();
      e.path = s.at("path").get<std::string>();
      if (e.path.is_relative()) e.path = base / e.path;
      e.units = parse_units(s.value("units", std::string("meters")));
      e.format = parse_track_format(s.value("format", std::string("ethucy_txt")));
      m.scenes.push_back(std::move(e));
    }
    if (j.contains("split")) {
      const auto& sj = j.at("split");
      SplitSpec spec;
      const std::string protocol = sj.value("protocol", std::string("leave_one_out"));
      if (protocol == "leave_one_out") {
        spec.protocol = SplitSpec::Protocol::kLeaveOneOut;
        spec.held_out = sj.at("held_out").get<std::string>();
      } else if (protocol == "fixed") {
        spec.protocol = SplitSpec::Protocol::kFixed;
        spec.train_scenes = sj.at("train").get<std::vector<std::string>>();
        spec.test_scenes = sj.at("test").get<std::vector<std::string>>();
      } else {
        throw DataError("manifest " + path.string() + ": unknown split protocol '" +
                        protocol + "'");
      }
      m.split = std::move(spec);
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError("manifest " + path.string() + ": " + e.what());
  }
  return m;
}

std::vector<SceneWindow> load_windows(const Manifest& manifest, const WindowOptions& opts) {
  std::vector<SceneWindow> all;
  for (const ManifestEntry& e : manifest.scenes) {
    auto w = window_scenes(load_tracks(e.path, e.format), e.name, e.units, opts);
    all.insert(all.end(), std::make_move_iterator(w.begin()), std::make_move_iterator(w.end()));
  }
  return all;
}

std::string_view to_string(SynthKind k) {
  switch (k) {
    case SynthKind::kConstantVelocity: return "constant_velocity";
    case SynthKind::kConstantAccel: return "constant_accel";
    case SynthKind::kTurn: return "turn";
    case SynthKind::kStop: return "stop";
  }
  return "constant_velocity";
}

SynthKind parse_synth_kind(std::string_view s) {
  if (s == "constant_velocity") return SynthKind::kConstantVelocity;
  if (s == "constant_accel") return SynthKind::kConstantAccel;
  if (s == "turn") return SynthKind::kTurn;
  if (s == "stop") return SynthKind::kStop;
  throw InvalidInput("unknown synthetic scene kind '" + std::string(s) + "'");
}

SceneWindow synth_scene(SynthKind kind, std::size_t n_agents, uint64_t seed,
                        const SynthOptions& opts) {
  if (n_agents == 0) throw InvalidInput("synth_scene: need at least one agent");
  if (opts.obs_len < 3 || opts.pred_len < 1) {
    throw InvalidInput("synth_scene: need obs_len >= 3 and pred_len >= 1");
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> noise(0.0, opts.noise_sigma > 0 ? opts.noise_sigma : 1.0);
  const std::size_t len = opts.obs_len + opts.pred_len;
  const std::size_t mid = len / 2;
  constexpr double kTwoPi = 2.0 * std::numbers::pi;

  SceneWindow w;
  w.scene_id = "synth_" + std::string(to_string(kind));
  w.units = Units::kSynthetic;
  for (std::size_t a = 0; a < n_agents; ++a) {
    const Vec2 start{-4.0 + 8.0 * unit(rng), -4.0 + 8.0 * unit(rng)};
    const double heading = kTwoPi * unit(rng);
    const double speed = 0.3 + 0.3 * unit(rng);
    const Vec2 v0{speed * std::cos(heading), speed * std::sin(heading)};
    const double accel_dir = kTwoPi * unit(rng);
    const double accel_mag = 0.01 + 0.02 * unit(rng);
    const Vec2 acc{accel_mag * std::cos(accel_dir), accel_mag * std::sin(accel_dir)};
    const double turn = (unit(rng) < 0.5 ? -1.0 : 1.0) *
                        (std::numbers::pi / 4.0 + (std::numbers::pi / 4.0) * unit(rng));

    std::vector<Vec2> pts{start};
    for (std::size_t t = 0; t + 1 < len; ++t) {
      Vec2 v = v0;
      const double td = static_cast<double>(t);
      const double since_mid = td - static_cast<double>(mid) + 1.0;
      switch (kind) {
        case SynthKind::kConstantVelocity: break;
        case SynthKind::kConstantAccel: v = v0 + td * acc; break;
        case SynthKind::kTurn: v = rotate(v0, turn * std::clamp(since_mid / 2.0, 0.0, 1.0)); break;
        case SynthKind::kStop: v = v0 * std::clamp(1.0 - since_mid / 4.0, 0.0, 1.0); break;
      }
      pts.push_back(pts.back() + v);
    }
    if (opts.noise_sigma > 0.0) {
      for (Vec2& p : pts) p += Vec2{noise(rng), noise(rng)};
    }

    PositionSeq obs;
    PositionSeq fut;
    obs.points.assign(pts.begin(), pts.begin() + static_cast<std::ptrdiff_t>(opts.obs_len));
    fut.points.assign(pts.begin() + static_cast<std::ptrdiff_t>(opts.obs_len), pts.end());
    w.agent_ids.push_back(static_cast<int64_t>(a));
    w.observed.push_back(kinematics::observed_triple(obs));
    w.future.push_back(std::move(fut));
  }
  return w;
}

void write_tracks(const std::vector<SceneWindow>& windows, std::ostream& out,
                  int64_t frame_step) {
  int64_t next_agent = 0;
  for (std::size_t wi = 0; wi < windows.size(); ++wi) {
    const SceneWindow& w = windows[wi];
    const int64_t len = static_cast<int64_t>(w.obs_len() + w.pred_len());
    const int64_t base = static_cast<int64_t>(wi) * len;
    // Frame-major order, like the usual preprocessed files.
    for (int64_t t = 0; t < len; ++t) {
      for (std::size_t a = 0; a < w.num_agents(); ++a) {
        const std::size_t obs_len = w.observed[a].size();
        const Vec2& p = t < static_cast<int64_t>(obs_len)
                            ? w.observed[a].position[static_cast<std::size_t>(t)]
                            : w.future[a][static_cast<std::size_t>(t) - obs_len];
        out << (base + t) * frame_step << ' ' << next_agent + static_cast<int64_t>(a) << ' ';
        append_number(out, p.x);
        out << ' ';
        append_number(out, p.y);
        out << '\n';
      }
    }
    next_agent += static_cast<int64_t>(w.num_agents());
  }
}

}  // namespace data
}  // namespace trimotion

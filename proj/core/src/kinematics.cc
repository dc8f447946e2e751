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

#include "trimotion/kinematics.h"

#include <string>

#include "trimotion/errors.h"

namespace trimotion::kinematics {
namespace {

void require_finite(const std::vector<Vec2>& seq, const char* what) {
  for (std::size_t i = 0; i < seq.size(); ++i) {
    if (!seq[i].finite()) {
      throw InvalidInput(std::string(what) + ": non-finite element at index " +
                         std::to_string(i));
    }
  }
}

std::vector<Vec2> forward_difference(const std::vector<Vec2>& seq, const char* what) {
  if (seq.size() < 2) {
    throw InvalidInput(std::string(what) + ": need at least 2 elements, got " +
                       std::to_string(seq.size()));
  }
  require_finite(seq, what);
  std::vector<Vec2> out;
  out.reserve(seq.size() - 1);
  for (std::size_t j = 0; j + 1 < seq.size(); ++j) out.push_back(seq[j + 1] - seq[j]);
  return out;
}

std::vector<Vec2> anchored_difference(const std::vector<Vec2>& seq, const Vec2& anchor,
                                      const char* what) {
  if (seq.empty()) throw InvalidInput(std::string(what) + ": empty prediction");
  require_finite(seq, what);
  std::vector<Vec2> out;
  out.reserve(seq.size());
  Vec2 prev = anchor;
  for (const Vec2& v : seq) {
    out.push_back(v - prev);
    prev = v;
  }
  return out;
}

}  // namespace

VelocitySeq derive_velocity(const PositionSeq& p) {
  return {forward_difference(p.points, "derive_velocity")};
}

AccelSeq derive_accel(const VelocitySeq& v) {
  return {forward_difference(v.vectors, "derive_accel")};
}

VelocitySeq pseudo_velocity(const PositionSeq& pred_pos, const Vec2& last_obs_pos) {
  return {anchored_difference(pred_pos.points, last_obs_pos, "pseudo_velocity")};
}

AccelSeq pseudo_accel(const VelocitySeq& pred_vel, const Vec2& last_obs_vel) {
  return {anchored_difference(pred_vel.vectors, last_obs_vel, "pseudo_accel")};
}

PositionSeq integrate_positions(const VelocitySeq& vel, const Vec2& start,
                                double frame_interval) {
  if (vel.vectors.empty()) throw InvalidInput("integrate_positions: empty velocity");
  require_finite(vel.vectors, "integrate_positions");
  if (!start.finite()) throw InvalidInput("integrate_positions: non-finite start");
  PositionSeq out;
  out.frame_interval = frame_interval;
  out.points.reserve(vel.size());
  Vec2 cur = start;
  for (const Vec2& v : vel.vectors) {
    cur += v;
    out.points.push_back(cur);
  }
  return out;
}

Vec2 global_velocity(const PositionSeq& p) {
  if (p.size() < 2) {
    throw InvalidInput("global_velocity: need at least 2 positions, got " +
                       std::to_string(p.size()));
  }
  return (p.points.back() - p.points.front()) / static_cast<double>(p.size() - 1);
}

std::vector<Vec2> left_pad(const std::vector<Vec2>& seq, std::size_t length) {
  if (seq.empty()) throw InvalidInput("left_pad: empty sequence");
  if (seq.size() >= length) return seq;
  std::vector<Vec2> out(length - seq.size(), seq.front());
  out.insert(out.end(), seq.begin(), seq.end());
  return out;
}

KinematicTriple observed_triple(const PositionSeq& p) {
  if (p.size() < 3) {
    throw InvalidInput("observed_triple: need at least 3 positions, got " +
                       std::to_string(p.size()));
  }
  const VelocitySeq v = derive_velocity(p);
  const AccelSeq a = derive_accel(v);
  return {p, {left_pad(v.vectors, p.size())}, {left_pad(a.vectors, p.size())}};
}

}  // namespace trimotion::kinematics

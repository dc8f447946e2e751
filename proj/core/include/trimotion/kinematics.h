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

#ifndef TRIMOTION_KINEMATICS_H_
#define TRIMOTION_KINEMATICS_H_

#include <cmath>
#include <cstddef>
#include <vector>

namespace trimotion {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  constexpr Vec2& operator+=(const Vec2& o) {
    x += o.x;
    y += o.y;
    return *this;
  }
  constexpr Vec2& operator-=(const Vec2& o) {
    x -= o.x;
    y -= o.y;
    return *this;
  }
  friend constexpr Vec2 operator+(Vec2 a, const Vec2& b) { return a += b; }
  friend constexpr Vec2 operator-(Vec2 a, const Vec2& b) { return a -= b; }
  friend constexpr Vec2 operator*(double s, const Vec2& v) { return {s * v.x, s * v.y}; }
  friend constexpr Vec2 operator*(const Vec2& v, double s) { return {s * v.x, s * v.y}; }
  friend constexpr Vec2 operator/(const Vec2& v, double s) { return {v.x / s, v.y / s}; }
  friend constexpr bool operator==(const Vec2&, const Vec2&) = default;

  double norm() const { return std::hypot(x, y); }
  constexpr double dot(const Vec2& o) const { return x * o.x + y * o.y; }
  bool finite() const { return std::isfinite(x) && std::isfinite(y); }
};

// Positions sampled at a fixed frame interval (0.4 s for the benchmark data).
struct PositionSeq {
  std::vector<Vec2> points;
  double frame_interval = 0.4;

  std::size_t size() const { return points.size(); }
  const Vec2& operator[](std::size_t i) const { return points[i]; }
};

// Per-step displacement P[j+1] - P[j].
struct VelocitySeq {
  std::vector<Vec2> vectors;

  std::size_t size() const { return vectors.size(); }
  const Vec2& operator[](std::size_t i) const { return vectors[i]; }
};

// Per-step velocity change V[j+1] - V[j].
struct AccelSeq {
  std::vector<Vec2> vectors;

  std::size_t size() const { return vectors.size(); }
  const Vec2& operator[](std::size_t i) const { return vectors[i]; }
};

// Position, velocity and acceleration of one agent, aligned to a common length.
struct KinematicTriple {
  PositionSeq position;
  VelocitySeq velocity;
  AccelSeq accel;

  std::size_t size() const { return position.size(); }
};

namespace kinematics {

// Throws InvalidInput when fewer than two points are given.
VelocitySeq derive_velocity(const PositionSeq& p);
AccelSeq derive_accel(const VelocitySeq& v);

// Differencing anchored on the last observed sample: the first element is
// pred[0] - anchor, so the output keeps the prediction length.
VelocitySeq pseudo_velocity(const PositionSeq& pred_pos, const Vec2& last_obs_pos);
AccelSeq pseudo_accel(const VelocitySeq& pred_vel, const Vec2& last_obs_vel);

// Cumulative sum of `vel` starting from `start` (the start point itself is
// not emitted). Inverse of derive_velocity up to the first point.
PositionSeq integrate_positions(const VelocitySeq& vel, const Vec2& start,
                                double frame_interval = 0.4);

// Mean per-frame displacement between the first and last observation.
Vec2 global_velocity(const PositionSeq& p);

// Repeats the first element at the front until the sequence has `length`
// entries. Used to align observed V (T-1) and A (T-2) with P (T).
std::vector<Vec2> left_pad(const std::vector<Vec2>& seq, std::size_t length);

// Derives the observed triple from T positions with V and A left-padded to T.
KinematicTriple observed_triple(const PositionSeq& p);

}  // namespace kinematics
}  // namespace trimotion

#endif  // TRIMOTION_KINEMATICS_H_

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

#include <cmath>
#include <limits>
#include <vector>

#include <gtest/gtest.h>
#include <torch/torch.h>

#include "test_util.h"
#include "trimotion/errors.h"
#include "trimotion/kinematics.h"
#include "trimotion/tensor_kinematics.h"

namespace trimotion {
namespace {

using kinematics::derive_accel;
using kinematics::derive_velocity;
using kinematics::global_velocity;
using kinematics::integrate_positions;
using kinematics::pseudo_accel;
using kinematics::pseudo_velocity;
using testing::Gen;

PositionSeq pos(std::vector<Vec2> pts) { return {std::move(pts), 0.4}; }

void expect_vecs(const std::vector<Vec2>& got, const std::vector<Vec2>& want) {
  ASSERT_EQ(got.size(), want.size());
  for (std::size_t i = 0; i < got.size(); ++i) {
    EXPECT_DOUBLE_EQ(got[i].x, want[i].x) << "index " << i;
    EXPECT_DOUBLE_EQ(got[i].y, want[i].y) << "index " << i;
  }
}

TEST(DeriveVelocity, Examples) {
  expect_vecs(derive_velocity(pos({{0, 0}, {1, 0}, {2, 0}})).vectors, {{1, 0}, {1, 0}});
  expect_vecs(derive_velocity(pos({{0, 0}, {0, 0}})).vectors, {{0, 0}});
  expect_vecs(derive_velocity(pos({{0, 0}, {1, 0}, {1, 1}})).vectors, {{1, 0}, {0, 1}});
}

TEST(DeriveVelocity, RejectsShortOrNonFinite) {
  EXPECT_THROW(derive_velocity(pos({{0, 0}})), InvalidInput);
  EXPECT_THROW(derive_velocity(pos({})), InvalidInput);
  EXPECT_THROW(derive_velocity(pos({{0, 0}, {std::nan(""), 0}})), InvalidInput);
}

TEST(DeriveAccel, Examples) {
  expect_vecs(derive_accel({{{1, 0}, {1, 0}}}).vectors, {{0, 0}});
  expect_vecs(derive_accel({{{1, 0}, {2, 0}, {4, 0}}}).vectors, {{1, 0}, {2, 0}});
  expect_vecs(derive_accel({{{1, 0}, {0, 1}}}).vectors, {{-1, 1}});
  EXPECT_THROW(derive_accel({{{1, 0}}}), InvalidInput);
}

TEST(PseudoVelocity, Examples) {
  expect_vecs(pseudo_velocity(pos({{1, 0}, {2, 0}}), {0, 0}).vectors, {{1, 0}, {1, 0}});
  expect_vecs(pseudo_velocity(pos({{0, 0}}), {0, 0}).vectors, {{0, 0}});
  expect_vecs(pseudo_velocity(pos({{3, 4}}), {0, 0}).vectors, {{3, 4}});
  EXPECT_THROW(pseudo_velocity(pos({}), {0, 0}), InvalidInput);
}

TEST(PseudoAccel, Examples) {
  expect_vecs(pseudo_accel({{{1, 0}, {1, 0}}}, {1, 0}).vectors, {{0, 0}, {0, 0}});
  expect_vecs(pseudo_accel({{{2, 0}}}, {1, 0}).vectors, {{1, 0}});
  expect_vecs(pseudo_accel({{{0, 1}, {0, 3}}}, {0, 0}).vectors, {{0, 1}, {0, 2}});
  EXPECT_THROW(pseudo_accel({}, {0, 0}), InvalidInput);
}

TEST(IntegratePositions, Examples) {
  expect_vecs(integrate_positions({{{1, 0}, {1, 0}}}, {0, 0}).points, {{1, 0}, {2, 0}});
  expect_vecs(integrate_positions({{{0, 0}}}, {5, 5}).points, {{5, 5}});
  const PositionSeq p = pos({{0, 0}, {1, 2}, {4, 4}, {4, 5}});
  expect_vecs(integrate_positions(derive_velocity(p), p[0]).points,
              {p.points.begin() + 1, p.points.end()});
}

TEST(IntegratePositions, RejectsEmptyAndNonFinite) {
  EXPECT_THROW(integrate_positions({}, {0, 0}), InvalidInput);
  EXPECT_THROW(integrate_positions({{{std::numeric_limits<double>::infinity(), 0}}}, {0, 0}),
               InvalidInput);
}

TEST(GlobalVelocity, Examples) {
  const Vec2 a = global_velocity(pos({{0, 0}, {2, 0}, {4, 0}}));
  EXPECT_DOUBLE_EQ(a.x, 2.0);
  EXPECT_DOUBLE_EQ(a.y, 0.0);
  EXPECT_EQ(global_velocity(pos({{1, 1}, {1, 1}})), (Vec2{0, 0}));
  const Vec2 c = global_velocity(pos({{0, 0}, {0, 0}, {3, 3}}));
  EXPECT_DOUBLE_EQ(c.x, 1.5);
  EXPECT_DOUBLE_EQ(c.y, 1.5);
  EXPECT_THROW(global_velocity(pos({{0, 0}})), InvalidInput);
}

TEST(ObservedTriple, LeftPadsToCommonLength) {
  const PositionSeq p = pos({{0, 0}, {1, 0}, {3, 0}, {6, 0}});
  const KinematicTriple t = kinematics::observed_triple(p);
  EXPECT_EQ(t.position.size(), 4u);
  expect_vecs(t.velocity.vectors, {{1, 0}, {1, 0}, {2, 0}, {3, 0}});
  expect_vecs(t.accel.vectors, {{1, 0}, {1, 0}, {1, 0}, {1, 0}});
  EXPECT_THROW(kinematics::observed_triple(pos({{0, 0}, {1, 0}})), InvalidInput);
}

TEST(KinematicsProperty, RoundTripAndLengths) {
  Gen g(11);
  for (int trial = 0; trial < 500; ++trial) {
    const PositionSeq p = g.positions(g.size(2, 40), 100.0);
    const VelocitySeq v = derive_velocity(p);
    ASSERT_EQ(v.size(), p.size() - 1);
    const PositionSeq back = integrate_positions(v, p[0]);
    ASSERT_EQ(back.size(), p.size() - 1);
    for (std::size_t i = 0; i < back.size(); ++i) {
      ASSERT_TRUE(testing::near(back[i], p[i + 1], 1e-9));
    }
    if (v.size() >= 2) ASSERT_EQ(derive_accel(v).size(), v.size() - 1);
    const Vec2 anchor = g.vec();
    ASSERT_EQ(pseudo_velocity(p, anchor).size(), p.size());
    ASSERT_EQ(pseudo_accel(v, anchor).size(), v.size());
  }
}

TEST(KinematicsProperty, Linearity) {
  Gen g(12);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = g.size(2, 30);
    const PositionSeq p = g.positions(n);
    const PositionSeq q = g.positions(n);
    const double a = g.uniform(-3, 3);
    const double b = g.uniform(-3, 3);
    PositionSeq mix;
    for (std::size_t i = 0; i < n; ++i) mix.points.push_back(a * p[i] + b * q[i]);
    const auto dm = derive_velocity(mix);
    const auto dp = derive_velocity(p);
    const auto dq = derive_velocity(q);
    for (std::size_t i = 0; i < dm.size(); ++i) {
      ASSERT_TRUE(testing::near(dm[i], a * dp[i] + b * dq[i], 1e-9));
    }
  }
}

TEST(KinematicsProperty, TranslationInvariance) {
  Gen g(13);
  for (int trial = 0; trial < 200; ++trial) {
    const PositionSeq p = g.positions(g.size(3, 30));
    const Vec2 c = g.vec(50.0);
    PositionSeq shifted = p;
    for (auto& pt : shifted.points) pt += c;
    const auto v = derive_velocity(p);
    const auto vs = derive_velocity(shifted);
    for (std::size_t i = 0; i < v.size(); ++i) ASSERT_TRUE(testing::near(v[i], vs[i], 1e-9));

    VelocitySeq offset = v;
    for (auto& x : offset.vectors) x += c;
    const auto a = derive_accel(v);
    const auto ao = derive_accel(offset);
    for (std::size_t i = 0; i < a.size(); ++i) ASSERT_TRUE(testing::near(a[i], ao[i], 1e-9));
  }
}

TEST(TensorKinematics, MatchesScalarImplementation) {
  Gen g(14);
  const std::size_t n = 9;
  const PositionSeq p = g.positions(n);
  const Vec2 anchor = g.vec();
  auto t = torch::empty({1, static_cast<int64_t>(n), 2}, torch::kFloat64);
  for (std::size_t i = 0; i < n; ++i) {
    t[0][static_cast<int64_t>(i)][0] = p[i].x;
    t[0][static_cast<int64_t>(i)][1] = p[i].y;
  }
  const auto anchor_t = torch::tensor({anchor.x, anchor.y}, torch::kFloat64).unsqueeze(0);

  const auto dv = kinematics::derive(t);
  const auto sv = derive_velocity(p);
  const auto pv = kinematics::pseudo_velocity(t, anchor_t);
  const auto spv = pseudo_velocity(p, anchor);
  ASSERT_EQ(dv.size(1), static_cast<int64_t>(n - 1));
  ASSERT_EQ(pv.size(1), static_cast<int64_t>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const auto k = static_cast<int64_t>(i);
    if (i + 1 < n) {
      EXPECT_NEAR(dv[0][k][0].item<double>(), sv[i].x, 1e-12);
      EXPECT_NEAR(dv[0][k][1].item<double>(), sv[i].y, 1e-12);
    }
    EXPECT_NEAR(pv[0][k][0].item<double>(), spv[i].x, 1e-12);
    EXPECT_NEAR(pv[0][k][1].item<double>(), spv[i].y, 1e-12);
  }
  const auto gv = kinematics::global_velocity(t);
  const Vec2 sg = global_velocity(p);
  EXPECT_NEAR(gv[0][0].item<double>(), sg.x, 1e-12);
  EXPECT_NEAR(gv[0][1].item<double>(), sg.y, 1e-12);
}

}  // namespace
}  // namespace trimotion

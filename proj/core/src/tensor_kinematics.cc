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

#include "trimotion/tensor_kinematics.h"

#include "trimotion/errors.h"

namespace trimotion::kinematics {

namespace idx = torch::indexing;

torch::Tensor derive(const torch::Tensor& seq) {
  if (seq.dim() < 2 || seq.size(-2) < 2) {
    throw InvalidInput("derive: need a time dimension of at least 2 steps");
  }
  return seq.index({idx::Ellipsis, idx::Slice(1, idx::None), idx::Slice()}) -
         seq.index({idx::Ellipsis, idx::Slice(idx::None, -1), idx::Slice()});
}

torch::Tensor anchored_difference(const torch::Tensor& seq, const torch::Tensor& anchor) {
  if (seq.dim() < 2 || seq.size(-2) == 0) {
    throw InvalidInput("anchored_difference: empty prediction");
  }
  // Insert singleton dims so [M, 2] anchors broadcast against [M, K, T, 2].
  torch::Tensor a = anchor;
  while (a.dim() < seq.dim() - 1) a = a.unsqueeze(-2);
  const torch::Tensor prev = torch::cat(
      {a.unsqueeze(-2).expand_as(seq.index({idx::Ellipsis, idx::Slice(0, 1), idx::Slice()})),
       seq.index({idx::Ellipsis, idx::Slice(idx::None, -1), idx::Slice()})},
      -2);
  return seq - prev;
}

torch::Tensor global_velocity(const torch::Tensor& pos) {
  const int64_t steps = pos.size(-2);
  if (steps < 2) throw InvalidInput("global_velocity: need at least 2 positions");
  return (pos.select(-2, steps - 1) - pos.select(-2, 0)) / static_cast<double>(steps - 1);
}

}  // namespace trimotion::kinematics

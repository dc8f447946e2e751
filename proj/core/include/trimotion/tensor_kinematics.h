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

#ifndef TRIMOTION_TENSOR_KINEMATICS_H_
#define TRIMOTION_TENSOR_KINEMATICS_H_

#include <torch/torch.h>

// Batched counterparts of the kinematics routines. Sequences carry time on
// dim -2 and (x, y) on dim -1; any leading dims are batch dims.
namespace trimotion::kinematics {

// Forward difference along time: output has one step fewer.
torch::Tensor derive(const torch::Tensor& seq);

// Anchored difference: out[..., 0, :] = seq[..., 0, :] - anchor, then
// consecutive differences. `anchor` has the shape of `seq` minus the time
// dim and broadcasts over any extra dims between.
torch::Tensor anchored_difference(const torch::Tensor& seq, const torch::Tensor& anchor);

inline torch::Tensor pseudo_velocity(const torch::Tensor& pred_pos,
                                     const torch::Tensor& last_obs_pos) {
  return anchored_difference(pred_pos, last_obs_pos);
}

inline torch::Tensor pseudo_accel(const torch::Tensor& pred_vel,
                                  const torch::Tensor& last_obs_vel) {
  return anchored_difference(pred_vel, last_obs_vel);
}

// (p[..., T-1, :] - p[..., 0, :]) / (T - 1).
torch::Tensor global_velocity(const torch::Tensor& pos);

}  // namespace trimotion::kinematics

#endif  // TRIMOTION_TENSOR_KINEMATICS_H_

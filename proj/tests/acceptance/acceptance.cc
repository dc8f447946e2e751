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

// Acceptance runner: one PASS/FAIL line per criterion, nonzero exit when any
// criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <functional>
#include <limits>
#include <set>
#include <string>
#include <vector>

#include <torch/torch.h>

#include "test_util.h"
#include "trimotion/data.h"
#include "trimotion/evaluation.h"
#include "trimotion/kinematics.h"
#include "trimotion/losses.h"
#include "trimotion/scoring.h"
#include "trimotion/training.h"

namespace trimotion {
namespace {

using testing::Gen;

struct Verdict {
  bool pass = false;
  std::string detail;
};

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), f, a);
  return buf;
}

// 1. derive then integrate reproduces the positions.
Verdict kinematic_round_trip() {
  Gen g(101);
  Stopwatch clock;
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const PositionSeq p = g.positions(g.size(2, 40), 50.0);
    const PositionSeq back = kinematics::integrate_positions(kinematics::derive_velocity(p), p[0]);
    if (back.size() != p.size() - 1) return {false, "integrated length mismatch"};
    for (std::size_t j = 1; j < p.size(); ++j) {
      worst = std::max({worst, std::abs(back[j - 1].x - p[j].x), std::abs(back[j - 1].y - p[j].y)});
    }
  }
  const double t = clock.seconds();
  return {worst <= 1e-9 && t < 1.0,
          "max abs error " + fmt("%.3g", worst) + ", " + fmt("%.3f", t) + " s"};
}

// Largest relative error between autograd and a central difference of f.
double grad_error(const std::function<torch::Tensor(const torch::Tensor&)>& f, torch::Tensor x) {
  x = x.detach().clone().requires_grad_(true);
  f(x).backward();
  const torch::Tensor analytic = x.grad().view(-1).clone();
  const double h = 1e-5;
  torch::Tensor flat = x.detach().view(-1);
  auto acc = flat.accessor<double, 1>();
  double worst = 0.0;
  for (int64_t i = 0; i < flat.numel(); ++i) {
    const double orig = acc[i];
    acc[i] = orig + h;
    const double up = f(x.detach()).item<double>();
    acc[i] = orig - h;
    const double down = f(x.detach()).item<double>();
    acc[i] = orig;
    const double numeric = (up - down) / (2.0 * h);
    const double a = analytic[i].item<double>();
    worst = std::max(worst, std::abs(a - numeric) /
                                std::max({std::abs(a), std::abs(numeric), 1e-6}));
  }
  return worst;
}

torch::Tensor randn(std::vector<int64_t> shape) {
  return torch::randn(shape, torch::kFloat64);
}

// Moves entries of `x` lying within `gap` of |x - ref| == edge outside that band.
torch::Tensor away_from_edge(const torch::Tensor& x, const torch::Tensor& ref, double edge,
                             double gap) {
  const torch::Tensor d = x - ref;
  const torch::Tensor close = (d.abs() - edge).abs() < gap;
  return torch::where(close, ref + d.sign() * (edge + 2.0 * gap), x);
}

// True when the two smallest distances of every row differ by at least gap.
bool clear_argmin(const torch::Tensor& d, double gap) {
  const torch::Tensor sorted = std::get<0>(d.sort(1));
  return (sorted.select(1, 1) - sorted.select(1, 0)).min().item<double>() >= gap;
}

// 2. autograd of every loss term against finite differences.
Verdict loss_gradients() {
  torch::manual_seed(202);
  LossConfig cfg;
  cfg.epsilon = 0.1;
  Stopwatch clock;
  const int kPoints = 100;
  double worst[5] = {0, 0, 0, 0, 0};
  for (int i = 0; i < kPoints; ++i) {
    {
      const torch::Tensor gt = randn({16});
      const torch::Tensor x = away_from_edge(randn({16}), gt, cfg.epsilon, 1e-3);
      worst[0] = std::max(worst[0], grad_error([&](const torch::Tensor& p) {
        return losses::diff_tolerance(p, gt, cfg.epsilon).sum();
      }, x));
    }
    {
      const torch::Tensor gt = randn({2, 4, 2});
      const torch::Tensor x =
          away_from_edge(randn({2, 3, 4, 2}), gt.unsqueeze(1).expand({2, 3, 4, 2}), cfg.epsilon,
                         1e-3);
      worst[1] = std::max(worst[1], grad_error([&](const torch::Tensor& p) {
        return losses::position_loss(p, gt, cfg);
      }, x));
    }
    {
      const torch::Tensor gv = randn({2, 4, 2});
      const torch::Tensor ga = randn({2, 4, 2});
      const torch::Tensor v = away_from_edge(randn({2, 4, 2}) * 1.5, gv, cfg.huber_delta, 1e-3);
      const torch::Tensor a = away_from_edge(randn({2, 4, 2}) * 1.5, ga, cfg.huber_delta, 1e-3);
      worst[2] = std::max(worst[2], grad_error([&](const torch::Tensor& x) {
        return losses::va_loss(x, gv, a, ga, cfg);
      }, v));
      worst[2] = std::max(worst[2], grad_error([&](const torch::Tensor& x) {
        return losses::va_loss(v, gv, x, ga, cfg);
      }, a));
    }
    {
      const torch::Tensor last = randn({2, 2});
      const torch::Tensor acc = randn({2, 3, 4, 2});
      const torch::Tensor vel = randn({2, 3, 4, 2});
      worst[3] = std::max(worst[3], grad_error([&](const torch::Tensor& v) {
        return losses::cons1_loss(v, acc, last);
      }, vel));
      worst[3] = std::max(worst[3], grad_error([&](const torch::Tensor& a) {
        return losses::cons1_loss(vel, a, last);
      }, acc));
    }
    {
      torch::Tensor pv, pa, sv, sa;
      do {
        pv = randn({2, 5, 4, 2});
        pa = randn({2, 5, 4, 2});
        sv = randn({2, 4, 2});
        sa = randn({2, 4, 2});
      } while (!clear_argmin(losses::candidate_distances(pv, sv), 1e-3) ||
               !clear_argmin(losses::candidate_distances(pa, sa), 1e-3));
      worst[4] = std::max(worst[4], grad_error([&](const torch::Tensor& v) {
        return losses::cons2_loss(v, pa, sv, sa);
      }, pv));
      worst[4] = std::max(worst[4], grad_error([&](const torch::Tensor& a) {
        return losses::cons2_loss(pv, a, sv, sa);
      }, pa));
    }
  }
  const double t = clock.seconds();
  const double all = *std::max_element(std::begin(worst), std::end(worst));
  std::string detail = "max rel error diff " + fmt("%.2g", worst[0]) + " pos " +
                       fmt("%.2g", worst[1]) + " va " + fmt("%.2g", worst[2]) + " cons1 " +
                       fmt("%.2g", worst[3]) + " cons2 " + fmt("%.2g", worst[4]) + ", " +
                       fmt("%.1f", t) + " s";
  return {all < 1e-4 && t < 30.0, detail};
}

double branch_oracle(double pred, double gt, double eps) {
  if (pred > gt + eps) return pred - (gt + eps);
  if (pred < gt - eps) return (gt - eps) - pred;
  return 0.0;
}

// 3. tolerance error on a dense grid around the interval.
Verdict tolerance_branches() {
  Gen g(303);
  int points = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const double gt = g.uniform(-20, 20);
    const double eps = trial == 0 ? 0.05 : g.uniform(0.01, 2.0);
    for (int i = 0; i <= 60; ++i) {
      const double pred = gt + static_cast<double>(i - 30) * eps / 10.0;
      const double got = losses::diff_tolerance(pred, gt, eps);
      const double want = branch_oracle(pred, gt, eps);
      const double tensor_got =
          losses::diff_tolerance(torch::tensor({pred}, torch::kFloat64),
                                 torch::tensor({gt}, torch::kFloat64), eps)
              .item<double>();
      if (got != want || tensor_got != want) {
        return {false, "mismatch at pred " + fmt("%.17g", pred)};
      }
      if (pred >= gt - eps && pred <= gt + eps && got != 0.0) {
        return {false, "nonzero inside the interval at " + fmt("%.17g", pred)};
      }
      ++points;
    }
    for (const double edge : {gt - eps, gt + eps}) {
      if (losses::diff_tolerance(edge, gt, eps) != 0.0) return {false, "nonzero at an edge"};
      for (const double delta : {1e-3, 1e-6, 1e-9}) {
        for (const double side : {-1.0, 1.0}) {
          const double v = losses::diff_tolerance(edge + side * delta, gt, eps);
          if (v > delta * (1.0 + 1e-6) + 1e-12) return {false, "discontinuous at an edge"};
        }
      }
    }
  }
  return {true, std::to_string(points) + " grid points over 50 (gt, eps) pairs"};
}

// 4. cosine bound and scale invariance; similarity identity and sign.
Verdict score_properties() {
  Gen g(404);
  double worst_scale = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const Vec2 a = g.nonzero_vec();
    const Vec2 b = g.nonzero_vec();
    const double dc = scoring::directional_consistency(a, b);
    if (!(std::abs(dc) <= 1.0)) return {false, "|DC| > 1 at pair " + std::to_string(i)};
    const double s1 = std::exp(g.uniform(-6, 6));
    const double s2 = std::exp(g.uniform(-6, 6));
    worst_scale =
        std::max(worst_scale, std::abs(scoring::directional_consistency(s1 * a, s2 * b) - dc));
  }
  if (worst_scale > 1e-12) return {false, "scale changed DC by " + fmt("%.3g", worst_scale)};
  for (int i = 0; i < 1000; ++i) {
    const std::size_t n = g.size(1, 24);
    const AccelSeq x{g.vecs(n)};
    const AccelSeq y{g.vecs(g.size(1, 24))};
    if (scoring::accel_similarity(x, x) != 0.0) return {false, "sim(x, x) != 0"};
    if (!(scoring::accel_similarity(x, y) >= 0.0)) return {false, "negative similarity"};
  }
  return {true, "10000 DC pairs, max scale drift " + fmt("%.2g", worst_scale) +
                    "; 1000 similarity sequences"};
}

// 5. argmax of the combined score is shift invariant in either heuristic.
Verdict selection_invariance() {
  Gen g(505);
  constexpr std::size_t kK = 20;
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> dc(kK), sim(kK);
    for (auto& v : dc) v = g.uniform(-1, 1);
    for (auto& v : sim) v = g.uniform(0, 5);
    const ScoreWeights w{g.uniform(0.05, 2.0), g.uniform(0.05, 2.0)};
    const std::size_t base = scoring::select_best(scoring::combined_scores(dc, sim, w));
    const double c = g.uniform(-10, 10);
    std::vector<double> dc2 = dc, sim2 = sim;
    for (auto& v : dc2) v += c;
    for (auto& v : sim2) v += c;
    if (scoring::select_best(scoring::combined_scores(dc2, sim, w)) != base ||
        scoring::select_best(scoring::combined_scores(dc, sim2, w)) != base) {
      return {false, "selection changed in trial " + std::to_string(trial)};
    }
  }
  return {true, "1000 trials at K=20"};
}

// 6. min-of-K against a direct scan.
Verdict min_of_k_oracle() {
  Gen g(606);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t k = g.size(1, 20);
    const std::size_t t = g.size(1, 24);
    const PositionSeq gt = g.positions(t);
    std::vector<PositionSeq> preds;
    for (std::size_t i = 0; i < k; ++i) preds.push_back(g.positions(t));
    double best_ade = std::numeric_limits<double>::infinity();
    double best_fde = std::numeric_limits<double>::infinity();
    for (const PositionSeq& p : preds) {
      double sum = 0.0;
      for (std::size_t s = 0; s < t; ++s) {
        sum += std::hypot(p[s].x - gt[s].x, p[s].y - gt[s].y);
      }
      const double a = sum / static_cast<double>(t);
      const double f = std::hypot(p[t - 1].x - gt[t - 1].x, p[t - 1].y - gt[t - 1].y);
      if (a < best_ade) best_ade = a;
      if (f < best_fde) best_fde = f;
    }
    if (evaluation::min_of_k(preds, gt, Metric::kAde) != best_ade ||
        evaluation::min_of_k(preds, gt, Metric::kFde) != best_fde) {
      return {false, "mismatch in instance " + std::to_string(trial)};
    }
  }
  return {true, "1000 instances, exact"};
}

// 7. overfit 20 synthetic windows. Seed 0 is the documented seed.
Verdict overfit() {
  Stopwatch clock;
  const data::SynthKind kinds[] = {data::SynthKind::kConstantVelocity, data::SynthKind::kTurn,
                                   data::SynthKind::kStop};
  std::vector<SceneWindow> windows;
  for (uint64_t i = 0; i < 20; ++i) windows.push_back(data::synth_scene(kinds[i % 3], 2, 1000 + i));
  TrainConfig cfg;
  cfg.seed = 0;
  cfg.learning_rate = 1e-3;
  cfg.model.dropout = 0.0;
  cfg.model.k = 20;
  cfg.loss.epsilon = 0.05;
  training::Trainer trainer(cfg);
  std::vector<double> blocks;
  double sum = 0.0;
  for (int step = 1; step <= 500; ++step) {
    sum += trainer.train_step(windows).total;
    if (step % 50 == 0) {
      blocks.push_back(sum / 50.0);
      sum = 0.0;
    }
  }
  const double ade = evaluation::evaluate(trainer.model(), windows, 20, 12).ade;
  const double t = clock.seconds();
  bool decreasing = true;
  std::string curve;
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    if (i > 0 && !(blocks[i] < blocks[i - 1])) decreasing = false;
    curve += (i ? " " : "") + fmt("%.4g", blocks[i]);
  }
  return {ade < 0.05 && decreasing && t < 600.0,
          "min-ADE " + fmt("%.4f", ade) + ", 50-step means [" + curve + "]" +
              (decreasing ? "" : " not strictly decreasing") + ", " + fmt("%.0f", t) + " s"};
}

// 8. full objective against the no_cons2 ablation, same seed and steps.
Verdict consistency_ablation() {
  std::vector<SceneWindow> train, test;
  for (uint64_t i = 0; i < 50; ++i) {
    train.push_back(data::synth_scene(data::SynthKind::kTurn, 2, 2000 + i));
    test.push_back(data::synth_scene(data::SynthKind::kTurn, 2, 3000 + i));
  }
  TrainConfig base;
  base.seed = 0;
  base.learning_rate = 1e-3;
  base.model.dropout = 0.0;
  base.model.k = 20;
  base.loss.epsilon = 0.05;
  constexpr int kEpochs = 4;
  constexpr std::size_t kBatch = 25;

  double ade[2] = {0, 0};
  bool full_used_cons2 = false;
  bool ablation_zero = true;
  for (int run = 0; run < 2; ++run) {
    training::Trainer trainer(run == 0 ? base : training::ablation_variant("no_cons2", base));
    for (int e = 0; e < kEpochs; ++e) {
      for (std::size_t s = 0; s < train.size(); s += kBatch) {
        const LossReport r = trainer.train_step(
            std::span<const SceneWindow>(train).subspan(s, std::min(kBatch, train.size() - s)));
        if (run == 0 && r.cons2 > 0.0) full_used_cons2 = true;
        if (run == 1 && r.cons2 != 0.0) ablation_zero = false;
      }
    }
    ade[run] = evaluation::evaluate(trainer.model(), test, 20, 12).ade;
  }
  const bool finite = std::isfinite(ade[0]) && std::isfinite(ade[1]);
  std::string detail = "test min-ADE full " + fmt("%.4f", ade[0]) + " vs no_cons2 " +
                       fmt("%.4f", ade[1]) + (ade[0] <= ade[1] ? " (full <= ablation)" : " (full > ablation)") +
                       "; ablation cons2 " + (ablation_zero ? "0 at every step" : "NONZERO") +
                       ", full cons2 " + (full_used_cons2 ? "active" : "never active");
  return {finite && ablation_zero && full_used_cons2, detail};
}

// 9. leave-one-out disjointness and the hand-counted window fixture.
Verdict protocol_fidelity() {
  namespace fs = std::filesystem;
  const fs::path dir = TRIMOTION_TEST_DATA_DIR;
  WindowOptions opts;
  const auto windows = data::load_windows(data::load_manifest(dir / "mini_ethucy" / "manifest.json"), opts);
  for (const std::string held : {"eth", "hotel", "univ", "zara1", "zara2"}) {
    const auto [train, test] =
        data::make_splits(windows, {SplitSpec::Protocol::kLeaveOneOut, held, {}, {}});
    std::set<std::string> train_scenes, test_scenes;
    for (const auto& w : train) train_scenes.insert(w.scene_id);
    for (const auto& w : test) test_scenes.insert(w.scene_id);
    for (const auto& s : test_scenes) {
      if (train_scenes.contains(s)) return {false, "scene " + s + " on both sides"};
    }
    if (test_scenes != std::set<std::string>{held} || train_scenes.size() != 4) {
      return {false, "held-out " + held + " split has the wrong scenes"};
    }
  }
  const auto tracks = data::load_tracks(dir / "three_agents.txt", TrackFormat::kEthUcyTxt);
  const auto dense = data::window_scenes(tracks, "f", Units::kMeters, opts);
  std::size_t instances = 0;
  for (const auto& w : dense) instances += w.num_agents();
  opts.stride = 20;
  const auto sparse = data::window_scenes(tracks, "f", Units::kMeters, opts);
  const bool counts = dense.size() == 41 && instances == 73 && sparse.size() == 3 &&
                      sparse[0].agent_ids == std::vector<int64_t>{1, 2} &&
                      sparse[1].agent_ids == std::vector<int64_t>{1, 3} &&
                      sparse[2].agent_ids == std::vector<int64_t>{1, 3};
  return {counts, "5 leave-one-out splits disjoint; fixture windows " +
                      std::to_string(dense.size()) + "/41, agent instances " +
                      std::to_string(instances) + "/73, stride-20 windows " +
                      std::to_string(sparse.size()) + "/3"};
}

// 10. longer horizons train and evaluate.
Verdict long_horizons() {
  std::string detail;
  bool ok = true;
  for (const int64_t horizon : {16, 20, 24}) {
    std::vector<SceneWindow> windows;
    for (uint64_t i = 0; i < 6; ++i) {
      windows.push_back(data::synth_scene(static_cast<data::SynthKind>(i % 4), 3, 4000 + i,
                                          {8, static_cast<std::size_t>(horizon), 0.0}));
    }
    TrainConfig cfg;
    cfg.model.pred_len = horizon;
    training::Trainer trainer(cfg);
    for (int s = 0; s < 3; ++s) trainer.train_step(windows);
    const EvalResult r = evaluation::evaluate(trainer.model(), windows, cfg.model.k, horizon);
    const bool finite = std::isfinite(r.ade) && std::isfinite(r.fde) && r.pred_len == horizon;
    ok = ok && finite;
    detail += (detail.empty() ? "" : "; ") + std::string("T'=") + std::to_string(horizon) +
              " ADE " + fmt("%.3f", r.ade) + " FDE " + fmt("%.3f", r.fde);
  }
  return {ok, detail};
}

}  // namespace
}  // namespace trimotion

int main() {
  using trimotion::Verdict;
  at::set_num_threads(1);
  const std::pair<const char*, Verdict (*)()> criteria[] = {
      {"kinematic round-trip", trimotion::kinematic_round_trip},
      {"loss gradients vs finite differences", trimotion::loss_gradients},
      {"tolerance error branches", trimotion::tolerance_branches},
      {"DC and Sim properties", trimotion::score_properties},
      {"selection shift invariance", trimotion::selection_invariance},
      {"min-of-K oracle", trimotion::min_of_k_oracle},
      {"overfit 20 synthetic windows", trimotion::overfit},
      {"consistency term ablation", trimotion::consistency_ablation},
      {"split protocol and window counts", trimotion::protocol_fidelity},
      {"long horizons", trimotion::long_horizons},
  };
  int failed = 0;
  int index = 0;
  for (const auto& [name, check] : criteria) {
    ++index;
    Verdict v;
    try {
      v = check();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    if (!v.pass) ++failed;
    std::printf("%s %d %s: %s\n", v.pass ? "PASS" : "FAIL", index, name, v.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}

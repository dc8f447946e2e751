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
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>
#include <torch/torch.h>

#include "trimotion/data.h"
#include "trimotion/errors.h"
#include "trimotion/training.h"

namespace trimotion {
namespace {

namespace fs = std::filesystem;

TrainConfig small_config(uint64_t seed = 0) {
  TrainConfig c;
  c.seed = seed;
  c.model.d_model = 32;
  c.model.n_heads = 4;
  c.model.ff_dim = 64;
  c.model.n_layers_enc = 4;
  c.model.n_layers_dec = 4;
  c.model.k = 6;
  return c;
}

std::vector<SceneWindow> synth_batch(uint64_t seed, std::size_t n = 4) {
  const data::SynthKind kinds[] = {data::SynthKind::kConstantVelocity, data::SynthKind::kTurn,
                                   data::SynthKind::kStop, data::SynthKind::kConstantAccel};
  std::vector<SceneWindow> out;
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back(data::synth_scene(kinds[i % 4], 2 + i % 2, seed * 100 + i));
  }
  return out;
}

bool same(const LossReport& a, const LossReport& b) {
  return a.pos == b.pos && a.va == b.va && a.cons1 == b.cons1 && a.cons2 == b.cons2 &&
         a.total == b.total;
}

TEST(TrainStep, ConsecutiveStepsDecreaseTotal) {
  // Dropout off so the two forward passes differ only by the update.
  int decreased = 0;
  for (uint64_t seed = 0; seed < 20; ++seed) {
    TrainConfig cfg = small_config(seed);
    cfg.model.dropout = 0.0;
    training::Trainer trainer(cfg);
    const auto batch = synth_batch(seed);
    const LossReport first = trainer.train_step(batch);
    const LossReport second = trainer.train_step(batch);
    if (second.total < first.total) ++decreased;
  }
  EXPECT_GE(decreased, 18);
}

TEST(TrainStep, OnlyPositionTermLeavesOthersZero) {
  TrainConfig cfg = small_config();
  cfg.loss.enable_va = cfg.loss.enable_cons1 = cfg.loss.enable_cons2 = false;
  training::Trainer trainer(cfg);
  const LossReport r = trainer.train_step(synth_batch(1));
  EXPECT_EQ(r.va, 0.0);
  EXPECT_EQ(r.cons1, 0.0);
  EXPECT_EQ(r.cons2, 0.0);
  EXPECT_GT(r.pos, 0.0);
  EXPECT_EQ(r.total, r.pos);
}

TEST(TrainStep, FirstStepIsBitIdentical) {
  // Dropout draws from torch's global generator, so each run seeds and steps
  // before the next one starts.
  const auto batch = synth_batch(2);
  const auto first_step = [&](uint64_t seed) {
    training::Trainer t(small_config(seed));
    return t.train_step(batch);
  };
  const LossReport a = first_step(7);
  const LossReport b = first_step(7);
  EXPECT_TRUE(same(a, b));
  EXPECT_FALSE(same(first_step(8), a));
}

TEST(TrainStep, TotalCombinesTerms) {
  training::Trainer trainer(small_config());
  const LossReport r = trainer.train_step(synth_batch(3));
  EXPECT_NEAR(r.total, r.pos + r.va + r.cons1 + 0.1 * r.cons2, 1e-5 * (1.0 + r.total));
}

TEST(TrainStep, EveryParameterGroupReceivesGradient) {
  training::Trainer trainer(small_config(3));
  trainer.train_step(synth_batch(4));
  const char* groups[] = {"pos_encoder", "vel_encoder", "acc_encoder", "inject_pos",
                          "inject_vel",  "pos_decoder", "vel_decoder", "acc_decoder",
                          "w_alpha",     "w_beta"};
  for (const char* g : groups) {
    double norm = 0.0;
    int params = 0;
    for (const auto& item : trainer.model()->named_parameters()) {
      if (item.key().rfind(g, 0) != 0) continue;
      ++params;
      if (item.value().grad().defined()) norm += item.value().grad().abs().sum().item<double>();
    }
    EXPECT_GT(params, 0) << g;
    EXPECT_GT(norm, 0.0) << g;
  }
}

TEST(TrainStep, NonFiniteTermIsNamed) {
  training::Trainer trainer(small_config());
  {
    torch::NoGradGuard guard;
    for (auto& item : trainer.model()->named_parameters()) {
      if (item.key() == "pos_decoder.head.bias") item.value().fill_(NAN);
    }
  }
  try {
    trainer.train_step(synth_batch(5));
    FAIL() << "NaN loss accepted";
  } catch (const NumericalError& e) {
    EXPECT_NE(std::string(e.what()).find("'pos'"), std::string::npos) << e.what();
  }
}

TEST(TrainStep, EvaluateLossDoesNotUpdate) {
  TrainConfig cfg = small_config();
  cfg.model.dropout = 0.0;
  training::Trainer trainer(cfg);
  const auto batch = synth_batch(6);
  const LossReport a = trainer.evaluate_loss(batch);
  const LossReport b = trainer.evaluate_loss(batch);
  EXPECT_TRUE(same(a, b));
  EXPECT_EQ(trainer.steps(), 0);
  EXPECT_TRUE(trainer.model()->is_training());
}

TEST(ComputeLosses, SelectionsCoverEveryAgent) {
  TrainConfig cfg = small_config();
  training::Trainer trainer(cfg);
  const auto batch = synth_batch(7);
  const SceneBatch b = collate(batch);
  training::Selections sel;
  torch::NoGradGuard guard;
  trainer.model()->eval();
  const auto l = training::compute_losses(trainer.model(), b, trainer.model()->forward(b),
                                          cfg.loss, &sel);
  const int64_t agents = b.mask.sum().item<int64_t>();
  EXPECT_EQ(sel.scores.sizes(), (std::vector<int64_t>{agents, cfg.model.k}));
  EXPECT_EQ(sel.shared_index.size(0), agents);
  EXPECT_TRUE(torch::equal(sel.shared_index, sel.scores.argmax(1)));
  EXPECT_TRUE(torch::equal(sel.va_vel_index, sel.dc.argmax(1)));
  EXPECT_TRUE(torch::equal(sel.va_acc_index, sel.sim.argmin(1)));
  EXPECT_TRUE(std::isfinite(l.total.item<double>()));
}

TEST(Ablation, VariantsFlipTheirSwitch) {
  const TrainConfig base;
  EXPECT_FALSE(training::ablation_variant("no_pos").loss.enable_pos);
  EXPECT_FALSE(training::ablation_variant("no_va").loss.enable_va);
  EXPECT_FALSE(training::ablation_variant("no_cons1").loss.enable_cons1);
  EXPECT_FALSE(training::ablation_variant("no_cons2").loss.enable_cons2);
  EXPECT_FALSE(training::ablation_variant("no_injection").model.inject_features);
  EXPECT_EQ(training::ablation_variant("mse_pos").loss.pos_mode, PositionLossMode::kMseBestOfK);
  EXPECT_EQ(training::ablation_variant("manual_va_select").loss.va_selection,
            VaSelection::kOracle);
  const TrainConfig none = training::ablation_variant("none", base);
  EXPECT_TRUE(none.loss.enable_cons2 && none.model.inject_features);
  EXPECT_EQ(training::ablation_variant("no_va", small_config()).model.d_model, 32);
  EXPECT_EQ(training::ablation_variant("no_va").ablation, "no_va");
  EXPECT_THROW(training::ablation_variant("no_everything"), InvalidInput);
  for (const auto& name : training::ablation_names()) {
    EXPECT_NO_THROW(training::ablation_variant(name).validate()) << name;
  }
}

TEST(Ablation, NoCons2ZeroesTheTerm) {
  training::Trainer trainer(training::ablation_variant("no_cons2", small_config()));
  const auto batch = synth_batch(8);
  for (int i = 0; i < 3; ++i) {
    const LossReport r = trainer.train_step(batch);
    EXPECT_EQ(r.cons2, 0.0);
    EXPECT_NEAR(r.total, r.pos + r.va + r.cons1, 1e-5 * (1.0 + r.total));
  }
}

TEST(Ablation, NoInjectionLeavesInjectionBlocksIdle) {
  training::Trainer trainer(training::ablation_variant("no_injection", small_config()));
  trainer.train_step(synth_batch(9));
  for (const auto& item : trainer.model()->named_parameters()) {
    if (item.key().rfind("inject_", 0) != 0) continue;
    const auto& g = item.value().grad();
    EXPECT_TRUE(!g.defined() || g.abs().sum().item<double>() == 0.0) << item.key();
  }
}

TEST(Ablation, ReplacementsTrain) {
  for (const char* name : {"mse_pos", "manual_va_select"}) {
    training::Trainer trainer(training::ablation_variant(name, small_config()));
    const LossReport r = trainer.train_step(synth_batch(10));
    EXPECT_TRUE(std::isfinite(r.total)) << name;
    EXPECT_GT(r.pos, 0.0) << name;
  }
}

TEST(TrainConfigTest, JsonRoundTrip) {
  TrainConfig c = small_config(42);
  c.learning_rate = 3e-4;
  c.ablation = "no_cons1";
  c.loss.epsilon = 0.2;
  c.dataset.held_out = "zara1";
  c.dataset.train_stride = 3;
  c.checkpoint_path = "out/m.pt";
  const TrainConfig back = nlohmann::json(c).get<TrainConfig>();
  EXPECT_EQ(nlohmann::json(back), nlohmann::json(c));
  EXPECT_EQ(back.seed, 42u);
  EXPECT_EQ(back.dataset.held_out, "zara1");
  const TrainConfig defaults = nlohmann::json::object().get<TrainConfig>();
  EXPECT_EQ(defaults.learning_rate, 1e-4);
  EXPECT_EQ(defaults.epochs, 500);
  EXPECT_EQ(defaults.batch_size, 32);
}

TEST(TrainConfigTest, Validation) {
  EXPECT_NO_THROW(TrainConfig{}.validate());
  TrainConfig c;
  c.learning_rate = 0.0;
  EXPECT_THROW(c.validate(), InvalidInput);
  c = {};
  c.batch_size = 0;
  EXPECT_THROW(c.validate(), InvalidInput);
  c = {};
  c.val_fraction = 1.0;
  EXPECT_THROW(c.validate(), InvalidInput);
  c = {};
  c.ablation = "bogus";
  EXPECT_THROW(c.validate(), InvalidInput);
  c = {};
  c.loss.enable_pos = c.loss.enable_va = c.loss.enable_cons1 = c.loss.enable_cons2 = false;
  EXPECT_THROW(c.validate(), InvalidInput);
  EXPECT_THROW(training::Trainer{c}, InvalidInput);
}

TEST(Fit, WritesLogAndCheckpoint) {
  const fs::path dir = fs::temp_directory_path() / "trimotion_fit_test";
  fs::remove_all(dir);
  TrainConfig cfg = small_config(1);
  cfg.epochs = 2;
  cfg.batch_size = 4;
  cfg.val_fraction = 0.25;
  cfg.checkpoint_path = dir / "ckpt" / "model.pt";
  cfg.log_path = dir / "logs" / "train.jsonl";
  const auto windows = synth_batch(11, 8);
  const training::FitResult r = training::fit(windows, cfg);
  EXPECT_EQ(r.checkpoint, cfg.checkpoint_path);
  EXPECT_TRUE(fs::exists(r.checkpoint));
  EXPECT_TRUE(std::isfinite(r.best_val_ade));
  EXPECT_EQ(r.steps, 4);  // 6 training windows in batches of 4, twice

  std::ifstream log(cfg.log_path);
  std::string line;
  int64_t expected_step = 0;
  while (std::getline(log, line)) {
    const auto [step, report] = parse_log_line(line);
    EXPECT_EQ(step, ++expected_step);
    EXPECT_TRUE(std::isfinite(report.total));
  }
  EXPECT_EQ(expected_step, r.steps);

  const TrajectoryNet net = load_checkpoint(r.checkpoint);
  EXPECT_EQ(net->config().d_model, 32);
  fs::remove_all(dir);
}

TEST(Fit, MaxStepsAndErrors) {
  const fs::path dir = fs::temp_directory_path() / "trimotion_fit_steps";
  fs::remove_all(dir);
  TrainConfig cfg = small_config();
  cfg.max_steps = 3;
  cfg.batch_size = 2;
  cfg.val_fraction = 0.0;
  cfg.checkpoint_path = dir / "m.pt";
  cfg.log_path = dir / "log.jsonl";
  const auto r = training::fit(synth_batch(12, 4), cfg);
  EXPECT_EQ(r.steps, 3);
  EXPECT_TRUE(std::isnan(r.best_val_ade));
  EXPECT_TRUE(fs::exists(cfg.checkpoint_path));

  cfg.log_path = "/proc/definitely/not/writable.jsonl";
  try {
    training::fit(synth_batch(12, 4), cfg);
    FAIL() << "unwritable log accepted";
  } catch (const std::exception& e) {
    EXPECT_NE(std::string(e.what()).find("/proc/definitely"), std::string::npos) << e.what();
  }
  fs::remove_all(dir);
}

}  // namespace
}  // namespace trimotion

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

#include "commands.h"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "plot.h"
#include "records.h"
#include "trimotion/data.h"
#include "trimotion/errors.h"
#include "trimotion/evaluation.h"
#include "trimotion/model.h"
#include "trimotion/training.h"

namespace trimotion::cli {
namespace fs = std::filesystem;
namespace {

std::optional<fs::path> data_root(const std::string& flag) {
  if (!flag.empty()) return fs::path(flag);
  if (const char* env = std::getenv(kDataRootEnv); env != nullptr && *env != '\0') {
    return fs::path(env);
  }
  return std::nullopt;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw DataError("cannot write " + path.string());
}

// Train and test windows under the manifest's split, or `held_out` when set.
// Without any split every window lands on both sides.
struct SplitWindows {
  std::vector<SceneWindow> train;
  std::vector<SceneWindow> test;
};

SplitWindows split_windows(const Manifest& manifest, const std::string& held_out,
                           const WindowOptions& train_opts, const WindowOptions& test_opts,
                           bool need_train, bool need_test) {
  std::optional<SplitSpec> spec = manifest.split;
  if (!held_out.empty()) spec = SplitSpec{SplitSpec::Protocol::kLeaveOneOut, held_out, {}, {}};
  SplitWindows out;
  if (need_train) {
    auto all = data::load_windows(manifest, train_opts);
    out.train = spec ? data::make_splits(all, *spec).first : std::move(all);
  }
  if (need_test) {
    auto all = data::load_windows(manifest, test_opts);
    out.test = spec ? data::make_splits(all, *spec).second : std::move(all);
  }
  return out;
}

TrainConfig config_from_json(const nlohmann::json& j) {
  try {
    TrainConfig cfg = j.get<TrainConfig>();
    cfg = training::ablation_variant(cfg.ablation, cfg);
    cfg.validate();
    return cfg;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("config: ") + e.what());
  }
}

std::size_t default_stride(const ModelConfig& m, std::size_t stride) {
  return stride > 0 ? stride : static_cast<std::size_t>(m.obs_len + m.pred_len);
}

int cmd_train(const std::string& config_path, const std::string& root,
              const std::vector<std::string>& extras, bool dry_run, std::ostream& out,
              std::ostream& err) {
  nlohmann::json j = TrainConfig{};
  if (!config_path.empty()) {
    try {
      j.merge_patch(nlohmann::json::parse(read_file(config_path)));
    } catch (const nlohmann::json::parse_error& e) {
      throw DataError("config " + config_path + ": " + e.what());
    }
  }
  apply_overrides(j, extras);
  const TrainConfig cfg = config_from_json(j);
  if (dry_run) {
    out << nlohmann::json(cfg).dump(2) << '\n';
    return kExitOk;
  }
  if (cfg.dataset.manifest.empty()) throw InvalidInput("train: dataset.manifest is not set");

  const Manifest manifest = data::load_manifest(cfg.dataset.manifest, data_root(root));
  WindowOptions opts;
  opts.obs_len = static_cast<std::size_t>(cfg.model.obs_len);
  opts.pred_len = static_cast<std::size_t>(cfg.model.pred_len);
  opts.stride = cfg.dataset.train_stride;
  const auto windows = split_windows(manifest, cfg.dataset.held_out, opts, opts, true, false);

  err << "training on " << windows.train.size() << " windows\n";
  const auto result = training::fit(windows.train, cfg, &err);
  fs::path snapshot = cfg.checkpoint_path;
  snapshot += ".config.json";
  write_file(snapshot, nlohmann::json(cfg).dump(2) + "\n");
  out << nlohmann::json{{"checkpoint", result.checkpoint.string()},
                        {"steps", result.steps},
                        {"best_val_ade", std::isnan(result.best_val_ade)
                                             ? nlohmann::json(nullptr)
                                             : nlohmann::json(result.best_val_ade)},
                        {"final_total", result.last.total}}
             .dump()
      << '\n';
  return kExitOk;
}

struct EvalArgs {
  std::string checkpoint;
  std::string config;
  std::string manifest;
  std::string held_out;
  std::string root;
  std::string min_mode = "independent";
  std::string output = "eval_result.json";
  int64_t k = 0;
  int64_t t_prime = 0;
  std::size_t stride = 0;
  std::size_t batch_size = 32;
};

int cmd_eval(const EvalArgs& a, std::ostream& out) {
  const ModelConfig mc = read_checkpoint_config(a.checkpoint);
  const int64_t k = a.k > 0 ? a.k : mc.k;
  const int64_t t_prime = a.t_prime > 0 ? a.t_prime : mc.pred_len;
  if (t_prime != mc.pred_len) {
    throw InvalidInput("eval: T'=" + std::to_string(t_prime) + " but the checkpoint predicts " +
                       std::to_string(mc.pred_len) + " steps");
  }
  if (k > mc.k) {
    throw InvalidInput("eval: K=" + std::to_string(k) + " but the checkpoint has " +
                       std::to_string(mc.k) + " candidates");
  }
  MinMode mode = MinMode::kIndependent;
  if (a.min_mode == "joint") {
    mode = MinMode::kJoint;
  } else if (a.min_mode != "independent") {
    throw InvalidInput("eval: --min-mode must be independent or joint");
  }

  fs::path manifest_path = a.manifest;
  std::string held_out = a.held_out;
  std::size_t stride = a.stride;
  if (!a.config.empty()) {
    const TrainConfig cfg = config_from_json(nlohmann::json::parse(read_file(a.config)));
    if (manifest_path.empty()) manifest_path = cfg.dataset.manifest;
    if (held_out.empty()) held_out = cfg.dataset.held_out;
    if (stride == 0) stride = cfg.dataset.eval_stride;
  }
  if (manifest_path.empty()) throw InvalidInput("eval: no manifest (use --manifest or --config)");

  const Manifest manifest = data::load_manifest(manifest_path, data_root(a.root));
  WindowOptions opts;
  opts.obs_len = static_cast<std::size_t>(mc.obs_len);
  opts.pred_len = static_cast<std::size_t>(t_prime);
  opts.stride = default_stride(mc, stride);
  const auto windows = split_windows(manifest, held_out, opts, opts, false, true);
  if (windows.test.empty()) throw DataError("eval: no test windows");

  TrajectoryNet net = load_checkpoint(a.checkpoint);
  const EvalResult r = evaluation::evaluate(net, windows.test, k, t_prime, mode, a.batch_size);
  write_file(a.output, nlohmann::json(r).dump(2) + "\n");
  out << evaluation::format_report(r);
  return kExitOk;
}

struct PredictArgs {
  std::string checkpoint;
  std::string input;
  std::string output;
  std::string format = "ethucy_txt";
  std::string units = "meters";
  std::size_t stride = 0;
  std::size_t batch_size = 32;
};

int cmd_predict(const PredictArgs& a, std::ostream& out) {
  TrajectoryNet net = load_checkpoint(a.checkpoint);
  const ModelConfig& mc = net->config();
  const auto tracks = data::load_tracks(a.input, parse_track_format(a.format));
  WindowOptions opts;
  opts.obs_len = static_cast<std::size_t>(mc.obs_len);
  opts.pred_len = static_cast<std::size_t>(mc.pred_len);
  opts.stride = default_stride(mc, a.stride);
  opts.frame_step = data::infer_frame_step(tracks);
  const auto windows =
      data::window_scenes(tracks, fs::path(a.input).stem().string(), parse_units(a.units), opts);
  if (windows.empty()) throw DataError(a.input + ": no complete windows");
  const auto preds = predict(net, windows, a.batch_size);

  const nlohmann::json meta{{"obs_len", mc.obs_len},   {"pred_len", mc.pred_len},
                            {"k", mc.k},               {"stride", opts.stride},
                            {"frame_step", opts.frame_step}, {"format", a.format},
                            {"units", a.units},        {"windows", windows.size()}};
  std::ostringstream text;
  write_predictions(windows, preds, meta, text);
  write_file(a.output, text.str());
  out << "wrote " << windows.size() << " windows x " << mc.k << " candidates to " << a.output
      << '\n';
  return kExitOk;
}

struct PlotArgs {
  std::string input;
  std::string output;
  std::string tracks;
  std::string color = "uniform";
  std::string title;
  int64_t window = 0;
};

int plot_predictions(const PredictionFile& file, const PlotArgs& a) {
  std::map<int64_t, std::vector<PositionSeq>> by_agent;
  std::vector<int64_t> agent_order;
  for (const PredictionRecord& r : file.records) {
    if (r.window_id != a.window) continue;
    if (r.candidate_id < 0 || r.step < 0) throw DataError("negative candidate or step index");
    auto [it, inserted] = by_agent.try_emplace(r.agent_id);
    if (inserted) agent_order.push_back(r.agent_id);
    auto& cands = it->second;
    const auto k = static_cast<std::size_t>(r.candidate_id);
    const auto t = static_cast<std::size_t>(r.step);
    if (cands.size() <= k) cands.resize(k + 1);
    if (cands[k].points.size() <= t) cands[k].points.resize(t + 1);
    cands[k].points[t] = {r.x, r.y};
  }
  if (by_agent.empty()) {
    throw InvalidInput("plot: window " + std::to_string(a.window) + " has no records");
  }
  std::vector<std::vector<PositionSeq>> candidates;
  for (int64_t id : agent_order) candidates.push_back(std::move(by_agent[id]));

  std::optional<SceneWindow> window;
  if (!a.tracks.empty()) {
    const auto& m = file.meta;
    WindowOptions opts;
    opts.obs_len = m.value("obs_len", std::size_t{8});
    opts.pred_len = m.value("pred_len", std::size_t{12});
    opts.stride = m.value("stride", opts.obs_len + opts.pred_len);
    opts.frame_step = m.value("frame_step", int64_t{0});
    const auto tracks =
        data::load_tracks(a.tracks, parse_track_format(m.value("format", std::string("ethucy_txt"))));
    auto windows = data::window_scenes(tracks, "tracks", Units::kMeters, opts);
    if (static_cast<std::size_t>(a.window) >= windows.size()) {
      throw InvalidInput("plot: window " + std::to_string(a.window) + " not in " + a.tracks);
    }
    window = std::move(windows[static_cast<std::size_t>(a.window)]);
  }
  const std::string title =
      a.title.empty() ? "window " + std::to_string(a.window) : a.title;
  write_file(a.output, render_trajectories(window ? &*window : nullptr, candidates,
                                           parse_color_mode(a.color), title));
  return kExitOk;
}

int cmd_plot(const PlotArgs& a, std::ostream& out) {
  const std::string text = read_file(a.input);
  std::istringstream in(text);
  std::string first;
  std::getline(in, first);
  if (!first.empty() && first.back() == '\r') first.pop_back();

  if (first == kPredictionsMagic) {
    in.seekg(0);
    plot_predictions(read_predictions(in, a.input), a);
  } else if (auto whole = nlohmann::json::parse(text, nullptr, false);
             !whole.is_discarded() && whole.is_object() && whole.value("record", "") == "eval_result") {
    write_file(a.output, render_eval_bars(whole.get<EvalResult>(),
                                          a.title.empty() ? "evaluation" : a.title));
  } else {
    std::vector<std::pair<int64_t, LossReport>> log;
    std::size_t line_no = 0;
    in.clear();
    in.seekg(0);
    for (std::string line; std::getline(in, line);) {
      ++line_no;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      try {
        log.push_back(parse_log_line(line));
      } catch (const DataError&) {
        throw DataError(a.input + ":" + std::to_string(line_no) + ": unknown record schema");
      }
    }
    if (log.empty()) throw DataError(a.input + ": unknown record schema (empty)");
    write_file(a.output, render_loss_curves(log, a.title.empty() ? "training loss" : a.title));
  }
  out << "wrote " << a.output << '\n';
  return kExitOk;
}

struct SynthArgs {
  std::string kind;
  std::string output_dir;
  std::size_t count = 10;
  std::size_t agents = 3;
  uint64_t seed = 0;
  double noise = 0.0;
  std::size_t obs_len = 8;
  std::size_t pred_len = 12;
  int64_t frame_step = 10;
};

int cmd_synth(const SynthArgs& a, std::ostream& out) {
  const data::SynthKind kind = data::parse_synth_kind(a.kind);
  if (a.count == 0 || a.agents == 0) throw InvalidInput("synth: --count and --agents must be >= 1");
  data::SynthOptions opts{a.obs_len, a.pred_len, a.noise};
  std::vector<SceneWindow> windows;
  windows.reserve(a.count);
  for (std::size_t i = 0; i < a.count; ++i) {
    windows.push_back(data::synth_scene(kind, a.agents, a.seed + i, opts));
  }
  const std::string name = "synth_" + std::string(data::to_string(kind));
  const fs::path dir(a.output_dir);
  std::ostringstream text;
  data::write_tracks(windows, text, a.frame_step);
  write_file(dir / (name + ".txt"), text.str());

  const fs::path manifest_path = dir / "manifest.json";
  nlohmann::json manifest = {{"scenes", nlohmann::json::array()}};
  if (fs::exists(manifest_path)) {
    manifest = nlohmann::json::parse(read_file(manifest_path), nullptr, false);
    if (manifest.is_discarded() || !manifest.contains("scenes")) {
      throw DataError(manifest_path.string() + ": not a manifest");
    }
  }
  auto& scenes = manifest["scenes"];
  const nlohmann::json entry{{"name", name},
                             {"path", name + ".txt"},
                             {"units", "synthetic"},
                             {"format", "ethucy_txt"}};
  auto it = std::find_if(scenes.begin(), scenes.end(),
                         [&](const nlohmann::json& s) { return s.value("name", "") == name; });
  if (it != scenes.end()) {
    *it = entry;
  } else {
    scenes.push_back(entry);
  }
  write_file(manifest_path, manifest.dump(2) + "\n");
  out << "wrote " << a.count << " " << a.kind << " windows to " << (dir / (name + ".txt")).string()
      << '\n';
  return kExitOk;
}

}  // namespace

void apply_overrides(nlohmann::json& config, const std::vector<std::string>& args) {
  for (std::size_t i = 0; i < args.size(); ++i) {
    const std::string& arg = args[i];
    if (arg.rfind("--", 0) != 0 || arg.size() < 3) {
      throw InvalidInput("unexpected argument '" + arg + "' (expected --key value)");
    }
    std::string key = arg.substr(2);
    std::string value;
    if (const auto eq = key.find('='); eq != std::string::npos) {
      value = key.substr(eq + 1);
      key.resize(eq);
    } else {
      if (i + 1 >= args.size()) throw InvalidInput("missing value for --" + key);
      value = args[++i];
    }
    std::replace(key.begin(), key.end(), '-', '_');
    nlohmann::json* node = &config;
    std::size_t start = 0;
    while (true) {
      const auto dot = key.find('.', start);
      const std::string part = key.substr(start, dot - start);
      if (part.empty()) throw InvalidInput("malformed key --" + key);
      if (!node->is_object() || !node->contains(part)) {
        throw InvalidInput("unknown config key --" + key);
      }
      node = &(*node)[part];
      if (dot == std::string::npos) break;
      start = dot + 1;
    }
    auto parsed = nlohmann::json::parse(value, nullptr, false);
    if (parsed.is_discarded() || (node->is_string() && !parsed.is_string())) {
      parsed = value;
    }
    *node = std::move(parsed);
  }
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"trimotion: multimodal pedestrian trajectory prediction"};
  app.name("trimotion");
  app.require_subcommand(1);

  std::string train_config;
  std::string train_root;
  bool dry_run = false;
  auto* train = app.add_subcommand("train", "train a model; --key value overrides config keys");
  train->add_option("-c,--config", train_config, "JSON config file");
  train->add_option("--data-root", train_root, "base directory for manifest scene paths");
  train->add_flag("--print-config", dry_run, "print the resolved config and exit");
  train->allow_extras();

  EvalArgs ea;
  auto* eval = app.add_subcommand("eval", "best-of-K ADE/FDE on a test split");
  eval->add_option("--checkpoint", ea.checkpoint)->required();
  eval->add_option("-c,--config", ea.config, "training config supplying the dataset section");
  eval->add_option("--manifest", ea.manifest);
  eval->add_option("--held-out", ea.held_out, "leave-one-out test scene");
  eval->add_option("--data-root", ea.root);
  eval->add_option("-k,--k", ea.k, "number of candidates (default: checkpoint K)");
  eval->add_option("--t-prime", ea.t_prime, "prediction horizon (default: checkpoint)");
  eval->add_option("--min-mode", ea.min_mode, "independent|joint");
  eval->add_option("--stride", ea.stride, "window stride in steps (default: T + T')");
  eval->add_option("-o,--output", ea.output, "eval record path");
  eval->add_option("--batch-size", ea.batch_size);

  PredictArgs pa;
  auto* pred = app.add_subcommand("predict", "write K candidates per agent per window");
  pred->add_option("--checkpoint", pa.checkpoint)->required();
  pred->add_option("-i,--input", pa.input, "track file")->required();
  pred->add_option("-o,--output", pa.output, "prediction record file")->required();
  pred->add_option("--format", pa.format, "ethucy_txt|sdd_txt");
  pred->add_option("--units", pa.units, "meters|pixels|synthetic");
  pred->add_option("--stride", pa.stride, "window stride in steps (default: T + T')");
  pred->add_option("--batch-size", pa.batch_size);

  PlotArgs pl;
  auto* plot = app.add_subcommand("plot", "render predictions, loss logs or eval records as SVG");
  plot->add_option("-i,--input", pl.input, "prediction records, training log or eval record")
      ->required();
  plot->add_option("-o,--output", pl.output, "SVG path")->required();
  plot->add_option("--tracks", pl.tracks, "track file the predictions were made from");
  plot->add_option("--window", pl.window, "window id to draw");
  plot->add_option("--color", pl.color, "uniform|speed");
  plot->add_option("--title", pl.title);

  SynthArgs sa;
  auto* synth = app.add_subcommand("synth", "generate synthetic windows");
  synth->add_option("--kind", sa.kind, "constant_velocity|constant_accel|turn|stop")->required();
  synth->add_option("-o,--output-dir", sa.output_dir)->required();
  synth->add_option("-n,--count", sa.count, "number of windows");
  synth->add_option("--agents", sa.agents, "agents per window");
  synth->add_option("--seed", sa.seed);
  synth->add_option("--noise", sa.noise, "Gaussian position noise sigma");
  synth->add_option("--obs-len", sa.obs_len);
  synth->add_option("--pred-len", sa.pred_len);
  synth->add_option("--frame-step", sa.frame_step, "frame-id spacing of one step");

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*train) return cmd_train(train_config, train_root, train->remaining(), dry_run, out, err);
    if (*eval) return cmd_eval(ea, out);
    if (*pred) return cmd_predict(pa, out);
    if (*plot) return cmd_plot(pl, out);
    if (*synth) return cmd_synth(sa, out);
  } catch (const InvalidInput& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const NumericalError& e) {
    err << "numerical abort: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}

}  // namespace trimotion::cli

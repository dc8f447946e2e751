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

#include "records.h"

#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "trimotion/errors.h"

namespace trimotion::cli {
namespace {

void put_double(std::ostream& out, double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  out.write(buf, res.ptr - buf);
}

template <typename T>
bool take(std::string_view& rest, T& value) {
  while (!rest.empty() && (rest.front() == ' ' || rest.front() == '\t')) rest.remove_prefix(1);
  const auto res = std::from_chars(rest.data(), rest.data() + rest.size(), value);
  if (res.ec != std::errc()) return false;
  rest.remove_prefix(static_cast<std::size_t>(res.ptr - rest.data()));
  return true;
}

}  // namespace

void write_predictions(const std::vector<SceneWindow>& windows,
                       const std::vector<PredictionSet>& predictions,
                       const nlohmann::json& meta, std::ostream& out) {
  if (windows.size() != predictions.size()) {
    throw InvalidInput("write_predictions: window and prediction counts differ");
  }
  out << kPredictionsMagic << '\n' << "# " << meta.dump() << '\n'
      << "# window_id agent_id candidate_id step x y\n";
  for (std::size_t w = 0; w < windows.size(); ++w) {
    const auto& agents = predictions[w].agents;
    if (agents.size() != windows[w].num_agents()) {
      throw InvalidInput("write_predictions: agent count mismatch in window " +
                         std::to_string(w));
    }
    for (std::size_t a = 0; a < agents.size(); ++a) {
      const auto& cands = agents[a].positions;
      for (std::size_t k = 0; k < cands.size(); ++k) {
        for (std::size_t t = 0; t < cands[k].size(); ++t) {
          out << w << ' ' << windows[w].agent_ids[a] << ' ' << k << ' ' << t << ' ';
          put_double(out, cands[k][t].x);
          out << ' ';
          put_double(out, cands[k][t].y);
          out << '\n';
        }
      }
    }
  }
  if (!out) throw DataError("write_predictions: write failed");
}

PredictionFile read_predictions(std::istream& in, std::string_view source) {
  PredictionFile file;
  std::string line;
  std::size_t line_no = 0;
  const auto fail = [&](const std::string& what) {
    return DataError(std::string(source) + ":" + std::to_string(line_no) + ": " + what);
  };
  bool saw_magic = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line_no == 1) {
      if (line != kPredictionsMagic) throw fail("missing '" + std::string(kPredictionsMagic) + "' header");
      saw_magic = true;
      continue;
    }
    if (line.empty()) continue;
    if (line.front() == '#') {
      const auto pos = line.find_first_not_of("# ");
      if (pos != std::string::npos && line[pos] == '{') {
        try {
          file.meta = nlohmann::json::parse(line.substr(pos));
        } catch (const nlohmann::json::exception& e) {
          throw fail(std::string("bad metadata: ") + e.what());
        }
      }
      continue;
    }
    std::string_view rest(line);
    PredictionRecord r;
    if (!take(rest, r.window_id) || !take(rest, r.agent_id) || !take(rest, r.candidate_id) ||
        !take(rest, r.step) || !take(rest, r.x) || !take(rest, r.y)) {
      throw fail("expected 'window_id agent_id candidate_id step x y'");
    }
    if (rest.find_first_not_of(" \t") != std::string_view::npos) throw fail("trailing fields");
    file.records.push_back(r);
  }
  if (!saw_magic) throw DataError(std::string(source) + ": empty prediction file");
  return file;
}

}  // namespace trimotion::cli

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

#include "sdd.h"

#include <charconv>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "trimotion/errors.h"

namespace trimotion::cli {
namespace {

template <typename T>
bool parse(const std::string& s, T& v) {
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  return ec == std::errc() && ptr == s.data() + s.size();
}

void put_double(std::ostream& out, double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  out.write(buf, res.ptr - buf);
}

}  // namespace

SddStats convert_sdd(std::istream& in, std::ostream& out, const SddOptions& opts,
                     std::string_view source) {
  if (opts.frame_step < 1 || opts.phase < 0 || opts.phase >= opts.frame_step) {
    throw InvalidInput("sdd: need frame_step >= 1 and 0 <= phase < frame_step");
  }
  std::map<std::pair<int64_t, int64_t>, std::pair<double, double>> records;
  std::set<int64_t> agents;
  SddStats stats;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto where = [&] { return std::string(source) + ":" + std::to_string(line_no); };
    std::istringstream fields(line);
    std::string f[10];
    int n = 0;
    while (n < 10 && fields >> f[n]) ++n;
    std::string extra;
    if (n != 10 || fields >> extra) throw DataError(where() + ": expected 10 fields");
    ++stats.rows;

    int64_t track = 0, frame = 0, lost = 0;
    double box[4];
    bool ok = parse(f[0], track) && parse(f[5], frame) && parse(f[6], lost);
    for (int i = 0; i < 4; ++i) ok = ok && parse(f[1 + i], box[i]);
    if (!ok) throw DataError(where() + ": unparseable row");

    std::string label = f[9];
    if (label.size() >= 2 && label.front() == '"' && label.back() == '"') {
      label = label.substr(1, label.size() - 2);
    }
    if (label != opts.label || (lost != 0 && !opts.keep_lost)) continue;
    if (frame % opts.frame_step != opts.phase) continue;
    const auto [it, inserted] = records.emplace(
        std::make_pair(frame, track), std::make_pair((box[0] + box[2]) / 2, (box[1] + box[3]) / 2));
    if (!inserted) throw DataError(where() + ": duplicate track " + f[0] + " at frame " + f[5]);
    agents.insert(track);
  }
  for (const auto& [key, xy] : records) {
    out << key.first << ' ' << key.second << ' ';
    put_double(out, xy.first);
    out << ' ';
    put_double(out, xy.second);
    out << '\n';
  }
  if (!out) throw DataError("sdd: write failed");
  stats.written = records.size();
  stats.agents = agents.size();
  return stats;
}

}  // namespace trimotion::cli

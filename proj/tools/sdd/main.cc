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

// Converts one Stanford Drone annotations.txt into the canonical track
// layout read by `trimotion`.

#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "commands.h"
#include "sdd.h"
#include "trimotion/errors.h"

int main(int argc, char** argv) {
  using namespace trimotion;
  CLI::App app{"convert Stanford Drone annotations to `frame agent x y` tracks"};
  std::string input, output;
  cli::SddOptions opts;
  app.add_option("input", input, "annotations.txt")->required();
  app.add_option("-o,--output", output, "canonical track file")->required();
  app.add_option("--label", opts.label, "agent class to keep");
  app.add_option("--frame-step", opts.frame_step, "keep every n-th video frame");
  app.add_option("--phase", opts.phase, "frame offset of the kept frames");
  app.add_flag("--keep-lost", opts.keep_lost, "keep rows flagged lost");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? cli::kExitOk : cli::kExitUsage;
  }
  try {
    std::ifstream in(input);
    if (!in) throw DataError("cannot open " + input);
    std::ofstream out(output);
    if (!out) throw DataError("cannot write " + output);
    const cli::SddStats s = cli::convert_sdd(in, out, opts, input);
    std::cout << "kept " << s.written << " of " << s.rows << " rows, " << s.agents
              << " agents -> " << output << '\n';
  } catch (const InvalidInput& e) {
    std::cerr << "error: " << e.what() << '\n';
    return cli::kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return cli::kExitData;
  }
  return cli::kExitOk;
}

// Copyright 2026 The Driftless Authors. All rights reserved.
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

// Command-line front end: `run` executes an experiment matrix, `eval`
// replays a saved task learner.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "driftless/errors.h"
#include "driftless/harness.h"

namespace {

using driftless::harness::ExperimentConfig;

std::vector<std::string> SplitCommas(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  for (std::string item; std::getline(in, item, ',');) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  namespace h = driftless::harness;
  CLI::App app{"Directed-exploration experiment runner"};
  app.require_subcommand(1);

  CLI::App* run = app.add_subcommand("run", "Run an experiment matrix");
  std::string config_path, algo, env, seeds, out;
  run->add_option("--config", config_path, "Flat JSON config")->required();
  run->add_option("--algo", algo, "Algorithm(s), comma separated");
  run->add_option("--env", env, "Environment name");
  run->add_option("--seeds", seeds, "Seeds, comma separated");
  run->add_option("--out", out, "Output directory");

  CLI::App* eval = app.add_subcommand("eval", "Evaluate a saved checkpoint");
  std::string checkpoint;
  int episodes = 10;
  std::uint64_t eval_seed = 0;
  eval->add_option("--checkpoint", checkpoint, "Checkpoint JSON")->required();
  eval->add_option("--episodes", episodes, "Greedy episodes");
  eval->add_option("--seed", eval_seed, "Seed for start states");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? h::kExitOk : h::kExitConfig;
  }

  if (*run) {
    ExperimentConfig config;
    try {
      // Command-line flags take precedence over file keys.
      nlohmann::json j;
      {
        std::ifstream in(config_path);
        if (!in) throw driftless::ConfigError("cannot read " + config_path);
        try {
          in >> j;
        } catch (const nlohmann::json::exception& e) {
          throw driftless::ConfigError(std::string("malformed config: ") +
                                       e.what());
        }
      }
      if (!j.is_object()) {
        throw driftless::ConfigError("config must be a JSON object");
      }
      if (!algo.empty()) j["algorithm"] = SplitCommas(algo);
      if (!env.empty()) j["env"] = env;
      if (run->count("--seeds") > 0) {
        std::vector<std::uint64_t> list;
        for (const std::string& s : SplitCommas(seeds)) {
          std::size_t used = 0;
          const unsigned long long v = std::stoull(s, &used);
          if (used != s.size()) throw driftless::ConfigError("bad seed " + s);
          list.push_back(v);
        }
        j["seeds"] = list;
      }
      if (!out.empty()) j["output"] = out;
      config = h::ConfigFromJson(j);
    } catch (const driftless::ConfigError& e) {
      std::cerr << "config error: " << e.what() << '\n';
      return h::kExitConfig;
    } catch (const std::logic_error& e) {
      std::cerr << "config error: " << e.what() << '\n';
      return h::kExitConfig;
    }
    return h::RunMatrix(config, std::cerr);
  }

  try {
    const h::CheckpointEval r =
        h::EvaluateCheckpoint(checkpoint, episodes, eval_seed);
    nlohmann::json j = {{"checkpoint", checkpoint},
                        {"episodes", r.episodes},
                        {"mean_return", r.mean_return},
                        {"success_rate", r.success_rate}};
    std::cout << j.dump(2) << '\n';
    return h::kExitOk;
  } catch (const std::ios_base::failure& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return h::kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return h::kExitConfig;
  }
}

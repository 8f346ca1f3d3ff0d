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

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "json.hpp"

namespace {

namespace fs = std::filesystem;

int Run(const std::string& args) {
  const std::string cmd = std::string(DRIFTLESS_CLI) + " " + args +
                          " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path WriteConfig(const std::string& name, const nlohmann::json& j) {
  fs::path dir = fs::temp_directory_path() / "driftless_cli";
  fs::create_directories(dir);
  fs::path p = dir / name;
  std::ofstream(p) << j.dump();
  return p;
}

TEST_CASE("exit codes") {
  CHECK(Run("") == 1);
  CHECK(Run("run") == 1);
  CHECK(Run("run --config /nonexistent.json") == 1);
  CHECK(Run("run --config " +
            WriteConfig("bad.json", {{"colour", "red"}}).string()) == 1);
  CHECK(Run("run --config " + WriteConfig("ok.json", {}).string() +
            " --seeds 1,x") == 1);
  CHECK(Run("eval --checkpoint /nonexistent.json") == 3);
}

TEST_CASE("flags override the file and eval reads checkpoints") {
  const fs::path out = fs::temp_directory_path() / "driftless_cli" / "out";
  fs::remove_all(out);
  const fs::path config =
      WriteConfig("run.json", {{"env", "teleport-chain-40"},
                               {"algorithm", "tabular-q-bonus"},
                               {"episodes", 2},
                               {"eval_episodes", 1},
                               {"eval_every", 1},
                               {"batch_size", 8},
                               {"output", "/dev/null/unused"}});
  REQUIRE(Run("run --config " + config.string() +
              " --algo dqn --env mountain-car --seeds 5,6 --out " +
              out.string()) == 0);
  CHECK(fs::exists(out / "dqn_run0_seed5.csv"));
  CHECK(fs::exists(out / "dqn_run1_seed6.csv"));
  CHECK(fs::exists(out / "dqn_aggregate.csv"));
  std::ifstream echo(out / "config.json");
  nlohmann::json resolved = nlohmann::json::parse(echo);
  CHECK(resolved["env"] == "mountain-car");
  CHECK(resolved["episodes"] == 2);
  CHECK(Run("eval --checkpoint " + (out / "dqn_run0_seed5.checkpoint.json")
                                       .string() +
            " --episodes 2") == 0);
}

}  // namespace

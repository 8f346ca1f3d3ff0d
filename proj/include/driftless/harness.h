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

#ifndef DRIFTLESS_HARNESS_H_
#define DRIFTLESS_HARNESS_H_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "driftless/directed.h"
#include "driftless/tabular.h"
#include "json.hpp"

namespace driftless::harness {

// Exit codes of the command-line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitDivergence = 2;
inline constexpr int kExitIo = 3;

struct ExperimentConfig {
  std::string env = "mountain-car";
  std::vector<std::string> algorithms = {"de-uncertain"};
  std::vector<std::uint64_t> seeds = {1};
  std::uint64_t master_seed = 0;
  std::string output = "runs";
  bool save_checkpoints = true;
  directed::DirectedConfig deep;  // also holds episodes and eval cadence
  tabular::TabularConfig tabular;
};

// Flat JSON. Missing keys keep their defaults; unknown keys, wrong types and
// invalid values throw ConfigError. `algorithm` may be a string or a list.
ExperimentConfig ConfigFromJson(const nlohmann::json& j);
// Every key, resolved. ConfigFromJson(ConfigToJson(c)) reproduces c.
nlohmann::json ConfigToJson(const ExperimentConfig& config);
// Throws ConfigError when unreadable or malformed.
ExperimentConfig LoadConfig(const std::filesystem::path& path);

bool IsTabularAlgorithm(const std::string& name);

// Seed handed to a run for the given user seed.
std::uint64_t RunSeed(const ExperimentConfig& config, std::uint64_t seed);

// One CSV row per evaluation. wall_ms is kept out of the deterministic file.
using directed::MetricsRecord;

struct RunOutcome {
  enum class Status { kOk, kDiverged } status = Status::kOk;
  std::string message;
  std::vector<MetricsRecord> records;
  nlohmann::json checkpoint;  // task learner; null for tabular runs
};

// Runs one (algorithm, seed) pair. Divergence is reported, not thrown.
RunOutcome RunSingle(const ExperimentConfig& config,
                     const std::string& algorithm, std::uint64_t seed);

// "%.17g": round-trips every double.
std::string FormatReal(double value);

void WriteRunCsv(const std::filesystem::path& path, std::uint64_t seed,
                 const std::vector<MetricsRecord>& records);
void WriteTimingCsv(const std::filesystem::path& path, std::uint64_t seed,
                    const std::vector<MetricsRecord>& records);

struct AggregateRow {
  int episode = 0;
  int runs = 0;
  double eval_return_mean = 0.0, eval_return_stderr = 0.0;
  double success_rate_mean = 0.0, success_rate_stderr = 0.0;
  double coverage_mean = 0.0, coverage_stderr = 0.0;
  double env_steps_mean = 0.0, env_steps_stderr = 0.0;
};

// Mean and standard error (sample deviation / sqrt(n); 0 for one run) per
// episode across runs.
std::vector<AggregateRow> Aggregate(
    const std::vector<std::vector<MetricsRecord>>& runs);
void WriteAggregateCsv(const std::filesystem::path& path,
                       const std::vector<AggregateRow>& rows);

// Runs every (algorithm, seed) pair on worker threads (at most
// DRIFTLESS_THREADS), writes per-run CSVs, aggregates, the resolved config
// and a manifest under config.output. Returns an exit code.
int RunMatrix(const ExperimentConfig& config, std::ostream& log);

// Number of workers: DRIFTLESS_THREADS if set and positive, else the
// hardware concurrency, never more than `jobs`.
int WorkerCount(std::size_t jobs);

struct CheckpointEval {
  double mean_return = 0.0;
  double success_rate = 0.0;
  int episodes = 0;
};

// Greedy rollouts of a saved task learner.
CheckpointEval EvaluateCheckpoint(const std::filesystem::path& path,
                                  int episodes, std::uint64_t seed);

}  // namespace driftless::harness

#endif  // DRIFTLESS_HARNESS_H_

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

#include "driftless/harness.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <ostream>
#include <thread>

#include "driftless/errors.h"
#include "driftless/seeding.h"

namespace driftless::harness {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Field {
  std::function<json(const ExperimentConfig&)> get;
  std::function<void(ExperimentConfig&, const json&)> set;
};

template <typename T>
Field Bind(T ExperimentConfig::*member) {
  return {[member](const ExperimentConfig& c) { return json(c.*member); },
          [member](ExperimentConfig& c, const json& v) {
            c.*member = v.get<T>();
          }};
}

// Nested member: outer.inner.
template <typename O, typename T>
Field Bind(O ExperimentConfig::*outer, T O::*inner) {
  return {[=](const ExperimentConfig& c) { return json((c.*outer).*inner); },
          [=](ExperimentConfig& c, const json& v) {
            (c.*outer).*inner = v.get<T>();
          }};
}

template <typename O, typename M, typename T>
Field Bind(O ExperimentConfig::*outer, M O::*middle, T M::*inner) {
  return {[=](const ExperimentConfig& c) {
            return json(((c.*outer).*middle).*inner);
          },
          [=](ExperimentConfig& c, const json& v) {
            ((c.*outer).*middle).*inner = v.get<T>();
          }};
}

const std::map<std::string, Field>& Fields() {
  using E = ExperimentConfig;
  using D = directed::DirectedConfig;
  using Q = agents::DqnConfig;
  using T = tabular::TabularConfig;
  static const std::map<std::string, Field> fields = {
      {"env", Bind(&E::env)},
      {"algorithm",
       {[](const E& c) { return json(c.algorithms); },
        [](E& c, const json& v) {
          c.algorithms = v.is_string()
                             ? std::vector<std::string>{v.get<std::string>()}
                             : v.get<std::vector<std::string>>();
        }}},
      {"seeds", Bind(&E::seeds)},
      {"master_seed", Bind(&E::master_seed)},
      {"output", Bind(&E::output)},
      {"save_checkpoints", Bind(&E::save_checkpoints)},
      {"episodes", Bind(&E::deep, &D::episodes)},
      {"eval_every", Bind(&E::deep, &D::eval_every)},
      {"eval_episodes", Bind(&E::deep, &D::eval_episodes)},
      {"pursuit_steps", Bind(&E::deep, &D::pursuit_steps)},
      {"top_k", Bind(&E::deep, &D::top_k)},
      {"goal_capacity", Bind(&E::deep, &D::goal_capacity)},
      {"mix_prob", Bind(&E::deep, &D::mix_prob)},
      {"reach_tolerance", Bind(&E::deep, &D::reach_tolerance)},
      {"batch_size", Bind(&E::deep, &D::batch_size)},
      {"updates_per_step", Bind(&E::deep, &D::updates_per_step)},
      {"replay_capacity", Bind(&E::deep, &D::replay_capacity)},
      {"her_capacity", Bind(&E::deep, &D::her_capacity)},
      {"her_future_k", Bind(&E::deep, &D::her_future_k)},
      {"visitation_bins", Bind(&E::deep, &D::visitation_bins)},
      {"bonus_decay", Bind(&E::deep, &D::bonus_decay)},
      {"task_hidden", Bind(&E::deep, &D::task, &Q::hidden)},
      {"task_learning_rate", Bind(&E::deep, &D::task, &Q::learning_rate)},
      {"task_gamma", Bind(&E::deep, &D::task, &Q::gamma)},
      {"task_epsilon", Bind(&E::deep, &D::task, &Q::epsilon)},
      {"task_target_period",
       Bind(&E::deep, &D::task, &Q::target_update_period)},
      {"goal_hidden", Bind(&E::deep, &D::goal, &Q::hidden)},
      {"goal_learning_rate", Bind(&E::deep, &D::goal, &Q::learning_rate)},
      {"goal_gamma", Bind(&E::deep, &D::goal, &Q::gamma)},
      {"goal_target_period",
       Bind(&E::deep, &D::goal, &Q::target_update_period)},
      {"per_alpha", Bind(&E::deep, &D::prioritized,
                         &replay::PrioritizedConfig::alpha)},
      {"per_beta", Bind(&E::deep, &D::prioritized,
                        &replay::PrioritizedConfig::beta)},
      {"per_epsilon", Bind(&E::deep, &D::prioritized,
                           &replay::PrioritizedConfig::epsilon_priority)},
      {"forward_hidden", Bind(&E::deep, &D::forward,
                              &uncertainty::ForwardModelConfig::hidden)},
      {"forward_learning_rate",
       Bind(&E::deep, &D::forward,
            &uncertainty::ForwardModelConfig::learning_rate)},
      {"tabular_gamma", Bind(&E::tabular, &T::gamma)},
      {"tabular_beta", Bind(&E::tabular, &T::beta)},
      {"tabular_epsilon", Bind(&E::tabular, &T::epsilon)},
      {"tabular_goal_gamma", Bind(&E::tabular, &T::goal_gamma)},
      {"tabular_goal_budget", Bind(&E::tabular, &T::goal_step_budget)},
      {"tabular_tolerance", Bind(&E::tabular, &T::tolerance)},
  };
  return fields;
}

void Validate(const ExperimentConfig& c) {
  bool tabular = false, deep = false;
  for (const std::string& a : c.algorithms) {
    if (IsTabularAlgorithm(a)) {
      tabular = true;
    } else {
      directed::ParseAlgorithm(a);
      deep = true;
    }
  }
  envs::MakeEnvironment(c.env);
  if (tabular && c.env != "teleport-chain-40") {
    throw InvalidInput("tabular algorithms run on teleport-chain-40 only");
  }
  if (deep) c.deep.Validate();
  if (c.deep.episodes < 0 || c.deep.eval_every < 1) {
    throw InvalidInput("episodes must be >= 0 and eval_every >= 1");
  }
  if (c.tabular.goal_step_budget < 1 || !(c.tabular.gamma < 1.0) ||
      !(c.tabular.goal_gamma < 1.0)) {
    throw InvalidInput("bad tabular settings");
  }
}

double Mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double StdErr(const std::vector<double>& v, double mean) {
  if (v.size() < 2) return 0.0;
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  const double n = static_cast<double>(v.size());
  return std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
}

std::ofstream OpenForWrite(const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::ios_base::failure("cannot write " + path.string());
  return out;
}

void Finish(std::ofstream& out, const fs::path& path) {
  out.flush();
  if (!out) throw std::ios_base::failure("write failed: " + path.string());
}

std::string RunStem(const std::string& algorithm, std::size_t index,
                    std::uint64_t seed) {
  return algorithm + "_run" + std::to_string(index) + "_seed" +
         std::to_string(seed);
}

}  // namespace

ExperimentConfig ConfigFromJson(const json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  ExperimentConfig c;
  const auto& fields = Fields();
  for (const auto& [key, value] : j.items()) {
    auto it = fields.find(key);
    if (it == fields.end()) throw ConfigError("unknown config key: " + key);
    try {
      it->second.set(c, value);
    } catch (const json::exception& e) {
      throw ConfigError("bad value for " + key + ": " + e.what());
    }
  }
  try {
    Validate(c);
  } catch (const InvalidInput& e) {
    throw ConfigError(e.what());
  }
  return c;
}

json ConfigToJson(const ExperimentConfig& config) {
  json j = json::object();
  for (const auto& [key, field] : Fields()) j[key] = field.get(config);
  return j;
}

ExperimentConfig LoadConfig(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("malformed config " + path.string() + ": " + e.what());
  }
  return ConfigFromJson(j);
}

bool IsTabularAlgorithm(const std::string& name) {
  return tabular::ParseTabularAlgorithm(name).has_value();
}

std::uint64_t RunSeed(const ExperimentConfig& config, std::uint64_t seed) {
  return DeriveSeed(config.master_seed, "run", seed);
}

RunOutcome RunSingle(const ExperimentConfig& config,
                     const std::string& algorithm, std::uint64_t seed) {
  RunOutcome out;
  const std::uint64_t run_seed = RunSeed(config, seed);
  const int every = config.deep.eval_every;
  if (auto algo = tabular::ParseTabularAlgorithm(algorithm)) {
    const tabular::TabularRunResult r = tabular::RunTabular(
        *algo, config.tabular, config.deep.episodes, run_seed);
    for (std::size_t e = 0; e < r.eval_returns.size(); ++e) {
      const int episode = static_cast<int>(e) + 1;
      if (episode % every != 0) continue;
      MetricsRecord rec;
      rec.episode = episode;
      rec.eval_return = r.eval_returns[e];
      rec.success_rate = r.eval_returns[e] > 0.0 ? 1.0 : 0.0;
      rec.coverage = r.coverage[e];
      rec.env_steps = r.env_steps[e];
      out.records.push_back(rec);
    }
    out.checkpoint = nullptr;
    return out;
  }
  directed::DirectedConfig deep = config.deep;
  deep.algorithm = directed::ParseAlgorithm(algorithm);
  std::unique_ptr<envs::Environment> env = envs::MakeEnvironment(config.env);
  directed::Orchestrator run(*env, deep, run_seed);
  try {
    run.Run([&](const MetricsRecord& r) { out.records.push_back(r); });
  } catch (const TrainingDivergence& e) {
    out.status = RunOutcome::Status::kDiverged;
    out.message = e.what();
  }
  out.checkpoint = {{"env", config.env},
                    {"algorithm", algorithm},
                    {"seed", seed},
                    {"agent", run.task_agent().ToJson()}};
  return out;
}

std::string FormatReal(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

void WriteRunCsv(const fs::path& path, std::uint64_t seed,
                 const std::vector<MetricsRecord>& records) {
  std::ofstream out = OpenForWrite(path);
  out << "seed,episode,eval_return,success_rate,coverage,env_steps,"
         "goal_buffer_size,goal_max_uncertainty\n";
  for (const MetricsRecord& r : records) {
    out << seed << ',' << r.episode << ',' << FormatReal(r.eval_return) << ','
        << FormatReal(r.success_rate) << ',' << FormatReal(r.coverage) << ','
        << r.env_steps << ',' << r.goal_buffer_size << ','
        << FormatReal(r.goal_max_uncertainty) << '\n';
  }
  Finish(out, path);
}

void WriteTimingCsv(const fs::path& path, std::uint64_t seed,
                    const std::vector<MetricsRecord>& records) {
  std::ofstream out = OpenForWrite(path);
  out << "seed,episode,wall_ms\n";
  for (const MetricsRecord& r : records) {
    out << seed << ',' << r.episode << ',' << FormatReal(r.wall_ms) << '\n';
  }
  Finish(out, path);
}

std::vector<AggregateRow> Aggregate(
    const std::vector<std::vector<MetricsRecord>>& runs) {
  std::map<int, std::vector<const MetricsRecord*>> by_episode;
  for (const auto& run : runs) {
    for (const MetricsRecord& r : run) by_episode[r.episode].push_back(&r);
  }
  std::vector<AggregateRow> rows;
  for (const auto& [episode, recs] : by_episode) {
    AggregateRow row;
    row.episode = episode;
    row.runs = static_cast<int>(recs.size());
    auto stat = [&](auto pick, double* mean, double* se) {
      std::vector<double> v;
      for (const MetricsRecord* r : recs) v.push_back(pick(*r));
      *mean = Mean(v);
      *se = StdErr(v, *mean);
    };
    stat([](const MetricsRecord& r) { return r.eval_return; },
         &row.eval_return_mean, &row.eval_return_stderr);
    stat([](const MetricsRecord& r) { return r.success_rate; },
         &row.success_rate_mean, &row.success_rate_stderr);
    stat([](const MetricsRecord& r) { return r.coverage; }, &row.coverage_mean,
         &row.coverage_stderr);
    stat([](const MetricsRecord& r) { return double(r.env_steps); },
         &row.env_steps_mean, &row.env_steps_stderr);
    rows.push_back(row);
  }
  return rows;
}

void WriteAggregateCsv(const fs::path& path,
                       const std::vector<AggregateRow>& rows) {
  std::ofstream out = OpenForWrite(path);
  out << "episode,runs,eval_return_mean,eval_return_stderr,"
         "success_rate_mean,success_rate_stderr,coverage_mean,"
         "coverage_stderr,env_steps_mean,env_steps_stderr\n";
  for (const AggregateRow& r : rows) {
    out << r.episode << ',' << r.runs << ',' << FormatReal(r.eval_return_mean)
        << ',' << FormatReal(r.eval_return_stderr) << ','
        << FormatReal(r.success_rate_mean) << ','
        << FormatReal(r.success_rate_stderr) << ','
        << FormatReal(r.coverage_mean) << ',' << FormatReal(r.coverage_stderr)
        << ',' << FormatReal(r.env_steps_mean) << ','
        << FormatReal(r.env_steps_stderr) << '\n';
  }
  Finish(out, path);
}

int WorkerCount(std::size_t jobs) {
  int workers = static_cast<int>(std::thread::hardware_concurrency());
  if (const char* env = std::getenv("DRIFTLESS_THREADS")) {
    const int cap = std::atoi(env);
    if (cap > 0) workers = cap;
  }
  workers = std::max(workers, 1);
  return static_cast<int>(
      std::min<std::size_t>(static_cast<std::size_t>(workers),
                            std::max<std::size_t>(jobs, 1)));
}

int RunMatrix(const ExperimentConfig& config, std::ostream& log) {
  const fs::path root(config.output);
  try {
    fs::create_directories(root);
    std::ofstream echo = OpenForWrite(root / "config.json");
    echo << ConfigToJson(config).dump(2) << '\n';
    Finish(echo, root / "config.json");
  } catch (const std::exception& e) {
    log << "error: " << e.what() << '\n';
    return kExitIo;
  }

  struct Job {
    std::string algorithm;
    std::size_t index;
    std::uint64_t seed;
    std::string status = "pending";
    std::string message;
    std::vector<MetricsRecord> records;
  };
  std::vector<Job> jobs;
  for (const std::string& a : config.algorithms) {
    for (std::size_t i = 0; i < config.seeds.size(); ++i) {
      jobs.push_back({a, i, config.seeds[i], "pending", "", {}});
    }
  }

  std::atomic<std::size_t> next{0};
  std::mutex log_mutex;
  auto work = [&] {
    for (std::size_t k = next++; k < jobs.size(); k = next++) {
      Job& job = jobs[k];
      const std::string stem = RunStem(job.algorithm, job.index, job.seed);
      try {
        RunOutcome r = RunSingle(config, job.algorithm, job.seed);
        job.records = std::move(r.records);
        WriteRunCsv(root / (stem + ".csv"), job.seed, job.records);
        WriteTimingCsv(root / (stem + ".timing.csv"), job.seed, job.records);
        if (config.save_checkpoints && !r.checkpoint.is_null()) {
          std::ofstream ck = OpenForWrite(root / (stem + ".checkpoint.json"));
          ck << r.checkpoint.dump() << '\n';
          Finish(ck, root / (stem + ".checkpoint.json"));
        }
        job.status = r.status == RunOutcome::Status::kOk ? "ok" : "diverged";
        job.message = r.message;
      } catch (const std::ios_base::failure& e) {
        job.status = "io-error";
        job.message = e.what();
      }
      std::lock_guard<std::mutex> lock(log_mutex);
      log << stem << ": " << job.status
          << (job.message.empty() ? "" : " (" + job.message + ")") << '\n';
    }
  };
  const int workers = WorkerCount(jobs.size());
  std::vector<std::thread> pool;
  for (int w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (std::thread& t : pool) t.join();

  bool io_error = false, diverged = false;
  json manifest = {{"config", "config.json"}, {"runs", json::array()}};
  for (const Job& job : jobs) {
    const std::string stem = RunStem(job.algorithm, job.index, job.seed);
    manifest["runs"].push_back({{"algorithm", job.algorithm},
                                {"index", job.index},
                                {"seed", job.seed},
                                {"run_seed", RunSeed(config, job.seed)},
                                {"status", job.status},
                                {"message", job.message},
                                {"metrics", stem + ".csv"}});
    io_error |= job.status == "io-error";
    diverged |= job.status == "diverged";
  }
  try {
    for (const std::string& a : config.algorithms) {
      std::vector<std::vector<MetricsRecord>> ok;
      for (const Job& job : jobs) {
        if (job.algorithm == a && job.status == "ok") ok.push_back(job.records);
      }
      WriteAggregateCsv(root / (a + "_aggregate.csv"), Aggregate(ok));
    }
    std::ofstream mf = OpenForWrite(root / "manifest.json");
    mf << manifest.dump(2) << '\n';
    Finish(mf, root / "manifest.json");
  } catch (const std::exception& e) {
    log << "error: " << e.what() << '\n';
    return kExitIo;
  }
  if (io_error) return kExitIo;
  if (diverged) return kExitDivergence;
  return kExitOk;
}

CheckpointEval EvaluateCheckpoint(const fs::path& path, int episodes,
                                  std::uint64_t seed) {
  if (episodes < 1) throw InvalidInput("episodes must be >= 1");
  std::ifstream in(path);
  if (!in) throw std::ios_base::failure("cannot read " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw InvalidInput("malformed checkpoint: " + std::string(e.what()));
  }
  if (!j.contains("env") || !j.contains("agent")) {
    throw InvalidInput("checkpoint lacks env or agent");
  }
  std::unique_ptr<envs::Environment> env =
      envs::MakeEnvironment(j["env"].get<std::string>());
  const agents::DqnAgent agent = agents::DqnAgent::FromJson(j["agent"]);
  if (agent.input_dim() != env->state_dim() ||
      agent.num_actions() != env->num_actions()) {
    throw InvalidInput("checkpoint does not match its environment");
  }
  const agents::Encoder encoder(env->state_box());
  std::mt19937_64 rng(DeriveSeed(seed, "checkpoint-eval", 0));
  CheckpointEval out;
  out.episodes = episodes;
  int successes = 0;
  for (int e = 0; e < episodes; ++e) {
    std::vector<double> state = env->Reset(rng);
    double ret = 0.0;
    bool success = false;
    while (!env->episode_done()) {
      const envs::StepResult r = env->Step(agent.Greedy(encoder.Encode(state)));
      ret += r.reward;
      success |= r.terminal;
      state = r.next_state;
    }
    out.mean_return += ret / episodes;
    successes += success;
  }
  out.success_rate = static_cast<double>(successes) / episodes;
  return out;
}

}  // namespace driftless::harness

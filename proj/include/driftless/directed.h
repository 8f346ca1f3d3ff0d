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

#ifndef DRIFTLESS_DIRECTED_H_
#define DRIFTLESS_DIRECTED_H_

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "driftless/agents.h"
#include "driftless/envs.h"
#include "driftless/goal_buffer.h"
#include "driftless/replay.h"
#include "driftless/uncertainty.h"

namespace driftless::directed {

enum class Algorithm { kDqn, kDqnBonus, kDeRandom, kDeUncertain };

Algorithm ParseAlgorithm(const std::string& name);
std::string ToString(Algorithm algorithm);
bool IsDirected(Algorithm algorithm);

struct DirectedConfig {
  Algorithm algorithm = Algorithm::kDeUncertain;
  int pursuit_steps = 50;                    // D
  std::size_t top_k = 1;                     // K
  std::size_t goal_capacity = 10000;         // N
  double mix_prob = 0.5;                     // P(greedy episode)
  double reach_tolerance = 0.05;
  int episodes = 300;
  int eval_every = 5;
  int eval_episodes = 10;
  int batch_size = 64;
  int updates_per_step = 1;
  std::size_t replay_capacity = 100000;
  std::size_t her_capacity = 200000;
  int her_future_k = 4;
  int visitation_bins = 10;
  double bonus_decay = 0.01;
  agents::DqnConfig task{.learning_rate = 1e-4,
                         .gamma = 0.99,
                         .epsilon = 0.1,
                         .target_update_period = 1000};
  agents::DqnConfig goal{.learning_rate = 1e-3,
                         .gamma = 0.98,
                         .epsilon = 0.0,
                         .target_update_period = 30};
  replay::PrioritizedConfig prioritized{.alpha = 0.4, .beta = 1.0};
  uncertainty::ForwardModelConfig forward{};

  // Throws InvalidInput on out-of-range values.
  void Validate() const;
};

// Discrete goal spaces compare exactly; continuous ones by L-infinity
// distance after mapping the state box onto [0, 1].
bool Reached(const envs::Environment& env, std::span<const double> achieved,
             std::span<const double> desired, double tolerance);

enum class Mode { kGreedy, kDirected };
enum class ActionKind { kPolicy, kEpsilon, kPursuit, kRandom };

struct GoalAttempt {
  std::vector<double> goal;
  int first_step = 0;
  int length = 0;
  bool reached = false;
};

struct EpisodeLog {
  Mode mode = Mode::kGreedy;
  std::vector<replay::Transition> transitions;
  std::vector<ActionKind> kinds;
  std::vector<GoalAttempt> attempts;
  std::vector<double> step_ms;
  double env_return = 0.0;
  bool reached_task_goal = false;
};

struct UpdateMetrics {
  int updates = 0;
  int skipped = 0;  // replay smaller than a batch
  double task_loss = 0.0;
  double goal_loss = 0.0;
  double forward_loss = 0.0;
};

struct EvalResult {
  double mean_return = 0.0;
  double success_rate = 0.0;
  double coverage = 0.0;
};

struct MetricsRecord {
  int episode = 0;
  double eval_return = 0.0;
  double success_rate = 0.0;
  double coverage = 0.0;
  std::int64_t env_steps = 0;
  std::size_t goal_buffer_size = 0;
  double goal_max_uncertainty = 0.0;
  double wall_ms = 0.0;
};

// Optional observers for data-flow audits. Each is called once per update.
struct Instrumentation {
  // The task learner's batch after any bonus, with the stored rewards and
  // the bonuses that were added (empty when none).
  std::function<void(const agents::Batch& batch,
                     std::span<const double> stored_rewards,
                     std::span<const double> bonuses)>
      on_task_batch;
  // The goal learner's batch and targets, before it trains on them, plus
  // how many uncertainty reads (forward-model scores, bonus normalisations,
  // goal-buffer scans) happened while they were built.
  std::function<void(const agents::Batch& batch,
                     std::span<const double> targets,
                     std::int64_t uncertainty_reads)>
      on_goal_batch;
};

// One training run of a deep learner on one environment.
class Orchestrator {
 public:
  Orchestrator(const envs::Environment& env, DirectedConfig config,
               std::uint64_t seed);

  // One training episode: acts, stores transitions, updates coverage.
  EpisodeLog RunEpisode();
  // One update per environment step of `log` (times updates_per_step).
  UpdateMetrics PostEpisodeUpdate(const EpisodeLog& log);
  // Greedy rollouts of the task learner on a private environment copy.
  EvalResult Evaluate(int episodes);
  // Full run; evaluates every eval_every episodes.
  std::vector<MetricsRecord> Run(
      const std::function<void(const MetricsRecord&)>& on_record = {});

  void set_instrumentation(Instrumentation hooks) { hooks_ = std::move(hooks); }

  const DirectedConfig& config() const { return config_; }
  const agents::DqnAgent& task_agent() const { return task_; }
  const agents::GoalDqnAgent& goal_agent() const { return goal_agent_; }
  const replay::PrioritizedBuffer& replay_buffer() const { return replay_; }
  const replay::UniformBuffer& her_buffer() const { return her_; }
  const goals::GoalBuffer& goal_buffer() const { return goal_buffer_; }
  const envs::VisitationGrid& visitation() const { return grid_; }
  std::int64_t env_steps() const { return env_steps_; }
  int episodes_run() const { return episodes_run_; }
  std::int64_t skipped_updates() const { return skipped_updates_; }
  std::int64_t uncertainty_reads() const;
  // Uncertainty reads made while building or applying goal-learner updates.
  std::int64_t goal_update_reads() const { return goal_update_reads_; }

 private:
  void Store(EpisodeLog& log, const std::vector<double>& state, int action,
             const envs::StepResult& r, ActionKind kind, double ms);
  std::vector<double> PickGoal();
  void GreedyEpisode(EpisodeLog& log, std::vector<double> state);
  void DirectedEpisode(EpisodeLog& log, std::vector<double> state);

  DirectedConfig config_;
  std::unique_ptr<envs::Environment> env_;
  std::unique_ptr<envs::Environment> eval_env_;
  agents::Encoder encoder_;
  // Independent streams, so that switching a component off leaves the
  // others' draws untouched.
  std::mt19937_64 act_rng_;
  std::mt19937_64 mode_rng_;
  std::mt19937_64 train_rng_;
  std::mt19937_64 her_rng_;
  std::mt19937_64 eval_rng_;
  agents::DqnAgent task_;
  agents::GoalDqnAgent goal_agent_;
  uncertainty::ForwardModel forward_;
  uncertainty::BonusNormalizer normalizer_;
  replay::PrioritizedBuffer replay_;
  replay::UniformBuffer her_;
  goals::GoalBuffer goal_buffer_;
  envs::VisitationGrid grid_;
  std::vector<std::vector<double>> visited_;  // cold-start goal pool
  replay::ReachedFn reached_;
  Instrumentation hooks_;
  std::int64_t env_steps_ = 0;
  int episodes_run_ = 0;
  std::int64_t skipped_updates_ = 0;
  std::int64_t goal_update_reads_ = 0;
};

}  // namespace driftless::directed

#endif  // DRIFTLESS_DIRECTED_H_

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

#include "driftless/directed.h"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "driftless/errors.h"
#include "driftless/seeding.h"

namespace driftless::directed {

Algorithm ParseAlgorithm(const std::string& name) {
  if (name == "dqn") return Algorithm::kDqn;
  if (name == "dqn-bonus") return Algorithm::kDqnBonus;
  if (name == "de-random") return Algorithm::kDeRandom;
  if (name == "de-uncertain") return Algorithm::kDeUncertain;
  throw InvalidInput("unknown deep algorithm: " + name);
}

std::string ToString(Algorithm algorithm) {
  switch (algorithm) {
    case Algorithm::kDqn: return "dqn";
    case Algorithm::kDqnBonus: return "dqn-bonus";
    case Algorithm::kDeRandom: return "de-random";
    case Algorithm::kDeUncertain: return "de-uncertain";
  }
  return "?";
}

bool IsDirected(Algorithm algorithm) {
  return algorithm == Algorithm::kDeRandom ||
         algorithm == Algorithm::kDeUncertain;
}

namespace {

bool UsesForwardModel(Algorithm algorithm) {
  return algorithm == Algorithm::kDqnBonus ||
         algorithm == Algorithm::kDeUncertain;
}

double NowMs() {
  using namespace std::chrono;
  return duration<double, std::milli>(steady_clock::now().time_since_epoch())
      .count();
}

}  // namespace

void DirectedConfig::Validate() const {
  if (pursuit_steps < 1) throw InvalidInput("pursuit_steps must be >= 1");
  if (top_k < 1) throw InvalidInput("top_k must be >= 1");
  if (goal_capacity < 1) throw InvalidInput("goal_capacity must be >= 1");
  if (!(mix_prob >= 0.0 && mix_prob <= 1.0)) {
    throw InvalidInput("mix_prob must lie in [0, 1]");
  }
  if (!(reach_tolerance > 0.0)) {
    throw InvalidInput("reach_tolerance must be > 0");
  }
  if (episodes < 0) throw InvalidInput("episodes must be >= 0");
  if (eval_every < 1) throw InvalidInput("eval_every must be >= 1");
  if (eval_episodes < 1) throw InvalidInput("eval_episodes must be >= 1");
  if (batch_size < 1) throw InvalidInput("batch_size must be >= 1");
  if (updates_per_step < 0) throw InvalidInput("updates_per_step must be >= 0");
  if (her_future_k < 0) throw InvalidInput("her_future_k must be >= 0");
  if (visitation_bins < 1) throw InvalidInput("visitation_bins must be >= 1");
}

bool Reached(const envs::Environment& env, std::span<const double> achieved,
             std::span<const double> desired, double tolerance) {
  if (achieved.size() != desired.size()) {
    throw InvalidInput("Reached: goals from different spaces");
  }
  if (env.discrete_goals()) {
    return std::equal(achieved.begin(), achieved.end(), desired.begin());
  }
  const envs::Box& box = env.state_box();
  for (std::size_t i = 0; i < achieved.size(); ++i) {
    const double width = box.high[i] - box.low[i];
    if (std::abs(achieved[i] - desired[i]) / width > tolerance) return false;
  }
  return true;
}

Orchestrator::Orchestrator(const envs::Environment& env, DirectedConfig config,
                           std::uint64_t seed)
    : config_([&] {
        config.Validate();
        return config;
      }()),
      env_(env.Clone()),
      eval_env_(env.Clone()),
      encoder_(env.state_box()),
      act_rng_(DeriveSeed(seed, "act", 0)),
      mode_rng_(DeriveSeed(seed, "mode", 0)),
      train_rng_(DeriveSeed(seed, "train", 0)),
      her_rng_(DeriveSeed(seed, "her", 0)),
      eval_rng_(DeriveSeed(seed, "eval", 0)),
      task_([&] {
        std::mt19937_64 init(DeriveSeed(seed, "init-task", 0));
        return agents::DqnAgent(env.state_dim(), env.num_actions(),
                                config_.task, init);
      }()),
      goal_agent_([&] {
        std::mt19937_64 init(DeriveSeed(seed, "init-goal", 0));
        return agents::GoalDqnAgent(env.state_dim(), env.num_actions(),
                                    config_.goal, init);
      }()),
      forward_([&] {
        std::mt19937_64 init(DeriveSeed(seed, "init-forward", 0));
        return uncertainty::ForwardModel(env.state_dim(), env.num_actions(),
                                         config_.forward, init);
      }()),
      normalizer_(config_.bonus_decay),
      replay_([&] {
        replay::PrioritizedConfig p = config_.prioritized;
        p.capacity = config_.replay_capacity;
        return p;
      }()),
      her_(config_.her_capacity),
      goal_buffer_(config_.goal_capacity),
      grid_(env.state_box(), config_.visitation_bins) {
  const envs::Environment* e = env_.get();
  const double tol = config_.reach_tolerance;
  reached_ = [e, tol](std::span<const double> a, std::span<const double> d) {
    return Reached(*e, a, d, tol);
  };
}

std::int64_t Orchestrator::uncertainty_reads() const {
  return forward_.score_calls() + normalizer_.calls() +
         goal_buffer_.uncertainty_reads();
}

void Orchestrator::Store(EpisodeLog& log, const std::vector<double>& state,
                         int action, const envs::StepResult& r,
                         ActionKind kind, double ms) {
  replay::Transition t;
  t.state = state;
  t.action = action;
  t.reward = r.reward;
  t.next_state = r.next_state;
  t.done = r.terminal;
  t.achieved_goal = r.achieved_goal;
  replay_.Push(t);
  grid_.Visit(r.next_state);
  visited_.push_back(r.next_state);
  ++env_steps_;
  log.env_return += r.reward;
  log.reached_task_goal |= r.terminal;
  log.transitions.push_back(std::move(t));
  log.kinds.push_back(kind);
  log.step_ms.push_back(ms);
}

void Orchestrator::GreedyEpisode(EpisodeLog& log, std::vector<double> state) {
  std::vector<double> input(encoder_.dim());
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::uniform_int_distribution<int> any(0, env_->num_actions() - 1);
  while (!env_->episode_done()) {
    const double t0 = NowMs();
    // Same law as DqnAgent::ActEpsilonGreedy, but logs which branch fired.
    int action;
    ActionKind kind;
    if (coin(act_rng_) < config_.task.epsilon) {
      action = any(act_rng_);
      kind = ActionKind::kEpsilon;
    } else {
      encoder_.Encode(state, input.data());
      action = task_.Greedy(input);
      kind = ActionKind::kPolicy;
    }
    const envs::StepResult r = env_->Step(action);
    Store(log, state, action, r, kind, NowMs() - t0);
    state = r.next_state;
  }
}

std::vector<double> Orchestrator::PickGoal() {
  if (goal_buffer_.empty()) {
    std::uniform_int_distribution<std::size_t> pick(0, visited_.size() - 1);
    return visited_[pick(act_rng_)];
  }
  const std::size_t k = config_.algorithm == Algorithm::kDeRandom
                            ? goals::kAllGoals
                            : config_.top_k;
  return goal_buffer_.Sample(k, act_rng_).state;
}

void Orchestrator::DirectedEpisode(EpisodeLog& log,
                                   std::vector<double> state) {
  std::uniform_int_distribution<int> any(0, env_->num_actions() - 1);
  std::vector<double> s_enc(encoder_.dim()), g_enc(encoder_.dim());
  while (!env_->episode_done()) {
    GoalAttempt attempt;
    attempt.goal = PickGoal();
    attempt.first_step = static_cast<int>(log.transitions.size());
    encoder_.Encode(attempt.goal, g_enc.data());
    while (attempt.length < config_.pursuit_steps && !env_->episode_done()) {
      const double t0 = NowMs();
      encoder_.Encode(state, s_enc.data());
      const int action = goal_agent_.ActTowardGoal(s_enc, g_enc);
      const envs::StepResult r = env_->Step(action);
      Store(log, state, action, r, ActionKind::kPursuit, NowMs() - t0);
      state = r.next_state;
      ++attempt.length;
      if (reached_(r.achieved_goal, attempt.goal)) {
        attempt.reached = true;
        break;
      }
    }
    log.attempts.push_back(std::move(attempt));
    if (env_->episode_done()) break;
    const double t0 = NowMs();
    const int action = any(act_rng_);
    const envs::StepResult r = env_->Step(action);
    Store(log, state, action, r, ActionKind::kRandom, NowMs() - t0);
    state = r.next_state;
  }
}

EpisodeLog Orchestrator::RunEpisode() {
  EpisodeLog log;
  std::vector<double> state = env_->Reset(act_rng_);
  grid_.Visit(state);
  visited_.push_back(state);
  bool greedy = true;
  if (IsDirected(config_.algorithm)) {
    greedy = std::uniform_real_distribution<double>(0.0, 1.0)(mode_rng_) <
             config_.mix_prob;
  }
  log.mode = greedy ? Mode::kGreedy : Mode::kDirected;
  if (greedy) {
    GreedyEpisode(log, std::move(state));
  } else {
    DirectedEpisode(log, std::move(state));
  }
  if (IsDirected(config_.algorithm)) {
    for (replay::Transition& t :
         replay::HerRelabel(log.transitions, replay::HerStrategy::kFuture,
                            config_.her_future_k, reached_, her_rng_)) {
      her_.Push(std::move(t));
    }
  }
  ++episodes_run_;
  return log;
}

UpdateMetrics Orchestrator::PostEpisodeUpdate(const EpisodeLog& log) {
  UpdateMetrics m;
  const std::size_t batch = static_cast<std::size_t>(config_.batch_size);
  const std::int64_t count = static_cast<std::int64_t>(log.transitions.size()) *
                             config_.updates_per_step;
  const bool directed = IsDirected(config_.algorithm);
  const bool scored = UsesForwardModel(config_.algorithm);
  const std::vector<double> ones(batch, 1.0);
  std::vector<double> uncertainties(batch, 0.0);
  std::vector<std::vector<double>> states(batch);
  for (std::int64_t i = 0; i < count; ++i) {
    if (replay_.size() < batch) {
      ++m.skipped;
      ++skipped_updates_;
      continue;
    }
    const replay::PrioritizedSample sample = replay_.Sample(batch, train_rng_);
    agents::Batch b = agents::MakeBatch(sample.transitions, encoder_, false);

    if (scored) uncertainties = forward_.Score(b);
    if (directed) {
      for (std::size_t j = 0; j < batch; ++j) {
        states[j] = sample.transitions[j].state;
      }
      goal_buffer_.InsertBatch(states, uncertainties);
    }

    std::vector<double> bonuses;
    const std::vector<double> stored = b.rewards;
    if (config_.algorithm == Algorithm::kDqnBonus) {
      bonuses = normalizer_.Bonuses(uncertainties, env_steps_);
      for (std::size_t j = 0; j < batch; ++j) b.rewards[j] += bonuses[j];
    }
    if (hooks_.on_task_batch) hooks_.on_task_batch(b, stored, bonuses);
    const agents::TrainResult task = task_.TrainStep(b, sample.weights);
    m.task_loss += task.loss;

    if (directed && her_.size() >= batch) {
      const std::int64_t reads_before = uncertainty_reads();
      const std::vector<replay::Transition> relabelled =
          her_.Sample(batch, her_rng_);
      const agents::Batch gb = agents::MakeBatch(relabelled, encoder_, true);
      if (hooks_.on_goal_batch) {
        hooks_.on_goal_batch(gb, goal_agent_.dqn().TdTargets(gb),
                             uncertainty_reads() - reads_before);
      }
      m.goal_loss += goal_agent_.dqn().TrainStep(gb, ones).loss;
      goal_update_reads_ += uncertainty_reads() - reads_before;
    }

    if (scored) m.forward_loss += forward_.Train(b);
    replay_.UpdatePriorities(sample.ids, task.td_errors);
    ++m.updates;
  }
  return m;
}

EvalResult Orchestrator::Evaluate(int episodes) {
  EvalResult out;
  std::vector<double> input(encoder_.dim());
  int successes = 0;
  for (int e = 0; e < episodes; ++e) {
    std::vector<double> state = eval_env_->Reset(eval_rng_);
    double ret = 0.0;
    bool success = false;
    while (!eval_env_->episode_done()) {
      encoder_.Encode(state, input.data());
      const envs::StepResult r = eval_env_->Step(task_.Greedy(input));
      ret += r.reward;
      success |= r.terminal;
      state = r.next_state;
    }
    out.mean_return += ret / episodes;
    successes += success;
  }
  out.success_rate = static_cast<double>(successes) / episodes;
  out.coverage = grid_.Coverage();
  return out;
}

std::vector<MetricsRecord> Orchestrator::Run(
    const std::function<void(const MetricsRecord&)>& on_record) {
  std::vector<MetricsRecord> records;
  const double start = NowMs();
  for (int episode = 1; episode <= config_.episodes; ++episode) {
    PostEpisodeUpdate(RunEpisode());
    if (episode % config_.eval_every != 0) continue;
    const EvalResult eval = Evaluate(config_.eval_episodes);
    MetricsRecord rec;
    rec.episode = episode;
    rec.eval_return = eval.mean_return;
    rec.success_rate = eval.success_rate;
    rec.coverage = eval.coverage;
    rec.env_steps = env_steps_;
    rec.goal_buffer_size = goal_buffer_.size();
    rec.goal_max_uncertainty = goal_buffer_.MaxUncertainty();
    rec.wall_ms = NowMs() - start;
    if (on_record) on_record(rec);
    records.push_back(rec);
  }
  return records;
}

}  // namespace driftless::directed

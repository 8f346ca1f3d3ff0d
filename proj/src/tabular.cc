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

#include "driftless/tabular.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "driftless/errors.h"

namespace driftless::tabular {

TabularMDP::TabularMDP(int states, int actions, double discount)
    : n_states(states),
      n_actions(actions),
      transitions(static_cast<std::size_t>(states) * actions),
      rewards(Eigen::MatrixXd::Zero(states, actions)),
      gamma(discount) {
  if (states < 1 || actions < 1) {
    throw InvalidInput("TabularMDP: need at least one state and action");
  }
}

void TabularMDP::Validate() const {
  if (!(gamma >= 0.0 && gamma < 1.0)) {
    throw InvalidInput("TabularMDP: gamma must lie in [0, 1)");
  }
  for (int s = 0; s < n_states; ++s) {
    for (int a = 0; a < n_actions; ++a) {
      double total = 0.0;
      for (const Outcome& o : at(s, a)) {
        if (o.next_state < 0 || o.next_state >= n_states || o.probability < 0) {
          throw InvalidInput("TabularMDP: bad outcome");
        }
        total += o.probability;
      }
      if (std::abs(total - 1.0) > 1e-12) {
        throw InvalidInput("TabularMDP: T(.|s,a) does not sum to 1");
      }
    }
  }
  if (!rewards.allFinite()) throw InvalidInput("TabularMDP: non-finite reward");
}

namespace {

// Transition table flattened for repeated sweeps.
struct CompiledMdp {
  std::vector<int> offsets;  // per (s, a), into next/prob
  std::vector<int> next;
  std::vector<double> prob;
};

CompiledMdp Compile(const TabularMDP& mdp) {
  CompiledMdp c;
  c.offsets.reserve(mdp.transitions.size() + 1);
  c.offsets.push_back(0);
  for (const auto& outcomes : mdp.transitions) {
    for (const Outcome& o : outcomes) {
      c.next.push_back(o.next_state);
      c.prob.push_back(o.probability);
    }
    c.offsets.push_back(static_cast<int>(c.next.size()));
  }
  return c;
}

void Backup(const TabularMDP& mdp, const CompiledMdp& c, const QTable& q,
            QTable& next) {
  const Eigen::VectorXd v = q.rowwise().maxCoeff();
  for (int s = 0; s < mdp.n_states; ++s) {
    for (int a = 0; a < mdp.n_actions; ++a) {
      const std::size_t pair = static_cast<std::size_t>(s) * mdp.n_actions + a;
      double expected = 0.0;
      for (int k = c.offsets[pair]; k < c.offsets[pair + 1]; ++k) {
        expected += c.prob[k] * v(c.next[k]);
      }
      next(s, a) = mdp.rewards(s, a) + mdp.gamma * expected;
    }
  }
}

}  // namespace

ValueIterationResult SolveValueIteration(const TabularMDP& mdp,
                                         double tolerance,
                                         const QTable* warm_start,
                                         int max_sweeps) {
  mdp.Validate();
  if (!(tolerance > 0.0)) {
    throw InvalidInput("value iteration tolerance must be positive");
  }
  ValueIterationResult result;
  if (warm_start != nullptr) {
    if (warm_start->rows() != mdp.n_states ||
        warm_start->cols() != mdp.n_actions) {
      throw InvalidInput("value iteration warm start has the wrong shape");
    }
    result.q = *warm_start;
  } else {
    result.q = QTable::Zero(mdp.n_states, mdp.n_actions);
  }
  const CompiledMdp compiled = Compile(mdp);
  QTable next(mdp.n_states, mdp.n_actions);
  while (result.sweeps < max_sweeps) {
    Backup(mdp, compiled, result.q, next);
    result.residual = (next - result.q).cwiseAbs().maxCoeff();
    result.residual_history.push_back(result.residual);
    result.q.swap(next);
    ++result.sweeps;
    if (result.residual < tolerance) break;
  }
  return result;
}

QTable ValueIteration(const TabularMDP& mdp, double tolerance) {
  return SolveValueIteration(mdp, tolerance).q;
}

double BellmanResidual(const TabularMDP& mdp, const QTable& q) {
  QTable next(mdp.n_states, mdp.n_actions);
  Backup(mdp, Compile(mdp), q, next);
  return (next - q).cwiseAbs().maxCoeff();
}

int GreedyAction(const QTable& q, int s) {
  int best = 0;
  for (int a = 1; a < q.cols(); ++a) {
    if (q(s, a) > q(s, best)) best = a;
  }
  return best;
}

int GreedyActionRandomTies(const QTable& q, int s, std::mt19937_64& rng) {
  const double top = q.row(s).maxCoeff();
  std::vector<int> ties;
  for (int a = 0; a < q.cols(); ++a) {
    if (q(s, a) == top) ties.push_back(a);
  }
  if (ties.size() == 1) return ties.front();
  std::uniform_int_distribution<std::size_t> pick(0, ties.size() - 1);
  return ties[pick(rng)];
}

EmpiricalModel::EmpiricalModel(int n_states, int n_actions)
    : n_states_(n_states),
      n_actions_(n_actions),
      counts_(static_cast<std::size_t>(n_states) * n_actions, 0),
      next_counts_(static_cast<std::size_t>(n_states) * n_actions * n_states,
                   0),
      reward_sums_(static_cast<std::size_t>(n_states) * n_actions, 0.0),
      known_(n_states, false),
      terminal_(n_states, false) {}

void EmpiricalModel::Record(int s, int a, double reward, int next_state,
                            bool terminal) {
  if (s < 0 || s >= n_states_ || a < 0 || a >= n_actions_ || next_state < 0 ||
      next_state >= n_states_) {
    throw InvalidInput("EmpiricalModel::Record: index out of range");
  }
  ++counts_[Index(s, a)];
  ++next_counts_[Index(s, a) * n_states_ + next_state];
  reward_sums_[Index(s, a)] += reward;
  known_[s] = true;
  known_[next_state] = true;
  if (terminal) terminal_[next_state] = true;
  ++total_;
}

std::int64_t EmpiricalModel::count(int s, int a, int next) const {
  return next_counts_[Index(s, a) * n_states_ + next];
}

double EmpiricalModel::MeanReward(int s, int a) const {
  if (!visited(s, a)) throw ContractViolation("MeanReward of unvisited pair");
  return reward_sums_[Index(s, a)] / static_cast<double>(count(s, a));
}

std::vector<Outcome> EmpiricalModel::NextDistribution(int s, int a) const {
  if (!visited(s, a)) {
    throw ContractViolation("NextDistribution of unvisited pair");
  }
  std::vector<Outcome> out;
  const double n = static_cast<double>(count(s, a));
  for (int next = 0; next < n_states_; ++next) {
    const std::int64_t c = count(s, a, next);
    if (c > 0) out.push_back({next, static_cast<double>(c) / n});
  }
  return out;
}

double CountBonus(double beta, std::int64_t n) {
  return beta / std::sqrt(static_cast<double>(n));
}

namespace {

// Copies `warm` into the first rows of an extended table whose extra rows
// hold `extra_value`.
QTable Extend(const QTable& warm, int extra_rows, double extra_value) {
  QTable q(warm.rows() + extra_rows, warm.cols());
  q.topRows(warm.rows()) = warm;
  q.bottomRows(extra_rows).setConstant(extra_value);
  return q;
}

void SelfLoop(TabularMDP& mdp, int s) {
  for (int a = 0; a < mdp.n_actions; ++a) mdp.at(s, a) = {{s, 1.0}};
}

// Empirical MDP over visited pairs, with unvisited pairs sent to `sink`
// paying `unvisited_reward`, and known terminal states absorbing.
TabularMDP OptimismMdp(const EmpiricalModel& model, double beta, double gamma,
                       double unvisited_reward, double sink_reward) {
  const int n = model.n_states();
  const int sink = n;
  TabularMDP mdp(n + 1, model.n_actions(), gamma);
  for (int s = 0; s < n; ++s) {
    if (model.terminal(s)) {
      SelfLoop(mdp, s);
      continue;
    }
    for (int a = 0; a < model.n_actions(); ++a) {
      if (model.visited(s, a)) {
        mdp.at(s, a) = model.NextDistribution(s, a);
        mdp.rewards(s, a) =
            model.MeanReward(s, a) + CountBonus(beta, model.count(s, a));
      } else {
        mdp.at(s, a) = {{sink, 1.0}};
        mdp.rewards(s, a) = unvisited_reward;
      }
    }
  }
  SelfLoop(mdp, sink);
  mdp.rewards.row(sink).setConstant(sink_reward);
  return mdp;
}

}  // namespace

QTable MbiePlan(const EmpiricalModel& model, double beta, double gamma,
                double r_max, double tolerance, const QTable* warm_start) {
  if (beta < 0.0) throw InvalidInput("MbiePlan: beta must be >= 0");
  const TabularMDP mdp = OptimismMdp(model, beta, gamma, r_max, r_max);
  const double v_max = r_max / (1.0 - gamma);
  QTable start = warm_start != nullptr
                     ? Extend(*warm_start, 1, v_max)
                     : QTable::Constant(mdp.n_states, mdp.n_actions, v_max);
  QTable q = SolveValueIteration(mdp, tolerance, &start).q;
  return q.topRows(model.n_states());
}

QTable QBonusPlan(const EmpiricalModel& model, double beta, double gamma,
                  double tolerance, const QTable* warm_start) {
  const TabularMDP mdp = OptimismMdp(model, beta, gamma, 0.0, 0.0);
  QTable start = warm_start != nullptr
                     ? Extend(*warm_start, 1, 0.0)
                     : QTable::Zero(mdp.n_states, mdp.n_actions);
  QTable q = SolveValueIteration(mdp, tolerance, &start).q;
  return q.topRows(model.n_states());
}

QTable GoalPlan(const EmpiricalModel& model, int goal, double goal_gamma,
                double tolerance) {
  const int n = model.n_states();
  const int done = n;
  TabularMDP mdp(n + 1, model.n_actions(), goal_gamma);
  for (int s = 0; s < n; ++s) {
    if (s == goal || model.terminal(s)) {
      SelfLoop(mdp, s);
      continue;
    }
    for (int a = 0; a < model.n_actions(); ++a) {
      if (!model.visited(s, a)) {
        mdp.at(s, a) = {{s, 1.0}};
        continue;
      }
      for (const Outcome& o : model.NextDistribution(s, a)) {
        if (o.next_state == goal) {
          mdp.rewards(s, a) += o.probability;
          mdp.at(s, a).push_back({done, o.probability});
        } else if (model.terminal(o.next_state)) {
          mdp.at(s, a).push_back({done, o.probability});
        } else {
          mdp.at(s, a).push_back(o);
        }
      }
    }
  }
  SelfLoop(mdp, done);
  QTable q = SolveValueIteration(mdp, tolerance).q;
  return q.topRows(n);
}

double StateUncertainty(const EmpiricalModel& model, int s) {
  double u = 0.0;
  for (int a = 0; a < model.n_actions(); ++a) {
    u = std::max(u, CountBonus(1.0, std::max<std::int64_t>(model.count(s, a), 1)));
  }
  return u;
}

std::vector<int> RankGoals(const EmpiricalModel& model, int fallback,
                           std::mt19937_64& rng) {
  std::vector<int> goals;
  for (int s = 0; s < model.n_states(); ++s) {
    if (model.known(s) && !model.terminal(s)) goals.push_back(s);
  }
  if (goals.empty()) return {fallback};
  std::shuffle(goals.begin(), goals.end(), rng);
  std::vector<double> u(model.n_states());
  for (int s : goals) u[s] = StateUncertainty(model, s);
  std::stable_sort(goals.begin(), goals.end(),
                   [&](int a, int b) { return u[a] > u[b]; });
  return goals;
}

namespace {

int UniformAction(int n_actions, std::mt19937_64& rng) {
  return std::uniform_int_distribution<int>(0, n_actions - 1)(rng);
}

int StateIndex(const envs::State& s) {
  return static_cast<int>(std::lround(s[0]));
}

struct StepOutcome {
  int next = 0;
  bool done = false;
};

StepOutcome TakeStep(EmpiricalModel& model, envs::TeleportChain& env, int s,
                     int a, StepKind kind, int segment, TabularEpisode& ep) {
  const envs::StepResult r = env.Step(a);
  const int next = StateIndex(r.next_state);
  model.Record(s, a, r.reward, next, r.terminal);
  ep.steps.push_back({s, a, next, r.reward, kind, segment});
  if (a == envs::kUp || a == envs::kDown) ++ep.teleports;
  if (r.terminal) ep.reached_task_goal = true;
  return {next, r.done};
}

}  // namespace

TabularEpisode TabularDirectedEpisode(EmpiricalModel& model,
                                      envs::TeleportChain& env,
                                      const TabularConfig& config,
                                      std::mt19937_64& rng) {
  TabularEpisode ep;
  int s = StateIndex(env.Reset(rng));
  bool done = false;
  while (!done) {
    int goal = s;
    QTable plan;
    for (int candidate : RankGoals(model, s, rng)) {
      if (candidate == s) {
        goal = s;
        break;
      }
      QTable q = GoalPlan(model, candidate, config.goal_gamma);
      if (q.row(s).maxCoeff() > 0.0) {
        goal = candidate;
        plan = std::move(q);
        break;
      }
    }
    const int segment = static_cast<int>(ep.segments.size());
    ep.segments.push_back(
        {s, goal, static_cast<int>(ep.steps.size()), 0, false});
    while (s != goal && ep.segments.back().length < config.goal_step_budget &&
           !done) {
      const StepOutcome o = TakeStep(model, env, s, GreedyAction(plan, s),
                                     StepKind::kPursuit, segment, ep);
      s = o.next;
      done = o.done;
      ++ep.segments.back().length;
    }
    ep.segments.back().reached = s == goal;
    if (done) break;
    const StepOutcome o =
        TakeStep(model, env, s, UniformAction(env.num_actions(), rng),
                 StepKind::kRandom, segment, ep);
    s = o.next;
    done = o.done;
  }
  return ep;
}

std::optional<TabularAlgorithm> ParseTabularAlgorithm(const std::string& s) {
  if (s == "tabular-mbie") return TabularAlgorithm::kMbie;
  if (s == "tabular-q-bonus") return TabularAlgorithm::kQBonus;
  if (s == "tabular-de") return TabularAlgorithm::kDirected;
  return std::nullopt;
}

std::string ToString(TabularAlgorithm algo) {
  switch (algo) {
    case TabularAlgorithm::kMbie:
      return "tabular-mbie";
    case TabularAlgorithm::kQBonus:
      return "tabular-q-bonus";
    case TabularAlgorithm::kDirected:
      return "tabular-de";
  }
  return "unknown";
}

double EvaluateGreedy(const EmpiricalModel& model, const TabularConfig& config,
                      std::mt19937_64& rng) {
  const QTable q = QBonusPlan(model, 0.0, config.gamma, config.tolerance);
  int s = config.chain.start_index;
  double ret = 0.0;
  double discount = 1.0;
  for (int t = 0; t < config.chain.horizon; ++t) {
    const envs::ChainOutcome o =
        envs::ChainStep(config.chain, s, GreedyActionRandomTies(q, s, rng));
    ret += discount * o.reward;
    discount *= config.gamma;
    s = o.next_index;
    if (o.terminal) break;
  }
  return ret;
}

double OptimalChainReturn(const TabularConfig& config) {
  const int steps = std::abs(config.chain.start_index - config.chain.goal_index);
  return std::pow(config.gamma, steps - 1);
}

TabularRunResult RunTabular(TabularAlgorithm algo, const TabularConfig& config,
                            int episodes, std::uint64_t seed,
                            bool stop_when_optimal) {
  std::mt19937_64 rng(seed);
  std::mt19937_64 eval_rng(seed ^ 0x9e3779b97f4a7c15ULL);
  envs::TeleportChain env(config.chain);
  EmpiricalModel model(config.chain.length, env.num_actions());
  const double optimal = OptimalChainReturn(config);
  TabularRunResult result;
  QTable warm;

  for (int episode = 1; episode <= episodes; ++episode) {
    TabularEpisode ep;
    if (algo == TabularAlgorithm::kDirected) {
      ep = TabularDirectedEpisode(model, env, config, rng);
    } else {
      int s = StateIndex(env.Reset(rng));
      bool done = false;
      while (!done) {
        const QTable* prior = warm.size() > 0 ? &warm : nullptr;
        warm = algo == TabularAlgorithm::kMbie
                   ? MbiePlan(model, config.beta, config.gamma,
                              config.r_max + config.beta, config.tolerance,
                              prior)
                   : QBonusPlan(model, config.beta, config.gamma,
                                config.tolerance, prior);
        int a = 0;
        StepKind kind = StepKind::kGreedy;
        if (algo == TabularAlgorithm::kQBonus &&
            std::bernoulli_distribution(config.epsilon)(rng)) {
          a = UniformAction(env.num_actions(), rng);
          kind = StepKind::kEpsilon;
        } else {
          a = GreedyActionRandomTies(warm, s, rng);
        }
        const StepOutcome o = TakeStep(model, env, s, a, kind, -1, ep);
        s = o.next;
        done = o.done;
      }
    }
    const double ret = EvaluateGreedy(model, config, eval_rng);
    int known = 0;
    for (int s = 0; s < model.n_states(); ++s) known += model.known(s);
    result.eval_returns.push_back(ret);
    result.coverage.push_back(static_cast<double>(known) / model.n_states());
    result.env_steps.push_back(model.total_visits());
    result.episodes.push_back(std::move(ep));
    if (result.first_optimal_episode < 0 && ret >= optimal - 1e-12) {
      result.first_optimal_episode = episode;
      if (stop_when_optimal) break;
    }
  }
  return result;
}

}  // namespace driftless::tabular

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

#ifndef DRIFTLESS_TABULAR_H_
#define DRIFTLESS_TABULAR_H_

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "driftless/envs.h"

namespace driftless::tabular {

// Q(s, a) with states as rows.
using QTable = Eigen::MatrixXd;

struct Outcome {
  int next_state = 0;
  double probability = 0.0;
};

// Finite MDP <S, A, T, R, gamma>. Terminal behaviour is modelled with
// absorbing zero-reward states.
struct TabularMDP {
  int n_states = 0;
  int n_actions = 0;
  std::vector<std::vector<Outcome>> transitions;  // index s * n_actions + a
  Eigen::MatrixXd rewards;                        // expected R(s, a)
  double gamma = 0.9;

  TabularMDP(int states, int actions, double discount);
  std::vector<Outcome>& at(int s, int a) {
    return transitions[static_cast<std::size_t>(s) * n_actions + a];
  }
  const std::vector<Outcome>& at(int s, int a) const {
    return transitions[static_cast<std::size_t>(s) * n_actions + a];
  }
  // Throws InvalidInput unless every T(.|s,a) sums to 1 within 1e-12 and
  // gamma is in [0, 1).
  void Validate() const;
};

struct ValueIterationResult {
  QTable q;
  double residual = 0.0;  // sup-norm of the last backup's change
  int sweeps = 0;
  std::vector<double> residual_history;
};

// Synchronous value iteration until the sup-norm change of a full backup
// drops below `tolerance`. `warm_start`, if given, must be n_states x
// n_actions.
ValueIterationResult SolveValueIteration(
    const TabularMDP& mdp, double tolerance,
    const QTable* warm_start = nullptr, int max_sweeps = 1000000);
QTable ValueIteration(const TabularMDP& mdp, double tolerance);

// Sup-norm of T Q - Q.
double BellmanResidual(const TabularMDP& mdp, const QTable& q);

// Lowest index wins ties.
int GreedyAction(const QTable& q, int s);
// Uniform over the exact maximisers.
int GreedyActionRandomTies(const QTable& q, int s, std::mt19937_64& rng);

// Visit counts and reward sums gathered online; maximum-likelihood model
// over visited pairs.
class EmpiricalModel {
 public:
  EmpiricalModel(int n_states, int n_actions);

  void Record(int s, int a, double reward, int next_state, bool terminal);

  int n_states() const { return n_states_; }
  int n_actions() const { return n_actions_; }
  std::int64_t count(int s, int a) const { return counts_[Index(s, a)]; }
  std::int64_t count(int s, int a, int next) const;
  bool visited(int s, int a) const { return count(s, a) > 0; }
  // Requires visited(s, a).
  double MeanReward(int s, int a) const;
  std::vector<Outcome> NextDistribution(int s, int a) const;
  // A state is known once it is the source or destination of a visited pair.
  bool known(int s) const { return known_[s]; }
  bool terminal(int s) const { return terminal_[s]; }
  std::int64_t total_visits() const { return total_; }

 private:
  std::size_t Index(int s, int a) const {
    return static_cast<std::size_t>(s) * n_actions_ + a;
  }

  int n_states_;
  int n_actions_;
  std::vector<std::int64_t> counts_;
  std::vector<std::int64_t> next_counts_;  // (s, a, s') flattened
  std::vector<double> reward_sums_;
  std::vector<bool> known_;
  std::vector<bool> terminal_;
  std::int64_t total_ = 0;
};

// beta / sqrt(n(s, a)); the same term backs MBIE-EB and Q+bonus.
double CountBonus(double beta, std::int64_t n);

// MBIE-EB: value iteration on (T_hat, R_hat + beta / sqrt(n)); unvisited
// pairs are pinned at r_max / (1 - gamma).
QTable MbiePlan(const EmpiricalModel& model, double beta, double gamma,
                double r_max, double tolerance = 1e-8,
                const QTable* warm_start = nullptr);

// Q-learning with bonus and unlimited replay: value iteration over visited
// pairs only; unvisited pairs stay at 0. beta = 0 gives the bonus-free
// greedy policy used for evaluation.
QTable QBonusPlan(const EmpiricalModel& model, double beta, double gamma,
                  double tolerance = 1e-8, const QTable* warm_start = nullptr);

// Goal-reaching values: reward 1 for entering `goal`, unvisited pairs act as
// self-loops, terminal states other than the goal are dead ends.
QTable GoalPlan(const EmpiricalModel& model, int goal, double goal_gamma,
                double tolerance = 1e-10);

// max_a 1 / sqrt(max(n(s, a), 1)).
double StateUncertainty(const EmpiricalModel& model, int s);

// Candidate goals ordered most-uncertain first; ties are shuffled with
// `rng`. Only known states are candidates; `fallback` is returned alone
// when nothing is known yet.
std::vector<int> RankGoals(const EmpiricalModel& model, int fallback,
                           std::mt19937_64& rng);

enum class StepKind { kGreedy, kEpsilon, kPursuit, kRandom };

struct TabularStep {
  int state = 0;
  int action = 0;
  int next_state = 0;
  double reward = 0.0;
  StepKind kind = StepKind::kGreedy;
  int segment = -1;  // pursuit segment index for directed episodes
};

struct PursuitSegment {
  int start_state = 0;
  int goal = 0;
  int first_step = 0;  // index into TabularEpisode::steps
  int length = 0;      // pursuit steps, excluding the random action
  bool reached = false;
};

struct TabularEpisode {
  std::vector<TabularStep> steps;
  std::vector<PursuitSegment> segments;
  bool reached_task_goal = false;
  int teleports = 0;
};

struct TabularConfig {
  envs::ChainParams chain;
  double gamma = 0.95;
  double beta = 1.0;
  double epsilon = 0.1;
  double goal_gamma = 0.99;
  int goal_step_budget = 80;
  double tolerance = 1e-8;
  double r_max = 1.0;  // environment reward bound; MBIE optimism adds beta
};

// One directed episode (pick the most uncertain goal, walk there with
// the exact goal-conditioned policy, take one random action, repeat).
TabularEpisode TabularDirectedEpisode(EmpiricalModel& model,
                                      envs::TeleportChain& env,
                                      const TabularConfig& config,
                                      std::mt19937_64& rng);

enum class TabularAlgorithm { kMbie, kQBonus, kDirected };

std::optional<TabularAlgorithm> ParseTabularAlgorithm(const std::string& s);
std::string ToString(TabularAlgorithm algo);

// Discounted return of the bonus-free greedy policy from the start state
// (ties broken at random with `rng`).
double EvaluateGreedy(const EmpiricalModel& model, const TabularConfig& config,
                      std::mt19937_64& rng);

struct TabularRunResult {
  std::vector<double> eval_returns;  // one per episode, after the episode
  std::vector<double> coverage;      // fraction of chain states visited
  std::vector<std::int64_t> env_steps;
  std::vector<TabularEpisode> episodes;
  int first_optimal_episode = -1;  // 1-based; -1 if never
};

// Runs `episodes` episodes. If `stop_when_optimal`, stops after the first
// episode whose greedy evaluation attains the optimal return.
TabularRunResult RunTabular(TabularAlgorithm algo, const TabularConfig& config,
                            int episodes, std::uint64_t seed,
                            bool stop_when_optimal = false);

// gamma^(start - goal - 1): the optimal discounted return on the chain.
double OptimalChainReturn(const TabularConfig& config);

}  // namespace driftless::tabular

#endif  // DRIFTLESS_TABULAR_H_

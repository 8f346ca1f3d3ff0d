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

#include <cmath>
#include <random>

#include "doctest.h"
#include "driftless/errors.h"
#include "driftless/tabular.h"
#include "tabular_audit.h"

namespace driftless::tabular {
namespace {

// Exact chain MDP with the goal made absorbing.
TabularMDP TrueChain(const envs::ChainParams& p, double gamma) {
  TabularMDP mdp(p.length, 4, gamma);
  for (int s = 0; s < p.length; ++s) {
    for (int a = 0; a < 4; ++a) {
      if (s == p.goal_index) {
        mdp.at(s, a) = {{s, 1.0}};
        continue;
      }
      const envs::ChainOutcome o = envs::ChainStep(p, s, a);
      mdp.at(s, a) = {{o.next_index, 1.0}};
      mdp.rewards(s, a) = o.reward;
    }
  }
  return mdp;
}

void VisitEverything(EmpiricalModel& model, const envs::ChainParams& p,
                     int times) {
  for (int k = 0; k < times; ++k) {
    for (int s = 0; s < p.length; ++s) {
      if (s == p.goal_index) continue;
      for (int a = 0; a < 4; ++a) {
        const envs::ChainOutcome o = envs::ChainStep(p, s, a);
        model.Record(s, a, o.reward, o.next_index, o.terminal);
      }
    }
  }
}

TEST_CASE("value iteration: zero rewards give zero Q") {
  TabularMDP mdp = TrueChain({}, 0.95);
  mdp.rewards.setZero();
  CHECK(ValueIteration(mdp, 1e-10).isZero(0.0));
}

TEST_CASE("value iteration: hand-derived two-state chain") {
  // 0 = absorbing goal, 1 = adjacent, 2 = one further. Action 0 moves left.
  TabularMDP mdp(3, 2, 0.9);
  mdp.at(0, 0) = mdp.at(0, 1) = {{0, 1.0}};
  mdp.at(1, 0) = {{0, 1.0}};
  mdp.rewards(1, 0) = 1.0;
  mdp.at(1, 1) = {{2, 1.0}};
  mdp.at(2, 0) = {{1, 1.0}};
  mdp.at(2, 1) = {{2, 1.0}};
  QTable q = ValueIteration(mdp, 1e-12);
  CHECK(std::abs(q(1, 0) - 1.0) < 1e-10);
  CHECK(std::abs(q(2, 0) - 0.9) < 1e-10);
  CHECK(GreedyAction(q, 2) == 0);
}

TEST_CASE("value iteration: teleport chain optimum from start is gamma^19") {
  envs::ChainParams p;
  TabularMDP mdp = TrueChain(p, 0.95);
  QTable q = ValueIteration(mdp, 1e-12);
  CHECK(q.row(p.start_index).maxCoeff() ==
        doctest::Approx(std::pow(0.95, 19)).epsilon(1e-10));
  for (int s = 1; s <= p.start_index + 1; ++s) {
    CHECK(GreedyAction(q, s) == envs::kLeft);
  }
  // Past the start, teleporting back beats walking.
  for (int s = p.start_index + 2; s < p.length; ++s) {
    CHECK(GreedyAction(q, s) == envs::kUp);
  }
}

TEST_CASE("value iteration: contraction and convergence") {
  TabularMDP mdp = TrueChain({}, 0.95);
  ValueIterationResult r = SolveValueIteration(mdp, 1e-9);
  for (std::size_t i = 1; i < r.residual_history.size(); ++i) {
    CHECK(r.residual_history[i] <= r.residual_history[i - 1] + 1e-15);
  }
  CHECK(BellmanResidual(mdp, r.q) < 1e-9);
}

TEST_CASE("value iteration: invalid inputs") {
  TabularMDP mdp = TrueChain({}, 1.0);
  CHECK_THROWS_AS(ValueIteration(mdp, 1e-8), InvalidInput);
  TabularMDP bad = TrueChain({}, 0.9);
  bad.at(3, 1) = {{2, 0.5}};
  CHECK_THROWS_AS(ValueIteration(bad, 1e-8), InvalidInput);
}

TEST_CASE("mbie: uniform optimism with no data") {
  EmpiricalModel model(40, 4);
  QTable q = MbiePlan(model, 1.0, 0.95, 2.0);
  CHECK((q.array() - 2.0 / 0.05).abs().maxCoeff() < 1e-6);
}

TEST_CASE("mbie: zero bonus on a fully visited model equals exact VI") {
  envs::ChainParams p;
  EmpiricalModel model(p.length, 4);
  VisitEverything(model, p, 1);
  QTable mbie = MbiePlan(model, 0.0, 0.95, 1.0, 1e-12);
  QTable exact = ValueIteration(TrueChain(p, 0.95), 1e-12);
  CHECK((mbie - exact).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("mbie: single visit earns reward plus beta") {
  EmpiricalModel model(40, 4);
  model.Record(20, envs::kLeft, 0.0, 19, false);
  const double gamma = 0.95, r_max = 2.0;
  QTable q = MbiePlan(model, 1.0, gamma, r_max, 1e-12);
  // R_hat + 1/sqrt(1), then optimism everywhere at state 19.
  CHECK(q(20, envs::kLeft) ==
        doctest::Approx(0.0 + 1.0 + gamma * r_max / (1 - gamma)).epsilon(1e-9));
}

TEST_CASE("q+bonus: empty model is all zero") {
  EmpiricalModel model(40, 4);
  CHECK(QBonusPlan(model, 1.0, 0.95).isZero(0.0));
}

TEST_CASE("q+bonus: zero bonus equals VI on the visited subgraph") {
  envs::ChainParams p;
  EmpiricalModel model(p.length, 4);
  // Known corridor 20 -> 0 by left moves only.
  for (int s = p.start_index; s > 0; --s) {
    const envs::ChainOutcome o = envs::ChainStep(p, s, envs::kLeft);
    model.Record(s, envs::kLeft, o.reward, o.next_index, o.terminal);
  }
  QTable q = QBonusPlan(model, 0.0, 0.95, 1e-12);
  for (int s = 1; s <= p.start_index; ++s) {
    CHECK(q(s, envs::kLeft) ==
          doctest::Approx(std::pow(0.95, s - 1)).epsilon(1e-10));
    CHECK(q(s, envs::kRight) == 0.0);
    CHECK(q(s, envs::kUp) == 0.0);
  }
}

TEST_CASE("q+bonus matches mbie once every pair is covered") {
  envs::ChainParams p;
  EmpiricalModel model(p.length, 4);
  VisitEverything(model, p, 3);
  QTable a = QBonusPlan(model, 1.0, 0.95, 1e-12);
  QTable b = MbiePlan(model, 1.0, 0.95, 2.0, 1e-12);
  for (int s = 1; s < p.length; ++s) {
    for (int act = 0; act < 4; ++act) {
      CHECK(std::abs(a(s, act) - b(s, act)) < 1e-9);
    }
  }
}

TEST_CASE("goal plan is a shortest-path policy over known pairs") {
  envs::ChainParams p;
  EmpiricalModel model(p.length, 4);
  for (int s = p.start_index; s > 10; --s) {
    model.Record(s, envs::kLeft, 0.0, s - 1, false);
  }
  QTable q = GoalPlan(model, 12, 0.99);
  CHECK(GreedyAction(q, 20) == envs::kLeft);
  CHECK(q.row(20).maxCoeff() == doctest::Approx(std::pow(0.99, 7)));
  // 11 cannot reach 12 through known pairs.
  CHECK(q.row(11).maxCoeff() == 0.0);
}

TEST_CASE("state uncertainty and goal ranking") {
  envs::ChainParams p;
  EmpiricalModel model(p.length, 4);
  std::mt19937_64 rng(1);
  CHECK(RankGoals(model, 20, rng) == std::vector<int>{20});

  VisitEverything(model, p, 2);
  // Every pair at 2 visits; push all states but 7 to 4 visits.
  for (int s = 1; s < p.length; ++s) {
    if (s == 7) continue;
    for (int a = 0; a < 4; ++a) {
      const envs::ChainOutcome o = envs::ChainStep(p, s, a);
      model.Record(s, a, o.reward, o.next_index, o.terminal);
      model.Record(s, a, o.reward, o.next_index, o.terminal);
    }
  }
  CHECK(StateUncertainty(model, 7) == doctest::Approx(1 / std::sqrt(2.0)));
  CHECK(RankGoals(model, 20, rng).front() == 7);
  CHECK(StateUncertainty(EmpiricalModel(5, 2), 3) == 1.0);
}

TEST_CASE("directed episode: empty model starts with a random action") {
  TabularConfig config;
  envs::TeleportChain env(config.chain);
  EmpiricalModel model(config.chain.length, 4);
  std::mt19937_64 rng(5);
  TabularEpisode ep = TabularDirectedEpisode(model, env, config, rng);
  REQUIRE(!ep.segments.empty());
  CHECK(ep.segments[0].goal == config.chain.start_index);
  CHECK(ep.segments[0].length == 0);
  CHECK(ep.steps[0].kind == StepKind::kRandom);
}

TEST_CASE("directed runs: trajectory audit") {
  TabularConfig config;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    TabularRunResult run =
        RunTabular(TabularAlgorithm::kDirected, config, 30, seed, true);
    for (const TabularEpisode& ep : run.episodes) {
      for (const TabularStep& st : ep.steps) {
        CHECK(st.kind != StepKind::kEpsilon);
        CHECK(st.kind != StepKind::kGreedy);
      }
      for (std::size_t k = 0; k < ep.segments.size(); ++k) {
        const PursuitSegment& seg = ep.segments[k];
        CHECK(seg.length <= config.goal_step_budget);
        CHECK((seg.reached || seg.length == config.goal_step_budget ||
               k + 1 == ep.segments.size()));
        // Exactly one random step between consecutive segments.
        if (k + 1 < ep.segments.size()) {
          CHECK(ep.segments[k + 1].first_step ==
                seg.first_step + seg.length + 1);
          CHECK(ep.steps[seg.first_step + seg.length].kind ==
                StepKind::kRandom);
        }
      }
    }
    audit::CommitmentAudit a = audit::AuditCommitment(run, config.chain);
    CHECK(a.violating_segments == 0);
    CHECK(a.wrong_length_segments == 0);
    CHECK(a.pursuit_random_steps == 0);
  }
}

TEST_CASE("directed runs: goal frontier marches left over episodes") {
  TabularConfig config;
  int improved = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    TabularRunResult run =
        RunTabular(TabularAlgorithm::kDirected, config, 60, seed, true);
    REQUIRE(run.first_optimal_episode > 0);
    int frontier = config.chain.start_index;
    int first_frontier = -1;
    for (const TabularEpisode& ep : run.episodes) {
      int ep_min = frontier;
      for (const PursuitSegment& seg : ep.segments) {
        ep_min = std::min(ep_min, seg.goal);
      }
      CHECK(ep_min <= frontier);
      frontier = ep_min;
      if (first_frontier < 0) first_frontier = frontier;
    }
    // By the solving episode the leftmost goal is next to the task goal.
    CHECK(frontier <= 2);
    improved += frontier < first_frontier;
  }
  CHECK(improved >= 95);
}

TEST_CASE("q+bonus teleports before converging; evaluation is bonus-free") {
  TabularConfig config;
  TabularRunResult run =
      RunTabular(TabularAlgorithm::kQBonus, config, 400, 3, true);
  int with_teleport = 0;
  const std::size_t pre =
      run.first_optimal_episode > 0 ? run.first_optimal_episode - 1
                                    : run.episodes.size();
  for (std::size_t e = 0; e < pre; ++e) with_teleport += run.episodes[e].teleports > 0;
  CHECK(with_teleport > 0);
  for (double r : run.eval_returns) {
    CHECK((r == 0.0 || r <= OptimalChainReturn(config) + 1e-12));
  }
}

TEST_CASE("tabular runs are deterministic per seed") {
  TabularConfig config;
  for (TabularAlgorithm algo : {TabularAlgorithm::kMbie,
                                TabularAlgorithm::kDirected,
                                TabularAlgorithm::kQBonus}) {
    TabularRunResult a = RunTabular(algo, config, 8, 17);
    TabularRunResult b = RunTabular(algo, config, 8, 17);
    CHECK(a.eval_returns == b.eval_returns);
    CHECK(a.env_steps == b.env_steps);
  }
  CHECK(ParseTabularAlgorithm("tabular-de") == TabularAlgorithm::kDirected);
  CHECK(!ParseTabularAlgorithm("dqn").has_value());
}

}  // namespace
}  // namespace driftless::tabular

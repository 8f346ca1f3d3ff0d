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
#include "driftless/envs.h"
#include "driftless/errors.h"

namespace driftless::envs {
namespace {

TEST_CASE("chain step examples") {
  ChainParams p;
  ChainOutcome up = ChainStep(p, 20, kUp);
  CHECK(up.next_index == 20);
  CHECK(up.reward == 0.0);
  CHECK_FALSE(up.terminal);

  ChainOutcome goal = ChainStep(p, 1, kLeft);
  CHECK(goal.next_index == 0);
  CHECK(goal.reward == 1.0);
  CHECK(goal.terminal);

  ChainOutcome wall = ChainStep(p, 39, kRight);
  CHECK(wall.next_index == 39);
  CHECK(wall.reward == 0.0);

  CHECK(ChainStep(p, 33, kDown).next_index == 20);
}

TEST_CASE("chain: left run reaches goal, any teleport resets to start") {
  ChainParams p;
  for (int start = 1; start < p.length; ++start) {
    int s = start;
    for (int i = 0; i < start; ++i) s = ChainStep(p, s, kLeft).next_index;
    CHECK(s == 0);
    CHECK(ChainStep(p, start, kUp).next_index == p.start_index);
    CHECK(ChainStep(p, start, kDown).next_index == p.start_index);
  }
}

TEST_CASE("chain environment: episode contract") {
  TeleportChain env;
  std::mt19937_64 rng(1);
  CHECK_THROWS_AS(env.Step(kLeft), ContractViolation);
  State s = env.Reset(rng);
  CHECK(s == State{20.0});
  StepResult r;
  for (int i = 0; i < 20; ++i) r = env.Step(kLeft);
  CHECK(r.done);
  CHECK(r.terminal);
  CHECK(r.reward == 1.0);
  CHECK(r.achieved_goal == State{0.0});
  CHECK_THROWS_AS(env.Step(kLeft), ContractViolation);

  env.Reset(rng);
  for (int i = 0; i < 199; ++i) CHECK_FALSE(env.Step(kUp).done);
  r = env.Step(kUp);
  CHECK(r.done);
  CHECK(r.truncated);
  CHECK_FALSE(r.terminal);
}

TEST_CASE("mountain car dynamics") {
  CarState right = CarStep({-0.5, 0.0}, 2);
  CHECK(right.velocity == doctest::Approx(0.00082316).epsilon(1e-6));
  CHECK(right.position == doctest::Approx(-0.49917684).epsilon(1e-8));

  const double cos_term = std::cos(3.0 * -0.5) * -kCarGravity;
  CarState left = CarStep({-0.5, 0.0}, 0);
  CHECK(left.velocity ==
        doctest::Approx(-right.velocity + 2 * cos_term).epsilon(1e-12));
  CarState noop = CarStep({-0.5, 0.0}, 1);
  CHECK(noop.velocity == doctest::Approx(cos_term).epsilon(1e-12));

  CHECK(CarStep({0.49, 0.02}, 0).position >= kCarGoalPosition);
  CHECK(CarStep({-1.0, 0.0699}, 2).velocity == kCarMaxSpeed);

  CarState wall = CarStep({-1.19, -0.05}, 0);
  CHECK(wall.position == kCarMinPosition);
  CHECK(wall.velocity == 0.0);
  CHECK_THROWS_AS(CarStep({0, 0}, 3), InvalidInput);
}

TEST_CASE("mountain car: constant no-op never escapes the valley") {
  CarState s{-0.5, 0.0};
  for (int t = 0; t < 200; ++t) {
    s = CarStep(s, 1);
    CHECK(s.position < kCarGoalPosition);
  }
}

TEST_CASE("mountain car: energy pumping reaches the goal") {
  MountainCar env;
  std::mt19937_64 rng(3);
  State s = env.Reset(rng);
  StepResult r;
  do {
    r = env.Step(s[1] >= 0.0 ? 2 : 0);
    s = r.next_state;
  } while (!r.done);
  CHECK(r.terminal);
  CHECK(env.episode_steps() < 200);
}

TEST_CASE("environments are deterministic given seed and actions") {
  for (const char* name : {"teleport-chain-40", "mountain-car"}) {
    auto a = MakeEnvironment(name);
    auto b = a->Clone();
    std::mt19937_64 ra(11), rb(11), actions(5);
    State sa = a->Reset(ra), sb = b->Reset(rb);
    CHECK(sa == sb);
    while (!a->episode_done()) {
      const int act = static_cast<int>(actions() % a->num_actions());
      StepResult x = a->Step(act), y = b->Step(act);
      CHECK(x.next_state == y.next_state);
      CHECK(x.reward == y.reward);
      CHECK(x.done == y.done);
    }
  }
  CHECK_THROWS_AS(MakeEnvironment("cartpole"), InvalidInput);
}

TEST_CASE("discretize corners and midpoint") {
  MountainCar env;
  VisitationGrid grid(env.state_box(), 10);
  CHECK(grid.Bins(std::vector<double>{-1.2, -0.07}) == std::vector<int>{0, 0});
  CHECK(grid.Bins(std::vector<double>{0.6, 0.07}) == std::vector<int>{9, 9});
  CHECK(grid.Bins(std::vector<double>{-0.3, 0.0}) == std::vector<int>{5, 5});
  CHECK(grid.Bins(std::vector<double>{-5.0, 3.0}) == std::vector<int>{0, 9});
  CHECK(grid.Cell(std::vector<double>{-0.3, 0.0}) == 55);
}

TEST_CASE("coverage is monotone") {
  VisitationGrid grid(MountainCar().state_box(), 10);
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> p(-1.2, 0.6), v(-0.07, 0.07);
  double last = grid.Coverage();
  CHECK(last == 0.0);
  for (int i = 0; i < 500; ++i) {
    grid.Visit(std::vector<double>{p(rng), v(rng)});
    CHECK(grid.Coverage() >= last);
    last = grid.Coverage();
  }
  CHECK(grid.num_cells() == 100);
  CHECK(last <= 1.0);
}

}  // namespace
}  // namespace driftless::envs

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

#ifndef DRIFTLESS_ENVS_H_
#define DRIFTLESS_ENVS_H_

#include <memory>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace driftless::envs {

using State = std::vector<double>;

struct Box {
  std::vector<double> low;
  std::vector<double> high;
};

struct StepResult {
  State next_state;
  double reward = 0.0;
  bool done = false;       // terminal || truncated
  bool terminal = false;   // task goal reached; no bootstrapping past it
  bool truncated = false;  // horizon hit
  State achieved_goal;
};

// Episodic environment with discrete actions. Goals live in the state space
// (the achieved-goal projection is the identity for both environments here).
class Environment {
 public:
  virtual ~Environment() = default;

  virtual std::string name() const = 0;
  virtual int num_actions() const = 0;
  virtual int state_dim() const = 0;
  virtual const Box& state_box() const = 0;
  virtual int horizon() const = 0;
  // Discrete goal spaces compare goals by exact equality.
  virtual bool discrete_goals() const = 0;
  virtual std::unique_ptr<Environment> Clone() const = 0;

  State Reset(std::mt19937_64& rng);
  // Throws ContractViolation once the episode is done.
  StepResult Step(int action);
  State GoalOf(std::span<const double> state) const {
    return State(state.begin(), state.end());
  }

  const State& state() const { return state_; }
  bool episode_done() const { return done_; }
  int episode_steps() const { return steps_; }

 protected:
  virtual State SampleStart(std::mt19937_64& rng) = 0;
  // Returns the successor, its reward and whether it is terminal.
  virtual State Transition(const State& s, int action, double* reward,
                           bool* terminal) const = 0;

 private:
  State state_;
  int steps_ = 0;
  bool done_ = true;
};

enum ChainAction : int { kLeft = 0, kRight = 1, kUp = 2, kDown = 3 };

struct ChainParams {
  int length = 40;
  int start_index = 20;
  int goal_index = 0;
  int horizon = 200;
  double goal_reward = 1.0;
};

struct ChainOutcome {
  int next_index = 0;
  double reward = 0.0;
  bool terminal = false;
};

// Teleport chain transition: left/right move by one (clamped), up/down jump
// back to the start index. Entering the goal pays goal_reward.
ChainOutcome ChainStep(const ChainParams& params, int index, int action);

class TeleportChain : public Environment {
 public:
  explicit TeleportChain(ChainParams params = {});

  std::string name() const override { return "teleport-chain-40"; }
  int num_actions() const override { return 4; }
  int state_dim() const override { return 1; }
  const Box& state_box() const override { return box_; }
  int horizon() const override { return params_.horizon; }
  bool discrete_goals() const override { return true; }
  std::unique_ptr<Environment> Clone() const override;
  const ChainParams& params() const { return params_; }

 protected:
  State SampleStart(std::mt19937_64& rng) override;
  State Transition(const State& s, int action, double* reward,
                   bool* terminal) const override;

 private:
  ChainParams params_;
  Box box_;
};

struct CarState {
  double position = 0.0;
  double velocity = 0.0;
};

inline constexpr double kCarMinPosition = -1.2;
inline constexpr double kCarMaxPosition = 0.6;
inline constexpr double kCarMaxSpeed = 0.07;
inline constexpr double kCarGoalPosition = 0.5;
inline constexpr double kCarForce = 0.001;
inline constexpr double kCarGravity = 0.0025;

// Classic discrete Mountain Car dynamics. Actions: 0 push left, 1 no-op,
// 2 push right.
CarState CarStep(CarState s, int action);

class MountainCar : public Environment {
 public:
  explicit MountainCar(int horizon = 200);

  std::string name() const override { return "mountain-car"; }
  int num_actions() const override { return 3; }
  int state_dim() const override { return 2; }
  const Box& state_box() const override { return box_; }
  int horizon() const override { return horizon_; }
  bool discrete_goals() const override { return false; }
  std::unique_ptr<Environment> Clone() const override;

 protected:
  // Position uniform in [-0.6, -0.4], velocity 0.
  State SampleStart(std::mt19937_64& rng) override;
  State Transition(const State& s, int action, double* reward,
                   bool* terminal) const override;

 private:
  int horizon_;
  Box box_;
};

// Throws InvalidInput for unknown names.
std::unique_ptr<Environment> MakeEnvironment(const std::string& name);

// Uniform grid over a box; out-of-box states clamp to the edge bins.
class VisitationGrid {
 public:
  VisitationGrid(Box box, int bins_per_dim);

  std::vector<int> Bins(std::span<const double> state) const;
  int Cell(std::span<const double> state) const;
  void Visit(std::span<const double> state);
  int num_cells() const { return static_cast<int>(visited_.size()); }
  int visited_count() const { return visited_count_; }
  double Coverage() const;
  bool visited(int cell) const { return visited_[cell]; }

 private:
  Box box_;
  int bins_;
  std::vector<bool> visited_;
  int visited_count_ = 0;
};

}  // namespace driftless::envs

#endif  // DRIFTLESS_ENVS_H_

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

#ifndef DRIFTLESS_AGENTS_H_
#define DRIFTLESS_AGENTS_H_

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "driftless/envs.h"
#include "driftless/nn.h"
#include "driftless/replay.h"
#include "json.hpp"

namespace driftless::agents {

// Affine map of a state box onto [-1, 1] per dimension.
class Encoder {
 public:
  explicit Encoder(envs::Box box);

  int dim() const { return static_cast<int>(low_.size()); }
  void Encode(std::span<const double> state, double* out) const;
  std::vector<double> Encode(std::span<const double> state) const;
  // Encoded state, followed by the encoded goal when one is given.
  std::vector<double> Input(std::span<const double> state,
                            std::span<const double> goal = {}) const;

 private:
  std::vector<double> low_;
  std::vector<double> scale_;
};

// Network-ready minibatch; rows are samples.
struct Batch {
  nn::Matrix inputs;
  std::vector<int> actions;
  std::vector<double> rewards;
  nn::Matrix next_inputs;
  std::vector<std::uint8_t> dones;

  std::size_t size() const { return actions.size(); }
};

// With goal_conditioned set, every transition must carry a desired goal and
// inputs become concat(state, goal).
Batch MakeBatch(std::span<const replay::Transition> transitions,
                const Encoder& encoder, bool goal_conditioned);

struct DqnConfig {
  std::vector<int> hidden = {64, 64};
  double learning_rate = 1e-4;
  double gamma = 0.99;
  double epsilon = 0.1;
  int target_update_period = 1000;
  double huber_delta = 1.0;
};

struct TrainResult {
  double loss = 0.0;
  std::vector<double> td_errors;  // target - prediction, before the step
};

// Double DQN with a periodically copied target network.
class DqnAgent {
 public:
  DqnAgent(int input_dim, int num_actions, const DqnConfig& config,
           std::mt19937_64& init_rng);

  int num_actions() const { return num_actions_; }
  int input_dim() const { return online_.input_size(); }
  const DqnConfig& config() const { return config_; }

  nn::Vector QValues(std::span<const double> input) const;
  // Lowest index among maxima.
  int Greedy(std::span<const double> input) const;
  int ActEpsilonGreedy(std::span<const double> input,
                       std::mt19937_64& rng) const;

  // y = r + gamma (1 - done) Q_target(s', argmax_a Q_online(s', a)).
  // `bootstrap_actions` receives the action each target was read at.
  std::vector<double> TdTargets(const Batch& batch,
                                std::vector<int>* bootstrap_actions =
                                    nullptr) const;
  // One Adam step on the weighted Huber loss, mean over the batch. The
  // target net is copied whenever the period divides the step counter.
  TrainResult TrainStep(const Batch& batch, std::span<const double> weights);

  void SyncTarget() { target_ = online_; }
  const nn::DenseNet& online() const { return online_; }
  const nn::DenseNet& target() const { return target_; }
  nn::DenseNet& mutable_online() { return online_; }
  nn::DenseNet& mutable_target() { return target_; }
  std::int64_t train_steps() const { return train_steps_; }

  nlohmann::json ToJson() const;
  // Restores networks and the step counter; optimizer moments start fresh.
  static DqnAgent FromJson(const nlohmann::json& j);

 private:
  DqnAgent(DqnConfig config, nn::DenseNet online, int num_actions);

  DqnConfig config_;
  int num_actions_;
  nn::DenseNet online_;
  nn::DenseNet target_;
  nn::Adam adam_;
  std::int64_t train_steps_ = 0;
};

// Goal-conditioned learner: a DqnAgent over concat(state, goal).
class GoalDqnAgent {
 public:
  GoalDqnAgent(int state_dim, int num_actions, const DqnConfig& config,
               std::mt19937_64& init_rng);

  // Pure argmax; no exploration noise while pursuing a goal.
  int ActTowardGoal(std::span<const double> encoded_state,
                    std::span<const double> encoded_goal) const;

  DqnAgent& dqn() { return dqn_; }
  const DqnAgent& dqn() const { return dqn_; }

 private:
  int state_dim_;
  DqnAgent dqn_;
};

}  // namespace driftless::agents

#endif  // DRIFTLESS_AGENTS_H_

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

#include "driftless/agents.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "driftless/errors.h"

namespace driftless::agents {

Encoder::Encoder(envs::Box box) : low_(box.low) {
  if (box.low.size() != box.high.size() || box.low.empty()) {
    throw InvalidInput("Encoder: malformed box");
  }
  for (std::size_t i = 0; i < box.low.size(); ++i) {
    const double width = box.high[i] - box.low[i];
    if (!(width > 0.0)) throw InvalidInput("Encoder: empty box dimension");
    scale_.push_back(2.0 / width);
  }
}

void Encoder::Encode(std::span<const double> state, double* out) const {
  if (state.size() != low_.size()) {
    throw InvalidInput("Encoder: state has wrong dimension");
  }
  for (std::size_t i = 0; i < low_.size(); ++i) {
    out[i] = (state[i] - low_[i]) * scale_[i] - 1.0;
  }
}

std::vector<double> Encoder::Encode(std::span<const double> state) const {
  std::vector<double> out(low_.size());
  Encode(state, out.data());
  return out;
}

std::vector<double> Encoder::Input(std::span<const double> state,
                                   std::span<const double> goal) const {
  std::vector<double> out(low_.size() * (goal.empty() ? 1 : 2));
  Encode(state, out.data());
  if (!goal.empty()) Encode(goal, out.data() + low_.size());
  return out;
}

Batch MakeBatch(std::span<const replay::Transition> transitions,
                const Encoder& encoder, bool goal_conditioned) {
  const int d = encoder.dim();
  const int width = goal_conditioned ? 2 * d : d;
  const auto n = static_cast<Eigen::Index>(transitions.size());
  Batch b;
  b.inputs.resize(n, width);
  b.next_inputs.resize(n, width);
  b.actions.reserve(n);
  b.rewards.reserve(n);
  b.dones.reserve(n);
  std::vector<double> row(width);
  for (Eigen::Index i = 0; i < n; ++i) {
    const replay::Transition& t = transitions[i];
    if (goal_conditioned && !t.desired_goal) {
      throw InvalidInput("MakeBatch: transition lacks a desired goal");
    }
    encoder.Encode(t.state, row.data());
    if (goal_conditioned) encoder.Encode(*t.desired_goal, row.data() + d);
    for (int j = 0; j < width; ++j) b.inputs(i, j) = row[j];
    encoder.Encode(t.next_state, row.data());
    for (int j = 0; j < width; ++j) b.next_inputs(i, j) = row[j];
    b.actions.push_back(t.action);
    b.rewards.push_back(t.reward);
    b.dones.push_back(t.done ? 1 : 0);
  }
  return b;
}

namespace {

std::vector<int> LayerSizes(int input_dim, const std::vector<int>& hidden,
                            int outputs) {
  std::vector<int> sizes{input_dim};
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  sizes.push_back(outputs);
  return sizes;
}

int ArgMaxRow(const nn::Matrix& m, Eigen::Index row) {
  int best = 0;
  for (Eigen::Index a = 1; a < m.cols(); ++a) {
    if (m(row, a) > m(row, best)) best = static_cast<int>(a);
  }
  return best;
}

}  // namespace

DqnAgent::DqnAgent(int input_dim, int num_actions, const DqnConfig& config,
                   std::mt19937_64& init_rng)
    : DqnAgent(config,
               nn::DenseNet(LayerSizes(input_dim, config.hidden, num_actions),
                            init_rng),
               num_actions) {}

DqnAgent::DqnAgent(DqnConfig config, nn::DenseNet online, int num_actions)
    : config_(std::move(config)),
      num_actions_(num_actions),
      online_(std::move(online)),
      target_(online_),
      adam_(nn::AdamConfig{.learning_rate = config_.learning_rate}) {
  if (num_actions_ < 1) throw InvalidInput("DqnAgent: no actions");
  if (config_.target_update_period < 1) {
    throw InvalidInput("DqnAgent: target_update_period must be >= 1");
  }
  if (config_.epsilon < 0.0 || config_.epsilon > 1.0) {
    throw InvalidInput("DqnAgent: epsilon outside [0, 1]");
  }
}

nn::Vector DqnAgent::QValues(std::span<const double> input) const {
  return online_.Forward(input);
}

int DqnAgent::Greedy(std::span<const double> input) const {
  const nn::Vector q = QValues(input);
  int best = 0;
  for (int a = 1; a < num_actions_; ++a) {
    if (q[a] > q[best]) best = a;
  }
  return best;
}

int DqnAgent::ActEpsilonGreedy(std::span<const double> input,
                               std::mt19937_64& rng) const {
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  if (coin(rng) < config_.epsilon) {
    return std::uniform_int_distribution<int>(0, num_actions_ - 1)(rng);
  }
  return Greedy(input);
}

std::vector<double> DqnAgent::TdTargets(
    const Batch& batch, std::vector<int>* bootstrap_actions) const {
  if (batch.size() == 0) throw InvalidInput("TdTargets: empty batch");
  const nn::Matrix q_online = online_.ForwardBatch(batch.next_inputs);
  const nn::Matrix q_target = target_.ForwardBatch(batch.next_inputs);
  std::vector<double> y(batch.size());
  if (bootstrap_actions) bootstrap_actions->assign(batch.size(), -1);
  for (std::size_t i = 0; i < batch.size(); ++i) {
    if (batch.dones[i]) {
      y[i] = batch.rewards[i];
      continue;
    }
    const int a = ArgMaxRow(q_online, static_cast<Eigen::Index>(i));
    if (bootstrap_actions) (*bootstrap_actions)[i] = a;
    y[i] = batch.rewards[i] + config_.gamma * q_target(i, a);
  }
  return y;
}

TrainResult DqnAgent::TrainStep(const Batch& batch,
                                std::span<const double> weights) {
  const std::size_t n = batch.size();
  if (n == 0) throw InvalidInput("TrainStep: empty batch");
  if (weights.size() != n) {
    throw InvalidInput("TrainStep: weights and batch differ in length");
  }
  const std::vector<double> y = TdTargets(batch);
  nn::Tape tape;
  const nn::Matrix q = online_.ForwardBatch(batch.inputs, &tape);
  nn::Matrix grads = nn::Matrix::Zero(q.rows(), q.cols());
  TrainResult result;
  result.td_errors.resize(n);
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    const int a = batch.actions[i];
    if (a < 0 || a >= num_actions_) {
      throw InvalidInput("TrainStep: action out of range");
    }
    const auto row = static_cast<Eigen::Index>(i);
    if (!std::isfinite(q(row, a)) || !std::isfinite(y[i])) {
      throw TrainingDivergence("DQN prediction or target is not finite at step " +
                               std::to_string(train_steps_));
    }
    const nn::LossGrad lg = nn::HuberLoss(q(row, a), y[i], config_.huber_delta);
    result.loss += weights[i] * lg.loss * inv_n;
    grads(row, a) = weights[i] * lg.grad * inv_n;
    result.td_errors[i] = y[i] - q(row, a);
  }
  if (!std::isfinite(result.loss)) {
    throw TrainingDivergence("DQN loss is not finite at step " +
                             std::to_string(train_steps_));
  }
  adam_.Step(online_.params(), online_.BackwardBatch(tape, grads));
  ++train_steps_;
  if (train_steps_ % config_.target_update_period == 0) SyncTarget();
  return result;
}

nlohmann::json DqnAgent::ToJson() const {
  return {{"num_actions", num_actions_},
          {"gamma", config_.gamma},
          {"epsilon", config_.epsilon},
          {"learning_rate", config_.learning_rate},
          {"target_update_period", config_.target_update_period},
          {"huber_delta", config_.huber_delta},
          {"train_steps", train_steps_},
          {"online", online_.ToJson()},
          {"target", target_.ToJson()}};
}

DqnAgent DqnAgent::FromJson(const nlohmann::json& j) {
  try {
    nn::DenseNet online = nn::DenseNet::FromJson(j.at("online"));
    DqnConfig config;
    const std::vector<int>& sizes = online.layer_sizes();
    config.hidden.assign(sizes.begin() + 1, sizes.end() - 1);
    config.gamma = j.at("gamma").get<double>();
    config.epsilon = j.at("epsilon").get<double>();
    config.learning_rate = j.at("learning_rate").get<double>();
    config.target_update_period = j.at("target_update_period").get<int>();
    config.huber_delta = j.at("huber_delta").get<double>();
    DqnAgent agent(config, std::move(online), j.at("num_actions").get<int>());
    agent.target_ = nn::DenseNet::FromJson(j.at("target"));
    agent.train_steps_ = j.at("train_steps").get<std::int64_t>();
    if (agent.online_.output_size() != agent.num_actions_ ||
        agent.target_.layer_sizes() != agent.online_.layer_sizes()) {
      throw InvalidInput("DqnAgent checkpoint: inconsistent shapes");
    }
    return agent;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("DqnAgent checkpoint: ") + e.what());
  }
}

GoalDqnAgent::GoalDqnAgent(int state_dim, int num_actions,
                           const DqnConfig& config, std::mt19937_64& init_rng)
    : state_dim_(state_dim),
      dqn_(2 * state_dim, num_actions, config, init_rng) {}

int GoalDqnAgent::ActTowardGoal(std::span<const double> encoded_state,
                                std::span<const double> encoded_goal) const {
  if (encoded_state.size() != static_cast<std::size_t>(state_dim_) ||
      encoded_goal.size() != static_cast<std::size_t>(state_dim_)) {
    throw InvalidInput("ActTowardGoal: wrong state or goal dimension");
  }
  std::vector<double> input(encoded_state.begin(), encoded_state.end());
  input.insert(input.end(), encoded_goal.begin(), encoded_goal.end());
  return dqn_.Greedy(input);
}

}  // namespace driftless::agents

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

#include "driftless/envs.h"

#include <algorithm>
#include <cmath>

#include "driftless/errors.h"

namespace driftless::envs {

State Environment::Reset(std::mt19937_64& rng) {
  state_ = SampleStart(rng);
  steps_ = 0;
  done_ = false;
  return state_;
}

StepResult Environment::Step(int action) {
  if (done_) throw ContractViolation(name() + ": step after episode end");
  if (action < 0 || action >= num_actions()) {
    throw InvalidInput(name() + ": action out of range");
  }
  StepResult r;
  r.next_state = Transition(state_, action, &r.reward, &r.terminal);
  ++steps_;
  r.truncated = !r.terminal && steps_ >= horizon();
  r.done = r.terminal || r.truncated;
  r.achieved_goal = GoalOf(r.next_state);
  state_ = r.next_state;
  done_ = r.done;
  return r;
}

ChainOutcome ChainStep(const ChainParams& params, int index, int action) {
  ChainOutcome out;
  switch (action) {
    case kLeft:
      out.next_index = std::max(index - 1, 0);
      break;
    case kRight:
      out.next_index = std::min(index + 1, params.length - 1);
      break;
    case kUp:
    case kDown:
      out.next_index = params.start_index;
      break;
    default:
      throw InvalidInput("ChainStep: action out of range");
  }
  out.terminal = out.next_index == params.goal_index;
  out.reward = out.terminal ? params.goal_reward : 0.0;
  return out;
}

TeleportChain::TeleportChain(ChainParams params)
    : params_(params),
      box_{{0.0}, {static_cast<double>(params.length - 1)}} {
  if (params_.length < 2 || params_.start_index < 0 ||
      params_.start_index >= params_.length || params_.goal_index < 0 ||
      params_.goal_index >= params_.length || params_.horizon < 1) {
    throw InvalidInput("TeleportChain: inconsistent parameters");
  }
}

std::unique_ptr<Environment> TeleportChain::Clone() const {
  return std::make_unique<TeleportChain>(params_);
}

State TeleportChain::SampleStart(std::mt19937_64&) {
  return {static_cast<double>(params_.start_index)};
}

State TeleportChain::Transition(const State& s, int action, double* reward,
                                bool* terminal) const {
  const ChainOutcome o =
      ChainStep(params_, static_cast<int>(std::lround(s[0])), action);
  *reward = o.reward;
  *terminal = o.terminal;
  return {static_cast<double>(o.next_index)};
}

CarState CarStep(CarState s, int action) {
  if (action < 0 || action > 2) {
    throw InvalidInput("CarStep: action out of range");
  }
  double v = s.velocity + (action - 1) * kCarForce +
             std::cos(3.0 * s.position) * (-kCarGravity);
  v = std::clamp(v, -kCarMaxSpeed, kCarMaxSpeed);
  double p = std::clamp(s.position + v, kCarMinPosition, kCarMaxPosition);
  if (p == kCarMinPosition && v < 0.0) v = 0.0;
  return {p, v};
}

MountainCar::MountainCar(int horizon)
    : horizon_(horizon),
      box_{{kCarMinPosition, -kCarMaxSpeed}, {kCarMaxPosition, kCarMaxSpeed}} {
  if (horizon_ < 1) throw InvalidInput("MountainCar: horizon must be >= 1");
}

std::unique_ptr<Environment> MountainCar::Clone() const {
  return std::make_unique<MountainCar>(horizon_);
}

State MountainCar::SampleStart(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-0.6, -0.4);
  return {dist(rng), 0.0};
}

State MountainCar::Transition(const State& s, int action, double* reward,
                              bool* terminal) const {
  const CarState next = CarStep({s[0], s[1]}, action);
  *reward = -1.0;
  *terminal = next.position >= kCarGoalPosition;
  return {next.position, next.velocity};
}

std::unique_ptr<Environment> MakeEnvironment(const std::string& name) {
  if (name == "teleport-chain-40") return std::make_unique<TeleportChain>();
  if (name == "mountain-car") return std::make_unique<MountainCar>();
  throw InvalidInput("unknown environment '" + name + "'");
}

VisitationGrid::VisitationGrid(Box box, int bins_per_dim)
    : box_(std::move(box)), bins_(bins_per_dim) {
  if (bins_ < 1 || box_.low.empty() || box_.low.size() != box_.high.size()) {
    throw InvalidInput("VisitationGrid: bad box or bin count");
  }
  std::size_t cells = 1;
  for (std::size_t d = 0; d < box_.low.size(); ++d) cells *= bins_;
  visited_.assign(cells, false);
}

std::vector<int> VisitationGrid::Bins(std::span<const double> state) const {
  if (state.size() != box_.low.size()) {
    throw InvalidInput("VisitationGrid: state dimension mismatch");
  }
  std::vector<int> bins(state.size());
  for (std::size_t d = 0; d < state.size(); ++d) {
    const double frac =
        (state[d] - box_.low[d]) / (box_.high[d] - box_.low[d]);
    const int b = static_cast<int>(std::floor(bins_ * frac));
    bins[d] = std::clamp(b, 0, bins_ - 1);
  }
  return bins;
}

int VisitationGrid::Cell(std::span<const double> state) const {
  int cell = 0;
  for (int b : Bins(state)) cell = cell * bins_ + b;
  return cell;
}

void VisitationGrid::Visit(std::span<const double> state) {
  const int cell = Cell(state);
  if (!visited_[cell]) {
    visited_[cell] = true;
    ++visited_count_;
  }
}

double VisitationGrid::Coverage() const {
  return static_cast<double>(visited_count_) /
         static_cast<double>(visited_.size());
}

}  // namespace driftless::envs

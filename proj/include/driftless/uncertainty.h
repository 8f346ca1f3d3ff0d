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

#ifndef DRIFTLESS_UNCERTAINTY_H_
#define DRIFTLESS_UNCERTAINTY_H_

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "driftless/agents.h"
#include "driftless/nn.h"

namespace driftless::uncertainty {

struct ForwardModelConfig {
  std::vector<int> hidden = {64, 64};
  double learning_rate = 1e-3;
};

// Predicts the encoded next state from (encoded state, one-hot action). The
// prediction error is the uncertainty of the source state.
class ForwardModel {
 public:
  ForwardModel(int state_dim, int num_actions, const ForwardModelConfig& config,
               std::mt19937_64& init_rng);

  // Mean over state dimensions of the squared prediction error, per row.
  std::vector<double> Score(const agents::Batch& batch) const;
  // One Adam step on the batch mean of Score. Returns the pre-step loss.
  double Train(const agents::Batch& batch);

  const nn::DenseNet& net() const { return net_; }
  nn::DenseNet& mutable_net() { return net_; }
  // Number of Score calls so far, for data-flow audits.
  std::int64_t score_calls() const { return score_calls_; }

 private:
  nn::Matrix Inputs(const agents::Batch& batch) const;

  int state_dim_;
  int num_actions_;
  nn::DenseNet net_;
  nn::Adam adam_;
  mutable std::int64_t score_calls_ = 0;
};

// Squashes raw scores into [0, 1] with exponential running averages of the
// batch minimum and maximum, then scales by 1/sqrt(t).
class BonusNormalizer {
 public:
  explicit BonusNormalizer(double decay = 0.01);

  // Folds the batch extremes into the running statistics. The first call
  // adopts them outright.
  void Update(std::span<const double> raw);
  // Uses the current statistics; zero while their range is below 1e-12.
  double Normalize(double raw, std::int64_t t) const;
  // Update followed by Normalize of every entry.
  std::vector<double> Bonuses(std::span<const double> raw, std::int64_t t);

  bool initialized() const { return initialized_; }
  double running_min() const { return running_min_; }
  double running_max() const { return running_max_; }
  std::int64_t calls() const { return calls_; }

 private:
  double decay_;
  bool initialized_ = false;
  double running_min_ = 0.0;
  double running_max_ = 0.0;
  mutable std::int64_t calls_ = 0;
};

}  // namespace driftless::uncertainty

#endif  // DRIFTLESS_UNCERTAINTY_H_

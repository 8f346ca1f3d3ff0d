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

#include "driftless/uncertainty.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "driftless/errors.h"

namespace driftless::uncertainty {

namespace {

std::vector<int> Sizes(int in, const std::vector<int>& hidden, int out) {
  std::vector<int> sizes{in};
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  sizes.push_back(out);
  return sizes;
}

}  // namespace

ForwardModel::ForwardModel(int state_dim, int num_actions,
                           const ForwardModelConfig& config,
                           std::mt19937_64& init_rng)
    : state_dim_(state_dim),
      num_actions_(num_actions),
      net_(Sizes(state_dim + num_actions, config.hidden, state_dim), init_rng),
      adam_(nn::AdamConfig{.learning_rate = config.learning_rate}) {}

nn::Matrix ForwardModel::Inputs(const agents::Batch& batch) const {
  if (batch.inputs.cols() != state_dim_ ||
      batch.next_inputs.cols() != state_dim_) {
    throw InvalidInput("ForwardModel: batch has wrong state dimension");
  }
  const auto n = static_cast<Eigen::Index>(batch.size());
  nn::Matrix x = nn::Matrix::Zero(n, state_dim_ + num_actions_);
  x.leftCols(state_dim_) = batch.inputs;
  for (Eigen::Index i = 0; i < n; ++i) {
    const int a = batch.actions[i];
    if (a < 0 || a >= num_actions_) {
      throw InvalidInput("ForwardModel: action out of range");
    }
    x(i, state_dim_ + a) = 1.0;
  }
  return x;
}

std::vector<double> ForwardModel::Score(const agents::Batch& batch) const {
  ++score_calls_;
  const nn::Matrix residual =
      net_.ForwardBatch(Inputs(batch)) - batch.next_inputs;
  const nn::Vector u = residual.rowwise().squaredNorm() / state_dim_;
  return std::vector<double>(u.data(), u.data() + u.size());
}

double ForwardModel::Train(const agents::Batch& batch) {
  const std::size_t n = batch.size();
  if (n == 0) throw InvalidInput("ForwardModel::Train: empty batch");
  nn::Tape tape;
  const nn::Matrix residual =
      net_.ForwardBatch(Inputs(batch), &tape) - batch.next_inputs;
  const double scale = 1.0 / (static_cast<double>(n) * state_dim_);
  const double loss = residual.squaredNorm() * scale;
  if (!std::isfinite(loss)) {
    throw TrainingDivergence("forward model loss is not finite at step " +
                             std::to_string(adam_.step_count()));
  }
  adam_.Step(net_.params(), net_.BackwardBatch(tape, 2.0 * scale * residual));
  return loss;
}

BonusNormalizer::BonusNormalizer(double decay) : decay_(decay) {
  if (!(decay > 0.0 && decay <= 1.0)) {
    throw InvalidInput("BonusNormalizer: decay must lie in (0, 1]");
  }
}

void BonusNormalizer::Update(std::span<const double> raw) {
  if (raw.empty()) return;
  const auto [lo, hi] = std::minmax_element(raw.begin(), raw.end());
  if (!initialized_) {
    running_min_ = *lo;
    running_max_ = *hi;
    initialized_ = true;
    return;
  }
  running_min_ += decay_ * (*lo - running_min_);
  running_max_ += decay_ * (*hi - running_max_);
}

double BonusNormalizer::Normalize(double raw, std::int64_t t) const {
  if (t < 1) throw InvalidInput("BonusNormalizer: t must be >= 1");
  ++calls_;
  const double range = running_max_ - running_min_;
  if (!initialized_ || range < 1e-12) return 0.0;
  const double unit = std::clamp((raw - running_min_) / range, 0.0, 1.0);
  return unit / std::sqrt(static_cast<double>(t));
}

std::vector<double> BonusNormalizer::Bonuses(std::span<const double> raw,
                                             std::int64_t t) {
  Update(raw);
  std::vector<double> out;
  out.reserve(raw.size());
  for (double r : raw) out.push_back(Normalize(r, t));
  return out;
}

}  // namespace driftless::uncertainty

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

#include "driftless/replay.h"

#include <algorithm>
#include <cmath>

#include "driftless/errors.h"

namespace driftless::replay {

SumTree::SumTree(std::size_t capacity) : capacity_(capacity), leaves_(1) {
  if (capacity == 0) throw InvalidInput("SumTree: capacity must be positive");
  while (leaves_ < capacity) leaves_ *= 2;
  nodes_.assign(2 * leaves_, 0.0);
}

void SumTree::Set(std::size_t index, double priority) {
  if (index >= capacity_) throw InvalidInput("SumTree::Set: index out of range");
  if (!(priority >= 0.0) || !std::isfinite(priority)) {
    throw InvalidInput("SumTree::Set: priority must be finite and >= 0");
  }
  std::size_t node = leaves_ + index;
  nodes_[node] = priority;
  for (node /= 2; node >= 1; node /= 2) {
    nodes_[node] = nodes_[2 * node] + nodes_[2 * node + 1];
  }
}

std::size_t SumTree::Find(double mass) const {
  std::size_t node = 1;
  while (node < leaves_) {
    const std::size_t left = 2 * node;
    if (mass < nodes_[left] || nodes_[left + 1] <= 0.0) {
      node = left;
    } else {
      mass -= nodes_[left];
      node = left + 1;
    }
  }
  // Rounding can land on an empty leaf past the populated range.
  std::size_t index = node - leaves_;
  while (index > 0 && (index >= capacity_ || nodes_[leaves_ + index] <= 0.0)) {
    --index;
  }
  return index;
}

PrioritizedBuffer::PrioritizedBuffer(PrioritizedConfig config)
    : config_(config),
      tree_(config.capacity),
      items_(config.capacity),
      serials_(config.capacity, 0) {
  if (config_.alpha < 0.0 || config_.beta < 0.0 ||
      !(config_.epsilon_priority > 0.0)) {
    throw InvalidInput("PrioritizedBuffer: bad alpha/beta/epsilon");
  }
}

void PrioritizedBuffer::Push(Transition t) {
  const std::uint64_t serial = next_serial_++;
  const std::size_t slot = SlotOf(serial);
  items_[slot] = std::move(t);
  serials_[slot] = serial;
  tree_.Set(slot, max_priority_);
  size_ = std::min(size_ + 1, config_.capacity);
}

double PrioritizedBuffer::Probability(std::size_t slot) const {
  return tree_.Get(slot) / tree_.Total();
}

double PrioritizedBuffer::RawWeight(std::size_t slot) const {
  return std::pow(static_cast<double>(size_) * Probability(slot),
                  -config_.beta);
}

PrioritizedSample PrioritizedBuffer::Sample(std::size_t batch_size,
                                            std::mt19937_64& rng) const {
  if (size_ == 0) throw ContractViolation("sampling an empty replay buffer");
  PrioritizedSample out;
  out.transitions.reserve(batch_size);
  out.weights.reserve(batch_size);
  out.ids.reserve(batch_size);
  std::uniform_real_distribution<double> mass(0.0, tree_.Total());
  double max_weight = 0.0;
  for (std::size_t i = 0; i < batch_size; ++i) {
    const std::size_t slot = tree_.Find(mass(rng));
    out.transitions.push_back(items_[slot]);
    out.ids.push_back(serials_[slot]);
    out.weights.push_back(RawWeight(slot));
    max_weight = std::max(max_weight, out.weights.back());
  }
  for (double& w : out.weights) w /= max_weight;
  return out;
}

void PrioritizedBuffer::UpdatePriorities(std::span<const std::uint64_t> ids,
                                         std::span<const double> td_errors) {
  if (ids.size() != td_errors.size()) {
    throw InvalidInput("UpdatePriorities: ids and errors differ in length");
  }
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const std::size_t slot = SlotOf(ids[i]);
    if (ids[i] >= next_serial_ || serials_[slot] != ids[i]) {
      ++stale_updates_;
      continue;
    }
    const double priority =
        std::pow(std::abs(td_errors[i]) + config_.epsilon_priority,
                 config_.alpha);
    tree_.Set(slot, priority);
    max_priority_ = std::max(max_priority_, priority);
  }
}

UniformBuffer::UniformBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw InvalidInput("UniformBuffer: capacity must be > 0");
}

void UniformBuffer::Push(Transition t) {
  if (items_.size() < capacity_) {
    items_.push_back(std::move(t));
    return;
  }
  items_[head_] = std::move(t);
  head_ = (head_ + 1) % capacity_;
}

const Transition& UniformBuffer::at(std::size_t i) const {
  if (i >= items_.size()) throw InvalidInput("UniformBuffer::at out of range");
  return items_[(head_ + i) % items_.size()];
}

std::vector<Transition> UniformBuffer::Sample(std::size_t batch_size,
                                              std::mt19937_64& rng) const {
  if (items_.empty()) throw ContractViolation("sampling an empty replay buffer");
  std::uniform_int_distribution<std::size_t> pick(0, items_.size() - 1);
  std::vector<Transition> out;
  out.reserve(batch_size);
  for (std::size_t i = 0; i < batch_size; ++i) out.push_back(items_[pick(rng)]);
  return out;
}

std::vector<Transition> HerRelabel(std::span<const Transition> episode,
                                   HerStrategy strategy, int k,
                                   const ReachedFn& reached,
                                   std::mt19937_64& rng) {
  if (episode.empty()) throw InvalidInput("HerRelabel: empty episode");
  const std::size_t n = episode.size();
  const int future = strategy == HerStrategy::kFuture ? std::max(k, 0) : 0;
  std::vector<Transition> out;
  out.reserve(n * (future + 1));
  auto relabel = [&](const Transition& t, const std::vector<double>& goal) {
    Transition r = t;
    r.desired_goal = goal;
    const bool hit = reached(t.achieved_goal, goal);
    r.reward = hit ? 0.0 : -1.0;
    r.done = hit;
    out.push_back(std::move(r));
  };
  const std::vector<double>& final_goal = episode.back().achieved_goal;
  for (std::size_t t = 0; t < n; ++t) {
    std::uniform_int_distribution<std::size_t> later(t, n - 1);
    for (int j = 0; j < future; ++j) {
      relabel(episode[t], episode[later(rng)].achieved_goal);
    }
    relabel(episode[t], final_goal);
  }
  return out;
}

}  // namespace driftless::replay

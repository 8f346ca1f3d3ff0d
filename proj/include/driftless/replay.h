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

#ifndef DRIFTLESS_REPLAY_H_
#define DRIFTLESS_REPLAY_H_

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <vector>

namespace driftless::replay {

struct Transition {
  std::vector<double> state;
  int action = 0;
  double reward = 0.0;
  std::vector<double> next_state;
  bool done = false;  // terminal: no bootstrapping from next_state
  std::vector<double> achieved_goal;
  std::optional<std::vector<double>> desired_goal;  // set by HER
};

// Binary sum tree over a power-of-two number of leaves. Internal nodes are
// recomputed from their children on every write, so the root never drifts
// from the sum of the leaves.
class SumTree {
 public:
  explicit SumTree(std::size_t capacity);

  void Set(std::size_t index, double priority);
  double Get(std::size_t index) const { return nodes_[leaves_ + index]; }
  double Total() const { return nodes_[1]; }
  // Smallest index whose prefix sum exceeds `mass`; mass in [0, Total()).
  std::size_t Find(double mass) const;
  std::size_t capacity() const { return capacity_; }

 private:
  std::size_t capacity_;
  std::size_t leaves_;
  std::vector<double> nodes_;  // 1-based heap layout
};

struct PrioritizedConfig {
  std::size_t capacity = 100000;
  double alpha = 0.4;
  double beta = 1.0;
  double epsilon_priority = 1e-6;
};

struct PrioritizedSample {
  std::vector<Transition> transitions;
  std::vector<double> weights;   // importance weights, max-normalized
  std::vector<std::uint64_t> ids;  // insertion serials, for priority updates
};

// Proportional prioritized replay over a FIFO ring.
class PrioritizedBuffer {
 public:
  explicit PrioritizedBuffer(PrioritizedConfig config);

  // New items get the largest priority stored so far (1 for the first).
  void Push(Transition t);
  // Independent draws with P(i) = priority_i / total. Throws
  // ContractViolation on an empty buffer.
  PrioritizedSample Sample(std::size_t batch_size, std::mt19937_64& rng) const;
  // Priority becomes (|td| + epsilon_priority)^alpha. Ids whose slot has
  // since been overwritten are skipped and counted.
  void UpdatePriorities(std::span<const std::uint64_t> ids,
                        std::span<const double> td_errors);

  std::size_t size() const { return size_; }
  std::size_t capacity() const { return config_.capacity; }
  const PrioritizedConfig& config() const { return config_; }
  // By ring slot, oldest item is not necessarily slot 0.
  const Transition& at(std::size_t slot) const { return items_[slot]; }
  std::size_t SlotOf(std::uint64_t id) const { return id % config_.capacity; }
  double Priority(std::size_t slot) const { return tree_.Get(slot); }
  double Probability(std::size_t slot) const;
  // (size * P(i))^-beta before normalisation.
  double RawWeight(std::size_t slot) const;
  double TotalPriority() const { return tree_.Total(); }
  double max_priority() const { return max_priority_; }
  std::int64_t stale_updates() const { return stale_updates_; }

 private:
  PrioritizedConfig config_;
  SumTree tree_;
  std::vector<Transition> items_;
  std::vector<std::uint64_t> serials_;
  std::uint64_t next_serial_ = 0;
  std::size_t size_ = 0;
  double max_priority_ = 1.0;
  std::int64_t stale_updates_ = 0;
};

// FIFO ring sampled uniformly with replacement.
class UniformBuffer {
 public:
  explicit UniformBuffer(std::size_t capacity);

  void Push(Transition t);
  // Throws ContractViolation on an empty buffer.
  std::vector<Transition> Sample(std::size_t batch_size,
                                 std::mt19937_64& rng) const;
  std::size_t size() const { return items_.size(); }
  std::size_t capacity() const { return capacity_; }
  // Index 0 is the oldest stored item.
  const Transition& at(std::size_t i) const;

 private:
  std::size_t capacity_;
  std::vector<Transition> items_;
  std::size_t head_ = 0;  // next slot to overwrite once full
};

enum class HerStrategy { kFuture, kFinal };

using ReachedFn = std::function<bool(std::span<const double> achieved,
                                     std::span<const double> desired)>;

// For every transition: with kFuture, k copies whose desired goal is the
// achieved goal of a uniformly drawn step at or after it; with either
// strategy, one more copy aimed at the episode's final achieved goal.
// Relabelled reward is 0 when reached, else -1; done = reached.
std::vector<Transition> HerRelabel(std::span<const Transition> episode,
                                   HerStrategy strategy, int k,
                                   const ReachedFn& reached,
                                   std::mt19937_64& rng);

}  // namespace driftless::replay

#endif  // DRIFTLESS_REPLAY_H_

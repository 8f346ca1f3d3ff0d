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

#ifndef DRIFTLESS_GOAL_BUFFER_H_
#define DRIFTLESS_GOAL_BUFFER_H_

#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <vector>

namespace driftless::goals {

struct GoalEntry {
  std::vector<double> state;
  double uncertainty = 0.0;  // frozen at insertion
  std::uint64_t insertion_index = 0;
};

inline constexpr std::size_t kAllGoals =
    std::numeric_limits<std::size_t>::max();

// FIFO store of candidate goals. Stored uncertainties are never revised.
class GoalBuffer {
 public:
  explicit GoalBuffer(std::size_t capacity);

  void Insert(std::span<const double> state, double uncertainty);
  void InsertBatch(std::span<const std::vector<double>> states,
                   std::span<const double> uncertainties);

  // The min(k, size) entries of largest uncertainty, newer entries first on
  // ties, in that order.
  std::vector<const GoalEntry*> TopK(std::size_t k) const;
  // Uniform draw among TopK(k). Throws ContractViolation when empty.
  const GoalEntry& Sample(std::size_t k, std::mt19937_64& rng) const;

  std::size_t size() const { return entries_.size(); }
  std::size_t capacity() const { return capacity_; }
  bool empty() const { return entries_.empty(); }
  // Index 0 is the oldest entry.
  const GoalEntry& at(std::size_t i) const;
  double MaxUncertainty() const;
  std::uint64_t inserted() const { return next_index_; }
  // Scans that read stored uncertainties, for data-flow audits.
  std::int64_t uncertainty_reads() const { return reads_; }

 private:
  std::size_t capacity_;
  std::vector<GoalEntry> entries_;
  std::size_t head_ = 0;
  std::uint64_t next_index_ = 0;
  mutable std::int64_t reads_ = 0;
};

}  // namespace driftless::goals

#endif  // DRIFTLESS_GOAL_BUFFER_H_

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

#include "driftless/goal_buffer.h"

#include <algorithm>

#include "driftless/errors.h"

namespace driftless::goals {

GoalBuffer::GoalBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw InvalidInput("GoalBuffer: capacity must be > 0");
}

void GoalBuffer::Insert(std::span<const double> state, double uncertainty) {
  GoalEntry e{{state.begin(), state.end()}, uncertainty, next_index_++};
  if (entries_.size() < capacity_) {
    entries_.push_back(std::move(e));
    return;
  }
  entries_[head_] = std::move(e);
  head_ = (head_ + 1) % capacity_;
}

void GoalBuffer::InsertBatch(std::span<const std::vector<double>> states,
                             std::span<const double> uncertainties) {
  if (states.size() != uncertainties.size()) {
    throw InvalidInput("GoalBuffer::InsertBatch: length mismatch");
  }
  for (std::size_t i = 0; i < states.size(); ++i) {
    Insert(states[i], uncertainties[i]);
  }
}

const GoalEntry& GoalBuffer::at(std::size_t i) const {
  if (i >= entries_.size()) throw InvalidInput("GoalBuffer::at out of range");
  return entries_[(head_ + i) % entries_.size()];
}

std::vector<const GoalEntry*> GoalBuffer::TopK(std::size_t k) const {
  ++reads_;
  std::vector<const GoalEntry*> all;
  all.reserve(entries_.size());
  for (const GoalEntry& e : entries_) all.push_back(&e);
  const std::size_t m = std::min(k, all.size());
  auto before = [](const GoalEntry* a, const GoalEntry* b) {
    if (a->uncertainty != b->uncertainty) {
      return a->uncertainty > b->uncertainty;
    }
    return a->insertion_index > b->insertion_index;
  };
  std::partial_sort(all.begin(), all.begin() + m, all.end(), before);
  all.resize(m);
  return all;
}

const GoalEntry& GoalBuffer::Sample(std::size_t k,
                                    std::mt19937_64& rng) const {
  if (entries_.empty()) throw ContractViolation("sampling an empty goal buffer");
  if (k == 0) throw InvalidInput("GoalBuffer::Sample: k must be >= 1");
  if (k >= entries_.size()) {
    ++reads_;
    std::uniform_int_distribution<std::size_t> pick(0, entries_.size() - 1);
    return entries_[pick(rng)];
  }
  const std::vector<const GoalEntry*> top = TopK(k);
  std::uniform_int_distribution<std::size_t> pick(0, top.size() - 1);
  return *top[pick(rng)];
}

double GoalBuffer::MaxUncertainty() const {
  if (entries_.empty()) return 0.0;
  ++reads_;
  double best = entries_.front().uncertainty;
  for (const GoalEntry& e : entries_) best = std::max(best, e.uncertainty);
  return best;
}

}  // namespace driftless::goals

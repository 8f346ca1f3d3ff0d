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

#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include "doctest.h"
#include "driftless/errors.h"
#include "driftless/replay.h"
#include "stats.h"

namespace driftless::replay {
namespace {

Transition Make(double tag) {
  Transition t;
  t.state = {tag};
  t.next_state = {tag + 1};
  t.achieved_goal = {tag + 1};
  return t;
}

bool Exact(std::span<const double> a, std::span<const double> b) {
  return std::equal(a.begin(), a.end(), b.begin(), b.end());
}

TEST_CASE("uniform buffer: FIFO eviction") {
  UniformBuffer buf(3);
  for (int i = 0; i < 4; ++i) buf.Push(Make(i));
  CHECK(buf.size() == 3);
  CHECK(buf.at(0).state[0] == 1.0);
  CHECK(buf.at(2).state[0] == 3.0);
  buf.Push(Make(4));
  CHECK(buf.size() == 3);
  std::mt19937_64 rng(1);
  for (const Transition& t : buf.Sample(50, rng)) CHECK(t.state[0] >= 2.0);
  CHECK_THROWS_AS(UniformBuffer(2).Sample(1, rng), ContractViolation);
}

TEST_CASE("prioritized buffer: push conventions") {
  PrioritizedBuffer buf({.capacity = 3});
  buf.Push(Make(0));
  CHECK(buf.Priority(0) == 1.0);
  for (int i = 1; i < 4; ++i) buf.Push(Make(i));
  CHECK(buf.size() == 3);
  CHECK(buf.at(0).state[0] == 3.0);  // slot 0 overwritten by item 3
  std::mt19937_64 rng(2);
  CHECK_THROWS_AS(PrioritizedBuffer({.capacity = 2}).Sample(1, rng),
                  ContractViolation);
}

TEST_CASE("prioritized buffer: closed-form probabilities and weights") {
  PrioritizedBuffer buf({.capacity = 2, .alpha = 1.0, .beta = 1.0,
                         .epsilon_priority = 1e-6});
  buf.Push(Make(0));
  buf.Push(Make(1));
  std::mt19937_64 rng(3);
  PrioritizedSample s = buf.Sample(2, rng);
  // Stored priorities 1 and 3 (td chosen so |td| + eps = priority).
  std::vector<std::uint64_t> ids{0, 1};
  std::vector<double> td{1.0 - 1e-6, 3.0 - 1e-6};
  buf.UpdatePriorities(ids, td);
  CHECK(buf.Probability(0) == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(buf.Probability(1) == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(buf.RawWeight(0) / buf.RawWeight(1) ==
        doctest::Approx(3.0).epsilon(1e-12));
  // Max-normalised weights never exceed 1.
  for (double w : buf.Sample(64, rng).weights) CHECK(w <= 1.0);
}

TEST_CASE("prioritized buffer: priority floor, alpha zero, stale ids") {
  PrioritizedBuffer buf({.capacity = 2, .alpha = 0.4});
  buf.Push(Make(0));
  buf.Push(Make(1));
  std::vector<std::uint64_t> id0{0};
  buf.UpdatePriorities(id0, std::vector<double>{0.0});
  CHECK(buf.Priority(0) == doctest::Approx(std::pow(1e-6, 0.4)));
  CHECK(buf.Priority(0) > 0.0);

  PrioritizedBuffer flat({.capacity = 4, .alpha = 0.0});
  for (int i = 0; i < 4; ++i) flat.Push(Make(i));
  std::vector<std::uint64_t> ids{0, 1, 2, 3};
  flat.UpdatePriorities(ids, std::vector<double>{0.0, 5.0, 100.0, -3.0});
  for (int i = 0; i < 4; ++i) CHECK(flat.Priority(i) == 1.0);

  buf.Push(Make(2));  // overwrites id 0
  buf.UpdatePriorities(id0, std::vector<double>{7.0});
  CHECK(buf.stale_updates() == 1);
}

TEST_CASE("sum tree: raising a leaf raises the root by the delta") {
  SumTree tree(5);
  for (int i = 0; i < 5; ++i) tree.Set(i, 0.5 + i);
  const double before = tree.Total();
  tree.Set(2, tree.Get(2) + 1.75);
  CHECK(tree.Total() - before == doctest::Approx(1.75).epsilon(1e-14));
  CHECK(tree.Find(0.0) == 0);
  CHECK(tree.Find(0.49) == 0);
  CHECK(tree.Find(0.51) == 1);
  CHECK(tree.Find(tree.Total() * (1 - 1e-15)) == 4);
}

TEST_CASE("property: sum tree matches a flat array over random ops") {
  std::mt19937_64 rng(4);
  const std::size_t n = 37;
  SumTree tree(n);
  std::vector<double> flat(n, 0.0);
  std::uniform_int_distribution<std::size_t> idx(0, n - 1);
  std::uniform_real_distribution<double> pr(0.0, 10.0), u(0.0, 1.0);
  for (int op = 0; op < 20000; ++op) {
    const std::size_t i = idx(rng);
    const double p = pr(rng);
    tree.Set(i, p);
    flat[i] = p;
    const double total = std::accumulate(flat.begin(), flat.end(), 0.0);
    REQUIRE(std::abs(tree.Total() - total) <= 1e-9);
    const double mass = u(rng) * total;
    double run = 0.0;
    std::size_t expect = 0;
    while (expect + 1 < n && run + flat[expect] <= mass) run += flat[expect++];
    const std::size_t got = tree.Find(mass);
    // Allow a neighbour only when the mass sits on a boundary.
    if (got != expect) CHECK(std::abs(run - mass) < 1e-9);
  }
}

TEST_CASE("prioritized sampling frequencies follow priority / sum") {
  const int n = 16;
  PrioritizedBuffer buf({.capacity = n, .alpha = 0.4});
  std::vector<std::uint64_t> ids;
  std::vector<double> td;
  for (int i = 0; i < n; ++i) {
    buf.Push(Make(i));
    ids.push_back(i);
    td.push_back(0.1 * (i + 1) * (i % 3 + 1));
  }
  buf.UpdatePriorities(ids, td);
  std::vector<double> probs(n);
  for (int i = 0; i < n; ++i) probs[i] = buf.Probability(i);
  std::vector<std::int64_t> counts(n, 0);
  std::mt19937_64 rng(5);
  for (int draw = 0; draw < 1000; ++draw) {
    for (const Transition& t : buf.Sample(100, rng).transitions) {
      ++counts[static_cast<int>(t.state[0])];
    }
  }
  CHECK(testing::ChiSquarePValue(counts, probs) > 0.01);

  SUBCASE("equal priorities are uniform") {
    PrioritizedBuffer even({.capacity = n});
    for (int i = 0; i < n; ++i) even.Push(Make(i));
    std::vector<std::int64_t> c(n, 0);
    for (int draw = 0; draw < 1000; ++draw) {
      for (const Transition& t : even.Sample(100, rng).transitions) {
        ++c[static_cast<int>(t.state[0])];
      }
    }
    CHECK(testing::ChiSquarePValue(c, std::vector<double>(n, 1.0 / n)) >
          0.01);
  }
}

ReachedFn ExactReach() {
  return [](std::span<const double> a, std::span<const double> b) {
    return Exact(a, b);
  };
}

TEST_CASE("her: final strategy, one relabel per transition") {
  std::vector<Transition> ep;
  for (int i = 0; i < 6; ++i) ep.push_back(Make(i));
  std::mt19937_64 rng(6);
  std::vector<Transition> out =
      HerRelabel(ep, HerStrategy::kFinal, 0, ExactReach(), rng);
  REQUIRE(out.size() == ep.size());
  const Transition& last = out.back();
  CHECK(last.reward == 0.0);
  CHECK(last.done);
  CHECK(*last.desired_goal == ep.back().achieved_goal);
  CHECK(out.front().reward == -1.0);
  CHECK_FALSE(out.front().done);
  CHECK_THROWS_AS(HerRelabel({}, HerStrategy::kFinal, 0, ExactReach(), rng),
                  InvalidInput);
}

TEST_CASE("her: future goals never come from the past") {
  std::mt19937_64 rng(7);
  std::vector<Transition> ep;
  for (int i = 0; i < 10; ++i) ep.push_back(Make(10 * i));
  std::vector<Transition> out =
      HerRelabel(ep, HerStrategy::kFuture, 4, ExactReach(), rng);
  REQUIRE(out.size() == ep.size() * 5);
  for (std::size_t j = 0; j < out.size(); ++j) {
    const std::size_t source = j / 5;
    bool found = false;
    for (std::size_t t = source; t < ep.size(); ++t) {
      found |= ep[t].achieved_goal == *out[j].desired_goal;
    }
    CHECK(found);
    CHECK(out[j].reward ==
          (out[j].achieved_goal == *out[j].desired_goal ? 0.0 : -1.0));
  }
}

}  // namespace
}  // namespace driftless::replay

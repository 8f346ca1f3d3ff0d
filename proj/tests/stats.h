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

#ifndef DRIFTLESS_TESTS_STATS_H_
#define DRIFTLESS_TESTS_STATS_H_

#include <boost/math/distributions/chi_squared.hpp>

#include <cstdint>
#include <vector>

namespace driftless::testing {

// Pearson goodness-of-fit p-value of observed counts against expected cell
// probabilities. Cells with zero expected probability must be empty.
inline double ChiSquarePValue(const std::vector<std::int64_t>& observed,
                              const std::vector<double>& probabilities) {
  std::int64_t total = 0;
  for (std::int64_t c : observed) total += c;
  double stat = 0.0;
  int cells = 0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    if (probabilities[i] <= 0.0) {
      if (observed[i] != 0) return 0.0;
      continue;
    }
    const double expected = probabilities[i] * static_cast<double>(total);
    const double d = static_cast<double>(observed[i]) - expected;
    stat += d * d / expected;
    ++cells;
  }
  if (cells < 2) return 1.0;
  boost::math::chi_squared dist(cells - 1);
  return boost::math::cdf(boost::math::complement(dist, stat));
}

}  // namespace driftless::testing

#endif  // DRIFTLESS_TESTS_STATS_H_

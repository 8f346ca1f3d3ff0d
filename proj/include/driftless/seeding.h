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

#ifndef DRIFTLESS_SEEDING_H_
#define DRIFTLESS_SEEDING_H_

#include <cstdint>
#include <string_view>

namespace driftless {

// SplitMix64 finaliser.
constexpr std::uint64_t Mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// 64-bit FNV-1a.
constexpr std::uint64_t HashLabel(std::string_view label) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : label) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Seed for one component of one run:
//   Mix64(Mix64(Mix64(master) ^ HashLabel(label)) ^ index).
constexpr std::uint64_t DeriveSeed(std::uint64_t master, std::string_view label,
                                   std::uint64_t index) {
  return Mix64(Mix64(Mix64(master) ^ HashLabel(label)) ^ index);
}

}  // namespace driftless

#endif  // DRIFTLESS_SEEDING_H_

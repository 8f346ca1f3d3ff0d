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

#ifndef DRIFTLESS_ERRORS_H_
#define DRIFTLESS_ERRORS_H_

#include <stdexcept>
#include <string>

namespace driftless {

// Bad arguments: shape mismatches, out-of-range hyperparameters, non-finite
// inputs.
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Caller broke a stateful precondition (stepping a finished episode,
// sampling an empty buffer).
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// A learner produced a non-finite loss. Aborts the run it belongs to.
class TrainingDivergence : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace driftless

#endif  // DRIFTLESS_ERRORS_H_

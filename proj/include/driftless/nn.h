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

#ifndef DRIFTLESS_NN_H_
#define DRIFTLESS_NN_H_

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "json.hpp"

namespace driftless::nn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct Layer {
  Matrix weights;  // fan_in x fan_out
  Vector biases;   // fan_out
};

// Parameters, gradients and optimizer moments all share this shape.
using Parameters = std::vector<Layer>;

Parameters ZerosLike(const Parameters& params);
bool SameShape(const Parameters& a, const Parameters& b);

// Pre-activations of every layer from the last batched forward pass; lets
// the backward pass reuse them instead of recomputing.
struct Tape {
  Matrix inputs;
  std::vector<Matrix> pre_activations;
};

// Multilayer perceptron: ReLU on hidden layers, identity on the output.
class DenseNet {
 public:
  DenseNet() = default;
  // Glorot-uniform weights in +-sqrt(6 / (fan_in + fan_out)), zero biases.
  DenseNet(std::vector<int> layer_sizes, std::mt19937_64& rng);
  static DenseNet Zeros(std::vector<int> layer_sizes);

  const std::vector<int>& layer_sizes() const { return sizes_; }
  int input_size() const { return sizes_.front(); }
  int output_size() const { return sizes_.back(); }
  Parameters& params() { return params_; }
  const Parameters& params() const { return params_; }
  std::size_t ParameterCount() const;
  bool AllFinite() const;

  Vector Forward(std::span<const double> input) const;
  // Rows of `inputs` are samples. If `tape` is non-null it receives what
  // BackwardBatch needs.
  Matrix ForwardBatch(const Matrix& inputs, Tape* tape = nullptr) const;

  Parameters Backward(std::span<const double> input,
                      std::span<const double> output_grad) const;
  // Gradients are summed over the rows of `output_grads`.
  Parameters BackwardBatch(const Tape& tape, const Matrix& output_grads) const;

  // Snapshot layout: for each layer in order, the weight matrix row-major
  // (fan_in rows of fan_out values) followed by the bias vector.
  std::vector<double> Flatten() const;
  void Unflatten(std::span<const double> flat);
  nlohmann::json ToJson() const;
  static DenseNet FromJson(const nlohmann::json& j);

 private:
  explicit DenseNet(std::vector<int> layer_sizes);
  void CheckSizes() const;

  std::vector<int> sizes_;
  Parameters params_;
};

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Adam with bias correction. Moments are allocated on the first step.
class Adam {
 public:
  Adam() = default;
  explicit Adam(AdamConfig config) : config_(config) {}

  // Throws TrainingDivergence if any parameter becomes non-finite.
  void Step(Parameters& params, const Parameters& grads);

  const AdamConfig& config() const { return config_; }
  std::int64_t step_count() const { return step_count_; }
  const Parameters& first_moment() const { return first_moment_; }
  const Parameters& second_moment() const { return second_moment_; }

 private:
  AdamConfig config_;
  std::int64_t step_count_ = 0;
  Parameters first_moment_;
  Parameters second_moment_;
};

struct LossGrad {
  double loss = 0.0;
  double grad = 0.0;  // d loss / d prediction
};

LossGrad HuberLoss(double prediction, double target, double delta = 1.0);

enum class LossKind { kMse, kHuber };

// Scalar loss over an output vector: mean over components of squared error
// (kMse) or of the unit-delta Huber loss (kHuber).
double VectorLoss(LossKind kind, std::span<const double> prediction,
                  std::span<const double> target);
Vector VectorLossGrad(LossKind kind, std::span<const double> prediction,
                      std::span<const double> target);

// Max over parameters of |analytic - numeric| / max(|analytic|, |numeric|,
// 1e-8). The numeric side uses central differences of a separate
// extended-precision forward pass.
double GradCheck(const DenseNet& net, std::span<const double> input,
                 std::span<const double> target, LossKind kind,
                 double step = 1e-5);

}  // namespace driftless::nn

#endif  // DRIFTLESS_NN_H_

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

#include "driftless/nn.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "driftless/errors.h"

namespace driftless::nn {
namespace {

Matrix Relu(const Matrix& z) { return z.cwiseMax(0.0); }

// Subgradient at exactly zero is taken as zero.
Matrix ReluMask(const Matrix& z) {
  return (z.array() > 0.0).cast<double>().matrix();
}

void RequireLength(std::size_t got, int want, const char* what) {
  if (static_cast<int>(got) != want) {
    throw InvalidInput(std::string(what) + ": expected length " +
                       std::to_string(want) + ", got " + std::to_string(got));
  }
}

}  // namespace

Parameters ZerosLike(const Parameters& params) {
  Parameters out;
  out.reserve(params.size());
  for (const Layer& layer : params) {
    out.push_back({Matrix::Zero(layer.weights.rows(), layer.weights.cols()),
                   Vector::Zero(layer.biases.size())});
  }
  return out;
}

bool SameShape(const Parameters& a, const Parameters& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].weights.rows() != b[i].weights.rows() ||
        a[i].weights.cols() != b[i].weights.cols() ||
        a[i].biases.size() != b[i].biases.size()) {
      return false;
    }
  }
  return true;
}

DenseNet::DenseNet(std::vector<int> layer_sizes)
    : sizes_(std::move(layer_sizes)) {
  CheckSizes();
  for (std::size_t i = 0; i + 1 < sizes_.size(); ++i) {
    params_.push_back({Matrix::Zero(sizes_[i], sizes_[i + 1]),
                       Vector::Zero(sizes_[i + 1])});
  }
}

DenseNet::DenseNet(std::vector<int> layer_sizes, std::mt19937_64& rng)
    : DenseNet(std::move(layer_sizes)) {
  for (Layer& layer : params_) {
    const double limit =
        std::sqrt(6.0 / static_cast<double>(layer.weights.rows() +
                                            layer.weights.cols()));
    std::uniform_real_distribution<double> dist(-limit, limit);
    // Row-major fill order so the draw sequence matches the snapshot layout.
    for (Eigen::Index r = 0; r < layer.weights.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.weights.cols(); ++c) {
        layer.weights(r, c) = dist(rng);
      }
    }
  }
}

DenseNet DenseNet::Zeros(std::vector<int> layer_sizes) {
  return DenseNet(std::move(layer_sizes));
}

void DenseNet::CheckSizes() const {
  if (sizes_.size() < 2) {
    throw InvalidInput("DenseNet needs at least an input and output layer");
  }
  for (int s : sizes_) {
    if (s <= 0) throw InvalidInput("DenseNet layer sizes must be positive");
  }
}

std::size_t DenseNet::ParameterCount() const {
  std::size_t n = 0;
  for (const Layer& layer : params_) {
    n += layer.weights.size() + layer.biases.size();
  }
  return n;
}

bool DenseNet::AllFinite() const {
  for (const Layer& layer : params_) {
    if (!layer.weights.allFinite() || !layer.biases.allFinite()) return false;
  }
  return true;
}

Vector DenseNet::Forward(std::span<const double> input) const {
  RequireLength(input.size(), input_size(), "DenseNet::Forward input");
  Matrix x = Eigen::Map<const Eigen::RowVectorXd>(
      input.data(), static_cast<Eigen::Index>(input.size()));
  return ForwardBatch(x).row(0).transpose();
}

Matrix DenseNet::ForwardBatch(const Matrix& inputs, Tape* tape) const {
  if (inputs.cols() != input_size()) {
    throw InvalidInput("DenseNet::ForwardBatch: expected " +
                       std::to_string(input_size()) + " columns, got " +
                       std::to_string(inputs.cols()));
  }
  if (tape != nullptr) {
    tape->inputs = inputs;
    tape->pre_activations.clear();
  }
  Matrix h = inputs;
  for (std::size_t i = 0; i < params_.size(); ++i) {
    Matrix z = h * params_[i].weights;
    z.rowwise() += params_[i].biases.transpose();
    const bool last = i + 1 == params_.size();
    if (tape != nullptr) tape->pre_activations.push_back(z);
    h = last ? std::move(z) : Relu(z);
  }
  return h;
}

Parameters DenseNet::BackwardBatch(const Tape& tape,
                                   const Matrix& output_grads) const {
  if (tape.pre_activations.size() != params_.size() ||
      output_grads.rows() != tape.inputs.rows() ||
      output_grads.cols() != output_size()) {
    throw InvalidInput("DenseNet::BackwardBatch: gradient shape mismatch");
  }
  Parameters grads(params_.size());
  Matrix delta = output_grads;  // d loss / d pre-activation of layer i
  for (std::size_t k = params_.size(); k-- > 0;) {
    const Matrix layer_input =
        k == 0 ? tape.inputs : Relu(tape.pre_activations[k - 1]);
    grads[k].weights = layer_input.transpose() * delta;
    grads[k].biases = delta.colwise().sum().transpose();
    if (k > 0) {
      delta = (delta * params_[k].weights.transpose())
                  .cwiseProduct(ReluMask(tape.pre_activations[k - 1]));
    }
  }
  return grads;
}

Parameters DenseNet::Backward(std::span<const double> input,
                              std::span<const double> output_grad) const {
  RequireLength(input.size(), input_size(), "DenseNet::Backward input");
  RequireLength(output_grad.size(), output_size(),
                "DenseNet::Backward output_grad");
  Matrix x = Eigen::Map<const Eigen::RowVectorXd>(
      input.data(), static_cast<Eigen::Index>(input.size()));
  Matrix g = Eigen::Map<const Eigen::RowVectorXd>(
      output_grad.data(), static_cast<Eigen::Index>(output_grad.size()));
  Tape tape;
  ForwardBatch(x, &tape);
  return BackwardBatch(tape, g);
}

std::vector<double> DenseNet::Flatten() const {
  std::vector<double> flat;
  flat.reserve(ParameterCount());
  for (const Layer& layer : params_) {
    for (Eigen::Index r = 0; r < layer.weights.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.weights.cols(); ++c) {
        flat.push_back(layer.weights(r, c));
      }
    }
    for (Eigen::Index c = 0; c < layer.biases.size(); ++c) {
      flat.push_back(layer.biases(c));
    }
  }
  return flat;
}

void DenseNet::Unflatten(std::span<const double> flat) {
  if (flat.size() != ParameterCount()) {
    throw InvalidInput("DenseNet::Unflatten: expected " +
                       std::to_string(ParameterCount()) + " values, got " +
                       std::to_string(flat.size()));
  }
  std::size_t pos = 0;
  for (Layer& layer : params_) {
    for (Eigen::Index r = 0; r < layer.weights.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.weights.cols(); ++c) {
        layer.weights(r, c) = flat[pos++];
      }
    }
    for (Eigen::Index c = 0; c < layer.biases.size(); ++c) {
      layer.biases(c) = flat[pos++];
    }
  }
}

nlohmann::json DenseNet::ToJson() const {
  return {{"layer_sizes", sizes_}, {"parameters", Flatten()}};
}

DenseNet DenseNet::FromJson(const nlohmann::json& j) {
  DenseNet net(j.at("layer_sizes").get<std::vector<int>>());
  net.Unflatten(j.at("parameters").get<std::vector<double>>());
  return net;
}

void Adam::Step(Parameters& params, const Parameters& grads) {
  if (!SameShape(params, grads)) {
    throw InvalidInput("Adam::Step: gradient shape does not match parameters");
  }
  if (step_count_ == 0 || !SameShape(params, first_moment_)) {
    first_moment_ = ZerosLike(params);
    second_moment_ = ZerosLike(params);
    step_count_ = 0;
  }
  ++step_count_;
  const double b1 = config_.beta1;
  const double b2 = config_.beta2;
  const double t = static_cast<double>(step_count_);
  const double m_correction = 1.0 - std::pow(b1, t);
  const double v_correction = 1.0 - std::pow(b2, t);
  const double lr = config_.learning_rate;
  const double eps = config_.epsilon;

  auto update = [&](auto& p, auto& m, auto& v, const auto& g) {
    m = b1 * m + (1.0 - b1) * g;
    v = b2 * v + (1.0 - b2) * g.cwiseProduct(g);
    p.array() -= lr * (m.array() / m_correction) /
                 ((v.array() / v_correction).sqrt() + eps);
  };
  for (std::size_t i = 0; i < params.size(); ++i) {
    update(params[i].weights, first_moment_[i].weights,
           second_moment_[i].weights, grads[i].weights);
    update(params[i].biases, first_moment_[i].biases, second_moment_[i].biases,
           grads[i].biases);
    if (!params[i].weights.allFinite() || !params[i].biases.allFinite()) {
      throw TrainingDivergence("Adam step produced non-finite parameters");
    }
  }
}

LossGrad HuberLoss(double prediction, double target, double delta) {
  if (!(delta > 0.0)) throw InvalidInput("HuberLoss: delta must be positive");
  if (!std::isfinite(prediction) || !std::isfinite(target)) {
    throw InvalidInput("HuberLoss: non-finite input");
  }
  const double e = prediction - target;
  const double a = std::abs(e);
  if (a <= delta) return {0.5 * e * e, e};
  return {delta * (a - 0.5 * delta), std::clamp(e, -delta, delta)};
}

double VectorLoss(LossKind kind, std::span<const double> prediction,
                  std::span<const double> target) {
  if (prediction.size() != target.size() || prediction.empty()) {
    throw InvalidInput("VectorLoss: size mismatch");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < prediction.size(); ++i) {
    const double e = prediction[i] - target[i];
    total += kind == LossKind::kMse ? e * e
                                    : HuberLoss(prediction[i], target[i]).loss;
  }
  return total / static_cast<double>(prediction.size());
}

Vector VectorLossGrad(LossKind kind, std::span<const double> prediction,
                      std::span<const double> target) {
  if (prediction.size() != target.size() || prediction.empty()) {
    throw InvalidInput("VectorLossGrad: size mismatch");
  }
  const double n = static_cast<double>(prediction.size());
  Vector g(static_cast<Eigen::Index>(prediction.size()));
  for (std::size_t i = 0; i < prediction.size(); ++i) {
    const double e = prediction[i] - target[i];
    g(static_cast<Eigen::Index>(i)) =
        (kind == LossKind::kMse ? 2.0 * e
                                : HuberLoss(prediction[i], target[i]).grad) /
        n;
  }
  return g;
}

namespace {

using Wide = long double;

// Plain-loop forward pass in extended precision over a flat snapshot.
Wide WideLoss(const std::vector<int>& sizes, const std::vector<double>& flat,
              std::span<const double> input, std::span<const double> target,
              LossKind kind) {
  std::vector<Wide> h(input.begin(), input.end());
  std::size_t pos = 0;
  for (std::size_t k = 0; k + 1 < sizes.size(); ++k) {
    const int fan_in = sizes[k];
    const int fan_out = sizes[k + 1];
    std::vector<Wide> z(fan_out, 0.0L);
    for (int r = 0; r < fan_in; ++r) {
      for (int c = 0; c < fan_out; ++c) {
        z[c] += h[r] * static_cast<Wide>(flat[pos + r * fan_out + c]);
      }
    }
    pos += static_cast<std::size_t>(fan_in) * fan_out;
    for (int c = 0; c < fan_out; ++c) z[c] += flat[pos + c];
    pos += fan_out;
    if (k + 2 < sizes.size()) {
      for (Wide& v : z) v = v > 0.0L ? v : 0.0L;
    }
    h = std::move(z);
  }
  Wide total = 0.0L;
  for (std::size_t i = 0; i < h.size(); ++i) {
    const Wide e = h[i] - static_cast<Wide>(target[i]);
    if (kind == LossKind::kMse) {
      total += e * e;
    } else {
      const Wide a = e < 0 ? -e : e;
      total += a <= 1.0L ? 0.5L * e * e : a - 0.5L;
    }
  }
  return total / static_cast<Wide>(h.size());
}

}  // namespace

double GradCheck(const DenseNet& net, std::span<const double> input,
                 std::span<const double> target, LossKind kind, double step) {
  const Vector out = net.Forward(input);
  const Vector g = VectorLossGrad(
      kind, std::span<const double>(out.data(), out.size()), target);
  DenseNet shell = net;
  shell.params() =
      net.Backward(input, std::span<const double>(g.data(), g.size()));
  const std::vector<double> analytic = shell.Flatten();

  std::vector<double> flat = net.Flatten();
  double worst = 0.0;
  for (std::size_t i = 0; i < flat.size(); ++i) {
    const double saved = flat[i];
    flat[i] = saved + step;
    const Wide up = WideLoss(net.layer_sizes(), flat, input, target, kind);
    const Wide hi = flat[i];
    flat[i] = saved - step;
    const Wide down = WideLoss(net.layer_sizes(), flat, input, target, kind);
    const Wide lo = flat[i];
    flat[i] = saved;
    const double numeric = static_cast<double>((up - down) / (hi - lo));
    const double diff = std::abs(analytic[i] - numeric);
    const double scale =
        std::max({std::abs(analytic[i]), std::abs(numeric), 1e-8});
    worst = std::max(worst, diff / scale);
  }
  return worst;
}

}  // namespace driftless::nn

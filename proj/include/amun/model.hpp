// Copyright 2026 The AMUN Toolkit Authors.
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

#ifndef AMUN_MODEL_HPP_
#define AMUN_MODEL_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "amun/dataset.hpp"
#include "amun/types.hpp"

namespace amun {

enum class ModelKind { kLogistic, kMlp };

// Fixed architecture: `widths` = {d, hidden..., m}. ReLU between layers, no
// activation on the output logits.
struct ModelSpec {
  ModelKind kind = ModelKind::kMlp;
  std::vector<int> widths;

  static ModelSpec Logistic(int input_dim, int num_classes);
  static ModelSpec Mlp(std::vector<int> widths);
  // Parses the ToString() form, e.g. "mlp:20,64,64,4" or "logistic:2,2".
  static ModelSpec Parse(const std::string& text);

  void Validate() const;
  int input_dim() const { return widths.front(); }
  int num_classes() const { return widths.back(); }
  std::string ToString() const;

  friend bool operator==(const ModelSpec&, const ModelSpec&) = default;
};

struct LayerOffsets {
  Eigen::Index weights = 0;  // out x in, row-major
  Eigen::Index bias = 0;
  int in = 0;
  int out = 0;
};

std::vector<LayerOffsets> LayerLayout(const ModelSpec& spec);
std::size_t ParameterCount(const ModelSpec& spec);

using RowMajorMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct ModelState {
  ModelSpec spec;
  Vector params;
  std::uint64_t rng_seed = 0;

  Eigen::Map<const RowMajorMatrix> Weights(std::size_t layer) const;
  Eigen::Map<RowMajorMatrix> Weights(std::size_t layer);
  Eigen::Map<const Vector> Bias(std::size_t layer) const;
  Eigen::Map<Vector> Bias(std::size_t layer);
  std::size_t num_layers() const { return spec.widths.size() - 1; }

  void Validate() const;
};

// Weights ~ U(-1/sqrt(fan_in), 1/sqrt(fan_in)), biases exactly zero.
ModelState InitParams(const ModelSpec& spec, std::uint64_t seed);

struct Prediction {
  Vector logits;
  Vector probs;
  int label = 0;
};

Prediction Forward(const ModelState& state, const Vector& x);
Matrix Logits(const ModelState& state, const Matrix& x);
int Predict(const ModelState& state, const Vector& x);
std::vector<int> Predict(const ModelState& state, const Matrix& x);

struct LossGrads {
  double loss = 0.0;  // sum of per-sample cross-entropy
  Vector grad_params;
  Matrix grad_inputs;  // n x d
};

LossGrads LossAndGrads(const ModelState& state, const Matrix& x,
                       std::span<const int> y);
LossGrads LossAndGrads(const ModelState& state, const LabeledDataset& batch);

// Gradient of the cross-entropy of (x, y) with respect to the input only.
Vector InputGradient(const ModelState& state, const Vector& x, int y);

// Per-sample cross-entropy.
Vector SampleLosses(const ModelState& state, const Matrix& x,
                    std::span<const int> y);
double Loss(const ModelState& state, const LabeledDataset& data);

double Accuracy(const ModelState& state, const LabeledDataset& data,
                const IndexSet& idx);
double Accuracy(const ModelState& state, const LabeledDataset& data);

// FNV-1a over the architecture and the raw parameter bytes.
std::uint64_t Fingerprint(const ModelState& state);

}  // namespace amun

#endif  // AMUN_MODEL_HPP_

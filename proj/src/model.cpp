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

#include "amun/model.hpp"

#include <cmath>
#include <cstring>
#include <random>
#include <sstream>

#include "amun/softmax.hpp"

namespace amun {

ModelSpec ModelSpec::Logistic(int input_dim, int num_classes) {
  ModelSpec spec{ModelKind::kLogistic, {input_dim, num_classes}};
  spec.Validate();
  return spec;
}

ModelSpec ModelSpec::Mlp(std::vector<int> widths) {
  ModelSpec spec{ModelKind::kMlp, std::move(widths)};
  spec.Validate();
  return spec;
}

ModelSpec ModelSpec::Parse(const std::string& text) {
  const auto colon = text.find(':');
  Require(colon != std::string::npos, "model spec '" + text + "' lacks ':'");
  const std::string kind = text.substr(0, colon);
  ModelSpec spec;
  if (kind == "logistic") {
    spec.kind = ModelKind::kLogistic;
  } else if (kind == "mlp") {
    spec.kind = ModelKind::kMlp;
  } else {
    Fail(ErrorCode::kInvalidArgument, "unknown model kind '" + kind + "'");
  }
  std::stringstream ss(text.substr(colon + 1));
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      spec.widths.push_back(std::stoi(item));
    } catch (const std::exception&) {
      Fail(ErrorCode::kInvalidArgument, "bad layer width '" + item + "'");
    }
  }
  spec.Validate();
  return spec;
}

void ModelSpec::Validate() const {
  Require(widths.size() >= 2, "model needs at least input and output widths");
  for (int w : widths) Require(w >= 1, "layer widths must be positive");
  Require(widths.back() >= 2, "model needs at least two output classes");
  if (kind == ModelKind::kLogistic) {
    Require(widths.size() == 2, "logistic model takes exactly two widths");
  }
}

std::string ModelSpec::ToString() const {
  std::string out = kind == ModelKind::kLogistic ? "logistic:" : "mlp:";
  for (std::size_t i = 0; i < widths.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(widths[i]);
  }
  return out;
}

std::vector<LayerOffsets> LayerLayout(const ModelSpec& spec) {
  std::vector<LayerOffsets> layout;
  Eigen::Index offset = 0;
  for (std::size_t l = 0; l + 1 < spec.widths.size(); ++l) {
    LayerOffsets lo;
    lo.in = spec.widths[l];
    lo.out = spec.widths[l + 1];
    lo.weights = offset;
    offset += static_cast<Eigen::Index>(lo.in) * lo.out;
    lo.bias = offset;
    offset += lo.out;
    layout.push_back(lo);
  }
  return layout;
}

std::size_t ParameterCount(const ModelSpec& spec) {
  std::size_t count = 0;
  for (std::size_t l = 0; l + 1 < spec.widths.size(); ++l) {
    count += static_cast<std::size_t>(spec.widths[l] + 1) * spec.widths[l + 1];
  }
  return count;
}

namespace {

LayerOffsets Layer(const ModelSpec& spec, std::size_t layer) {
  Require(layer + 1 < spec.widths.size(), "layer index out of range");
  Eigen::Index offset = 0;
  for (std::size_t l = 0; l < layer; ++l) {
    offset += static_cast<Eigen::Index>(spec.widths[l] + 1) * spec.widths[l + 1];
  }
  LayerOffsets lo;
  lo.in = spec.widths[layer];
  lo.out = spec.widths[layer + 1];
  lo.weights = offset;
  lo.bias = offset + static_cast<Eigen::Index>(lo.in) * lo.out;
  return lo;
}

}  // namespace

Eigen::Map<const RowMajorMatrix> ModelState::Weights(std::size_t layer) const {
  const LayerOffsets lo = Layer(spec, layer);
  return {params.data() + lo.weights, lo.out, lo.in};
}

Eigen::Map<RowMajorMatrix> ModelState::Weights(std::size_t layer) {
  const LayerOffsets lo = Layer(spec, layer);
  return {params.data() + lo.weights, lo.out, lo.in};
}

Eigen::Map<const Vector> ModelState::Bias(std::size_t layer) const {
  const LayerOffsets lo = Layer(spec, layer);
  return {params.data() + lo.bias, lo.out};
}

Eigen::Map<Vector> ModelState::Bias(std::size_t layer) {
  const LayerOffsets lo = Layer(spec, layer);
  return {params.data() + lo.bias, lo.out};
}

void ModelState::Validate() const {
  spec.Validate();
  Require(static_cast<std::size_t>(params.size()) == ParameterCount(spec),
          "parameter vector length " + std::to_string(params.size()) +
              " does not match " + spec.ToString(),
          ErrorCode::kDimensionMismatch);
  Require(params.allFinite(), "parameters contain NaN or Inf",
          ErrorCode::kDiverged);
}

ModelState InitParams(const ModelSpec& spec, std::uint64_t seed) {
  spec.Validate();
  ModelState state;
  state.spec = spec;
  state.rng_seed = seed;
  state.params = Vector::Zero(static_cast<Eigen::Index>(ParameterCount(spec)));
  std::mt19937_64 rng(seed);
  for (const LayerOffsets& lo : LayerLayout(spec)) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(lo.in));
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (Eigen::Index k = 0; k < static_cast<Eigen::Index>(lo.in) * lo.out; ++k) {
      state.params[lo.weights + k] = dist(rng);
    }
  }
  return state;
}

namespace {

// Forward pass keeping every pre-activation for backprop.
struct Trace {
  std::vector<Matrix> inputs;  // A_0 .. A_{L-1}
  std::vector<Matrix> pre;     // Z_1 .. Z_L
};

Matrix ForwardTrace(const ModelState& state, const Matrix& x, Trace* trace) {
  Require(x.cols() == state.spec.input_dim(),
          "input has " + std::to_string(x.cols()) + " features, model expects " +
              std::to_string(state.spec.input_dim()),
          ErrorCode::kDimensionMismatch);
  Matrix a = x;
  const std::size_t layers = state.num_layers();
  for (std::size_t l = 0; l < layers; ++l) {
    Matrix z = a * state.Weights(l).transpose();
    z.rowwise() += state.Bias(l).transpose();
    if (trace) {
      trace->inputs.push_back(std::move(a));
      trace->pre.push_back(z);
    }
    if (l + 1 < layers) {
      a = z.cwiseMax(0.0);
    } else {
      return z;
    }
  }
  return a;
}

}  // namespace

Matrix Logits(const ModelState& state, const Matrix& x) {
  return ForwardTrace(state, x, nullptr);
}

Prediction Forward(const ModelState& state, const Vector& x) {
  Require(x.allFinite(), "input contains NaN or Inf");
  Prediction p;
  p.logits = Logits(state, x.transpose()).row(0).transpose();
  p.probs = Softmax(p.logits);
  p.logits.maxCoeff(&p.label);
  return p;
}

int Predict(const ModelState& state, const Vector& x) {
  Eigen::Index label = 0;
  Logits(state, x.transpose()).row(0).maxCoeff(&label);
  return static_cast<int>(label);
}

std::vector<int> Predict(const ModelState& state, const Matrix& x) {
  const Matrix z = Logits(state, x);
  std::vector<int> out(static_cast<std::size_t>(z.rows()));
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    Eigen::Index label = 0;
    z.row(i).maxCoeff(&label);
    out[static_cast<std::size_t>(i)] = static_cast<int>(label);
  }
  return out;
}

LossGrads LossAndGrads(const ModelState& state, const Matrix& x,
                       std::span<const int> y) {
  Require(x.rows() >= 1, "loss_and_grads needs a non-empty batch");
  Require(static_cast<std::size_t>(x.rows()) == y.size(),
          "batch feature/label count mismatch", ErrorCode::kDimensionMismatch);
  Trace trace;
  const Matrix z = ForwardTrace(state, x, &trace);
  const Vector lse = RowLogSumExp(z);

  LossGrads out;
  out.loss = 0.0;
  Matrix delta = RowSoftmax(z);  // dL/dZ_L = P - Y
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    const int yi = y[static_cast<std::size_t>(i)];
    Require(yi >= 0 && yi < z.cols(), "label out of range");
    out.loss += lse[i] - z(i, yi);
    delta(i, yi) -= 1.0;
  }

  out.grad_params = Vector::Zero(state.params.size());
  const std::vector<LayerOffsets> layout = LayerLayout(state.spec);
  for (std::size_t l = layout.size(); l-- > 0;) {
    const LayerOffsets& lo = layout[l];
    Eigen::Map<RowMajorMatrix> gw(out.grad_params.data() + lo.weights, lo.out, lo.in);
    Eigen::Map<Vector> gb(out.grad_params.data() + lo.bias, lo.out);
    gw.noalias() = delta.transpose() * trace.inputs[l];
    gb = delta.colwise().sum().transpose();
    Matrix upstream = delta * state.Weights(l);
    if (l == 0) {
      out.grad_inputs = std::move(upstream);
    } else {
      delta = upstream.cwiseProduct(
          (trace.pre[l - 1].array() > 0.0).cast<double>().matrix());
    }
  }
  return out;
}

LossGrads LossAndGrads(const ModelState& state, const LabeledDataset& batch) {
  return LossAndGrads(state, batch.features, batch.labels);
}

Vector InputGradient(const ModelState& state, const Vector& x, int y) {
  Require(y >= 0 && y < state.spec.num_classes(), "label out of range");
  Trace trace;
  const Matrix z = ForwardTrace(state, x.transpose(), &trace);
  Matrix delta = RowSoftmax(z);
  delta(0, y) -= 1.0;
  for (std::size_t l = state.num_layers(); l-- > 0;) {
    Matrix upstream = delta * state.Weights(l);
    if (l == 0) return upstream.row(0).transpose();
    delta = upstream.cwiseProduct(
        (trace.pre[l - 1].array() > 0.0).cast<double>().matrix());
  }
  return Vector();
}

Vector SampleLosses(const ModelState& state, const Matrix& x,
                    std::span<const int> y) {
  Require(static_cast<std::size_t>(x.rows()) == y.size(),
          "feature/label count mismatch", ErrorCode::kDimensionMismatch);
  const Matrix z = Logits(state, x);
  Vector losses = RowLogSumExp(z);
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    losses[i] -= z(i, y[static_cast<std::size_t>(i)]);
  }
  return losses;
}

double Loss(const ModelState& state, const LabeledDataset& data) {
  return SampleLosses(state, data.features, data.labels).sum();
}

double Accuracy(const ModelState& state, const LabeledDataset& data,
                const IndexSet& idx) {
  Require(!idx.empty(), "accuracy needs a non-empty index set");
  return Accuracy(state, data.Subset(idx));
}

double Accuracy(const ModelState& state, const LabeledDataset& data) {
  Require(data.size() > 0, "accuracy needs a non-empty dataset");
  const std::vector<int> pred = Predict(state, data.features);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) correct += pred[i] == data.labels[i];
  return static_cast<double>(correct) / static_cast<double>(pred.size());
}

std::uint64_t Fingerprint(const ModelState& state) {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](const void* data, std::size_t len) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
      h ^= bytes[i];
      h *= 1099511628211ULL;
    }
  };
  const int kind = static_cast<int>(state.spec.kind);
  mix(&kind, sizeof(kind));
  for (int w : state.spec.widths) mix(&w, sizeof(w));
  mix(state.params.data(), sizeof(double) * static_cast<std::size_t>(state.params.size()));
  return h;
}

}  // namespace amun

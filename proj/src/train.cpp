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

#include "amun/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

namespace amun {

double StepSchedule::RateAt(double base, int epoch) const {
  if (period <= 0) return base;
  return base * std::pow(factor, epoch / period);
}

void StepSchedule::Validate() const {
  Require(period >= 0, "scheduler period must be >= 0");
  if (period > 0) {
    Require(factor > 0.0 && factor <= 1.0, "scheduler factor must be in (0, 1]");
  }
}

void TrainConfig::Validate() const {
  Require(learning_rate > 0.0, "learning_rate must be > 0");
  Require(epochs >= 1, "epochs must be >= 1");
  Require(batch_size >= 1, "batch_size must be >= 1");
  Require(weight_decay >= 0.0, "weight_decay must be >= 0");
  scheduler.Validate();
}

void RunSgd(ModelState* state, const LabeledDataset& data,
            const SgdOptions& options) {
  Require(options.epochs >= 0, "epochs must be >= 0");
  Require(options.batch_size >= 1, "batch_size must be >= 1");
  if (options.epochs == 0) return;
  Require(data.size() > 0, "cannot run SGD on an empty dataset");
  const Eigen::Index p = state->params.size();
  Eigen::Array<bool, Eigen::Dynamic, 1> mask;
  if (options.mask != nullptr) {
    Require(static_cast<Eigen::Index>(options.mask->size()) == p,
            "mask length does not match parameter count",
            ErrorCode::kDimensionMismatch);
    mask.resize(p);
    for (Eigen::Index k = 0; k < p; ++k) mask[k] = (*options.mask)[static_cast<std::size_t>(k)];
    if (!mask.any()) return;
  }

  std::mt19937_64 rng(options.seed);
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const std::size_t batch = static_cast<std::size_t>(options.batch_size);
  const double sign = options.ascent ? -1.0 : 1.0;

  Matrix xb;
  std::vector<int> yb;
  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    const double lr = options.scheduler.RateAt(options.learning_rate, epoch);
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0, b = 0; start < order.size(); start += batch, ++b) {
      const std::size_t count = std::min(batch, order.size() - start);
      xb.resize(static_cast<Eigen::Index>(count), data.features.cols());
      yb.resize(count);
      for (std::size_t r = 0; r < count; ++r) {
        xb.row(static_cast<Eigen::Index>(r)) =
            data.features.row(static_cast<Eigen::Index>(order[start + r]));
        yb[r] = data.labels[order[start + r]];
      }
      const LossGrads lg = LossAndGrads(*state, xb, yb);
      if (!std::isfinite(lg.loss) || !lg.grad_params.allFinite()) {
        Fail(ErrorCode::kDiverged, "non-finite loss at epoch " +
                                       std::to_string(epoch) + " batch " +
                                       std::to_string(b));
      }
      Vector step = sign * lg.grad_params / static_cast<double>(count);
      if (options.weight_decay > 0.0) step += options.weight_decay * state->params;
      if (options.l1_lambda > 0.0) {
        step += options.l1_lambda * state->params.cwiseSign();
      }
      if (options.mask != nullptr) {
        step = mask.select(step, Vector::Zero(p));
      }
      state->params -= lr * step;
    }
  }
  if (!state->params.allFinite()) {
    Fail(ErrorCode::kDiverged, "parameters became non-finite during SGD");
  }
}

ModelState Train(const ModelSpec& spec, const LabeledDataset& data,
                 const IndexSet& idx, const TrainConfig& cfg,
                 TrainStats* stats) {
  Require(!idx.empty(), "train needs a non-empty index set");
  cfg.Validate();
  const LabeledDataset subset = data.Subset(idx);
  ModelState state = InitParams(spec, cfg.seed);
  SgdOptions options;
  options.learning_rate = cfg.learning_rate;
  options.epochs = cfg.epochs;
  options.batch_size = cfg.batch_size;
  options.scheduler = cfg.scheduler;
  options.weight_decay = cfg.weight_decay;
  options.seed = cfg.seed ^ 0x9e3779b97f4a7c15ULL;
  RunSgd(&state, subset, options);
  if (stats != nullptr) {
    stats->final_loss = Loss(state, subset) / static_cast<double>(subset.size());
    stats->final_accuracy = Accuracy(state, subset);
  }
  return state;
}

}  // namespace amun

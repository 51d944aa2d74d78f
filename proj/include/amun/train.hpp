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

#ifndef AMUN_TRAIN_HPP_
#define AMUN_TRAIN_HPP_

#include <cstdint>
#include <vector>

#include "amun/dataset.hpp"
#include "amun/model.hpp"

namespace amun {

// Multiplies the learning rate by `factor` every `period` epochs; period 0
// means a constant rate.
struct StepSchedule {
  int period = 0;
  double factor = 1.0;

  double RateAt(double base, int epoch) const;
  void Validate() const;
};

struct TrainConfig {
  double learning_rate = 0.1;
  int epochs = 100;
  int batch_size = 64;
  StepSchedule scheduler;
  double weight_decay = 0.0;
  std::uint64_t seed = 0;

  void Validate() const;
};

struct TrainStats {
  double final_loss = 0.0;  // mean per-sample cross-entropy over the train set
  double final_accuracy = 0.0;
};

// Knobs for the shared mini-batch SGD loop used by training and every
// fine-tuning based unlearning method. The loss is an unnormalized sum; the
// step uses the batch gradient divided by the batch size.
struct SgdOptions {
  double learning_rate = 0.1;
  int epochs = 1;
  int batch_size = 64;
  StepSchedule scheduler;
  double weight_decay = 0.0;
  double l1_lambda = 0.0;
  bool ascent = false;  // maximize the loss instead (gradient ascent)
  const std::vector<bool>* mask = nullptr;  // update only where true
  std::uint64_t seed = 0;
};

// Throws kDiverged naming the epoch and batch when the loss turns non-finite.
void RunSgd(ModelState* state, const LabeledDataset& data,
            const SgdOptions& options);

ModelState Train(const ModelSpec& spec, const LabeledDataset& data,
                 const IndexSet& idx, const TrainConfig& cfg,
                 TrainStats* stats = nullptr);

}  // namespace amun

#endif  // AMUN_TRAIN_HPP_

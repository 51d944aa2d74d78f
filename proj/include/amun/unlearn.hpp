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

#ifndef AMUN_UNLEARN_HPP_
#define AMUN_UNLEARN_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "amun/attacks.hpp"
#include "amun/dataset.hpp"
#include "amun/mia.hpp"
#include "amun/model.hpp"
#include "amun/train.hpp"

namespace amun {

enum class UnlearnMethod {
  kAmun,
  kAmunSalun,
  kFt,
  kRl,
  kGa,
  kBs,
  kL1Sparse,
  kSalun,
  kRetrain,
};

std::string_view MethodName(UnlearnMethod method);
UnlearnMethod ParseMethod(std::string_view name);
bool NeedsAdvSet(UnlearnMethod method);
bool NeedsRetainAccess(UnlearnMethod method);

struct UnlearnConfig {
  UnlearnMethod method = UnlearnMethod::kAmun;
  bool has_retain_access = true;
  int epochs = 10;
  double learning_rate = 0.01;
  int batch_size = 64;
  StepSchedule scheduler;
  double salun_ratio = 0.5;
  double l1_lambda = 0.0;
  // Fine-tune on D_R u D_A (or D_A alone) instead of also including D_F.
  // Applied when forced here or when forget_fraction >= the threshold.
  bool large_forget_variant = false;
  double large_forget_threshold = 0.5;
  // Accept an AdvSet built on a different model.
  bool allow_transfer = false;
  // FGSM step for the BS baseline; 0 picks 1% of the forget set's median
  // nearest-neighbor distance.
  double bs_eps = 0.0;
  // Used by kRetrain only.
  TrainConfig retrain;
  std::uint64_t seed = 0;

  void Validate() const;
};

struct SaliencyMask {
  std::vector<bool> bits;  // aligned with ModelState::params
  double ratio = 0.0;      // fraction of true bits
};

// Sample ids of adversarial rows: -(orig_id + 1), disjoint from data ids >= 0.
SampleId AdversarialId(SampleId orig_id);

// D_A as a dataset labeled with the source model's predictions.
LabeledDataset AdvSetAsDataset(const AdvSet& adv, int num_classes);

LabeledDataset AssembleFinetuneSet(const DatasetView& data, const SplitSpec& split,
                                   const AdvSet& adv, const UnlearnConfig& cfg,
                                   std::uint64_t target_fingerprint);

// Top `ratio` share of parameters by |grad of the forget-set loss|; ties go
// to the lower parameter index.
SaliencyMask SalunMask(const ModelState& state, const DatasetView& data,
                       const IndexSet& forget_idx, double ratio);

ModelState FineTune(ModelState state, const LabeledDataset& dataset,
                    const UnlearnConfig& cfg, const SaliencyMask* mask = nullptr,
                    bool ascent = false);

// Wrong labels drawn uniformly from {0..m-1} \ {y}.
std::vector<int> RandomWrongLabels(std::span<const int> labels, int num_classes,
                                   std::uint64_t seed);

ModelState Unlearn(const ModelState& state, const DatasetView& data,
                   const SplitSpec& split, const AdvSet* adv,
                   const UnlearnConfig& cfg);

enum class AblationKind { kAdvL, kRl, kARl, kARs };
std::string_view AblationName(AblationKind kind);
AblationKind ParseAblation(std::string_view name);

// Substitutes for D_A used to test what makes adversarial fine-tuning safe:
// AdvL = (x, y_adv); RL = (x, y' not in {y, y_adv});
// A_RL = (x_adv, y' not in {y, y_adv}); A_RS = (x on the delta-sphere, y_adv).
LabeledDataset AblationSet(AblationKind kind, const DatasetView& data,
                           const IndexSet& forget_idx, const AdvSet& adv,
                           std::uint64_t seed);

enum class AdvMode { kAdaptive, kPrecomputed };

struct ContinuousStep {
  ModelState state;
  EvalReport report;
  SplitSpec eval_split;  // retain shrunk, forget = everything forgotten so far
  std::optional<std::uint64_t> adv_fingerprint;
  std::uint64_t input_fingerprint = 0;  // model the step started from
};

// Applies consecutive forget requests to one model. Adaptive mode rebuilds
// D_A on the current model before every step; precomputed mode builds every
// request's D_A once on the initial model.
std::vector<ContinuousStep> ContinuousUnlearn(
    const ModelState& state, const LabeledDataset& train, const LabeledDataset& test,
    const IndexSet& test_idx, const std::vector<IndexSet>& requests,
    const UnlearnConfig& cfg, const AttackConfig& attack, AdvMode mode,
    const ShadowEnsemble* ensemble = nullptr, const EvalOptions& eval_options = {});

}  // namespace amun

#endif  // AMUN_UNLEARN_HPP_

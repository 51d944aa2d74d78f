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

#include "amun/unlearn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>

namespace amun {

namespace {

struct MethodEntry {
  UnlearnMethod method;
  std::string_view name;
};

constexpr MethodEntry kMethods[] = {
    {UnlearnMethod::kAmun, "amun"},     {UnlearnMethod::kAmunSalun, "amun_salun"},
    {UnlearnMethod::kFt, "ft"},         {UnlearnMethod::kRl, "rl"},
    {UnlearnMethod::kGa, "ga"},         {UnlearnMethod::kBs, "bs"},
    {UnlearnMethod::kL1Sparse, "l1_sparse"}, {UnlearnMethod::kSalun, "salun"},
    {UnlearnMethod::kRetrain, "retrain"},
};

bool IsSalunFamily(UnlearnMethod m) {
  return m == UnlearnMethod::kSalun || m == UnlearnMethod::kAmunSalun;
}

bool UseLargeForgetVariant(const UnlearnConfig& cfg, const SplitSpec& split) {
  return cfg.large_forget_variant || split.forget_fraction >= cfg.large_forget_threshold;
}

void CheckAdvAlignment(const DatasetView& data, const IndexSet& forget_idx,
                       const AdvSet& adv) {
  Require(adv.records.size() == forget_idx.size(),
          "AdvSet has " + std::to_string(adv.records.size()) +
              " records but the forget set has " + std::to_string(forget_idx.size()));
  for (std::size_t r = 0; r < forget_idx.size(); ++r) {
    Require(adv.records[r].orig_id == data.Id(forget_idx[r]),
            "AdvSet record " + std::to_string(r) + " (id " +
                std::to_string(adv.records[r].orig_id) +
                ") does not match forget sample id " +
                std::to_string(data.Id(forget_idx[r])));
  }
}

LabeledDataset Relabeled(LabeledDataset data, std::vector<int> labels) {
  data.labels = std::move(labels);
  return data;
}

// One FGSM step of size eps from x; the new label is the highest-scoring
// class other than y at the stepped point.
int BoundaryShrinkLabel(const ModelState& state, const Vector& x, int y, double eps) {
  const Vector stepped = x + eps * GradientSign(InputGradient(state, x, y));
  Vector logits = Logits(state, stepped.transpose()).row(0).transpose();
  logits[y] = -std::numeric_limits<double>::infinity();
  Eigen::Index label = 0;
  logits.maxCoeff(&label);
  return static_cast<int>(label);
}

}  // namespace

std::string_view MethodName(UnlearnMethod method) {
  for (const auto& e : kMethods) {
    if (e.method == method) return e.name;
  }
  return "unknown";
}

UnlearnMethod ParseMethod(std::string_view name) {
  for (const auto& e : kMethods) {
    if (e.name == name) return e.method;
  }
  Fail(ErrorCode::kInvalidArgument, "unknown unlearning method '" + std::string(name) + "'");
}

bool NeedsAdvSet(UnlearnMethod method) {
  return method == UnlearnMethod::kAmun || method == UnlearnMethod::kAmunSalun;
}

bool NeedsRetainAccess(UnlearnMethod method) {
  return method == UnlearnMethod::kFt || method == UnlearnMethod::kL1Sparse ||
         method == UnlearnMethod::kRetrain;
}

void UnlearnConfig::Validate() const {
  Require(epochs >= 0, "unlearning epochs must be >= 0");
  Require(learning_rate >= 0.0, "unlearning learning_rate must be >= 0");
  Require(batch_size >= 1, "unlearning batch_size must be >= 1");
  scheduler.Validate();
  if (IsSalunFamily(method)) {
    Require(salun_ratio >= 0.1 && salun_ratio <= 0.9, "salun_ratio must be in [0.1, 0.9]");
  }
  Require(l1_lambda >= 0.0, "l1_lambda must be >= 0");
  Require(method == UnlearnMethod::kL1Sparse || l1_lambda == 0.0,
          "l1_lambda is only meaningful for l1_sparse");
  Require(bs_eps >= 0.0, "bs_eps must be >= 0");
  if (!has_retain_access) {
    Require(!NeedsRetainAccess(method),
            std::string("method '") + std::string(MethodName(method)) +
                "' requires access to the retain set");
  }
}

SampleId AdversarialId(SampleId orig_id) { return -(orig_id + 1); }

LabeledDataset AdvSetAsDataset(const AdvSet& adv, int num_classes) {
  LabeledDataset out;
  out.num_classes = num_classes;
  if (adv.records.empty()) return out;
  out.features.resize(static_cast<Eigen::Index>(adv.records.size()),
                      adv.records.front().x_adv.size());
  for (std::size_t r = 0; r < adv.records.size(); ++r) {
    const AdvRecord& rec = adv.records[r];
    Require(rec.y_adv != rec.y_true, "adversarial record carries its true label");
    out.features.row(static_cast<Eigen::Index>(r)) = rec.x_adv.transpose();
    out.labels.push_back(rec.y_adv);
    out.ids.push_back(AdversarialId(rec.orig_id));
  }
  return out;
}

LabeledDataset AssembleFinetuneSet(const DatasetView& data, const SplitSpec& split,
                                   const AdvSet& adv, const UnlearnConfig& cfg,
                                   std::uint64_t target_fingerprint) {
  CheckAdvAlignment(data, split.forget_idx, adv);
  if (!cfg.allow_transfer) {
    Require(adv.source_fingerprint == target_fingerprint,
            "AdvSet was built on a different model; enable transfer mode to use it",
            ErrorCode::kFingerprintMismatch);
  }
  const bool large = UseLargeForgetVariant(cfg, split);
  LabeledDataset out = AdvSetAsDataset(adv, data.num_classes());
  if (!large) out = Concat(data.Gather(split.forget_idx), out);
  if (cfg.has_retain_access) out = Concat(data.Gather(split.retain_idx), out);
  return out;
}

SaliencyMask SalunMask(const ModelState& state, const DatasetView& data,
                       const IndexSet& forget_idx, double ratio) {
  Require(ratio >= 0.1 && ratio <= 0.9, "salun ratio must be in [0.1, 0.9]");
  Require(!forget_idx.empty(), "salun mask needs a non-empty forget set");
  const Vector magnitude = LossAndGrads(state, data.Gather(forget_idx)).grad_params.cwiseAbs();
  Require(magnitude.maxCoeff() > 0.0, "forget-set gradient is zero; mask undefined",
          ErrorCode::kUndefined);
  const std::size_t p = static_cast<std::size_t>(magnitude.size());
  std::vector<std::size_t> order(p);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return magnitude[static_cast<Eigen::Index>(a)] > magnitude[static_cast<Eigen::Index>(b)];
  });
  const auto keep = static_cast<std::size_t>(std::llround(ratio * static_cast<double>(p)));
  SaliencyMask mask;
  mask.bits.assign(p, false);
  for (std::size_t k = 0; k < keep; ++k) mask.bits[order[k]] = true;
  mask.ratio = static_cast<double>(keep) / static_cast<double>(p);
  return mask;
}

ModelState FineTune(ModelState state, const LabeledDataset& dataset,
                    const UnlearnConfig& cfg, const SaliencyMask* mask, bool ascent) {
  if (cfg.epochs == 0) return state;
  Require(dataset.size() > 0, "fine-tuning dataset is empty");
  SgdOptions options;
  options.learning_rate = cfg.learning_rate;
  options.epochs = cfg.epochs;
  options.batch_size = cfg.batch_size;
  options.scheduler = cfg.scheduler;
  options.l1_lambda = cfg.method == UnlearnMethod::kL1Sparse ? cfg.l1_lambda : 0.0;
  options.ascent = ascent;
  options.mask = mask != nullptr ? &mask->bits : nullptr;
  options.seed = cfg.seed;
  RunSgd(&state, dataset, options);
  return state;
}

std::vector<int> RandomWrongLabels(std::span<const int> labels, int num_classes,
                                   std::uint64_t seed) {
  Require(num_classes >= 2, "random wrong labels need at least two classes");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pick(0, num_classes - 2);
  std::vector<int> out;
  out.reserve(labels.size());
  for (int y : labels) {
    const int r = pick(rng);
    out.push_back(r >= y ? r + 1 : r);
  }
  return out;
}

ModelState Unlearn(const ModelState& state, const DatasetView& data,
                   const SplitSpec& split, const AdvSet* adv,
                   const UnlearnConfig& cfg) {
  cfg.Validate();
  Require(!split.forget_idx.empty(), "unlearning needs a non-empty forget set");
  if (NeedsAdvSet(cfg.method)) {
    Require(adv != nullptr, std::string("method '") + std::string(MethodName(cfg.method)) +
                                "' needs an AdvSet");
  }
  auto with_retain = [&](LabeledDataset forget_part) {
    if (!cfg.has_retain_access) return forget_part;
    return Concat(data.Gather(split.retain_idx), forget_part);
  };

  switch (cfg.method) {
    case UnlearnMethod::kRetrain: {
      // Read D_R through the view so the access audit sees it.
      const LabeledDataset retain = data.Gather(split.retain_idx);
      IndexSet all(retain.size());
      std::iota(all.begin(), all.end(), std::size_t{0});
      return Train(state.spec, retain, all, cfg.retrain);
    }
    case UnlearnMethod::kAmun:
      return FineTune(state, AssembleFinetuneSet(data, split, *adv, cfg, Fingerprint(state)), cfg);
    case UnlearnMethod::kAmunSalun: {
      const SaliencyMask mask = SalunMask(state, data, split.forget_idx, cfg.salun_ratio);
      return FineTune(state, AssembleFinetuneSet(data, split, *adv, cfg, Fingerprint(state)),
                      cfg, &mask);
    }
    case UnlearnMethod::kFt:
    case UnlearnMethod::kL1Sparse:
      return FineTune(state, data.Gather(split.retain_idx), cfg);
    case UnlearnMethod::kGa:
      return FineTune(state, data.Gather(split.forget_idx), cfg, nullptr, /*ascent=*/true);
    case UnlearnMethod::kRl:
    case UnlearnMethod::kSalun: {
      LabeledDataset forget = data.Gather(split.forget_idx);
      std::vector<int> wrong = RandomWrongLabels(forget.labels, forget.num_classes, cfg.seed);
      LabeledDataset set = with_retain(Relabeled(std::move(forget), std::move(wrong)));
      if (cfg.method == UnlearnMethod::kRl) return FineTune(state, set, cfg);
      const SaliencyMask mask = SalunMask(state, data, split.forget_idx, cfg.salun_ratio);
      return FineTune(state, set, cfg, &mask);
    }
    case UnlearnMethod::kBs: {
      LabeledDataset forget = data.Gather(split.forget_idx);
      IndexSet all(forget.size());
      std::iota(all.begin(), all.end(), std::size_t{0});
      const double eps = cfg.bs_eps > 0.0 ? cfg.bs_eps : DefaultEpsInit(forget, all);
      std::vector<int> labels;
      for (std::size_t i = 0; i < forget.size(); ++i) {
        labels.push_back(BoundaryShrinkLabel(
            state, forget.features.row(static_cast<Eigen::Index>(i)).transpose(),
            forget.labels[i], eps));
      }
      return FineTune(state, with_retain(Relabeled(std::move(forget), std::move(labels))), cfg);
    }
  }
  Fail(ErrorCode::kInvalidArgument, "unhandled unlearning method");
}

std::string_view AblationName(AblationKind kind) {
  switch (kind) {
    case AblationKind::kAdvL: return "AdvL";
    case AblationKind::kRl: return "RL";
    case AblationKind::kARl: return "A_RL";
    case AblationKind::kARs: return "A_RS";
  }
  return "unknown";
}

AblationKind ParseAblation(std::string_view name) {
  for (AblationKind k : {AblationKind::kAdvL, AblationKind::kRl, AblationKind::kARl,
                         AblationKind::kARs}) {
    if (AblationName(k) == name) return k;
  }
  Fail(ErrorCode::kInvalidArgument, "unknown ablation kind '" + std::string(name) + "'");
}

LabeledDataset AblationSet(AblationKind kind, const DatasetView& data,
                           const IndexSet& forget_idx, const AdvSet& adv,
                           std::uint64_t seed) {
  Require(!forget_idx.empty(), "ablation set needs a non-empty forget set");
  CheckAdvAlignment(data, forget_idx, adv);
  const int m = data.num_classes();
  LabeledDataset out = data.Gather(forget_idx);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (std::size_t r = 0; r < forget_idx.size(); ++r) {
    const AdvRecord& rec = adv.records[r];
    const auto row = static_cast<Eigen::Index>(r);
    switch (kind) {
      case AblationKind::kAdvL:
        out.labels[r] = rec.y_adv;
        break;
      case AblationKind::kRl:
      case AblationKind::kARl: {
        std::vector<int> allowed;
        for (int c = 0; c < m; ++c) {
          if (c != rec.y_true && c != rec.y_adv) allowed.push_back(c);
        }
        Require(!allowed.empty(), "no label differs from both y and y_adv with " +
                                      std::to_string(m) + " classes");
        std::uniform_int_distribution<std::size_t> pick(0, allowed.size() - 1);
        out.labels[r] = allowed[pick(rng)];
        if (kind == AblationKind::kARl) {
          out.features.row(row) = rec.x_adv.transpose();
          out.ids[r] = AdversarialId(rec.orig_id);
        }
        break;
      }
      case AblationKind::kARs: {
        Vector u(out.features.cols());
        do {
          for (Eigen::Index k = 0; k < u.size(); ++k) u[k] = normal(rng);
        } while (u.norm() == 0.0);
        u.normalize();
        out.features.row(row) += rec.delta * u.transpose();
        out.labels[r] = rec.y_adv;
        out.ids[r] = AdversarialId(rec.orig_id);
        break;
      }
    }
  }
  return out;
}

std::vector<ContinuousStep> ContinuousUnlearn(
    const ModelState& state, const LabeledDataset& train, const LabeledDataset& test,
    const IndexSet& test_idx, const std::vector<IndexSet>& requests,
    const UnlearnConfig& cfg, const AttackConfig& attack, AdvMode mode,
    const ShadowEnsemble* ensemble, const EvalOptions& eval_options) {
  Require(!requests.empty(), "continuous unlearning needs at least one request");
  std::vector<char> forgotten(train.size(), 0);
  for (const IndexSet& req : requests) {
    Require(!req.empty(), "empty unlearning request");
    for (std::size_t i : req) {
      Require(i < train.size(), "request index out of range");
      Require(!forgotten[i], "unlearning requests overlap at index " + std::to_string(i));
      forgotten[i] = 1;
    }
  }
  std::fill(forgotten.begin(), forgotten.end(), 0);

  const bool uses_adv = NeedsAdvSet(cfg.method);
  std::vector<AdvSet> precomputed;
  if (uses_adv && mode == AdvMode::kPrecomputed) {
    for (const IndexSet& req : requests) {
      precomputed.push_back(BuildAdversarialSet(state, attack, train, req));
    }
  }

  std::vector<ContinuousStep> steps;
  ModelState current = state;
  IndexSet cumulative;
  for (std::size_t k = 0; k < requests.size(); ++k) {
    for (std::size_t i : requests[k]) forgotten[i] = 1;
    cumulative.insert(cumulative.end(), requests[k].begin(), requests[k].end());
    SplitSpec step_split;
    for (std::size_t i = 0; i < train.size(); ++i) {
      if (!forgotten[i]) step_split.retain_idx.push_back(i);
    }
    step_split.forget_idx = requests[k];
    step_split.test_idx = test_idx;
    step_split.forget_fraction =
        static_cast<double>(requests[k].size()) /
        static_cast<double>(requests[k].size() + step_split.retain_idx.size());

    ContinuousStep step;
    step.input_fingerprint = Fingerprint(current);
    UnlearnConfig step_cfg = cfg;
    step_cfg.seed = cfg.seed + k;
    AdvSet adv;
    if (uses_adv) {
      if (mode == AdvMode::kAdaptive) {
        adv = BuildAdversarialSet(current, attack, train, requests[k]);
      } else {
        adv = precomputed[k];
        step_cfg.allow_transfer = true;
      }
      step.adv_fingerprint = adv.source_fingerprint;
    }
    current = Unlearn(current, train, step_split, uses_adv ? &adv : nullptr, step_cfg);

    step.eval_split = step_split;
    step.eval_split.forget_idx = cumulative;
    step.eval_split.forget_fraction =
        static_cast<double>(cumulative.size()) / static_cast<double>(train.size());
    step.report = Evaluate(current, train, test, step.eval_split, ensemble, nullptr,
                           eval_options);
    step.state = current;
    steps.push_back(std::move(step));
  }
  return steps;
}

}  // namespace amun

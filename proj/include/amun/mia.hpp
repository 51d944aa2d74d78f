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

#ifndef AMUN_MIA_HPP_
#define AMUN_MIA_HPP_

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "amun/dataset.hpp"
#include "amun/model.hpp"
#include "amun/train.hpp"

namespace amun {

inline constexpr double kConfidenceClip = 1e-12;

// Logit scaling of a true-class probability: log(p / (1 - p)), with p first
// clipped to [1e-12, 1 - 1e-12].
template <typename Scalar>
Scalar PhiScale(Scalar p) {
  const Scalar clipped = std::clamp<Scalar>(p, Scalar(kConfidenceClip),
                                            Scalar(1) - Scalar(kConfidenceClip));
  return std::log(clipped / (Scalar(1) - clipped));
}

template <typename Scalar>
Scalar InversePhiScale(Scalar phi) {
  return Scalar(1) / (Scalar(1) + std::exp(-phi));
}

struct TaylorSoftmaxConfig {
  double temperature = 2.0;
  int order = 2;
  double margin = 0.6;

  void Validate() const;
};

// Soft-margin Taylor softmax share of the true class.
template <typename Derived>
double SmTaylorSoftmax(const Eigen::MatrixBase<Derived>& logits, int true_class,
                       double temperature, int order, double margin) {
  double total = 0.0;
  double own = 0.0;
  for (Eigen::Index c = 0; c < logits.size(); ++c) {
    double z = static_cast<double>(logits(c));
    if (c == true_class) z -= margin;
    z /= temperature;
    double term = 1.0;
    double value = 1.0;
    for (int k = 1; k <= order; ++k) {
      term *= z / k;
      value += term;
    }
    // An even-order truncation of exp is strictly positive.
    assert(value > 0.0);
    total += value;
    if (c == true_class) own = value;
  }
  return own / total;
}

inline double SmTaylorSoftmax(const Vector& logits, int true_class,
                              const TaylorSoftmaxConfig& cfg) {
  return SmTaylorSoftmax(logits, true_class, cfg.temperature, cfg.order, cfg.margin);
}

// SM-Taylor confidence of the model on every row of `data`.
Vector TaylorConfidences(const ModelState& state, const LabeledDataset& data,
                         const TaylorSoftmaxConfig& cfg);

// Softmax probability of the true label for every row.
Vector TrueClassProbabilities(const ModelState& state, const LabeledDataset& data);

enum class Membership { kRetain, kForget, kTest };
std::string_view MembershipName(Membership m);

struct ConfidenceRecord {
  SampleId sample_id = 0;
  double phi = 0.0;
  double raw_p = 0.0;
  Membership membership = Membership::kTest;
};

std::vector<ConfidenceRecord> ConfidenceDump(const ModelState& state,
                                             const LabeledDataset& train,
                                             const LabeledDataset& test,
                                             const SplitSpec& split);
// Columns: sample_id,membership,raw_p,phi
void WriteConfidenceCsv(std::ostream& out, std::span<const ConfidenceRecord> records);

// K reference models over a pool of samples; every sample is in exactly
// K/2 of them.
struct ShadowEnsemble {
  std::vector<ModelState> models;
  std::vector<std::vector<bool>> inclusion;  // K x n, rows = models
  LabeledDataset pool;
  IndexSet population_idx;  // reference population Z, columns of the pool
  TaylorSoftmaxConfig taylor;
  Matrix reference_conf;  // K x n SM-Taylor confidences, filled by Finalize()

  std::size_t size() const { return models.size(); }
  std::optional<std::size_t> ColumnOf(SampleId id) const;
  // Recomputes reference_conf and the id index; call after editing members.
  void Finalize();

 private:
  std::unordered_map<SampleId, std::size_t> column_of_;
};

// Seeded per-column assignment: each column gets K/2 ones at positions chosen
// by a shuffle of the K model slots.
std::vector<std::vector<bool>> BalancedInclusion(std::size_t k, std::size_t n,
                                                 std::uint64_t seed);

ShadowEnsemble TrainShadowEnsemble(const ModelSpec& spec, const LabeledDataset& pool,
                                   std::size_t k, const TrainConfig& cfg,
                                   std::uint64_t seed,
                                   const TaylorSoftmaxConfig& taylor = {});

// Pairwise likelihood-ratio membership score against reference models.
// ratio(x) = conf_target(x) / mean conf over x's OUT models; the score of x
// is the share of population samples z (z != x) with
// ratio(x) / ratio(z) >= gamma.
class RmiaScorer {
 public:
  RmiaScorer(const ModelState& target, const ShadowEnsemble& ensemble, double gamma);

  double Ratio(std::size_t column) const { return ratios_[column]; }
  double ScoreColumn(std::size_t column) const;
  double Score(SampleId id) const;
  std::vector<double> Scores(std::span<const SampleId> ids) const;

 private:
  const ShadowEnsemble* ensemble_;
  double gamma_;
  std::vector<double> ratios_;
  std::vector<double> sorted_population_;
  std::vector<bool> in_population_;
};

double RmiaScore(const ModelState& target, const ShadowEnsemble& ensemble,
                 SampleId x_id, double gamma);

struct AucCounts {
  std::uint64_t wins = 0;
  std::uint64_t ties = 0;
  std::uint64_t pairs = 0;
};

// Mann-Whitney counts via a merged rank sweep, O((p + n) log(p + n)).
AucCounts AucPairCounts(std::span<const double> pos, std::span<const double> neg);

// (wins + 0.5 ties) / pairs.
double Auc(std::span<const double> pos, std::span<const double> neg);

struct ThresholdFit {
  double threshold = 0.0;  // member iff score >= threshold
  double balanced_accuracy = 0.0;
  bool degenerate = false;  // every score identical
};

// Threshold maximizing balanced accuracy of members vs non-members; ties go
// to the lowest threshold.
ThresholdFit FitBalancedThreshold(std::span<const double> members,
                                  std::span<const double> non_members);

struct MisResult {
  double mis = 0.0;  // percent of forget samples classified as members
  ThresholdFit fit;
};

MisResult MisScore(const ModelState& target, const LabeledDataset& train,
                   const LabeledDataset& test, const SplitSpec& split);

struct EvalReport {
  double unlearn_acc = 0.0;
  double retain_acc = 0.0;
  double test_acc = 0.0;
  double mis = 0.0;
  bool mis_degenerate = false;
  std::optional<double> ft_auc;
  std::optional<double> fr_auc;
  std::optional<double> avg_gap;  // percentage points

  // fr_auc - ft_auc; requires both AUCs.
  std::optional<double> auc_gap() const;
};

// Mean of the four absolute differences against a reference, everything on
// the percent scale. The MIA term is FT AUC when both reports carry it, MIS
// otherwise.
double AverageGap(const EvalReport& report, const EvalReport& reference);

struct EvalOptions {
  double gamma = 2.0;
};

EvalReport Evaluate(const ModelState& target, const LabeledDataset& train,
                    const LabeledDataset& test, const SplitSpec& split,
                    const ShadowEnsemble* ensemble = nullptr,
                    const EvalReport* retrain_reference = nullptr,
                    const EvalOptions& options = {});

// CSV with fixed columns:
// method,seed,fraction,access,unlearn_acc,retain_acc,test_acc,mis,ft_auc,fr_auc,avg_gap
std::string EvalCsvHeader();
std::string EvalCsvRow(const std::string& method, std::uint64_t seed, double fraction,
                       const std::string& access, const EvalReport& report);

}  // namespace amun

#endif  // AMUN_MIA_HPP_

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

#include "amun/mia.hpp"

#include <limits>
#include <numeric>
#include <ostream>
#include <random>

#include "amun/base64.hpp"
#include "amun/softmax.hpp"

namespace amun {

void TaylorSoftmaxConfig::Validate() const {
  Require(temperature > 0.0, "SM-Taylor temperature must be > 0");
  Require(order >= 2 && order % 2 == 0, "SM-Taylor order must be even and >= 2");
}

Vector TaylorConfidences(const ModelState& state, const LabeledDataset& data,
                         const TaylorSoftmaxConfig& cfg) {
  cfg.Validate();
  const Matrix z = Logits(state, data.features);
  Vector conf(z.rows());
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    conf[i] = SmTaylorSoftmax(z.row(i), data.labels[static_cast<std::size_t>(i)],
                              cfg.temperature, cfg.order, cfg.margin);
  }
  return conf;
}

Vector TrueClassProbabilities(const ModelState& state, const LabeledDataset& data) {
  const Matrix p = RowSoftmax(Logits(state, data.features));
  Vector out(p.rows());
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    out[i] = p(i, data.labels[static_cast<std::size_t>(i)]);
  }
  return out;
}

std::string_view MembershipName(Membership m) {
  switch (m) {
    case Membership::kRetain: return "retain";
    case Membership::kForget: return "forget";
    case Membership::kTest: return "test";
  }
  return "unknown";
}

std::vector<ConfidenceRecord> ConfidenceDump(const ModelState& state,
                                             const LabeledDataset& train,
                                             const LabeledDataset& test,
                                             const SplitSpec& split) {
  std::vector<ConfidenceRecord> out;
  auto append = [&](const LabeledDataset& data, const IndexSet& idx, Membership m) {
    if (idx.empty()) return;
    const LabeledDataset subset = data.Subset(idx);
    const Vector p = TrueClassProbabilities(state, subset);
    for (std::size_t i = 0; i < subset.size(); ++i) {
      const double raw = p[static_cast<Eigen::Index>(i)];
      out.push_back({subset.ids[i], PhiScale(raw), raw, m});
    }
  };
  append(train, split.retain_idx, Membership::kRetain);
  append(train, split.forget_idx, Membership::kForget);
  append(test, split.test_idx, Membership::kTest);
  return out;
}

void WriteConfidenceCsv(std::ostream& out, std::span<const ConfidenceRecord> records) {
  out << "sample_id,membership,raw_p,phi\n";
  for (const ConfidenceRecord& r : records) {
    out << r.sample_id << ',' << MembershipName(r.membership) << ','
        << FormatDouble(r.raw_p) << ',' << FormatDouble(r.phi) << '\n';
  }
}

std::optional<std::size_t> ShadowEnsemble::ColumnOf(SampleId id) const {
  auto it = column_of_.find(id);
  if (it == column_of_.end()) return std::nullopt;
  return it->second;
}

void ShadowEnsemble::Finalize() {
  Require(!models.empty() && models.size() % 2 == 0,
          "shadow ensemble size must be even and >= 2");
  Require(inclusion.size() == models.size(), "inclusion rows != model count",
          ErrorCode::kDimensionMismatch);
  column_of_.clear();
  for (std::size_t j = 0; j < pool.size(); ++j) column_of_[pool.ids[j]] = j;
  reference_conf.resize(static_cast<Eigen::Index>(models.size()),
                        static_cast<Eigen::Index>(pool.size()));
  for (std::size_t k = 0; k < models.size(); ++k) {
    Require(inclusion[k].size() == pool.size(), "inclusion row length != pool size",
            ErrorCode::kDimensionMismatch);
    reference_conf.row(static_cast<Eigen::Index>(k)) =
        TaylorConfidences(models[k], pool, taylor).transpose();
  }
  if (population_idx.empty()) {
    population_idx.resize(pool.size());
    std::iota(population_idx.begin(), population_idx.end(), std::size_t{0});
  }
}

std::vector<std::vector<bool>> BalancedInclusion(std::size_t k, std::size_t n,
                                                 std::uint64_t seed) {
  Require(k >= 2 && k % 2 == 0, "shadow count K must be even and >= 2, got " +
                                    std::to_string(k));
  std::vector<std::vector<bool>> inclusion(k, std::vector<bool>(n, false));
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> slots(k);
  for (std::size_t j = 0; j < n; ++j) {
    std::iota(slots.begin(), slots.end(), std::size_t{0});
    std::shuffle(slots.begin(), slots.end(), rng);
    for (std::size_t s = 0; s < k / 2; ++s) inclusion[slots[s]][j] = true;
  }
  return inclusion;
}

ShadowEnsemble TrainShadowEnsemble(const ModelSpec& spec, const LabeledDataset& pool,
                                   std::size_t k, const TrainConfig& cfg,
                                   std::uint64_t seed,
                                   const TaylorSoftmaxConfig& taylor) {
  ShadowEnsemble ens;
  ens.inclusion = BalancedInclusion(k, pool.size(), seed);
  ens.pool = pool;
  ens.taylor = taylor;
  std::mt19937_64 seeder(seed ^ 0x5bd1e995ULL);
  for (std::size_t m = 0; m < k; ++m) {
    IndexSet idx;
    for (std::size_t j = 0; j < pool.size(); ++j) {
      if (ens.inclusion[m][j]) idx.push_back(j);
    }
    TrainConfig model_cfg = cfg;
    model_cfg.seed = seeder();
    ens.models.push_back(Train(spec, pool, idx, model_cfg));
  }
  ens.Finalize();
  return ens;
}

RmiaScorer::RmiaScorer(const ModelState& target, const ShadowEnsemble& ensemble,
                       double gamma)
    : ensemble_(&ensemble), gamma_(gamma) {
  Require(gamma > 0.0, "RMIA gamma must be > 0");
  Require(ensemble.reference_conf.cols() ==
              static_cast<Eigen::Index>(ensemble.pool.size()),
          "shadow ensemble is not finalized");
  const Vector target_conf = TaylorConfidences(target, ensemble.pool, ensemble.taylor);
  const std::size_t n = ensemble.pool.size();
  ratios_.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    double sum = 0.0;
    std::size_t out_models = 0;
    for (std::size_t k = 0; k < ensemble.size(); ++k) {
      if (!ensemble.inclusion[k][j]) {
        sum += ensemble.reference_conf(static_cast<Eigen::Index>(k),
                                       static_cast<Eigen::Index>(j));
        ++out_models;
      }
    }
    Require(out_models > 0, "sample " + std::to_string(ensemble.pool.ids[j]) +
                                " has no OUT reference models",
            ErrorCode::kUndefined);
    ratios_[j] = target_conf[static_cast<Eigen::Index>(j)] /
                 (sum / static_cast<double>(out_models));
  }
  in_population_.assign(n, false);
  for (std::size_t j : ensemble.population_idx) {
    Require(j < n, "population index out of range");
    in_population_[j] = true;
    sorted_population_.push_back(ratios_[j]);
  }
  std::sort(sorted_population_.begin(), sorted_population_.end());
}

double RmiaScorer::ScoreColumn(std::size_t column) const {
  Require(column < ratios_.size(), "RMIA column out of range");
  const double rx = ratios_[column];
  // rx / rz is non-increasing in rz, so the dominated z form a prefix.
  auto dominated = [&](double rz) { return rx / rz >= gamma_; };
  std::size_t count = static_cast<std::size_t>(
      std::partition_point(sorted_population_.begin(), sorted_population_.end(),
                           dominated) -
      sorted_population_.begin());
  std::size_t total = sorted_population_.size();
  if (in_population_[column]) {
    if (dominated(rx)) --count;
    --total;
  }
  Require(total > 0, "RMIA population is empty after excluding the target sample",
          ErrorCode::kUndefined);
  return static_cast<double>(count) / static_cast<double>(total);
}

double RmiaScorer::Score(SampleId id) const {
  const auto column = ensemble_->ColumnOf(id);
  Require(column.has_value(), "sample id " + std::to_string(id) +
                                  " is not in the shadow pool");
  return ScoreColumn(*column);
}

std::vector<double> RmiaScorer::Scores(std::span<const SampleId> ids) const {
  std::vector<double> out;
  out.reserve(ids.size());
  for (SampleId id : ids) out.push_back(Score(id));
  return out;
}

double RmiaScore(const ModelState& target, const ShadowEnsemble& ensemble,
                 SampleId x_id, double gamma) {
  return RmiaScorer(target, ensemble, gamma).Score(x_id);
}

AucCounts AucPairCounts(std::span<const double> pos, std::span<const double> neg) {
  Require(!pos.empty() && !neg.empty(), "AUC needs non-empty positive and negative sets");
  std::vector<double> p(pos.begin(), pos.end());
  std::vector<double> q(neg.begin(), neg.end());
  std::sort(p.begin(), p.end());
  std::sort(q.begin(), q.end());
  AucCounts counts;
  counts.pairs = static_cast<std::uint64_t>(p.size()) * q.size();
  std::size_t j = 0;
  for (std::size_t i = 0; i < p.size();) {
    const double v = p[i];
    std::size_t same_pos = 0;
    while (i < p.size() && p[i] == v) ++i, ++same_pos;
    while (j < q.size() && q[j] < v) ++j;
    std::size_t same_neg = 0;
    while (j + same_neg < q.size() && q[j + same_neg] == v) ++same_neg;
    counts.wins += static_cast<std::uint64_t>(same_pos) * j;
    counts.ties += static_cast<std::uint64_t>(same_pos) * same_neg;
  }
  return counts;
}

double Auc(std::span<const double> pos, std::span<const double> neg) {
  const AucCounts c = AucPairCounts(pos, neg);
  return static_cast<double>(2 * c.wins + c.ties) / static_cast<double>(2 * c.pairs);
}

ThresholdFit FitBalancedThreshold(std::span<const double> members,
                                  std::span<const double> non_members) {
  Require(!members.empty() && !non_members.empty(),
          "threshold fit needs members and non-members");
  std::vector<double> m(members.begin(), members.end());
  std::vector<double> n(non_members.begin(), non_members.end());
  std::sort(m.begin(), m.end());
  std::sort(n.begin(), n.end());
  std::vector<double> candidates = m;
  candidates.insert(candidates.end(), n.begin(), n.end());
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
  candidates.push_back(std::numeric_limits<double>::infinity());

  ThresholdFit best;
  best.balanced_accuracy = -1.0;
  best.degenerate = candidates.size() == 2;
  std::size_t mi = 0, ni = 0;  // counts strictly below the threshold
  for (double t : candidates) {
    while (mi < m.size() && m[mi] < t) ++mi;
    while (ni < n.size() && n[ni] < t) ++ni;
    const double tpr = static_cast<double>(m.size() - mi) / static_cast<double>(m.size());
    const double tnr = static_cast<double>(ni) / static_cast<double>(n.size());
    const double bacc = 0.5 * (tpr + tnr);
    if (bacc > best.balanced_accuracy) {
      best.balanced_accuracy = bacc;
      best.threshold = t;
    }
  }
  return best;
}

MisResult MisScore(const ModelState& target, const LabeledDataset& train,
                   const LabeledDataset& test, const SplitSpec& split) {
  Require(!split.retain_idx.empty() && !split.forget_idx.empty() && !split.test_idx.empty(),
          "MIS needs non-empty retain, forget and test sets");
  auto phis = [&](const LabeledDataset& data, const IndexSet& idx) {
    const Vector p = TrueClassProbabilities(target, data.Subset(idx));
    std::vector<double> out(static_cast<std::size_t>(p.size()));
    for (Eigen::Index i = 0; i < p.size(); ++i) out[static_cast<std::size_t>(i)] = PhiScale(p[i]);
    return out;
  };
  const std::vector<double> retain = phis(train, split.retain_idx);
  const std::vector<double> test_phi = phis(test, split.test_idx);
  const std::vector<double> forget = phis(train, split.forget_idx);
  MisResult result;
  result.fit = FitBalancedThreshold(retain, test_phi);
  std::size_t members = 0;
  for (double v : forget) members += v >= result.fit.threshold;
  result.mis = 100.0 * static_cast<double>(members) / static_cast<double>(forget.size());
  return result;
}

std::optional<double> EvalReport::auc_gap() const {
  if (!ft_auc || !fr_auc) return std::nullopt;
  return *fr_auc - *ft_auc;
}

double AverageGap(const EvalReport& report, const EvalReport& reference) {
  const bool use_auc = report.ft_auc.has_value() && reference.ft_auc.has_value();
  const double mia = use_auc ? 100.0 * std::abs(*report.ft_auc - *reference.ft_auc)
                             : std::abs(report.mis - reference.mis);
  return (100.0 * std::abs(report.unlearn_acc - reference.unlearn_acc) +
          100.0 * std::abs(report.retain_acc - reference.retain_acc) +
          100.0 * std::abs(report.test_acc - reference.test_acc) + mia) /
         4.0;
}

EvalReport Evaluate(const ModelState& target, const LabeledDataset& train,
                    const LabeledDataset& test, const SplitSpec& split,
                    const ShadowEnsemble* ensemble,
                    const EvalReport* retrain_reference,
                    const EvalOptions& options) {
  EvalReport report;
  report.unlearn_acc = Accuracy(target, train, split.forget_idx);
  report.retain_acc = Accuracy(target, train, split.retain_idx);
  report.test_acc = Accuracy(target, test, split.test_idx);
  const MisResult mis = MisScore(target, train, test, split);
  report.mis = mis.mis;
  report.mis_degenerate = mis.fit.degenerate;
  if (ensemble != nullptr) {
    const RmiaScorer scorer(target, *ensemble, options.gamma);
    auto scores = [&](const LabeledDataset& data, const IndexSet& idx) {
      std::vector<double> out;
      out.reserve(idx.size());
      for (std::size_t i : idx) out.push_back(scorer.Score(data.ids[i]));
      return out;
    };
    const std::vector<double> forget = scores(train, split.forget_idx);
    const std::vector<double> test_scores = scores(test, split.test_idx);
    const std::vector<double> retain = scores(train, split.retain_idx);
    report.ft_auc = Auc(forget, test_scores);
    report.fr_auc = Auc(retain, forget);
  }
  if (retrain_reference != nullptr) {
    report.avg_gap = AverageGap(report, *retrain_reference);
  }
  return report;
}

std::string EvalCsvHeader() {
  return "method,seed,fraction,access,unlearn_acc,retain_acc,test_acc,mis,ft_auc,fr_auc,avg_gap";
}

std::string EvalCsvRow(const std::string& method, std::uint64_t seed, double fraction,
                       const std::string& access, const EvalReport& report) {
  auto opt = [](const std::optional<double>& v) {
    return v ? FormatDouble(*v) : std::string();
  };
  return method + ',' + std::to_string(seed) + ',' + FormatDouble(fraction) + ',' +
         access + ',' + FormatDouble(report.unlearn_acc) + ',' +
         FormatDouble(report.retain_acc) + ',' + FormatDouble(report.test_acc) + ',' +
         FormatDouble(report.mis) + ',' + opt(report.ft_auc) + ',' +
         opt(report.fr_auc) + ',' + opt(report.avg_gap);
}

}  // namespace amun

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


#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>
#include <vector>

#include <gtest/gtest.h>

#include "amun/mia.hpp"
#include "amun/splits.hpp"
#include "amun/train.hpp"
#include "test_util.hpp"

namespace amun {
namespace {

TEST(PhiTest, KnownValuesAndInverse) {
  EXPECT_DOUBLE_EQ(PhiScale(0.5), 0.0);
  EXPECT_NEAR(PhiScale(0.75), std::log(3.0), 1e-15);
  EXPECT_NEAR(PhiScale(0.75), 1.0986, 1e-4);
  EXPECT_TRUE(std::isfinite(PhiScale(0.0)));
  EXPECT_TRUE(std::isfinite(PhiScale(1.0)));
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(1e-12, 1.0 - 1e-12);
  for (int t = 0; t < 1000; ++t) {
    double a = u(rng), b = u(rng);
    if (a > b) std::swap(a, b);
    if (a < b) {
      EXPECT_LT(PhiScale(a), PhiScale(b));
    }
    EXPECT_NEAR(InversePhiScale(PhiScale(a)), a, 1e-12);
  }
}

TEST(SmTaylorTest, HandEvaluatedValues) {
  const Vector same = Vector::Constant(4, 0.7);
  EXPECT_DOUBLE_EQ(SmTaylorSoftmax(same, 2, 2.0, 2, 0.0), 0.25);
  const Vector z = (Vector(2) << 1.0, 0.0).finished();
  // 1 + 0.5 + 0.125 = 1.625 against 1.
  EXPECT_NEAR(SmTaylorSoftmax(z, 0, 2.0, 2, 0.0), 1.625 / 2.625, 1e-15);
  EXPECT_NEAR(SmTaylorSoftmax(z, 0, 2.0, 2, 0.0), 0.6190, 1e-4);
  double previous = 1.0;
  for (double margin = 0.0; margin < 3.0; margin += 0.25) {
    const double share = SmTaylorSoftmax(z, 0, 2.0, 2, margin);
    EXPECT_LT(share, previous);
    previous = share;
  }
  TaylorSoftmaxConfig bad;
  bad.order = 3;
  EXPECT_THROW(bad.Validate(), Error);
}

// Exhaustive pair count for the oracle comparisons.
std::pair<std::uint64_t, std::uint64_t> BrutePairs(const std::vector<double>& pos,
                                                   const std::vector<double>& neg) {
  std::uint64_t wins = 0, ties = 0;
  for (double p : pos) {
    for (double n : neg) {
      wins += p > n;
      ties += p == n;
    }
  }
  return {wins, ties};
}

TEST(AucTest, MatchesBruteForceWithTies) {
  std::mt19937_64 rng(17);
  for (int t = 0; t < 100; ++t) {
    std::uniform_int_distribution<int> size(1, 60);
    // Coarse values force ties.
    std::uniform_int_distribution<int> value(0, t % 2 ? 5 : 1000);
    std::vector<double> pos(static_cast<std::size_t>(size(rng)));
    std::vector<double> neg(static_cast<std::size_t>(size(rng)));
    for (double& v : pos) v = value(rng) * 0.1;
    for (double& v : neg) v = value(rng) * 0.1;
    const auto [wins, ties] = BrutePairs(pos, neg);
    const AucCounts c = AucPairCounts(pos, neg);
    EXPECT_EQ(c.wins, wins);
    EXPECT_EQ(c.ties, ties);
    EXPECT_EQ(c.pairs, pos.size() * neg.size());
    const double expect = (static_cast<double>(wins) + 0.5 * static_cast<double>(ties)) /
                          static_cast<double>(pos.size() * neg.size());
    EXPECT_DOUBLE_EQ(Auc(pos, neg), expect);
    EXPECT_EQ(Auc(pos, neg) + Auc(neg, pos), 1.0);
  }
}

TEST(AucTest, SmallExamples) {
  EXPECT_EQ(Auc(std::vector<double>{0.9}, std::vector<double>{0.1}), 1.0);
  EXPECT_EQ(Auc(std::vector<double>{0.3, 0.3}, std::vector<double>{0.3}), 0.5);
  EXPECT_EQ(Auc(std::vector<double>{0.8, 0.4}, std::vector<double>{0.6, 0.2}), 0.75);
  EXPECT_THROW(Auc(std::vector<double>{}, std::vector<double>{0.1}), Error);
}

// Exhaustive RMIA score with every confidence recomputed from the models.
double BruteRmia(const ModelState& target, const ShadowEnsemble& ens, std::size_t col,
                 double gamma) {
  const TaylorSoftmaxConfig& tc = ens.taylor;
  auto conf = [&](const ModelState& m, std::size_t j) {
    const Vector z = Logits(m, ens.pool.features.row(static_cast<Eigen::Index>(j))).row(0).transpose();
    return SmTaylorSoftmax(z, ens.pool.labels[j], tc.temperature, tc.order, tc.margin);
  };
  auto ratio = [&](std::size_t j) {
    double sum = 0.0;
    int out = 0;
    for (std::size_t k = 0; k < ens.models.size(); ++k) {
      if (!ens.inclusion[k][j]) {
        sum += conf(ens.models[k], j);
        ++out;
      }
    }
    return conf(target, j) / (sum / out);
  };
  const double rx = ratio(col);
  int count = 0, total = 0;
  for (std::size_t z : ens.population_idx) {
    if (z == col) continue;
    ++total;
    count += rx / ratio(z) >= gamma;
  }
  return static_cast<double>(count) / total;
}

ShadowEnsemble ToyEnsemble(std::uint64_t seed, std::size_t n, std::size_t k) {
  ShadowEnsemble ens;
  ens.pool = testing::RandomDataset(n, 3, 3, seed);
  ens.inclusion = BalancedInclusion(k, n, seed + 1);
  for (std::size_t m = 0; m < k; ++m) {
    ModelState s = InitParams(ModelSpec::Mlp({3, 5, 3}), seed * 100 + m);
    s.params *= 3.0;
    ens.models.push_back(s);
  }
  return ens;
}

TEST(RmiaTest, MatchesExhaustiveEnumeration) {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 10 + static_cast<std::size_t>(trial % 15);
    ShadowEnsemble ens = ToyEnsemble(static_cast<std::uint64_t>(trial), n, 4);
    std::vector<std::size_t> cols(n);
    std::iota(cols.begin(), cols.end(), std::size_t{0});
    std::shuffle(cols.begin(), cols.end(), rng);
    const std::size_t pop = std::min<std::size_t>(n, 2 + static_cast<std::size_t>(trial) % 19);
    ens.population_idx.assign(cols.begin(), cols.begin() + static_cast<std::ptrdiff_t>(pop));
    ens.Finalize();
    ModelState target = InitParams(ModelSpec::Mlp({3, 5, 3}), 1000 + static_cast<std::uint64_t>(trial));
    target.params *= 3.0;
    const double gamma = trial % 3 == 0 ? 1.0 : 2.0 - 0.3 * (trial % 4);
    const RmiaScorer scorer(target, ens, gamma);
    for (std::size_t j = 0; j < n; ++j) {
      ASSERT_EQ(scorer.ScoreColumn(j), BruteRmia(target, ens, j, gamma))
          << "trial " << trial << " column " << j;
      EXPECT_EQ(scorer.Score(ens.pool.ids[j]), scorer.ScoreColumn(j));
    }
  }
}

TEST(RmiaTest, DominanceExtremes) {
  ShadowEnsemble ens = ToyEnsemble(5, 12, 4);
  ens.Finalize();
  const ModelState target = ens.models[0];
  const RmiaScorer scorer(target, ens, 1.0);
  std::size_t top = 0, bottom = 0;
  for (std::size_t j = 0; j < 12; ++j) {
    if (scorer.Ratio(j) > scorer.Ratio(top)) top = j;
    if (scorer.Ratio(j) < scorer.Ratio(bottom)) bottom = j;
  }
  EXPECT_EQ(scorer.ScoreColumn(top), 1.0);
  const RmiaScorer strict(target, ens, 1e9);
  EXPECT_EQ(strict.ScoreColumn(bottom), 0.0);
}

TEST(ShadowTest, BalancedInclusion) {
  for (std::size_t k : {2u, 4u, 16u}) {
    const auto inc = BalancedInclusion(k, 50, 9);
    for (std::size_t j = 0; j < 50; ++j) {
      std::size_t sum = 0;
      for (std::size_t m = 0; m < k; ++m) sum += inc[m][j];
      EXPECT_EQ(sum, k / 2);
    }
    EXPECT_EQ(inc, BalancedInclusion(k, 50, 9));
  }
  EXPECT_THROW(BalancedInclusion(3, 10, 1), Error);
}

TEST(ShadowTest, TrainsEachModelOnItsHalf) {
  const LabeledDataset pool = testing::RandomDataset(40, 3, 2, 4);
  TrainConfig cfg;
  cfg.epochs = 3;
  const ShadowEnsemble a = TrainShadowEnsemble(ModelSpec::Mlp({3, 4, 2}), pool, 4, cfg, 8);
  const ShadowEnsemble b = TrainShadowEnsemble(ModelSpec::Mlp({3, 4, 2}), pool, 4, cfg, 8);
  EXPECT_EQ(a.inclusion, b.inclusion);
  for (std::size_t m = 0; m < 4; ++m) EXPECT_EQ(a.models[m].params, b.models[m].params);
  EXPECT_EQ(a.reference_conf.rows(), 4);
  EXPECT_EQ(a.reference_conf.cols(), 40);
  EXPECT_THROW(TrainShadowEnsemble(ModelSpec::Mlp({3, 4, 2}), pool, 5, cfg, 8), Error);
}

// Best balanced accuracy over every threshold taken from the data, plus +inf.
double BruteBestBalanced(const std::vector<double>& m, const std::vector<double>& n) {
  std::vector<double> cands = m;
  cands.insert(cands.end(), n.begin(), n.end());
  cands.push_back(INFINITY);
  double best = -1.0;
  for (double t : cands) {
    double tp = 0, tn = 0;
    for (double v : m) tp += v >= t;
    for (double v : n) tn += v < t;
    best = std::max(best, 0.5 * (tp / m.size() + tn / n.size()));
  }
  return best;
}

TEST(ThresholdTest, MatchesExhaustiveSearch) {
  std::mt19937_64 rng(31);
  std::uniform_int_distribution<int> v(0, 6);
  for (int t = 0; t < 200; ++t) {
    std::vector<double> m(4), n(4);
    for (double& x : m) x = v(rng);
    for (double& x : n) x = v(rng);
    const ThresholdFit fit = FitBalancedThreshold(m, n);
    EXPECT_DOUBLE_EQ(fit.balanced_accuracy, BruteBestBalanced(m, n));
    double tp = 0, tn = 0;
    for (double x : m) tp += x >= fit.threshold;
    for (double x : n) tn += x < fit.threshold;
    EXPECT_DOUBLE_EQ(0.5 * (tp / 4 + tn / 4), fit.balanced_accuracy);
  }
  const ThresholdFit flat = FitBalancedThreshold(std::vector<double>{1, 1}, std::vector<double>{1});
  EXPECT_TRUE(flat.degenerate);
}

TEST(MisTest, ForgetBelowEverythingScoresZero) {
  // Confidence in the true class grows with x0 for class-1 rows.
  const ModelState state = testing::LinearOracle((Vector(1) << 4.0).finished(), 0.0);
  LabeledDataset train;
  train.features.resize(6, 1);
  train.features << 2.0, 2.5, 3.0, -3.0, -2.8, -2.6;
  train.labels = {1, 1, 1, 1, 1, 1};
  train.ids = {0, 1, 2, 3, 4, 5};
  train.num_classes = 2;
  LabeledDataset test = train;
  test.features << 0.5, 0.7, 0.9, 1.1, 1.3, 1.5;
  for (auto& id : test.ids) id += 10;
  SplitSpec split;
  split.retain_idx = {0, 1, 2};
  split.forget_idx = {3, 4, 5};
  split.test_idx = {0, 1, 2, 3, 4, 5};
  EXPECT_DOUBLE_EQ(MisScore(state, train, test, split).mis, 0.0);
  split.retain_idx = {3, 4, 5};
  split.forget_idx = {0, 1, 2};
  EXPECT_DOUBLE_EQ(MisScore(state, train, test, split).mis, 100.0);
}

TEST(MisTest, ForgetLikeRetainMatchesRetainMemberRate) {
  const SyntheticData data = testing::SmallBlobs(12, 400, 4, 2, 0.7);
  TrainConfig tc;
  tc.epochs = 30;
  const SplitSpec split = SampleSplits(data.train.size(), data.test.size(), 0.5, 1, 3)[0];
  const ModelState state = Train(ModelSpec::Mlp({4, 16, 2}), data.train, split.retain_idx, tc);
  // Score the retain set itself as the "forget" set.
  SplitSpec same = split;
  same.forget_idx = split.retain_idx;
  const MisResult r = MisScore(state, data.train, data.test, same);
  const Vector p = TrueClassProbabilities(state, data.train.Subset(split.retain_idx));
  double members = 0;
  for (Eigen::Index i = 0; i < p.size(); ++i) members += PhiScale(p[i]) >= r.fit.threshold;
  EXPECT_NEAR(r.mis, 100.0 * members / static_cast<double>(p.size()), 1e-12);
}

TEST(AverageGapTest, TableRowsGiveKnownGap) {
  EvalReport amun;
  amun.unlearn_acc = 0.9545;
  amun.retain_acc = 0.9957;
  amun.test_acc = 0.9345;
  amun.ft_auc = 0.5018;
  EvalReport retrain;
  retrain.unlearn_acc = 0.9449;
  retrain.retain_acc = 1.0;
  retrain.test_acc = 0.9433;
  retrain.ft_auc = 0.5;
  EXPECT_NEAR(AverageGap(amun, retrain), 0.6125, 1e-9);
  EXPECT_NEAR(AverageGap(amun, retrain), 0.62, 0.01);
  EXPECT_DOUBLE_EQ(AverageGap(retrain, retrain), 0.0);
  // Without AUCs the MIA term falls back to MIS.
  EvalReport a, b;
  a.mis = 10.0;
  b.mis = 6.0;
  EXPECT_DOUBLE_EQ(AverageGap(a, b), 1.0);
}

TEST(EvaluateTest, ReportFieldsAndCsv) {
  const SyntheticData data = testing::SmallBlobs(13, 200, 3, 2, 0.4);
  const SplitSpec split = SampleSplits(data.train.size(), data.test.size(), 0.1, 1, 1)[0];
  TrainConfig tc;
  tc.epochs = 20;
  const ModelState state = Train(ModelSpec::Mlp({3, 8, 2}), data.train, split.retain_idx, tc);
  const ShadowEnsemble ens = TrainShadowEnsemble(state.spec, Concat(data.train, data.test), 4, tc, 2);
  const EvalReport ref = Evaluate(state, data.train, data.test, split, &ens);
  ASSERT_TRUE(ref.ft_auc && ref.fr_auc);
  EXPECT_FALSE(ref.avg_gap.has_value());
  EXPECT_DOUBLE_EQ(*ref.auc_gap(), *ref.fr_auc - *ref.ft_auc);
  const EvalReport self = Evaluate(state, data.train, data.test, split, &ens, &ref);
  EXPECT_DOUBLE_EQ(*self.avg_gap, 0.0);
  const std::string row = EvalCsvRow("amun", 3, 0.1, "retain", self);
  EXPECT_EQ(std::count(row.begin(), row.end(), ','), 10);
  EXPECT_EQ(EvalCsvHeader(),
            "method,seed,fraction,access,unlearn_acc,retain_acc,test_acc,mis,ft_auc,fr_auc,avg_gap");
  const EvalReport bare = Evaluate(state, data.train, data.test, split);
  EXPECT_FALSE(bare.ft_auc.has_value());
  EXPECT_FALSE(bare.auc_gap().has_value());
}

TEST(ConfidenceDumpTest, CoversEverySplitMember) {
  const SyntheticData data = testing::SmallBlobs(14, 60, 3, 2);
  const SplitSpec split = SampleSplits(data.train.size(), data.test.size(), 0.2, 1, 1)[0];
  const ModelState state = InitParams(ModelSpec::Mlp({3, 4, 2}), 1);
  const auto records = ConfidenceDump(state, data.train, data.test, split);
  EXPECT_EQ(records.size(), data.train.size() + data.test.size());
  for (const auto& r : records) EXPECT_NEAR(r.phi, PhiScale(r.raw_p), 1e-15);
  std::stringstream out;
  WriteConfidenceCsv(out, records);
  std::string first;
  std::getline(out, first);
  EXPECT_EQ(first, "sample_id,membership,raw_p,phi");
}

}  // namespace
}  // namespace amun

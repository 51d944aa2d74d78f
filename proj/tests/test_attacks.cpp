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


#include <cmath>
#include <cstring>
#include <limits>
#include <random>
#include <sstream>
#include <vector>

#include <gtest/gtest.h>

#include "amun/advset_io.hpp"
#include "amun/attacks.hpp"
#include "amun/base64.hpp"
#include "amun/train.hpp"
#include "test_util.hpp"

namespace amun {
namespace {

using testing::LinearOracle;

// Signed margin of the linear oracle: positive means class 1.
double Margin(const Vector& w, double b, const Vector& x) { return w.dot(x) + b; }

AttackConfig PlainConfig() {
  AttackConfig cfg;
  cfg.eps_init = 0.1;
  return cfg;
}

TEST(PgdTest, RejectsZeroEps) {
  const ModelState state = LinearOracle(Vector::Ones(2), 0.0);
  EXPECT_THROW(PgdL2(state, Vector::Zero(2), 0, 0.0, PlainConfig()), Error);
  EXPECT_THROW(FfgsmSearch(state, Vector::Zero(2), 0, 0.0, PlainConfig()), Error);
}

TEST(PgdTest, FlipsExactlyBeyondHyperplaneDistance) {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int t = 0; t < 50; ++t) {
    Vector w(3), x(3);
    for (int k = 0; k < 3; ++k) {
      w[k] = g(rng);
      x[k] = g(rng);
    }
    const double b = g(rng);
    const ModelState state = LinearOracle(w, b);
    const int y = Predict(state, x);
    const double distance = std::abs(Margin(w, b, x)) / w.norm();
    const Vector far = PgdL2(state, x, y, distance * 1.01, PlainConfig());
    EXPECT_NE(Predict(state, far), y) << "trial " << t;
    const Vector near = PgdL2(state, x, y, distance * 0.99, PlainConfig());
    EXPECT_EQ(Predict(state, near), y) << "trial " << t;
  }
}

TEST(PgdTest, IteratesStayInBallAndBox) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const ModelState state = InitParams(ModelSpec::Mlp({4, 8, 3}), 3);
  AttackConfig cfg = PlainConfig();
  cfg.clamp_box = Box::Uniform(4, 0.0, 1.0);
  for (int t = 0; t < 100; ++t) {
    Vector x(4);
    for (int k = 0; k < 4; ++k) x[k] = u(rng);
    const double eps = 0.05 + u(rng);
    AttackDiagnostics diag;
    diag.record_iterates = true;
    cfg.kind = t % 2 ? AttackKind::kPgd : AttackKind::kFfgsm;
    const Vector out = RunAttack(state, x, t % 3, eps, cfg, &diag);
    EXPECT_LE((out - x).norm() - eps, 1e-9);
    for (const Vector& it : diag.iterates) {
      EXPECT_LE((it - x).norm() - eps, 1e-9);
      EXPECT_GE(it.minCoeff(), 0.0);
      EXPECT_LE(it.maxCoeff(), 1.0);
    }
  }
}

TEST(PgdTest, ProjectionOntoBall) {
  const Vector c = Vector::Zero(2);
  const Vector p = (Vector(2) << 3.0, 4.0).finished();
  const Vector expect = (Vector(2) << 0.6, 0.8).finished();
  EXPECT_NEAR((ProjectL2Ball(p, c, 1.0) - expect).norm(), 0.0, 1e-15);
  EXPECT_EQ(ProjectL2Ball(p, c, 10.0), p);
  const Box box = Box::Uniform(2, 0.0, 1.0);
  EXPECT_EQ(ClampToBox(p, box), Vector(Vector::Ones(2)));
}

TEST(PgdTest, ZeroGradientUsesDeterministicNudge) {
  // A confident linear model has a gradient that underflows to exactly zero
  // far from the boundary.
  const ModelState state = LinearOracle((Vector(2) << 1000.0, 0.0).finished(), 0.0);
  const Vector x = (Vector(2) << 1.0, 0.0).finished();
  AttackDiagnostics diag;
  const Vector a = PgdL2(state, x, 1, 0.5, PlainConfig(), &diag);
  EXPECT_TRUE(diag.offset_applied);
  EXPECT_TRUE(diag.stalled);
  EXPECT_EQ(a, PgdL2(state, x, 1, 0.5, PlainConfig()));
  EXPECT_LE((a - x).norm(), 1e-5);
}

TEST(FfgsmTest, DeterministicAndSignDirection) {
  const ModelState state = InitParams(ModelSpec::Mlp({3, 6, 2}), 4);
  AttackConfig cfg = PlainConfig();
  cfg.kind = AttackKind::kFfgsm;
  cfg.seed = 99;
  const Vector x = (Vector(3) << 0.2, 0.5, 0.1).finished();
  EXPECT_EQ(FfgsmSearch(state, x, 0, 0.3, cfg), FfgsmSearch(state, x, 0, 0.3, cfg));
  const Vector g = (Vector(1) << -0.37).finished();
  EXPECT_DOUBLE_EQ(GradientSign(g)[0], -1.0);
  EXPECT_DOUBLE_EQ(GradientSign(Vector(Vector::Constant(1, 12.0)))[0], 1.0);
}

TEST(FfgsmTest, NeedsAtLeastAsMuchEpsAsPgdOnLinearModels) {
  std::mt19937_64 rng(21);
  std::normal_distribution<double> g(0.0, 1.0);
  int dominated = 0;
  const int trials = 100;
  for (int t = 0; t < trials; ++t) {
    Vector w(5), x(5);
    for (int k = 0; k < 5; ++k) {
      w[k] = g(rng);
      x[k] = g(rng);
    }
    const ModelState state = LinearOracle(w, 0.0);
    LabeledDataset data;
    data.features = x.transpose();
    data.labels = {Predict(state, x)};
    data.ids = {t};
    data.num_classes = 2;
    AttackConfig pgd = PlainConfig();
    pgd.eps_init = 0.01;
    pgd.max_doublings = 30;
    AttackConfig weak = pgd;
    weak.kind = AttackKind::kFfgsm;
    weak.seed = static_cast<std::uint64_t>(t);
    const double e_pgd = BuildAdversarialSet(state, pgd, data, {0}).records[0].eps_used;
    const double e_weak = BuildAdversarialSet(state, weak, data, {0}).records[0].eps_used;
    if (e_weak >= e_pgd) ++dominated;
  }
  EXPECT_GE(dominated, 90);
}

bool IsPowerOfTwo(double ratio) {
  int exponent = 0;
  return std::frexp(ratio, &exponent) == 0.5;
}

TEST(BuildAdversarialSetTest, RejectsEmptyForgetSet) {
  const ModelState state = LinearOracle(Vector::Ones(2), 0.0);
  const LabeledDataset data = testing::RandomDataset(4, 2, 2, 1);
  EXPECT_THROW(BuildAdversarialSet(state, PlainConfig(), data, {}), Error);
}

TEST(BuildAdversarialSetTest, DoublingStopsAtFirstSufficientEps) {
  // Hyperplane x0 = 0; the sample sits at distance 0.3 on the class-1 side.
  const ModelState state = LinearOracle((Vector(2) << 1.0, 0.0).finished(), 0.0);
  LabeledDataset data;
  data.features.resize(1, 2);
  data.features << 0.3, 0.7;
  data.labels = {1};
  data.ids = {17};
  data.num_classes = 2;
  const AdvSet adv = BuildAdversarialSet(state, PlainConfig(), data, {0});
  ASSERT_EQ(adv.records.size(), 1u);
  EXPECT_DOUBLE_EQ(adv.records[0].eps_used, 0.4);
  EXPECT_LE(adv.records[0].delta, 0.4 + 1e-9);
  EXPECT_EQ(adv.records[0].orig_id, 17);
  EXPECT_EQ(adv.records[0].y_adv, 0);
  EXPECT_EQ(adv.source_fingerprint, Fingerprint(state));
}

TEST(BuildAdversarialSetTest, RecordsHonorInvariants) {
  const SyntheticData data = testing::SmallBlobs(3, 200, 4, 3, 0.4);
  TrainConfig tc;
  tc.epochs = 40;
  tc.learning_rate = 0.3;
  tc.batch_size = 16;
  IndexSet all(data.train.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  const ModelState state = Train(ModelSpec::Mlp({4, 16, 3}), data.train, all, tc);
  AttackConfig cfg;
  cfg.eps_init = DefaultEpsInit(data.train, all);
  cfg.clamp_box = Box::Uniform(4, 0.0, 1.0);
  const IndexSet forget{0, 5, 10, 15, 20, 25, 30, 35, 40, 45};
  const AdvSet adv = BuildAdversarialSet(state, cfg, data.train, forget);
  ASSERT_EQ(adv.records.size(), forget.size());
  for (std::size_t k = 0; k < forget.size(); ++k) {
    const AdvRecord& r = adv.records[k];
    EXPECT_EQ(r.orig_id, data.train.ids[forget[k]]);
    EXPECT_NE(r.y_adv, r.y_true);
    EXPECT_EQ(Predict(state, r.x_adv), r.y_adv);
    EXPECT_LE(r.delta, r.eps_used + 1e-9);
    EXPECT_TRUE(IsPowerOfTwo(r.eps_used / cfg.eps_init));
    const Vector x = data.train.features.row(static_cast<Eigen::Index>(forget[k])).transpose();
    EXPECT_NEAR((r.x_adv - x).norm(), r.delta, 1e-12);
  }
}

TEST(BuildAdversarialSetTest, FailureIsReportedOrThrown) {
  // A constant model never changes its prediction.
  ModelState state = LinearOracle(Vector::Zero(2), 1.0);
  LabeledDataset data = testing::RandomDataset(2, 2, 2, 3);
  data.labels = {1, 1};
  AttackConfig cfg = PlainConfig();
  cfg.max_doublings = 3;
  try {
    BuildAdversarialSet(state, cfg, data, {0, 1});
    FAIL() << "expected attack failure";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kAttackFailed);
  }
  cfg.strict = false;
  const AdvSet adv = BuildAdversarialSet(state, cfg, data, {0, 1});
  EXPECT_TRUE(adv.records.empty());
  EXPECT_EQ(adv.failures.size(), 2u);
}

double BruteForceMedianNn(const Matrix& p) {
  std::vector<double> nn;
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < p.rows(); ++j) {
      if (i != j) best = std::min(best, (p.row(i) - p.row(j)).norm());
    }
    nn.push_back(best);
  }
  return Median(nn);
}

TEST(DistanceReportTest, NearestNeighborSweepMatchesAllPairs) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const LabeledDataset data = testing::RandomDataset(100, 1 + static_cast<int>(seed % 4), 2, seed);
    EXPECT_DOUBLE_EQ(MedianNearestNeighborDistance(data.features),
                     BruteForceMedianNn(data.features));
  }
}

TEST(DistanceReportTest, DirectReadouts) {
  AdvSet adv;
  AdvRecord r;
  r.delta = 0.2;
  adv.records.push_back(r);
  Matrix two(2, 2);
  two << 0.0, 0.0, 1.0, 0.0;
  const DistanceReport rep = MakeDistanceReport(adv, two);
  EXPECT_DOUBLE_EQ(rep.median_delta, 0.2);
  EXPECT_DOUBLE_EQ(rep.median_nn_distance, 1.0);
  EXPECT_FALSE(rep.delta_not_local);

  Matrix dup(2, 2);
  dup << 0.5, 0.5, 0.5, 0.5;
  const DistanceReport degenerate = MakeDistanceReport(adv, dup);
  EXPECT_DOUBLE_EQ(degenerate.median_nn_distance, 0.0);
  EXPECT_TRUE(degenerate.delta_not_local);
  EXPECT_THROW(MakeDistanceReport(AdvSet{}, two), Error);
}

TEST(AdvSetIoTest, RoundTripIsBitExact) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  AdvSet adv;
  adv.source_fingerprint = 0x0123456789abcdefULL;
  for (int k = 0; k < 20; ++k) {
    AdvRecord r;
    r.orig_id = k * 3;
    r.y_true = k % 3;
    r.y_adv = (k + 1) % 3;
    r.x_adv = Vector(7);
    for (int j = 0; j < 7; ++j) r.x_adv[j] = u(rng) * std::pow(10.0, j - 3);
    r.delta = u(rng) + 1.0;
    r.eps_used = 0.1 / 3.0 * (k + 1);
    adv.records.push_back(r);
  }
  std::stringstream first;
  WriteAdvSet(first, adv);
  const AdvSet back = ReadAdvSet(first);
  ASSERT_EQ(back.records.size(), adv.records.size());
  EXPECT_EQ(back.source_fingerprint, adv.source_fingerprint);
  for (std::size_t k = 0; k < adv.records.size(); ++k) {
    EXPECT_EQ(back.records[k].orig_id, adv.records[k].orig_id);
    EXPECT_EQ(back.records[k].y_adv, adv.records[k].y_adv);
    EXPECT_EQ(std::memcmp(back.records[k].x_adv.data(), adv.records[k].x_adv.data(),
                          7 * sizeof(double)), 0);
    EXPECT_EQ(back.records[k].delta, adv.records[k].delta);
    EXPECT_EQ(back.records[k].eps_used, adv.records[k].eps_used);
  }
  std::stringstream second;
  WriteAdvSet(second, back);
  EXPECT_EQ(first.str(), second.str());
}

TEST(AdvSetIoTest, RejectsMalformedInput) {
  std::stringstream bad_magic("AMUN-ADVSET v2\nfingerprint=0000000000000000\n");
  EXPECT_THROW(ReadAdvSet(bad_magic), Error);
  std::stringstream short_line("AMUN-ADVSET v1\nfingerprint=0000000000000000\n1,0,1\n");
  EXPECT_THROW(ReadAdvSet(short_line), Error);
  std::stringstream same_label("AMUN-ADVSET v1\nfingerprint=0000000000000000\n1,0,0,1,1,AAAAAAAAAAA=\n");
  EXPECT_THROW(ReadAdvSet(same_label), Error);
}

TEST(Base64Test, KnownVectorsAndPacking) {
  const std::string text = "foobar";
  const std::vector<std::uint8_t> bytes(text.begin(), text.end());
  EXPECT_EQ(Base64Encode(bytes), "Zm9vYmFy");
  EXPECT_EQ(Base64Encode(std::span(bytes).first(4)), "Zm9vYg==");
  EXPECT_EQ(Base64Decode("Zm9vYg=="), std::vector<std::uint8_t>(bytes.begin(), bytes.begin() + 4));
  const Vector one = Vector::Constant(1, 1.0);
  const std::vector<std::uint8_t> packed = PackDoublesLE(one);
  const std::vector<std::uint8_t> expect{0, 0, 0, 0, 0, 0, 0xf0, 0x3f};
  EXPECT_EQ(packed, expect);
  EXPECT_EQ(ParseDouble(FormatDouble(0.1)), 0.1);
}

}  // namespace
}  // namespace amun

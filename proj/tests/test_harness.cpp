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
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <tuple>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "amun/checkpoint.hpp"
#include "amun/config.hpp"
#include "amun/data_gen.hpp"
#include "amun/experiment.hpp"
#include "amun/idx.hpp"
#include "amun/splits.hpp"
#include "test_util.hpp"

namespace amun {
namespace {

namespace fs = std::filesystem;

TEST(BlobsTest, BalancedDeterministicAndScaled) {
  BlobsSpec spec;
  spec.n = 100;
  spec.n_test = 40;
  spec.d = 3;
  spec.m = 2;
  spec.seed = 4;
  const SyntheticData a = GenerateBlobs(spec);
  const SyntheticData b = GenerateBlobs(spec);
  int ones = 0;
  for (int y : a.train.labels) ones += y;
  EXPECT_NEAR(ones, 50, 1);
  EXPECT_EQ(a.train.features, b.train.features);
  EXPECT_EQ(a.test.features, b.test.features);
  EXPECT_EQ(a.train.labels, b.train.labels);
  EXPECT_GE(std::min(a.train.features.minCoeff(), a.test.features.minCoeff()), 0.0);
  EXPECT_LE(std::max(a.train.features.maxCoeff(), a.test.features.maxCoeff()), 1.0);
  EXPECT_EQ(a.train.ids.front(), 0);
  EXPECT_EQ(a.test.ids.front(), 100);
  spec.seed = 5;
  EXPECT_NE(GenerateBlobs(spec).train.features, a.train.features);
}

TEST(BlobsTest, TinySpreadIsSolvedByNearestCentroid) {
  BlobsSpec spec;
  spec.n = 200;
  spec.n_test = 100;
  spec.d = 4;
  spec.m = 4;
  spec.spread = 1e-4;
  spec.seed = 9;
  const SyntheticData data = GenerateBlobs(spec);
  Matrix centroids = Matrix::Zero(4, 4);
  Vector counts = Vector::Zero(4);
  for (std::size_t i = 0; i < data.train.size(); ++i) {
    centroids.row(data.train.labels[i]) += data.train.features.row(static_cast<Eigen::Index>(i));
    counts[data.train.labels[i]] += 1;
  }
  for (int c = 0; c < 4; ++c) centroids.row(c) /= counts[c];
  int correct = 0;
  for (std::size_t i = 0; i < data.test.size(); ++i) {
    Eigen::Index best = 0;
    (centroids.rowwise() - data.test.features.row(static_cast<Eigen::Index>(i)))
        .rowwise().squaredNorm().minCoeff(&best);
    correct += best == data.test.labels[i];
  }
  EXPECT_EQ(correct, static_cast<int>(data.test.size()));
}

TEST(BlobsTest, RejectsTooFewSamples) {
  BlobsSpec spec;
  spec.n = 7;
  spec.m = 4;
  EXPECT_THROW(GenerateBlobs(spec), Error);
}

TEST(MoonsTest, TwoClassesInUnitSquare) {
  MoonsSpec spec;
  spec.n = 100;
  spec.n_test = 20;
  const SyntheticData data = GenerateMoons(spec);
  EXPECT_EQ(data.train.dim(), 2u);
  EXPECT_EQ(data.train.num_classes, 2);
  EXPECT_GE(data.train.features.minCoeff(), 0.0);
  EXPECT_LE(data.train.features.maxCoeff(), 1.0);
}

void PutU32(std::vector<std::uint8_t>* out, std::uint32_t v) {
  for (int shift = 24; shift >= 0; shift -= 8) out->push_back(static_cast<std::uint8_t>(v >> shift));
}

std::vector<std::uint8_t> ImageFile(std::uint32_t magic, std::uint32_t count) {
  std::vector<std::uint8_t> out;
  PutU32(&out, magic);
  PutU32(&out, count);
  PutU32(&out, 2);
  PutU32(&out, 2);
  for (std::uint8_t b : {0, 255, 51, 102, 204, 153, 0, 1}) {
    if (out.size() < 16 + 4 * count) out.push_back(b);
  }
  return out;
}

std::vector<std::uint8_t> LabelFile(std::uint32_t count) {
  std::vector<std::uint8_t> out;
  PutU32(&out, 2049);
  PutU32(&out, count);
  for (std::uint32_t i = 0; i < count; ++i) out.push_back(static_cast<std::uint8_t>(i % 2 ? 7 : 3));
  return out;
}

TEST(IdxTest, HandBuiltFixture) {
  const LabeledDataset data = ParseIdx(ImageFile(2051, 2), LabelFile(2), 10);
  ASSERT_EQ(data.size(), 2u);
  ASSERT_EQ(data.dim(), 4u);
  Matrix expect(2, 4);
  expect << 0.0, 1.0, 0.2, 0.4, 0.8, 0.6, 0.0, 1.0 / 255.0;
  EXPECT_EQ(data.features, expect);
  EXPECT_EQ(data.labels, (std::vector<int>{3, 7}));
  EXPECT_EQ(data.ids, (std::vector<SampleId>{10, 11}));
  EXPECT_EQ(data.num_classes, 8);
}

TEST(IdxTest, FormatErrors) {
  try {
    ParseIdx(ImageFile(2050, 2), LabelFile(2));
    FAIL() << "expected a magic error";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("unexpected magic"), std::string::npos);
    EXPECT_EQ(e.code(), ErrorCode::kFormat);
  }
  try {
    ParseIdx(ImageFile(2051, 2), LabelFile(3));
    FAIL() << "expected a count mismatch";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("count mismatch"), std::string::npos);
  }
  std::vector<std::uint8_t> truncated = ImageFile(2051, 2);
  truncated.pop_back();
  EXPECT_THROW(ParseIdx(truncated, LabelFile(2)), Error);
  const std::vector<std::uint8_t> header_only(6, 0);
  EXPECT_THROW(ParseIdx(header_only, LabelFile(2)), Error);
}

TEST(IdxTest, LoadsFromFiles) {
  const fs::path dir = testing::TempDir("idx");
  auto write = [](const fs::path& p, const std::vector<std::uint8_t>& bytes) {
    std::ofstream out(p, std::ios::binary);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  };
  write(dir / "img", ImageFile(2051, 2));
  write(dir / "lbl", LabelFile(2));
  EXPECT_EQ(LoadIdx((dir / "img").string(), (dir / "lbl").string()).size(), 2u);
  EXPECT_THROW(LoadIdx((dir / "missing").string(), (dir / "lbl").string()), Error);
}

TEST(SplitsTest, SizesAndDeterminism) {
  const auto splits = SampleSplits(1000, 50, 0.1, 3, 7);
  ASSERT_EQ(splits.size(), 3u);
  for (const SplitSpec& s : splits) {
    EXPECT_EQ(s.forget_idx.size(), 100u);
    EXPECT_EQ(s.retain_idx.size(), 900u);
    EXPECT_EQ(s.test_idx.size(), 50u);
    std::set<std::size_t> all(s.forget_idx.begin(), s.forget_idx.end());
    all.insert(s.retain_idx.begin(), s.retain_idx.end());
    EXPECT_EQ(all.size(), 1000u);
    EXPECT_NO_THROW(s.Validate(1000, 50));
  }
  EXPECT_NE(splits[0].forget_idx, splits[1].forget_idx);
  const auto again = SampleSplits(1000, 50, 0.1, 3, 7);
  for (std::size_t k = 0; k < 3; ++k) EXPECT_EQ(again[k].forget_idx, splits[k].forget_idx);
}

TEST(SplitsTest, InclusionIsUniform) {
  const std::size_t n = 50;
  std::vector<int> hits(n, 0);
  const auto splits = SampleSplits(n, 1, 0.2, 1000, 3);
  for (const SplitSpec& s : splits) {
    for (std::size_t i : s.forget_idx) ++hits[i];
  }
  for (int h : hits) EXPECT_NEAR(h / 1000.0, 0.2, 0.06);
  double mean = 0;
  for (int h : hits) mean += h / 1000.0 / n;
  EXPECT_NEAR(mean, 0.2, 0.02);
}

TEST(SplitsTest, Errors) {
  EXPECT_THROW(ForgetCount(10, 0.01), Error);
  EXPECT_THROW(ForgetCount(10, 0.0), Error);
  EXPECT_THROW(ForgetCount(10, 1.0), Error);
  EXPECT_EQ(ForgetCount(1000, 0.1), 100u);
  const auto req = SampleRequests(100, 5, 4, 1);
  std::set<std::size_t> seen;
  for (const auto& r : req) {
    EXPECT_EQ(r.size(), 5u);
    seen.insert(r.begin(), r.end());
  }
  EXPECT_EQ(seen.size(), 20u);
  EXPECT_THROW(SampleRequests(10, 5, 3, 1), Error);
}

Checkpoint SampleCheckpoint() {
  Checkpoint ckpt;
  ckpt.state = InitParams(ModelSpec::Mlp({3, 5, 2}), 6);
  ckpt.state.params[2] = -0.0;
  ckpt.state.params[3] = 1e-310;
  ckpt.method = "amun";
  ckpt.config = "unlearn.lr=0.01;seed=3";
  return ckpt;
}

TEST(CheckpointTest, RoundTripIsBitExact) {
  const Checkpoint ckpt = SampleCheckpoint();
  std::stringstream buf;
  WriteCheckpoint(buf, ckpt);
  const std::string bytes = buf.str();
  EXPECT_EQ(bytes.rfind("AMUN-CKPT v1\n", 0), 0u);
  const Checkpoint back = ReadCheckpoint(buf, ckpt.state.spec);
  EXPECT_EQ(back.state.spec, ckpt.state.spec);
  EXPECT_EQ(std::memcmp(back.state.params.data(), ckpt.state.params.data(),
                        sizeof(double) * static_cast<std::size_t>(ckpt.state.params.size())),
            0);
  EXPECT_EQ(back.method, "amun");
  EXPECT_EQ(back.config, ckpt.config);
  EXPECT_EQ(back.state.rng_seed, ckpt.state.rng_seed);
  std::stringstream again;
  WriteCheckpoint(again, back);
  EXPECT_EQ(again.str(), bytes);

  const fs::path dir = testing::TempDir("ckpt");
  SaveCheckpoint((dir / "m.ckpt").string(), ckpt);
  EXPECT_EQ(LoadCheckpoint((dir / "m.ckpt").string()).state.params, ckpt.state.params);
}

TEST(CheckpointTest, RejectsDamagedOrMismatchedFiles) {
  std::stringstream buf;
  WriteCheckpoint(buf, SampleCheckpoint());
  const std::string bytes = buf.str();

  std::stringstream truncated(bytes.substr(0, bytes.size() - 3));
  EXPECT_THROW(ReadCheckpoint(truncated), Error);
  std::stringstream trailing(bytes + "x");
  EXPECT_THROW(ReadCheckpoint(trailing), Error);

  std::string v2 = bytes;
  v2.replace(0, 12, "AMUN-CKPT v2");
  std::stringstream version(v2);
  try {
    ReadCheckpoint(version);
    FAIL() << "expected a version error";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("version"), std::string::npos);
  }

  std::stringstream mismatch(bytes);
  try {
    ReadCheckpoint(mismatch, ModelSpec::Mlp({3, 6, 2}));
    FAIL() << "expected a spec mismatch";
  } catch (const Error& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("mlp:3,5,2"), std::string::npos);
    EXPECT_NE(msg.find("mlp:3,6,2"), std::string::npos);
  }
  std::stringstream garbage("not a checkpoint\n");
  EXPECT_THROW(ReadCheckpoint(garbage), Error);
}

TEST(CheckpointTest, ShadowEnsembleDirectoryRoundTrip) {
  const LabeledDataset pool = testing::RandomDataset(20, 3, 2, 1);
  TrainConfig tc;
  tc.epochs = 2;
  const ShadowEnsemble ens = TrainShadowEnsemble(ModelSpec::Mlp({3, 4, 2}), pool, 4, tc, 3);
  const fs::path dir = testing::TempDir("shadows");
  SaveShadowEnsemble(dir.string(), ens);
  const ShadowEnsemble back = LoadShadowEnsemble(dir.string(), pool);
  EXPECT_EQ(back.inclusion, ens.inclusion);
  for (std::size_t k = 0; k < 4; ++k) EXPECT_EQ(back.models[k].params, ens.models[k].params);
  EXPECT_EQ(back.reference_conf, ens.reference_conf);
}

TEST(ConfigTest, ParsesDocumentedKeys) {
  std::stringstream text(
      "# desk run\n"
      "seed = 12\n"
      "blobs.n=300\n"
      "methods = amun, rl ,ga\n"
      "forget_fractions=0.1,0.5\n"
      "access=both\n"
      "attack.eps_init = 0.02\n"
      "model=mlp:20,8,4\n");
  const KeyValueConfig kv = KeyValueConfig::Parse(text);
  const ExperimentConfig cfg = ParseExperimentConfig(kv);
  EXPECT_EQ(cfg.seed, 12u);
  EXPECT_EQ(cfg.blobs.n, 300u);
  ASSERT_EQ(cfg.methods.size(), 3u);
  EXPECT_EQ(cfg.methods[1], UnlearnMethod::kRl);
  EXPECT_EQ(cfg.forget_fractions, (std::vector<double>{0.1, 0.5}));
  EXPECT_EQ(cfg.access, AccessSetting::kBoth);
  EXPECT_EQ(AccessFlags(cfg.access), (std::vector<bool>{true, false}));
  EXPECT_FALSE(cfg.attack_eps_auto);
  EXPECT_DOUBLE_EQ(cfg.attack.eps_init, 0.02);
  EXPECT_EQ(cfg.model.ToString(), "mlp:20,8,4");
  for (const auto& [key, doc] : DocumentedKeys()) EXPECT_FALSE(doc.empty()) << key;
}

TEST(ConfigTest, RejectsUnknownDuplicateAndMalformedLines) {
  std::stringstream unknown("sed=1\n");
  EXPECT_THROW(KeyValueConfig::Parse(unknown), Error);
  std::stringstream dup("seed=1\nseed=2\n");
  EXPECT_THROW(KeyValueConfig::Parse(dup), Error);
  std::stringstream no_eq("seed 1\n");
  EXPECT_THROW(KeyValueConfig::Parse(no_eq), Error);
  std::stringstream bad_value("blobs.n=lots\n");
  EXPECT_THROW(ParseExperimentConfig(KeyValueConfig::Parse(bad_value)), Error);
  std::stringstream odd_k("shadow.k=3\n");
  EXPECT_THROW(ParseExperimentConfig(KeyValueConfig::Parse(odd_k)), Error);
}

TEST(ConfigTest, SetOverridesFileValues) {
  std::stringstream text("seed=1\n");
  KeyValueConfig kv = KeyValueConfig::Parse(text);
  kv.Set("seed", "99");
  EXPECT_EQ(ParseExperimentConfig(kv).seed, 99u);
  EXPECT_THROW(kv.Set("nope", "1"), Error);
  EXPECT_EQ(kv.ToLine(), "seed=99");
}

// A config small enough to run the whole lattice in a few seconds.
ExperimentConfig TinyConfig(const std::string& name) {
  std::stringstream text(
      "blobs.n=120\nblobs.n_test=60\nblobs.d=4\nblobs.m=3\nblobs.spread=0.8\n"
      "model=mlp:4,8,3\ntrain.epochs=15\ntrain.lr=0.2\nunlearn.epochs=2\n"
      "unlearn.lr=0.01\nshadow.k=2\n");
  ExperimentConfig cfg = ParseExperimentConfig(KeyValueConfig::Parse(text));
  cfg.output_dir = testing::TempDir(name).string();
  return cfg;
}

TEST(ExperimentTest, RetrainOnlyHasZeroGap) {
  ExperimentConfig cfg = TinyConfig("retrain_only");
  cfg.methods = {UnlearnMethod::kRetrain};
  cfg.num_base_models = 1;
  cfg.num_subsets = 2;
  cfg.num_runs = 1;
  const ExperimentOutput out = RunExperiment(cfg);
  ASSERT_EQ(out.rows.size(), 2u);
  for (const ResultRow& row : out.rows) {
    ASSERT_TRUE(row.ok) << row.reason;
    EXPECT_DOUBLE_EQ(*row.report.avg_gap, 0.0);
  }
}

TEST(ExperimentTest, LatticeCardinalityAndResumeStability) {
  ExperimentConfig cfg = TinyConfig("lattice");
  cfg.methods = {UnlearnMethod::kAmun, UnlearnMethod::kRl};
  const ExperimentOutput first = RunExperiment(cfg);
  EXPECT_EQ(first.rows.size(), 54u);
  EXPECT_EQ(first.references.size(), 9u);
  std::set<std::tuple<std::size_t, std::size_t, std::size_t, std::string>> tuples;
  for (const ResultRow& row : first.rows) {
    tuples.insert({row.base, row.subset, row.run, row.method});
    EXPECT_TRUE(row.ok) << row.reason;
  }
  EXPECT_EQ(tuples.size(), 54u);
  WriteExperimentFiles(cfg, first);
  auto slurp = [](const fs::path& p) {
    std::ifstream in(p);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
  };
  const std::string results = slurp(fs::path(cfg.output_dir) / "results.csv");
  const std::string summary = slurp(fs::path(cfg.output_dir) / "summary.csv");
  EXPECT_EQ(std::count(results.begin(), results.end(), '\n'), 55);

  // Resuming reads every tuple back from its marker.
  const ExperimentOutput resumed = RunExperiment(cfg);
  WriteExperimentFiles(cfg, resumed);
  EXPECT_EQ(slurp(fs::path(cfg.output_dir) / "results.csv"), results);
  EXPECT_EQ(slurp(fs::path(cfg.output_dir) / "summary.csv"), summary);

  // A fresh directory recomputes and still matches byte for byte.
  ExperimentConfig fresh = cfg;
  fresh.output_dir = testing::TempDir("lattice_fresh").string();
  WriteExperimentFiles(fresh, RunExperiment(fresh));
  EXPECT_EQ(slurp(fs::path(fresh.output_dir) / "results.csv"), results);
}

TEST(ExperimentTest, ResultRowCsvRoundTrip) {
  ResultRow row;
  row.fraction = 0.1;
  row.base = 1;
  row.subset = 2;
  row.run = 0;
  row.method = "amun";
  row.access = "retain";
  row.seed = 123;
  row.report.unlearn_acc = 0.9;
  row.report.ft_auc = 0.51;
  row.report.avg_gap = 1.25;
  const ResultRow back = ParseResultCsvRow(ResultCsvRow(row));
  EXPECT_EQ(ResultCsvRow(back), ResultCsvRow(row));
  EXPECT_EQ(back.seed, 123u);
  EXPECT_FALSE(back.report.fr_auc.has_value());
}

}  // namespace
}  // namespace amun

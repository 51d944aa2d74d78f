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

#ifndef AMUN_EXPERIMENT_HPP_
#define AMUN_EXPERIMENT_HPP_

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "amun/config.hpp"
#include "amun/data_gen.hpp"
#include "amun/mia.hpp"
#include "amun/unlearn.hpp"

namespace amun {

// Seeds of the experiment lattice, all derived from ExperimentConfig::seed.
std::uint64_t DataSeed(const ExperimentConfig& cfg);
std::uint64_t BaseModelSeed(const ExperimentConfig& cfg, std::size_t base);
std::uint64_t SplitSeed(const ExperimentConfig& cfg, std::size_t fraction_index);
std::uint64_t ShadowSeed(const ExperimentConfig& cfg);
std::uint64_t RunSeed(const ExperimentConfig& cfg, std::size_t fraction_index,
                      std::size_t base, std::size_t subset, std::size_t run);

// Train/test sets described by the config (synthetic or IDX).
SyntheticData LoadData(const ExperimentConfig& cfg);

ModelState TrainBaseModel(const ExperimentConfig& cfg, const SyntheticData& data,
                          std::size_t base, TrainStats* stats = nullptr);

// Reference models over train u test, each sample in exactly K/2 of them.
ShadowEnsemble BuildShadows(const ExperimentConfig& cfg, const SyntheticData& data);

// `num_subsets` forget splits for forget_fractions[fraction_index]; with
// `extra` one more (disjoint-seeded) subset is appended for tuning.
std::vector<SplitSpec> MakeSplits(const ExperimentConfig& cfg, const SyntheticData& data,
                                  std::size_t fraction_index, bool extra = false);

// The configured attack with eps_init and the clamp box resolved for a split.
AttackConfig ResolveAttack(const ExperimentConfig& cfg, const SyntheticData& data,
                           const SplitSpec& split, std::uint64_t seed);

UnlearnConfig MakeUnlearnConfig(const ExperimentConfig& cfg, UnlearnMethod method,
                                bool retain_access, std::uint64_t base_seed,
                                std::uint64_t run_seed);

struct ResultRow {
  double fraction = 0.0;
  std::size_t base = 0;
  std::size_t subset = 0;
  std::size_t run = 0;
  std::string method;
  std::string access;
  std::uint64_t seed = 0;
  bool ok = true;
  std::string reason;  // set when !ok
  EvalReport report;
};

std::string ResultCsvHeader();
std::string ResultCsvRow(const ResultRow& row);
ResultRow ParseResultCsvRow(const std::string& line);

struct TunedRate {
  double fraction = 0.0;
  std::string method;
  std::string access;
  double learning_rate = 0.0;
  StepSchedule scheduler;
  double avg_gap = 0.0;
};

struct ExperimentOutput {
  std::vector<ResultRow> references;  // one per (fraction, base, subset)
  std::vector<ResultRow> rows;        // one per lattice tuple
  std::vector<TunedRate> tuned;
};

// Runs the full lattice fraction x base x subset x run x method x access.
// Results and done-markers go to cfg.output_dir; finished tuples are read
// back from their markers instead of being recomputed. Failed runs become
// rows with ok = false.
ExperimentOutput RunExperiment(const ExperimentConfig& cfg, std::ostream* log = nullptr);

// Mean and sample standard deviation per (fraction, method, access).
std::string SummaryCsv(const ExperimentOutput& out);
void WriteExperimentFiles(const ExperimentConfig& cfg, const ExperimentOutput& out);

struct AblationRow {
  std::string set;  // A, AdvL, RL, A_RL, A_RS
  std::size_t size = 0;
  double test_before = 0.0;
  double test_after = 0.0;
  double forget_after = 0.0;
  double test_drop = 0.0;  // percentage points
};

// Fine-tunes the model on each substitute set alone and reports the damage to
// test accuracy.
std::vector<AblationRow> RunAblation(const ModelState& state, const SyntheticData& data,
                                     const SplitSpec& split, const AdvSet& adv,
                                     const UnlearnConfig& cfg, std::uint64_t seed);
std::string AblationCsvHeader();
std::string AblationCsvRow(const AblationRow& row);

struct ContinuousRow {
  std::string method;
  std::string mode;
  std::size_t step = 0;
  EvalReport report;
};

// amun in adaptive and precomputed mode plus rl over the same request schedule.
std::vector<ContinuousRow> RunContinuous(const ExperimentConfig& cfg,
                                         const SyntheticData& data, const ModelState& state,
                                         const ShadowEnsemble* ensemble, std::uint64_t seed);
std::string ContinuousCsvHeader();
std::string ContinuousCsvRow(const ContinuousRow& row);

std::vector<std::string> RunTheoremCheck(const ExperimentConfig& cfg,
                                         std::vector<BoundReport>* reports = nullptr);

}  // namespace amun

#endif  // AMUN_EXPERIMENT_HPP_

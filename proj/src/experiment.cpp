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

#include "amun/experiment.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include "amun/base64.hpp"
#include "amun/idx.hpp"
#include "amun/seed.hpp"
#include "amun/splits.hpp"
#include "amun/theory.hpp"

namespace amun {
namespace {

namespace fs = std::filesystem;

enum SeedTag : std::uint64_t {
  kDataTag = 1,
  kBaseTag,
  kSplitTag,
  kShadowTag,
  kRunTag,
  kTheoremTag,
  kTuneTag,
};

std::string CsvSafe(std::string text) {
  for (char& c : text) {
    if (c == ',' || c == '\n' || c == '\r' || c == '"') c = ';';
  }
  return text;
}

std::string Opt(const std::optional<double>& v) { return v ? FormatDouble(*v) : std::string(); }

std::optional<double> ParseOpt(const std::string& s) {
  if (s.empty()) return std::nullopt;
  return ParseDouble(s);
}

std::optional<std::string> ReadMarker(const fs::path& path) {
  std::ifstream in(path);
  if (!in) return std::nullopt;
  std::string line;
  if (!std::getline(in, line) || line.empty()) return std::nullopt;
  return line;
}

void WriteMarker(const fs::path& path, const std::string& line) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) Fail(ErrorCode::kIo, "cannot write " + tmp.string());
    out << line << '\n';
  }
  fs::rename(tmp, path);
}

std::string ErrorReason(const Error& e) {
  return std::string(ErrorCodeName(e.code())) + ": " + e.what();
}

std::string Fixed(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

std::vector<std::string> SplitCsv(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

// Learning-rate grid for tuning: log-spaced in [1e-6, 1e-1].
// Log-spaced from lo to hi inclusive.
std::vector<double> TuningRates(int points, double lo, double hi) {
  if (points == 1) return {hi};
  std::vector<double> out;
  const double a = std::log10(lo), b = std::log10(hi);
  for (int i = 0; i < points; ++i) out.push_back(std::pow(10.0, a + (b - a) * i / (points - 1)));
  return out;
}

}  // namespace

std::uint64_t DataSeed(const ExperimentConfig& cfg) { return DeriveSeed(cfg.seed, {kDataTag}); }

std::uint64_t BaseModelSeed(const ExperimentConfig& cfg, std::size_t base) {
  return DeriveSeed(cfg.seed, {kBaseTag, base});
}

std::uint64_t SplitSeed(const ExperimentConfig& cfg, std::size_t fraction_index) {
  return DeriveSeed(cfg.seed, {kSplitTag, fraction_index});
}

std::uint64_t ShadowSeed(const ExperimentConfig& cfg) {
  return DeriveSeed(cfg.seed, {kShadowTag});
}

std::uint64_t RunSeed(const ExperimentConfig& cfg, std::size_t fraction_index,
                      std::size_t base, std::size_t subset, std::size_t run) {
  return DeriveSeed(cfg.seed, {kRunTag, fraction_index, base, subset, run});
}

SyntheticData LoadData(const ExperimentConfig& cfg) {
  SyntheticData data;
  switch (cfg.dataset) {
    case DatasetKind::kBlobs: {
      BlobsSpec spec = cfg.blobs;
      spec.seed = DataSeed(cfg);
      data = GenerateBlobs(spec);
      break;
    }
    case DatasetKind::kMoons: {
      MoonsSpec spec = cfg.moons;
      spec.seed = DataSeed(cfg);
      data = GenerateMoons(spec);
      break;
    }
    case DatasetKind::kIdx: {
      Require(!cfg.idx_train_images.empty() && !cfg.idx_train_labels.empty() &&
                  !cfg.idx_test_images.empty() && !cfg.idx_test_labels.empty(),
              "dataset=idx needs idx.train_images, idx.train_labels, idx.test_images and "
              "idx.test_labels");
      data.train = LoadIdx(cfg.idx_train_images, cfg.idx_train_labels);
      data.test = LoadIdx(cfg.idx_test_images, cfg.idx_test_labels,
                          static_cast<SampleId>(data.train.size()));
      Require(data.train.dim() == data.test.dim(), "IDX train and test image sizes differ",
              ErrorCode::kDimensionMismatch);
      const int m = std::max(data.train.num_classes, data.test.num_classes);
      data.train.num_classes = m;
      data.test.num_classes = m;
      break;
    }
  }
  Require(static_cast<int>(data.train.dim()) == cfg.model.input_dim(),
          "model input width " + std::to_string(cfg.model.input_dim()) +
              " does not match data dimension " + std::to_string(data.train.dim()),
          ErrorCode::kDimensionMismatch);
  Require(data.train.num_classes <= cfg.model.num_classes(),
          "model has fewer outputs than the data has classes", ErrorCode::kDimensionMismatch);
  data.train.num_classes = cfg.model.num_classes();
  data.test.num_classes = cfg.model.num_classes();
  return data;
}

ModelState TrainBaseModel(const ExperimentConfig& cfg, const SyntheticData& data,
                          std::size_t base, TrainStats* stats) {
  TrainConfig tc = cfg.train;
  tc.seed = BaseModelSeed(cfg, base);
  IndexSet all(data.train.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  return Train(cfg.model, data.train, all, tc, stats);
}

ShadowEnsemble BuildShadows(const ExperimentConfig& cfg, const SyntheticData& data) {
  return TrainShadowEnsemble(cfg.model, Concat(data.train, data.test), cfg.shadow_k, cfg.train,
                             ShadowSeed(cfg), cfg.taylor);
}

std::vector<SplitSpec> MakeSplits(const ExperimentConfig& cfg, const SyntheticData& data,
                                  std::size_t fraction_index, bool extra) {
  std::vector<SplitSpec> splits =
      SampleSplits(data.train.size(), data.test.size(), cfg.forget_fractions.at(fraction_index),
                   cfg.num_subsets, SplitSeed(cfg, fraction_index));
  if (extra) {
    std::vector<SplitSpec> tune = SampleSplits(
        data.train.size(), data.test.size(), cfg.forget_fractions[fraction_index], 1,
        DeriveSeed(cfg.seed, {kTuneTag, fraction_index}));
    splits.push_back(std::move(tune.front()));
  }
  return splits;
}

AttackConfig ResolveAttack(const ExperimentConfig& cfg, const SyntheticData& data,
                           const SplitSpec& split, std::uint64_t seed) {
  AttackConfig a = cfg.attack;
  a.seed = seed;
  if (cfg.attack_eps_auto) {
    if (split.forget_idx.size() >= 2) {
      a.eps_init = DefaultEpsInit(data.train, split.forget_idx);
    } else {
      IndexSet all(data.train.size());
      for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
      a.eps_init = DefaultEpsInit(data.train, all);
    }
  }
  if (cfg.attack_clamp) a.clamp_box = Box::Uniform(data.train.dim(), 0.0, 1.0);
  return a;
}

UnlearnConfig MakeUnlearnConfig(const ExperimentConfig& cfg, UnlearnMethod method,
                                bool retain_access, std::uint64_t base_seed,
                                std::uint64_t run_seed) {
  UnlearnConfig u = cfg.unlearn;
  u.method = method;
  u.has_retain_access = retain_access;
  u.retrain = cfg.train;
  u.retrain.seed = base_seed;
  u.seed = run_seed;
  return u;
}

std::string ResultCsvHeader() {
  return "fraction,base,subset,run,method,access,seed,status,unlearn_acc,retain_acc,test_acc,"
         "mis,ft_auc,fr_auc,avg_gap,reason";
}

std::string ResultCsvRow(const ResultRow& row) {
  std::string out = FormatDouble(row.fraction) + ',' + std::to_string(row.base) + ',' +
                    std::to_string(row.subset) + ',' + std::to_string(row.run) + ',' +
                    row.method + ',' + row.access + ',' + std::to_string(row.seed) + ',' +
                    (row.ok ? "ok" : "aborted") + ',';
  if (row.ok) {
    const EvalReport& r = row.report;
    out += FormatDouble(r.unlearn_acc) + ',' + FormatDouble(r.retain_acc) + ',' +
           FormatDouble(r.test_acc) + ',' + FormatDouble(r.mis) + ',' + Opt(r.ft_auc) + ',' +
           Opt(r.fr_auc) + ',' + Opt(r.avg_gap) + ',';
  } else {
    out += ",,,,,,," + CsvSafe(row.reason);
  }
  return out;
}

ResultRow ParseResultCsvRow(const std::string& line) {
  const std::vector<std::string> f = SplitCsv(line);
  if (f.size() != 16) Fail(ErrorCode::kFormat, "result row needs 16 fields: " + line);
  ResultRow row;
  try {
    row.fraction = ParseDouble(f[0]);
    row.base = std::stoull(f[1]);
    row.subset = std::stoull(f[2]);
    row.run = std::stoull(f[3]);
    row.method = f[4];
    row.access = f[5];
    row.seed = std::stoull(f[6]);
    row.ok = f[7] == "ok";
    if (row.ok) {
      row.report.unlearn_acc = ParseDouble(f[8]);
      row.report.retain_acc = ParseDouble(f[9]);
      row.report.test_acc = ParseDouble(f[10]);
      row.report.mis = ParseDouble(f[11]);
      row.report.ft_auc = ParseOpt(f[12]);
      row.report.fr_auc = ParseOpt(f[13]);
      row.report.avg_gap = ParseOpt(f[14]);
    }
    row.reason = f[15];
  } catch (const std::logic_error&) {
    Fail(ErrorCode::kFormat, "bad result row: " + line);
  }
  return row;
}

ExperimentOutput RunExperiment(const ExperimentConfig& cfg, std::ostream* log) {
  cfg.Validate();
  const fs::path done_dir = fs::path(cfg.output_dir) / "done";
  fs::create_directories(done_dir);
  const SyntheticData data = LoadData(cfg);
  std::optional<ShadowEnsemble> shadows;
  auto ensemble = [&]() -> const ShadowEnsemble& {
    if (!shadows) {
      if (log) *log << "training " << cfg.shadow_k << " shadow models\n";
      shadows = BuildShadows(cfg, data);
    }
    return *shadows;
  };
  const EvalOptions eval_options{cfg.gamma};
  const std::vector<bool> access_flags = AccessFlags(cfg.access);

  ExperimentOutput out;
  for (std::size_t fi = 0; fi < cfg.forget_fractions.size(); ++fi) {
    const double fraction = cfg.forget_fractions[fi];
    const std::vector<SplitSpec> splits = MakeSplits(cfg, data, fi, cfg.tune);
    std::map<std::pair<std::string, std::string>, TunedRate> tuned;

    for (std::size_t b = 0; b < cfg.num_base_models; ++b) {
      const std::uint64_t base_seed = BaseModelSeed(cfg, b);
      std::optional<ModelState> base;
      auto base_model = [&]() -> const ModelState& {
        if (!base) {
          if (log) *log << "training base model " << b << "\n";
          base = TrainBaseModel(cfg, data, b);
        }
        return *base;
      };
      auto reference_for = [&](const SplitSpec& split, const std::string& tag,
                               std::size_t subset) {
        const fs::path marker = done_dir / ("f" + std::to_string(fi) + "_b" +
                                            std::to_string(b) + "_" + tag + "_ref.row");
        if (auto line = ReadMarker(marker)) return ParseResultCsvRow(*line);
        ResultRow ref;
        ref.fraction = fraction;
        ref.base = b;
        ref.subset = subset;
        ref.method = "retrain";
        ref.access = "retain";
        ref.seed = base_seed;
        try {
          const UnlearnConfig u =
              MakeUnlearnConfig(cfg, UnlearnMethod::kRetrain, true, base_seed, base_seed);
          const ModelState state = Unlearn(base_model(), data.train, split, nullptr, u);
          ref.report = Evaluate(state, data.train, data.test, split, &ensemble(), nullptr,
                                eval_options);
        } catch (const Error& e) {
          ref.ok = false;
          ref.reason = ErrorReason(e);
        }
        WriteMarker(marker, ResultCsvRow(ref));
        return ref;
      };
      auto run_one = [&](const SplitSpec& split, const ResultRow& ref, std::size_t subset,
                         std::size_t run, UnlearnMethod method, bool retain_access,
                         std::uint64_t run_seed, const AdvSet* adv_cached,
                         const TunedRate* rate) {
        ResultRow row;
        row.fraction = fraction;
        row.base = b;
        row.subset = subset;
        row.run = run;
        row.method = std::string(MethodName(method));
        row.access = retain_access ? "retain" : "forget_only";
        row.seed = run_seed;
        try {
          Require(ref.ok, "retrain reference failed: " + ref.reason);
          UnlearnConfig u = MakeUnlearnConfig(cfg, method, retain_access, base_seed, run_seed);
          if (rate != nullptr) {
            u.learning_rate = rate->learning_rate;
            u.scheduler = rate->scheduler;
          }
          const IndexSet forbidden = retain_access ? IndexSet{} : split.retain_idx;
          AccessAudit audit(data.train.size(), forbidden);
          const DatasetView view(data.train, &audit);
          const ModelState state = Unlearn(base_model(), view, split, adv_cached, u);
          if (audit.violations() > 0) {
            Fail(ErrorCode::kAccessViolation,
                 std::to_string(audit.violations()) + " retain reads in forget-only mode");
          }
          row.report = Evaluate(state, data.train, data.test, split, &ensemble(), &ref.report,
                                eval_options);
        } catch (const Error& e) {
          row.ok = false;
          row.reason = ErrorReason(e);
        }
        return row;
      };
      std::map<std::size_t, AdvSet> adv_cache;
      auto adv_for = [&](std::size_t subset, const SplitSpec& split) -> const AdvSet& {
        auto it = adv_cache.find(subset);
        if (it == adv_cache.end()) {
          const AttackConfig attack =
              ResolveAttack(cfg, data, split, DeriveSeed(base_seed, {subset}));
          it = adv_cache.emplace(subset, BuildAdversarialSet(base_model(), attack, data.train,
                                                             split.forget_idx))
                   .first;
        }
        return it->second;
      };

      if (cfg.tune && b == 0) {
        const std::size_t ts = cfg.num_subsets;
        const SplitSpec& split = splits[ts];
        const ResultRow ref = reference_for(split, "tune", ts);
        for (UnlearnMethod method : cfg.methods) {
          if (method == UnlearnMethod::kRetrain) continue;
          for (bool retain_access : access_flags) {
            const std::string mname(MethodName(method));
            const std::string aname = retain_access ? "retain" : "forget_only";
            const fs::path marker =
                done_dir / ("tune_f" + std::to_string(fi) + "_" + mname + "_" + aname + ".row");
            TunedRate best;
            if (auto line = ReadMarker(marker)) {
              const std::vector<std::string> f = SplitCsv(*line);
              Require(f.size() == 6, "bad tuning marker " + marker.string(), ErrorCode::kFormat);
              best = {ParseDouble(f[0]), f[1], f[2], ParseDouble(f[3]),
                      {std::stoi(f[4]), ParseDouble(f[5])}, 0.0};
            } else {
              best = {fraction, mname, aname, cfg.unlearn.learning_rate, cfg.unlearn.scheduler,
                      std::numeric_limits<double>::infinity()};
              const std::uint64_t seed = DeriveSeed(cfg.seed, {kTuneTag, fi, 1});
              const AdvSet* adv = NeedsAdvSet(method) ? &adv_for(ts, split) : nullptr;
              for (double lr : TuningRates(cfg.tune_grid_points, cfg.tune_lr_min, cfg.tune_lr_max)) {
                for (StepSchedule sched : {StepSchedule{0, 1.0}, StepSchedule{1, 0.1},
                                           StepSchedule{5, 0.1}}) {
                  TunedRate candidate{fraction, mname, aname, lr, sched, 0.0};
                  const ResultRow row =
                      run_one(split, ref, ts, 0, method, retain_access, seed, adv, &candidate);
                  if (row.ok && row.report.avg_gap && *row.report.avg_gap < best.avg_gap) {
                    candidate.avg_gap = *row.report.avg_gap;
                    best = candidate;
                  }
                }
              }
              WriteMarker(marker, FormatDouble(best.fraction) + ',' + mname + ',' + aname + ',' +
                                      FormatDouble(best.learning_rate) + ',' +
                                      std::to_string(best.scheduler.period) + ',' +
                                      FormatDouble(best.scheduler.factor));
            }
            if (log) {
              *log << "tuned " << mname << "/" << aname << ": lr=" << best.learning_rate
                   << " decay_period=" << best.scheduler.period << "\n";
            }
            tuned[{mname, aname}] = best;
            out.tuned.push_back(best);
          }
        }
      }

      for (std::size_t s = 0; s < cfg.num_subsets; ++s) {
        const SplitSpec& split = splits[s];
        const ResultRow ref = reference_for(split, "s" + std::to_string(s), s);
        out.references.push_back(ref);
        for (std::size_t r = 0; r < cfg.num_runs; ++r) {
          const std::uint64_t run_seed = RunSeed(cfg, fi, b, s, r);
          for (UnlearnMethod method : cfg.methods) {
            for (bool retain_access : access_flags) {
              const std::string mname(MethodName(method));
              const std::string aname = retain_access ? "retain" : "forget_only";
              const fs::path marker =
                  done_dir / ("f" + std::to_string(fi) + "_b" + std::to_string(b) + "_s" +
                              std::to_string(s) + "_r" + std::to_string(r) + "_" + mname + "_" +
                              aname + ".row");
              if (auto line = ReadMarker(marker)) {
                out.rows.push_back(ParseResultCsvRow(*line));
                continue;
              }
              const AdvSet* adv = nullptr;
              ResultRow row;
              try {
                if (NeedsAdvSet(method) && ref.ok) adv = &adv_for(s, split);
                const auto t = tuned.find({mname, aname});
                row = run_one(split, ref, s, r, method, retain_access, run_seed, adv,
                              t == tuned.end() ? nullptr : &t->second);
              } catch (const Error& e) {
                row.fraction = fraction;
                row.base = b;
                row.subset = s;
                row.run = r;
                row.method = mname;
                row.access = aname;
                row.seed = run_seed;
                row.ok = false;
                row.reason = ErrorReason(e);
              }
              if (log) {
                *log << "f=" << fraction << " b=" << b << " s=" << s << " r=" << r << " "
                     << mname << "/" << aname << (row.ok ? " ok" : " aborted") << "\n";
              }
              WriteMarker(marker, ResultCsvRow(row));
              out.rows.push_back(std::move(row));
            }
          }
        }
      }
    }
  }
  return out;
}

std::string SummaryCsv(const ExperimentOutput& out) {
  struct Acc {
    std::size_t runs = 0;
    std::size_t aborted = 0;
    std::vector<std::vector<double>> values = std::vector<std::vector<double>>(7);
  };
  std::vector<std::string> order;
  std::map<std::string, Acc> groups;
  for (const ResultRow& row : out.rows) {
    const std::string key = FormatDouble(row.fraction) + ',' + row.method + ',' + row.access;
    if (!groups.contains(key)) order.push_back(key);
    Acc& acc = groups[key];
    if (!row.ok) {
      ++acc.aborted;
      continue;
    }
    ++acc.runs;
    const EvalReport& r = row.report;
    const std::optional<double> metrics[7] = {100.0 * r.unlearn_acc, 100.0 * r.retain_acc,
                                              100.0 * r.test_acc,    r.mis,
                                              r.ft_auc,              r.fr_auc,
                                              r.avg_gap};
    for (int k = 0; k < 7; ++k) {
      if (metrics[k]) acc.values[k].push_back(*metrics[k]);
    }
  }
  std::string csv =
      "fraction,method,access,runs,aborted,unlearn_acc_mean,unlearn_acc_sd,retain_acc_mean,"
      "retain_acc_sd,test_acc_mean,test_acc_sd,mis_mean,mis_sd,ft_auc_mean,ft_auc_sd,"
      "fr_auc_mean,fr_auc_sd,avg_gap_mean,avg_gap_sd\n";
  for (const std::string& key : order) {
    const Acc& acc = groups[key];
    csv += key + ',' + std::to_string(acc.runs) + ',' + std::to_string(acc.aborted);
    for (const auto& v : acc.values) {
      if (v.empty()) {
        csv += ",,";
        continue;
      }
      double mean = 0.0;
      for (double x : v) mean += x;
      mean /= static_cast<double>(v.size());
      double ss = 0.0;
      for (double x : v) ss += (x - mean) * (x - mean);
      const double sd = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
      csv += ',' + Fixed(mean) + ',' + Fixed(sd);
    }
    csv += '\n';
  }
  return csv;
}

void WriteExperimentFiles(const ExperimentConfig& cfg, const ExperimentOutput& out) {
  const fs::path dir(cfg.output_dir);
  fs::create_directories(dir);
  auto write = [&](const std::string& name, const std::string& text) {
    std::ofstream f(dir / name, std::ios::binary);
    if (!f) Fail(ErrorCode::kIo, "cannot write " + (dir / name).string());
    f << text;
  };
  std::string results = ResultCsvHeader() + '\n';
  for (const ResultRow& row : out.rows) results += ResultCsvRow(row) + '\n';
  write("results.csv", results);
  std::string refs = ResultCsvHeader() + '\n';
  for (const ResultRow& row : out.references) refs += ResultCsvRow(row) + '\n';
  write("references.csv", refs);
  write("summary.csv", SummaryCsv(out));
  if (!out.tuned.empty()) {
    std::string tuned = "fraction,method,access,lr,decay_period,decay_factor\n";
    for (const TunedRate& t : out.tuned) {
      tuned += FormatDouble(t.fraction) + ',' + t.method + ',' + t.access + ',' +
               FormatDouble(t.learning_rate) + ',' + std::to_string(t.scheduler.period) + ',' +
               FormatDouble(t.scheduler.factor) + '\n';
    }
    write("tuning.csv", tuned);
  }
}

std::vector<AblationRow> RunAblation(const ModelState& state, const SyntheticData& data,
                                     const SplitSpec& split, const AdvSet& adv,
                                     const UnlearnConfig& cfg, std::uint64_t seed) {
  const double before = Accuracy(state, data.test, split.test_idx);
  std::vector<std::pair<std::string, LabeledDataset>> sets;
  sets.emplace_back("A", AdvSetAsDataset(adv, data.train.num_classes));
  for (AblationKind kind :
       {AblationKind::kAdvL, AblationKind::kRl, AblationKind::kARl, AblationKind::kARs}) {
    sets.emplace_back(std::string(AblationName(kind)),
                      AblationSet(kind, data.train, split.forget_idx, adv, seed));
  }
  std::vector<AblationRow> rows;
  for (const auto& [name, set] : sets) {
    const ModelState tuned = FineTune(state, set, cfg);
    AblationRow row;
    row.set = name;
    row.size = set.size();
    row.test_before = before;
    row.test_after = Accuracy(tuned, data.test, split.test_idx);
    row.forget_after = Accuracy(tuned, data.train, split.forget_idx);
    row.test_drop = 100.0 * (row.test_before - row.test_after);
    rows.push_back(row);
  }
  return rows;
}

std::string AblationCsvHeader() { return "set,size,test_before,test_after,forget_after,test_drop"; }

std::string AblationCsvRow(const AblationRow& row) {
  return row.set + ',' + std::to_string(row.size) + ',' + FormatDouble(row.test_before) + ',' +
         FormatDouble(row.test_after) + ',' + FormatDouble(row.forget_after) + ',' +
         FormatDouble(row.test_drop);
}

std::vector<ContinuousRow> RunContinuous(const ExperimentConfig& cfg,
                                         const SyntheticData& data, const ModelState& state,
                                         const ShadowEnsemble* ensemble, std::uint64_t seed) {
  const std::size_t n = data.train.size();
  const std::vector<IndexSet> requests = SampleRequests(
      n, ForgetCount(n, cfg.continuous_fraction), cfg.continuous_steps, DeriveSeed(seed, {1}));
  SplitSpec all_requests;
  for (const IndexSet& r : requests) {
    all_requests.forget_idx.insert(all_requests.forget_idx.end(), r.begin(), r.end());
  }
  const AttackConfig attack = ResolveAttack(cfg, data, all_requests, DeriveSeed(seed, {2}));
  IndexSet test_idx(data.test.size());
  for (std::size_t i = 0; i < test_idx.size(); ++i) test_idx[i] = i;
  const EvalOptions eval_options{cfg.gamma};

  struct Variant {
    UnlearnMethod method;
    AdvMode mode;
    const char* mode_name;
  };
  const Variant variants[] = {{UnlearnMethod::kAmun, AdvMode::kAdaptive, "adaptive"},
                              {UnlearnMethod::kAmun, AdvMode::kPrecomputed, "precomputed"},
                              {UnlearnMethod::kRl, AdvMode::kAdaptive, "none"}};
  std::vector<ContinuousRow> rows;
  for (const Variant& v : variants) {
    const UnlearnConfig u = MakeUnlearnConfig(cfg, v.method, true, seed, DeriveSeed(seed, {3}));
    const std::vector<ContinuousStep> steps = ContinuousUnlearn(
        state, data.train, data.test, test_idx, requests, u, attack, v.mode, ensemble,
        eval_options);
    for (std::size_t k = 0; k < steps.size(); ++k) {
      rows.push_back({std::string(MethodName(v.method)), v.mode_name, k + 1, steps[k].report});
    }
  }
  return rows;
}

std::string ContinuousCsvHeader() {
  return "method,mode,step,unlearn_acc,retain_acc,test_acc,mis,ft_auc,fr_auc,auc_gap";
}

std::string ContinuousCsvRow(const ContinuousRow& row) {
  const EvalReport& r = row.report;
  return row.method + ',' + row.mode + ',' + std::to_string(row.step) + ',' +
         FormatDouble(r.unlearn_acc) + ',' + FormatDouble(r.retain_acc) + ',' +
         FormatDouble(r.test_acc) + ',' + FormatDouble(r.mis) + ',' + Opt(r.ft_auc) + ',' +
         Opt(r.fr_auc) + ',' + Opt(r.auc_gap());
}

std::vector<std::string> RunTheoremCheck(const ExperimentConfig& cfg,
                                         std::vector<BoundReport>* reports) {
  std::vector<std::string> rows;
  for (std::size_t i = 0; i < cfg.theorem_instances; ++i) {
    const std::uint64_t seed = DeriveSeed(cfg.seed, {kTheoremTag, i});
    const BoundReport report = TheoremBoundCheck(MakeConvexInstance(seed, cfg.theorem));
    rows.push_back(BoundCsvRow(seed, report));
    if (reports != nullptr) reports->push_back(report);
  }
  return rows;
}

}  // namespace amun

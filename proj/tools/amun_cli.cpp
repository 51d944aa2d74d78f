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

// Command-line front end: one subcommand per pipeline stage. Every command
// reads the same key=value config, regenerates the data deterministically and
// prints CSV on stdout. Failures print one JSON object on stderr.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "amun/advset_io.hpp"
#include "amun/base64.hpp"
#include "amun/checkpoint.hpp"
#include "amun/config.hpp"
#include "amun/experiment.hpp"
#include "amun/seed.hpp"
#include "amun/splits.hpp"
#include "amun/theory.hpp"

namespace {

using namespace amun;  // NOLINT(build/namespaces)

constexpr int kExitError = 2;
constexpr int kExitUsage = 64;

struct Common {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> overrides;
};

void AddCommon(CLI::App* cmd, Common* common) {
  cmd->add_option("--config", common->config_path, "key=value config file");
  cmd->add_option("--seed", common->seed, "override the config seed");
  cmd->add_option("--set", common->overrides, "extra key=value overrides");
}

struct Loaded {
  KeyValueConfig kv;
  ExperimentConfig cfg;
};

Loaded LoadConfig(const Common& common) {
  Loaded out;
  if (!common.config_path.empty()) out.kv = KeyValueConfig::Load(common.config_path);
  for (const std::string& item : common.overrides) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) {
      Fail(ErrorCode::kInvalidArgument, "--set expects key=value, got '" + item + "'");
    }
    out.kv.Set(item.substr(0, eq), item.substr(eq + 1));
  }
  if (common.seed) out.kv.Set("seed", std::to_string(*common.seed));
  out.cfg = ParseExperimentConfig(out.kv);
  return out;
}

// The split the single-step commands work on.
SplitSpec CommandSplit(const ExperimentConfig& cfg, const SyntheticData& data) {
  return MakeSplits(cfg, data, 0).at(cfg.split_subset);
}

std::uint64_t CommandRunSeed(const ExperimentConfig& cfg) {
  return RunSeed(cfg, 0, 0, cfg.split_subset, 0);
}

AccessSetting ParseAccessFlag(const std::string& access) {
  if (access == "retain") return AccessSetting::kRetain;
  if (access == "forget_only") return AccessSetting::kForgetOnly;
  Fail(ErrorCode::kInvalidArgument, "access must be retain or forget_only, got '" + access + "'");
}

AdvSet BuildCommandAdvSet(const ExperimentConfig& cfg, const SyntheticData& data,
                          const SplitSpec& split, const ModelState& state) {
  const AttackConfig attack =
      ResolveAttack(cfg, data, split, DeriveSeed(CommandRunSeed(cfg), {7}));
  return BuildAdversarialSet(state, attack, data.train, split.forget_idx);
}

void WriteText(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) Fail(ErrorCode::kIo, "cannot write " + path);
  out << text;
}

int CmdTrain(const Common& common, const std::string& out_path, std::size_t base) {
  const Loaded l = LoadConfig(common);
  const SyntheticData data = LoadData(l.cfg);
  TrainStats stats;
  const ModelState state = TrainBaseModel(l.cfg, data, base, &stats);
  SaveCheckpoint(out_path, {state, "train", l.kv.ToLine()});
  std::cout << "base,seed,train_loss,train_acc,test_acc,fingerprint\n"
            << base << ',' << state.rng_seed << ',' << FormatDouble(stats.final_loss) << ','
            << FormatDouble(stats.final_accuracy) << ','
            << FormatDouble(Accuracy(state, data.test)) << ',' << FingerprintHex(Fingerprint(state))
            << '\n';
  return 0;
}

int CmdAttack(const Common& common, const std::string& model_path, const std::string& out_path) {
  const Loaded l = LoadConfig(common);
  const SyntheticData data = LoadData(l.cfg);
  const SplitSpec split = CommandSplit(l.cfg, data);
  const ModelState state = LoadCheckpoint(model_path, l.cfg.model).state;
  const AdvSet adv = BuildCommandAdvSet(l.cfg, data, split, state);
  SaveAdvSet(out_path, adv);
  const DistanceReport d = MakeDistanceReport(adv, data.train.features);
  std::cout << "records,failures,min_delta,median_delta,max_delta,median_nn_distance,"
               "delta_not_local\n"
            << adv.records.size() << ',' << adv.failures.size() << ','
            << FormatDouble(d.min_delta) << ',' << FormatDouble(d.median_delta) << ','
            << FormatDouble(d.max_delta) << ',' << FormatDouble(d.median_nn_distance) << ','
            << (d.delta_not_local ? "true" : "false") << '\n';
  return 0;
}

int CmdUnlearn(const Common& common, const std::string& model_path, const std::string& method,
               const std::string& access, const std::string& adv_path,
               const std::string& out_path) {
  const Loaded l = LoadConfig(common);
  const SyntheticData data = LoadData(l.cfg);
  const SplitSpec split = CommandSplit(l.cfg, data);
  const ModelState state = LoadCheckpoint(model_path, l.cfg.model).state;
  const UnlearnMethod m = ParseMethod(method);
  const bool retain_access = ParseAccessFlag(access) == AccessSetting::kRetain;
  std::optional<AdvSet> adv;
  if (NeedsAdvSet(m)) {
    adv = adv_path.empty() ? BuildCommandAdvSet(l.cfg, data, split, state) : LoadAdvSet(adv_path);
  }
  const UnlearnConfig u =
      MakeUnlearnConfig(l.cfg, m, retain_access, BaseModelSeed(l.cfg, 0), CommandRunSeed(l.cfg));
  AccessAudit audit(data.train.size(), retain_access ? IndexSet{} : split.retain_idx);
  const ModelState out = Unlearn(state, DatasetView(data.train, &audit), split,
                                 adv ? &*adv : nullptr, u);
  if (audit.violations() > 0) {
    Fail(ErrorCode::kAccessViolation,
         std::to_string(audit.violations()) + " retain reads in forget-only mode");
  }
  SaveCheckpoint(out_path, {out, method, l.kv.ToLine() + ";access=" + access});
  std::cout << "method,access,seed,fingerprint\n"
            << method << ',' << access << ',' << u.seed << ','
            << FingerprintHex(Fingerprint(out)) << '\n';
  return 0;
}

int CmdShadows(const Common& common, const std::string& out_dir) {
  const Loaded l = LoadConfig(common);
  const SyntheticData data = LoadData(l.cfg);
  const ShadowEnsemble ens = BuildShadows(l.cfg, data);
  SaveShadowEnsemble(out_dir, ens);
  std::cout << "model,fingerprint,members\n";
  for (std::size_t k = 0; k < ens.size(); ++k) {
    std::size_t members = 0;
    for (bool b : ens.inclusion[k]) members += b ? 1 : 0;
    std::cout << k << ',' << FingerprintHex(Fingerprint(ens.models[k])) << ',' << members << '\n';
  }
  return 0;
}

int CmdEval(const Common& common, const std::string& model_path, const std::string& shadows_dir,
            const std::string& reference_path, const std::string& confidences_path,
            std::string label, const std::string& access) {
  const Loaded l = LoadConfig(common);
  const SyntheticData data = LoadData(l.cfg);
  const SplitSpec split = CommandSplit(l.cfg, data);
  const Checkpoint ckpt = LoadCheckpoint(model_path, l.cfg.model);
  std::optional<ShadowEnsemble> ens;
  if (!shadows_dir.empty()) {
    ens = LoadShadowEnsemble(shadows_dir, Concat(data.train, data.test), l.cfg.taylor);
  }
  const EvalOptions options{l.cfg.gamma};
  std::optional<EvalReport> reference;
  if (!reference_path.empty()) {
    reference = Evaluate(LoadCheckpoint(reference_path, l.cfg.model).state, data.train, data.test,
                         split, ens ? &*ens : nullptr, nullptr, options);
  }
  const EvalReport report = Evaluate(ckpt.state, data.train, data.test, split,
                                     ens ? &*ens : nullptr, reference ? &*reference : nullptr,
                                     options);
  if (!confidences_path.empty()) {
    std::ofstream out(confidences_path, std::ios::binary);
    if (!out) Fail(ErrorCode::kIo, "cannot write " + confidences_path);
    WriteConfidenceCsv(out, ConfidenceDump(ckpt.state, data.train, data.test, split));
  }
  if (label.empty()) label = ckpt.method;
  std::cout << EvalCsvHeader() << '\n'
            << EvalCsvRow(label, l.cfg.seed, split.forget_fraction, access, report) << '\n';
  return 0;
}

int CmdExperiment(const Common& common, bool verbose) {
  const Loaded l = LoadConfig(common);
  const ExperimentOutput out = RunExperiment(l.cfg, verbose ? &std::cerr : nullptr);
  WriteExperimentFiles(l.cfg, out);
  std::cout << SummaryCsv(out);
  return 0;
}

int CmdContinuous(const Common& common, const std::string& shadows_dir,
                  const std::string& out_path) {
  const Loaded l = LoadConfig(common);
  const SyntheticData data = LoadData(l.cfg);
  const ModelState state = TrainBaseModel(l.cfg, data, 0);
  const ShadowEnsemble ens =
      shadows_dir.empty() ? BuildShadows(l.cfg, data)
                          : LoadShadowEnsemble(shadows_dir, Concat(data.train, data.test),
                                               l.cfg.taylor);
  std::string csv = ContinuousCsvHeader() + '\n';
  for (const ContinuousRow& row : RunContinuous(l.cfg, data, state, &ens, BaseModelSeed(l.cfg, 0))) {
    csv += ContinuousCsvRow(row) + '\n';
  }
  WriteText(out_path, csv);
  return 0;
}

int CmdTheorem(const Common& common, const std::string& out_path) {
  const Loaded l = LoadConfig(common);
  std::string csv = BoundCsvHeader() + '\n';
  for (const std::string& row : RunTheoremCheck(l.cfg)) csv += row + '\n';
  WriteText(out_path, csv);
  return 0;
}

int CmdAblation(const Common& common, const std::string& model_path, const std::string& adv_path,
                const std::string& out_path) {
  const Loaded l = LoadConfig(common);
  const SyntheticData data = LoadData(l.cfg);
  const SplitSpec split = CommandSplit(l.cfg, data);
  const ModelState state = model_path.empty() ? TrainBaseModel(l.cfg, data, 0)
                                              : LoadCheckpoint(model_path, l.cfg.model).state;
  const AdvSet adv =
      adv_path.empty() ? BuildCommandAdvSet(l.cfg, data, split, state) : LoadAdvSet(adv_path);
  const UnlearnConfig u = MakeUnlearnConfig(l.cfg, UnlearnMethod::kAmun, false,
                                            BaseModelSeed(l.cfg, 0), CommandRunSeed(l.cfg));
  std::string csv = AblationCsvHeader() + '\n';
  for (const AblationRow& row : RunAblation(state, data, split, adv, u, CommandRunSeed(l.cfg))) {
    csv += AblationCsvRow(row) + '\n';
  }
  WriteText(out_path, csv);
  return 0;
}

void PrintError(const std::string& code, const std::string& message) {
  nlohmann::json j;
  j["error"] = {{"code", code}, {"message", message}};
  std::cerr << j.dump() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adversarial-example based machine unlearning toolkit"};
  app.require_subcommand(1);
  Common common;
  std::string out, model, method = "amun", access = "retain", adv, shadows, reference,
                          confidences, label;
  std::size_t base = 0;
  bool verbose = false;

  CLI::App* train = app.add_subcommand("train", "train an original model");
  AddCommon(train, &common);
  train->add_option("--out", out, "checkpoint to write")->required();
  train->add_option("--base", base, "base model index (selects the seed)");

  CLI::App* attack = app.add_subcommand("attack", "build the adversarial set of the forget set");
  AddCommon(attack, &common);
  attack->add_option("--model", model, "source model checkpoint")->required();
  attack->add_option("--out", out, "AdvSet file to write")->required();

  CLI::App* unlearn = app.add_subcommand("unlearn", "run one unlearning method");
  AddCommon(unlearn, &common);
  unlearn->add_option("--model", model, "model checkpoint")->required();
  unlearn->add_option("--method", method, "unlearning method");
  unlearn->add_option("--access", access, "retain | forget_only");
  unlearn->add_option("--adv", adv, "AdvSet file (built on the fly when omitted)");
  unlearn->add_option("--out", out, "checkpoint to write")->required();

  CLI::App* eval = app.add_subcommand("eval", "evaluate a model on the configured split");
  AddCommon(eval, &common);
  eval->add_option("--model", model, "model checkpoint")->required();
  eval->add_option("--shadows", shadows, "shadow ensemble directory");
  eval->add_option("--reference", reference, "retrained reference checkpoint");
  eval->add_option("--confidences", confidences, "write the confidence dump CSV here");
  eval->add_option("--label", label, "method label of the output row");
  eval->add_option("--access", access, "access label of the output row");

  CLI::App* shadow_cmd = app.add_subcommand("shadows", "train the reference model ensemble");
  AddCommon(shadow_cmd, &common);
  shadow_cmd->add_option("--out", out, "output directory")->required();

  CLI::App* experiment = app.add_subcommand("experiment", "run the full experiment lattice");
  AddCommon(experiment, &common);
  experiment->add_flag("--verbose", verbose, "log progress to stderr");

  CLI::App* continuous = app.add_subcommand("continuous", "sequential unlearning requests");
  AddCommon(continuous, &common);
  continuous->add_option("--shadows", shadows, "shadow ensemble directory");
  continuous->add_option("--out", out, "CSV to write (stdout when omitted)");

  CLI::App* theorem = app.add_subcommand("theorem-check", "check the distance bound");
  AddCommon(theorem, &common);
  theorem->add_option("--out", out, "CSV to write (stdout when omitted)");

  CLI::App* ablation = app.add_subcommand("ablation", "fine-tune on substitutes of D_A");
  AddCommon(ablation, &common);
  ablation->add_option("--model", model, "model checkpoint (trained when omitted)");
  ablation->add_option("--adv", adv, "AdvSet file (built when omitted)");
  ablation->add_option("--out", out, "CSV to write (stdout when omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    PrintError("usage", e.what());
    return kExitUsage;
  }

  try {
    if (train->parsed()) return CmdTrain(common, out, base);
    if (attack->parsed()) return CmdAttack(common, model, out);
    if (unlearn->parsed()) return CmdUnlearn(common, model, method, access, adv, out);
    if (eval->parsed()) {
      return CmdEval(common, model, shadows, reference, confidences, label, access);
    }
    if (shadow_cmd->parsed()) return CmdShadows(common, out);
    if (experiment->parsed()) return CmdExperiment(common, verbose);
    if (continuous->parsed()) return CmdContinuous(common, shadows, out);
    if (theorem->parsed()) return CmdTheorem(common, out);
    if (ablation->parsed()) return CmdAblation(common, model, adv, out);
  } catch (const Error& e) {
    PrintError(std::string(ErrorCodeName(e.code())), e.what());
    return kExitError;
  } catch (const std::exception& e) {
    PrintError("internal", e.what());
    return kExitError;
  }
  return kExitUsage;
}

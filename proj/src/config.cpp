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

#include "amun/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "amun/base64.hpp"

namespace amun {
namespace {

std::string Trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

bool IsKnown(const std::string& key) {
  const auto& keys = DocumentedKeys();
  return std::any_of(keys.begin(), keys.end(), [&](const auto& e) { return e.first == key; });
}

[[noreturn]] void BadValue(const std::string& key, const std::string& value,
                           const char* want) {
  Fail(ErrorCode::kInvalidArgument,
       "config key '" + key + "': '" + value + "' is not " + want);
}

}  // namespace

const std::vector<std::pair<std::string, std::string>>& DocumentedKeys() {
  static const std::vector<std::pair<std::string, std::string>> keys = {
      {"seed", "root seed; every other seed is derived from it"},
      {"output_dir", "directory for experiment results and done-markers"},
      {"dataset", "blobs | moons | idx"},
      {"blobs.n", "training samples"},
      {"blobs.n_test", "held-out test samples"},
      {"blobs.d", "feature dimension"},
      {"blobs.m", "number of classes"},
      {"blobs.spread", "per-coordinate std around each class center"},
      {"moons.n", "training samples"},
      {"moons.n_test", "held-out test samples"},
      {"moons.noise", "Gaussian noise std"},
      {"idx.train_images", "IDX image file of the training set"},
      {"idx.train_labels", "IDX label file of the training set"},
      {"idx.test_images", "IDX image file of the test set"},
      {"idx.test_labels", "IDX label file of the test set"},
      {"model", "architecture, e.g. mlp:20,64,64,4 or logistic:2,2"},
      {"train.lr", "initial SGD learning rate"},
      {"train.epochs", "training epochs"},
      {"train.batch", "mini-batch size"},
      {"train.decay_period", "epochs between learning-rate decays (0 = constant)"},
      {"train.decay_factor", "learning-rate multiplier per decay"},
      {"train.weight_decay", "L2 penalty coefficient"},
      {"unlearn.epochs", "fine-tuning epochs of the unlearning methods"},
      {"unlearn.lr", "fine-tuning learning rate"},
      {"unlearn.batch", "fine-tuning mini-batch size"},
      {"unlearn.decay_period", "epochs between learning-rate decays (0 = constant)"},
      {"unlearn.decay_factor", "learning-rate multiplier per decay"},
      {"unlearn.salun_ratio", "share of parameters kept by the saliency mask"},
      {"unlearn.l1_lambda", "l1 penalty of l1_sparse"},
      {"unlearn.large_forget_threshold", "forget fraction that drops D_F from AMUN's set"},
      {"unlearn.large_forget_variant", "force the large-forget composition (true/false)"},
      {"unlearn.bs_eps", "FGSM step of the boundary-shrink baseline (0 = auto)"},
      {"attack.kind", "pgd | ffgsm"},
      {"attack.steps", "attack iterations per eps"},
      {"attack.step_fraction", "step size as a fraction of eps"},
      {"attack.eps_init", "auto (1% of median NN distance) or a positive number"},
      {"attack.max_doublings", "eps doublings before giving up"},
      {"attack.restarts", "random restarts of the ffgsm attack"},
      {"attack.clamp", "clamp adversarial points into [0,1]^d (true/false)"},
      {"forget_fractions", "comma-separated forget fractions in (0,1)"},
      {"methods", "comma-separated: amun,amun_salun,ft,rl,ga,bs,l1_sparse,salun,retrain"},
      {"access", "retain | forget_only | both"},
      {"num_base_models", "independently trained original models"},
      {"num_subsets", "forget subsets per fraction"},
      {"num_runs", "unlearning runs per subset"},
      {"split.subset", "subset index used by the attack/unlearn/eval commands"},
      {"shadow.k", "reference models (even)"},
      {"shadow.gamma", "likelihood-ratio threshold of the membership score"},
      {"taylor.temperature", "soft-margin Taylor softmax temperature"},
      {"taylor.order", "soft-margin Taylor softmax expansion order (even)"},
      {"taylor.margin", "soft-margin Taylor softmax true-class margin"},
      {"tune", "grid-search the unlearning learning rate on an extra subset"},
      {"tune.grid_points", "log-spaced learning rates between tune.lr_min and tune.lr_max"},
      {"tune.lr_min", "smallest learning rate of the tuning grid"},
      {"tune.lr_max", "largest learning rate of the tuning grid"},
      {"continuous.steps", "number of consecutive forget requests"},
      {"continuous.fraction", "training fraction forgotten per request"},
      {"theorem.instances", "convex instances checked by theorem-check"},
      {"theorem.n", "samples per convex instance"},
      {"theorem.separation", "distance between the two class centers"},
      {"theorem.spread", "per-coordinate std of a convex instance"},
      {"theorem.tolerance", "largest per-sample loss accepted after training"},
  };
  return keys;
}

KeyValueConfig KeyValueConfig::Parse(std::istream& in, const std::string& source) {
  KeyValueConfig cfg;
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = Trim(std::string_view(raw).substr(0, hash));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = source + ":" + std::to_string(line_no);
    if (eq == std::string::npos) {
      Fail(ErrorCode::kFormat, where + ": expected key = value");
    }
    const std::string key = Trim(std::string_view(line).substr(0, eq));
    const std::string value = Trim(std::string_view(line).substr(eq + 1));
    if (cfg.Has(key)) Fail(ErrorCode::kFormat, where + ": duplicate key '" + key + "'");
    if (!IsKnown(key)) Fail(ErrorCode::kFormat, where + ": unknown key '" + key + "'");
    cfg.values_[key] = value;
  }
  return cfg;
}

KeyValueConfig KeyValueConfig::Load(const std::string& path) {
  std::ifstream in(path);
  if (!in) Fail(ErrorCode::kIo, "cannot open config " + path);
  return Parse(in, path);
}

void KeyValueConfig::Set(const std::string& key, const std::string& value) {
  if (!IsKnown(key)) Fail(ErrorCode::kInvalidArgument, "unknown config key '" + key + "'");
  values_[key] = value;
}

std::string KeyValueConfig::String(const std::string& key, const std::string& fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

long long KeyValueConfig::Int(const std::string& key, long long fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  long long v = 0;
  const auto& s = it->second;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) BadValue(key, s, "an integer");
  return v;
}

std::uint64_t KeyValueConfig::Unsigned(const std::string& key, std::uint64_t fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  std::uint64_t v = 0;
  const auto& s = it->second;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) BadValue(key, s, "an unsigned integer");
  return v;
}

double KeyValueConfig::Real(const std::string& key, double fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  try {
    return ParseDouble(it->second);
  } catch (const Error&) {
    BadValue(key, it->second, "a number");
  }
}

bool KeyValueConfig::Bool(const std::string& key, bool fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  if (it->second == "true" || it->second == "1") return true;
  if (it->second == "false" || it->second == "0") return false;
  BadValue(key, it->second, "true/false");
}

std::vector<std::string> KeyValueConfig::List(const std::string& key,
                                              const std::vector<std::string>& fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  std::vector<std::string> out;
  std::stringstream ss(it->second);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = Trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::string KeyValueConfig::ToLine() const {
  std::string out;
  for (const auto& [k, v] : values_) {
    if (!out.empty()) out += ';';
    out += k + '=' + v;
  }
  return out;
}

std::string_view AccessName(AccessSetting access) {
  switch (access) {
    case AccessSetting::kRetain:
      return "retain";
    case AccessSetting::kForgetOnly:
      return "forget_only";
    case AccessSetting::kBoth:
      return "both";
  }
  return "unknown";
}

std::vector<bool> AccessFlags(AccessSetting access) {
  switch (access) {
    case AccessSetting::kRetain:
      return {true};
    case AccessSetting::kForgetOnly:
      return {false};
    case AccessSetting::kBoth:
      return {true, false};
  }
  return {};
}

void ExperimentConfig::Validate() const {
  model.Validate();
  train.Validate();
  unlearn.Validate();
  attack.Validate();
  taylor.Validate();
  Require(!forget_fractions.empty(), "forget_fractions must not be empty");
  for (double f : forget_fractions) {
    Require(f > 0.0 && f < 1.0, "forget fractions must lie in (0,1)");
  }
  Require(!methods.empty(), "methods must not be empty");
  Require(num_base_models >= 1 && num_subsets >= 1 && num_runs >= 1,
          "num_base_models, num_subsets and num_runs must be >= 1");
  Require(split_subset < num_subsets, "split.subset must be < num_subsets");
  Require(shadow_k >= 2 && shadow_k % 2 == 0, "shadow.k must be even and >= 2");
  Require(gamma > 0.0, "shadow.gamma must be > 0");
  Require(tune_grid_points >= 1, "tune.grid_points must be >= 1");
  Require(tune_lr_min > 0.0 && tune_lr_min <= tune_lr_max,
          "tuning grid needs 0 < tune.lr_min <= tune.lr_max");
  Require(continuous_steps >= 1, "continuous.steps must be >= 1");
  Require(continuous_fraction > 0.0 && continuous_fraction < 1.0,
          "continuous.fraction must lie in (0,1)");
  Require(theorem_instances >= 1, "theorem.instances must be >= 1");
}

ExperimentConfig ParseExperimentConfig(const KeyValueConfig& kv) {
  ExperimentConfig c;
  c.seed = kv.Unsigned("seed", c.seed);
  c.output_dir = kv.String("output_dir", c.output_dir);

  const std::string dataset = kv.String("dataset", "blobs");
  if (dataset == "blobs") {
    c.dataset = DatasetKind::kBlobs;
  } else if (dataset == "moons") {
    c.dataset = DatasetKind::kMoons;
  } else if (dataset == "idx") {
    c.dataset = DatasetKind::kIdx;
  } else {
    BadValue("dataset", dataset, "blobs, moons or idx");
  }
  c.blobs.n = kv.Unsigned("blobs.n", c.blobs.n);
  c.blobs.n_test = kv.Unsigned("blobs.n_test", c.blobs.n_test);
  c.blobs.d = static_cast<int>(kv.Int("blobs.d", c.blobs.d));
  c.blobs.m = static_cast<int>(kv.Int("blobs.m", c.blobs.m));
  c.blobs.spread = kv.Real("blobs.spread", c.blobs.spread);
  c.moons.n = kv.Unsigned("moons.n", c.moons.n);
  c.moons.n_test = kv.Unsigned("moons.n_test", c.moons.n_test);
  c.moons.noise = kv.Real("moons.noise", c.moons.noise);
  c.idx_train_images = kv.String("idx.train_images", "");
  c.idx_train_labels = kv.String("idx.train_labels", "");
  c.idx_test_images = kv.String("idx.test_images", "");
  c.idx_test_labels = kv.String("idx.test_labels", "");

  if (kv.Has("model")) {
    c.model = ModelSpec::Parse(kv.String("model", ""));
  } else if (c.dataset == DatasetKind::kMoons) {
    c.model = ModelSpec::Mlp({2, 64, 64, 2});
  } else if (c.dataset == DatasetKind::kBlobs) {
    c.model = ModelSpec::Mlp({c.blobs.d, 64, 64, c.blobs.m});
  }

  c.train.learning_rate = kv.Real("train.lr", c.train.learning_rate);
  c.train.epochs = static_cast<int>(kv.Int("train.epochs", c.train.epochs));
  c.train.batch_size = static_cast<int>(kv.Int("train.batch", c.train.batch_size));
  c.train.scheduler.period = static_cast<int>(kv.Int("train.decay_period", 0));
  c.train.scheduler.factor = kv.Real("train.decay_factor", 1.0);
  c.train.weight_decay = kv.Real("train.weight_decay", c.train.weight_decay);

  c.unlearn.epochs = static_cast<int>(kv.Int("unlearn.epochs", c.unlearn.epochs));
  c.unlearn.learning_rate = kv.Real("unlearn.lr", c.unlearn.learning_rate);
  c.unlearn.batch_size = static_cast<int>(kv.Int("unlearn.batch", c.unlearn.batch_size));
  c.unlearn.scheduler.period = static_cast<int>(kv.Int("unlearn.decay_period", 0));
  c.unlearn.scheduler.factor = kv.Real("unlearn.decay_factor", 1.0);
  c.unlearn.salun_ratio = kv.Real("unlearn.salun_ratio", c.unlearn.salun_ratio);
  c.unlearn.l1_lambda = kv.Real("unlearn.l1_lambda", c.unlearn.l1_lambda);
  c.unlearn.large_forget_threshold =
      kv.Real("unlearn.large_forget_threshold", c.unlearn.large_forget_threshold);
  c.unlearn.large_forget_variant =
      kv.Bool("unlearn.large_forget_variant", c.unlearn.large_forget_variant);
  c.unlearn.bs_eps = kv.Real("unlearn.bs_eps", c.unlearn.bs_eps);

  const std::string kind = kv.String("attack.kind", "pgd");
  if (kind == "pgd") {
    c.attack.kind = AttackKind::kPgd;
  } else if (kind == "ffgsm") {
    c.attack.kind = AttackKind::kFfgsm;
  } else {
    BadValue("attack.kind", kind, "pgd or ffgsm");
  }
  c.attack.steps = static_cast<int>(kv.Int("attack.steps", c.attack.steps));
  c.attack.step_fraction = kv.Real("attack.step_fraction", c.attack.step_fraction);
  const std::string eps = kv.String("attack.eps_init", "auto");
  c.attack_eps_auto = eps == "auto";
  if (!c.attack_eps_auto) c.attack.eps_init = kv.Real("attack.eps_init", 0.0);
  c.attack.max_doublings = static_cast<int>(kv.Int("attack.max_doublings", c.attack.max_doublings));
  c.attack.restarts = static_cast<int>(kv.Int("attack.restarts", c.attack.restarts));
  c.attack_clamp = kv.Bool("attack.clamp", c.attack_clamp);

  c.forget_fractions.clear();
  for (const auto& f : kv.List("forget_fractions", {"0.1"})) {
    try {
      c.forget_fractions.push_back(ParseDouble(f));
    } catch (const Error&) {
      BadValue("forget_fractions", f, "a number");
    }
  }
  c.methods.clear();
  for (const auto& m : kv.List("methods", {"amun"})) c.methods.push_back(ParseMethod(m));
  const std::string access = kv.String("access", "retain");
  if (access == "retain") {
    c.access = AccessSetting::kRetain;
  } else if (access == "forget_only") {
    c.access = AccessSetting::kForgetOnly;
  } else if (access == "both") {
    c.access = AccessSetting::kBoth;
  } else {
    BadValue("access", access, "retain, forget_only or both");
  }
  c.num_base_models = kv.Unsigned("num_base_models", c.num_base_models);
  c.num_subsets = kv.Unsigned("num_subsets", c.num_subsets);
  c.num_runs = kv.Unsigned("num_runs", c.num_runs);
  c.split_subset = kv.Unsigned("split.subset", c.split_subset);

  c.shadow_k = kv.Unsigned("shadow.k", c.shadow_k);
  c.gamma = kv.Real("shadow.gamma", c.gamma);
  c.taylor.temperature = kv.Real("taylor.temperature", c.taylor.temperature);
  c.taylor.order = static_cast<int>(kv.Int("taylor.order", c.taylor.order));
  c.taylor.margin = kv.Real("taylor.margin", c.taylor.margin);

  c.tune = kv.Bool("tune", c.tune);
  c.tune_grid_points = static_cast<int>(kv.Int("tune.grid_points", c.tune_grid_points));
  c.tune_lr_min = kv.Real("tune.lr_min", c.tune_lr_min);
  c.tune_lr_max = kv.Real("tune.lr_max", c.tune_lr_max);

  c.continuous_steps = kv.Unsigned("continuous.steps", c.continuous_steps);
  c.continuous_fraction = kv.Real("continuous.fraction", c.continuous_fraction);

  c.theorem_instances = kv.Unsigned("theorem.instances", c.theorem_instances);
  c.theorem.n = kv.Unsigned("theorem.n", c.theorem.n);
  c.theorem.separation = kv.Real("theorem.separation", c.theorem.separation);
  c.theorem.spread = kv.Real("theorem.spread", c.theorem.spread);
  c.theorem.training.tolerance = kv.Real("theorem.tolerance", c.theorem.training.tolerance);

  c.Validate();
  return c;
}

}  // namespace amun

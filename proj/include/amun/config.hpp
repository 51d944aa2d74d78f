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

#ifndef AMUN_CONFIG_HPP_
#define AMUN_CONFIG_HPP_

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "amun/attacks.hpp"
#include "amun/data_gen.hpp"
#include "amun/mia.hpp"
#include "amun/model.hpp"
#include "amun/theory.hpp"
#include "amun/train.hpp"
#include "amun/unlearn.hpp"

namespace amun {

// Plain "key = value" lines; '#' starts a comment. Keys must be known and may
// appear once.
class KeyValueConfig {
 public:
  static KeyValueConfig Parse(std::istream& in, const std::string& source = "<input>");
  static KeyValueConfig Load(const std::string& path);

  void Set(const std::string& key, const std::string& value);
  bool Has(const std::string& key) const { return values_.contains(key); }
  const std::map<std::string, std::string>& values() const { return values_; }

  std::string String(const std::string& key, const std::string& fallback) const;
  long long Int(const std::string& key, long long fallback) const;
  std::uint64_t Unsigned(const std::string& key, std::uint64_t fallback) const;
  double Real(const std::string& key, double fallback) const;
  bool Bool(const std::string& key, bool fallback) const;
  std::vector<std::string> List(const std::string& key,
                                const std::vector<std::string>& fallback) const;

  // key=value pairs joined by ';' in key order, for checkpoint provenance.
  std::string ToLine() const;

 private:
  std::map<std::string, std::string> values_;
};

// Every accepted key with a one-line description.
const std::vector<std::pair<std::string, std::string>>& DocumentedKeys();

enum class DatasetKind { kBlobs, kMoons, kIdx };
enum class AccessSetting { kRetain, kForgetOnly, kBoth };

// Training defaults of the synthetic desk setting: long enough at a high rate
// for the original model to reach ~100% train accuracy.
inline TrainConfig DeskTrainConfig() {
  TrainConfig t;
  t.learning_rate = 0.2;
  t.epochs = 300;
  t.batch_size = 32;
  return t;
}

// Fine-tuning rate picked by the learning-rate grid search on the desk
// instance for both AMUN and RL.
inline UnlearnConfig DeskUnlearnConfig() {
  UnlearnConfig u;
  u.learning_rate = 0.1;
  return u;
}

struct ExperimentConfig {
  std::uint64_t seed = 0;
  std::string output_dir = "amun_out";

  DatasetKind dataset = DatasetKind::kBlobs;
  BlobsSpec blobs;
  MoonsSpec moons;
  std::string idx_train_images, idx_train_labels, idx_test_images, idx_test_labels;

  ModelSpec model = ModelSpec::Mlp({20, 64, 64, 4});
  TrainConfig train = DeskTrainConfig();
  UnlearnConfig unlearn = DeskUnlearnConfig();  // method and access are set per run
  AttackConfig attack;
  bool attack_eps_auto = true;  // eps_init from the forget set's NN distances
  bool attack_clamp = true;     // keep adversarial points inside [0,1]^d

  std::vector<double> forget_fractions{0.1};
  std::vector<UnlearnMethod> methods{UnlearnMethod::kAmun};
  AccessSetting access = AccessSetting::kRetain;
  std::size_t num_base_models = 3;
  std::size_t num_subsets = 3;
  std::size_t num_runs = 3;
  std::size_t split_subset = 0;  // subset used by the single-step commands

  std::size_t shadow_k = 16;
  TaylorSoftmaxConfig taylor;
  double gamma = 2.0;

  bool tune = false;
  int tune_grid_points = 6;
  double tune_lr_min = 1e-6;
  double tune_lr_max = 1e-1;

  std::size_t continuous_steps = 5;
  double continuous_fraction = 0.02;

  std::size_t theorem_instances = 50;
  InstanceOptions theorem;

  void Validate() const;
};

ExperimentConfig ParseExperimentConfig(const KeyValueConfig& kv);

std::string_view AccessName(AccessSetting access);
// Access flags covered by a setting, retain first.
std::vector<bool> AccessFlags(AccessSetting access);

}  // namespace amun

#endif  // AMUN_CONFIG_HPP_

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

#ifndef AMUN_CHECKPOINT_HPP_
#define AMUN_CHECKPOINT_HPP_

#include <iosfwd>
#include <optional>
#include <string>

#include "amun/mia.hpp"
#include "amun/model.hpp"

namespace amun {

// On disk:
//   AMUN-CKPT v1
//   spec=<ModelSpec::ToString()>
//   method=<producer, e.g. train or amun>
//   config=<single-line config provenance>
//   seed=<ModelState::rng_seed>
//   params=<count>
//   <empty line>
//   <count little-endian 8-byte reals in layer order>
struct Checkpoint {
  ModelState state;
  std::string method;
  std::string config;
};

void WriteCheckpoint(std::ostream& out, const Checkpoint& ckpt);
// Throws kFormat on a bad magic, another version, a parameter count that does
// not fit the spec, truncation or trailing bytes; kInvalidArgument naming both
// specs when `expected` is given and differs.
Checkpoint ReadCheckpoint(std::istream& in,
                          const std::optional<ModelSpec>& expected = std::nullopt);

void SaveCheckpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint LoadCheckpoint(const std::string& path,
                          const std::optional<ModelSpec>& expected = std::nullopt);

// A shadow ensemble directory holds inclusion.csv (one 0/1 row per model) and
// shadow_<k>.ckpt. The pool is regenerated by the caller.
void SaveShadowEnsemble(const std::string& dir, const ShadowEnsemble& ensemble);
ShadowEnsemble LoadShadowEnsemble(const std::string& dir, const LabeledDataset& pool,
                                  const TaylorSoftmaxConfig& taylor = {});

}  // namespace amun

#endif  // AMUN_CHECKPOINT_HPP_

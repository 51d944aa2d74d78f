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

#ifndef AMUN_DATA_GEN_HPP_
#define AMUN_DATA_GEN_HPP_

#include <cstddef>
#include <cstdint>

#include "amun/dataset.hpp"

namespace amun {

struct BlobsSpec {
  std::size_t n = 2000;       // training samples
  std::size_t n_test = 1000;  // held-out samples from the same distribution
  int d = 20;
  int m = 4;
  double spread = 1.5;  // per-coordinate std of a sample around its center
  std::uint64_t seed = 0;
};

struct MoonsSpec {
  std::size_t n = 1000;
  std::size_t n_test = 500;
  double noise = 0.1;
  std::uint64_t seed = 0;
};

struct SyntheticData {
  LabeledDataset train;  // ids 0..n-1
  LabeledDataset test;   // ids n..n+n_test-1
};

// Gaussian blobs around m centers drawn from N(0, I_d). Labels are stratified
// (class of sample i is i mod m before shuffling) and both sets are min-max
// scaled into [0,1]^d with one shared fit.
SyntheticData GenerateBlobs(const BlobsSpec& spec);

// Two interleaved half circles with Gaussian noise, scaled into [0,1]^2.
SyntheticData GenerateMoons(const MoonsSpec& spec);

}  // namespace amun

#endif  // AMUN_DATA_GEN_HPP_

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

#ifndef AMUN_SPLITS_HPP_
#define AMUN_SPLITS_HPP_

#include <cstddef>
#include <cstdint>
#include <vector>

#include "amun/dataset.hpp"

namespace amun {

// Number of forget samples for a fraction of n: round(fraction * n).
std::size_t ForgetCount(std::size_t n, double fraction);

// `num_subsets` independent uniform forget sets of round(fraction * n_train)
// rows each. Index sets come back sorted; test_idx covers the whole test set.
std::vector<SplitSpec> SampleSplits(std::size_t n_train, std::size_t n_test,
                                    double fraction, std::size_t num_subsets,
                                    std::uint64_t seed);

// Splits the rows into `steps` disjoint forget requests of `count` each.
std::vector<IndexSet> SampleRequests(std::size_t n_train, std::size_t count,
                                     std::size_t steps, std::uint64_t seed);

}  // namespace amun

#endif  // AMUN_SPLITS_HPP_

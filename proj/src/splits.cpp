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

#include "amun/splits.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "amun/seed.hpp"

namespace amun {

std::size_t ForgetCount(std::size_t n, double fraction) {
  Require(fraction > 0.0 && fraction < 1.0, "forget fraction must lie in (0,1)");
  const auto count = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
  Require(count > 0, "forget fraction " + std::to_string(fraction) + " of " +
                         std::to_string(n) + " samples rounds to 0");
  Require(count < n, "forget fraction leaves no retain samples");
  return count;
}

std::vector<SplitSpec> SampleSplits(std::size_t n_train, std::size_t n_test,
                                    double fraction, std::size_t num_subsets,
                                    std::uint64_t seed) {
  const std::size_t k = ForgetCount(n_train, fraction);
  std::vector<SplitSpec> out;
  out.reserve(num_subsets);
  for (std::size_t s = 0; s < num_subsets; ++s) {
    std::mt19937_64 rng(DeriveSeed(seed, {s}));
    IndexSet order(n_train);
    for (std::size_t i = 0; i < n_train; ++i) order[i] = i;
    std::shuffle(order.begin(), order.end(), rng);
    SplitSpec split;
    split.forget_idx.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k));
    split.retain_idx.assign(order.begin() + static_cast<std::ptrdiff_t>(k), order.end());
    std::sort(split.forget_idx.begin(), split.forget_idx.end());
    std::sort(split.retain_idx.begin(), split.retain_idx.end());
    split.test_idx.resize(n_test);
    for (std::size_t i = 0; i < n_test; ++i) split.test_idx[i] = i;
    split.forget_fraction = fraction;
    split.seed = seed;
    out.push_back(std::move(split));
  }
  return out;
}

std::vector<IndexSet> SampleRequests(std::size_t n_train, std::size_t count,
                                     std::size_t steps, std::uint64_t seed) {
  Require(count > 0, "request size must be > 0");
  Require(count * steps < n_train, "requests would forget the whole training set");
  std::mt19937_64 rng(seed);
  IndexSet order(n_train);
  for (std::size_t i = 0; i < n_train; ++i) order[i] = i;
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<IndexSet> out(steps);
  for (std::size_t s = 0; s < steps; ++s) {
    auto first = order.begin() + static_cast<std::ptrdiff_t>(s * count);
    out[s].assign(first, first + static_cast<std::ptrdiff_t>(count));
    std::sort(out[s].begin(), out[s].end());
  }
  return out;
}

}  // namespace amun

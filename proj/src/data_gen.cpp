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

#include "amun/data_gen.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace amun {
namespace {

// Shuffles the rows in place.
void ShuffleRows(LabeledDataset* data, std::mt19937_64& rng) {
  std::vector<std::size_t> order(data->size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::shuffle(order.begin(), order.end(), rng);
  Matrix features(data->features.rows(), data->features.cols());
  std::vector<int> labels(order.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    features.row(static_cast<Eigen::Index>(i)) =
        data->features.row(static_cast<Eigen::Index>(order[i]));
    labels[i] = data->labels[order[i]];
  }
  data->features = std::move(features);
  data->labels = std::move(labels);
}

void ScaleJointly(SyntheticData* out) {
  const Eigen::Index d = out->train.features.cols();
  for (Eigen::Index k = 0; k < d; ++k) {
    double lo = out->train.features.col(k).minCoeff();
    double hi = out->train.features.col(k).maxCoeff();
    if (out->test.size() > 0) {
      lo = std::min(lo, out->test.features.col(k).minCoeff());
      hi = std::max(hi, out->test.features.col(k).maxCoeff());
    }
    const double range = hi - lo;
    for (LabeledDataset* set : {&out->train, &out->test}) {
      if (set->size() == 0) continue;
      if (range > 0.0) {
        set->features.col(k) = (set->features.col(k).array() - lo) / range;
      } else {
        set->features.col(k).setConstant(0.5);
      }
    }
  }
}

void AssignIds(SyntheticData* out) {
  out->train.ids.resize(out->train.size());
  for (std::size_t i = 0; i < out->train.size(); ++i) out->train.ids[i] = static_cast<SampleId>(i);
  out->test.ids.resize(out->test.size());
  for (std::size_t i = 0; i < out->test.size(); ++i) {
    out->test.ids[i] = static_cast<SampleId>(out->train.size() + i);
  }
}

}  // namespace

SyntheticData GenerateBlobs(const BlobsSpec& spec) {
  Require(spec.m >= 2, "blobs need m >= 2 classes");
  Require(spec.d >= 1, "blobs need d >= 1");
  Require(spec.spread >= 0.0 && std::isfinite(spec.spread), "blobs spread must be >= 0");
  Require(spec.n >= 2 * static_cast<std::size_t>(spec.m),
          "blobs need n >= 2*m samples (n=" + std::to_string(spec.n) +
              ", m=" + std::to_string(spec.m) + ")");
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix centers(spec.m, spec.d);
  for (Eigen::Index c = 0; c < centers.rows(); ++c) {
    for (Eigen::Index k = 0; k < centers.cols(); ++k) centers(c, k) = normal(rng);
  }
  auto draw = [&](std::size_t count) {
    LabeledDataset set;
    set.num_classes = spec.m;
    set.features.resize(static_cast<Eigen::Index>(count), spec.d);
    set.labels.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
      const int y = static_cast<int>(i % static_cast<std::size_t>(spec.m));
      set.labels[i] = y;
      for (Eigen::Index k = 0; k < spec.d; ++k) {
        set.features(static_cast<Eigen::Index>(i), k) = centers(y, k) + spec.spread * normal(rng);
      }
    }
    ShuffleRows(&set, rng);
    return set;
  };
  SyntheticData out;
  out.train = draw(spec.n);
  out.test = draw(spec.n_test);
  ScaleJointly(&out);
  AssignIds(&out);
  return out;
}

SyntheticData GenerateMoons(const MoonsSpec& spec) {
  Require(spec.n >= 4, "moons need n >= 4 samples");
  Require(spec.noise >= 0.0, "moons noise must be >= 0");
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> angle(0.0, std::numbers::pi);
  auto draw = [&](std::size_t count) {
    LabeledDataset set;
    set.num_classes = 2;
    set.features.resize(static_cast<Eigen::Index>(count), 2);
    set.labels.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
      const int y = static_cast<int>(i % 2);
      const double t = angle(rng);
      double a = std::cos(t);
      double b = std::sin(t);
      if (y == 1) {
        a = 1.0 - a;
        b = 0.5 - b;
      }
      set.labels[i] = y;
      set.features(static_cast<Eigen::Index>(i), 0) = a + spec.noise * normal(rng);
      set.features(static_cast<Eigen::Index>(i), 1) = b + spec.noise * normal(rng);
    }
    ShuffleRows(&set, rng);
    return set;
  };
  SyntheticData out;
  out.train = draw(spec.n);
  out.test = draw(spec.n_test);
  ScaleJointly(&out);
  AssignIds(&out);
  return out;
}

}  // namespace amun

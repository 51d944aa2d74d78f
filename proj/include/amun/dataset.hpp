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

#ifndef AMUN_DATASET_HPP_
#define AMUN_DATASET_HPP_

#include <cstdint>
#include <optional>
#include <unordered_map>
#include <vector>

#include "amun/types.hpp"

namespace amun {

// Row-per-sample labeled data. Holds D, D_T and every derived set (retain,
// forget, adversarial, ablation sets).
struct LabeledDataset {
  Matrix features;  // n x d
  std::vector<int> labels;
  std::vector<SampleId> ids;
  int num_classes = 0;

  std::size_t size() const { return labels.size(); }
  std::size_t dim() const { return static_cast<std::size_t>(features.cols()); }

  // Throws kInvalidArgument unless n >= 1, d >= 1, labels in range, ids
  // unique and all features finite.
  void Validate() const;

  LabeledDataset Subset(const IndexSet& idx) const;
  std::optional<std::size_t> IndexOf(SampleId id) const;
};

// Rows of `a` followed by rows of `b`; ids must stay unique.
LabeledDataset Concat(const LabeledDataset& a, const LabeledDataset& b);

// Index sets into the training set (retain/forget) and into a separate
// held-out set (test).
struct SplitSpec {
  IndexSet retain_idx;
  IndexSet forget_idx;
  IndexSet test_idx;
  double forget_fraction = 0.0;
  std::uint64_t seed = 0;

  void Validate(std::size_t train_size, std::size_t test_size) const;
};

// Records which training rows are read through a DatasetView and counts the
// reads that land on rows the caller was not allowed to see.
class AccessAudit {
 public:
  AccessAudit(std::size_t n, const IndexSet& forbidden);

  void Record(std::size_t i);
  std::size_t reads() const { return reads_; }
  std::size_t violations() const { return violations_; }

 private:
  std::vector<bool> forbidden_;
  std::size_t reads_ = 0;
  std::size_t violations_ = 0;
};

// Read-only handle to a dataset. Unlearning code only touches data through
// this view so that the forget-only setting can be audited.
class DatasetView {
 public:
  DatasetView(const LabeledDataset& data)  // NOLINT(runtime/explicit)
      : data_(&data) {}
  DatasetView(const LabeledDataset& data, AccessAudit* audit)
      : data_(&data), audit_(audit) {}

  std::size_t size() const { return data_->size(); }
  std::size_t dim() const { return data_->dim(); }
  int num_classes() const { return data_->num_classes; }

  LabeledDataset Gather(const IndexSet& idx) const;
  Vector Row(std::size_t i) const;
  int Label(std::size_t i) const;
  SampleId Id(std::size_t i) const;

 private:
  void Touch(std::size_t i) const;

  const LabeledDataset* data_;
  AccessAudit* audit_ = nullptr;
};

}  // namespace amun

#endif  // AMUN_DATASET_HPP_

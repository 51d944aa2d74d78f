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

#include "amun/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <unordered_set>

namespace amun {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid_argument";
    case ErrorCode::kDimensionMismatch: return "dimension_mismatch";
    case ErrorCode::kDiverged: return "diverged";
    case ErrorCode::kAttackFailed: return "attack_failed";
    case ErrorCode::kFormat: return "format";
    case ErrorCode::kIo: return "io";
    case ErrorCode::kAccessViolation: return "access_violation";
    case ErrorCode::kFingerprintMismatch: return "fingerprint_mismatch";
    case ErrorCode::kUndefined: return "undefined";
  }
  return "unknown";
}

void LabeledDataset::Validate() const {
  Require(size() >= 1, "dataset is empty");
  Require(dim() >= 1, "dataset has zero feature dimensions");
  Require(static_cast<std::size_t>(features.rows()) == size(),
          "feature rows (" + std::to_string(features.rows()) +
              ") != label count (" + std::to_string(size()) + ")",
          ErrorCode::kDimensionMismatch);
  Require(ids.size() == size(), "id count != label count",
          ErrorCode::kDimensionMismatch);
  Require(num_classes >= 2, "num_classes must be >= 2");
  for (int y : labels) {
    Require(y >= 0 && y < num_classes,
            "label " + std::to_string(y) + " outside [0, " +
                std::to_string(num_classes) + ")");
  }
  std::unordered_set<SampleId> seen;
  seen.reserve(ids.size());
  for (SampleId id : ids) {
    Require(seen.insert(id).second, "duplicate sample id " + std::to_string(id));
  }
  Require(features.allFinite(), "features contain NaN or Inf");
}

LabeledDataset LabeledDataset::Subset(const IndexSet& idx) const {
  LabeledDataset out;
  out.num_classes = num_classes;
  out.features.resize(static_cast<Eigen::Index>(idx.size()), features.cols());
  out.labels.reserve(idx.size());
  out.ids.reserve(idx.size());
  for (std::size_t r = 0; r < idx.size(); ++r) {
    Require(idx[r] < size(), "index " + std::to_string(idx[r]) + " out of range");
    out.features.row(static_cast<Eigen::Index>(r)) =
        features.row(static_cast<Eigen::Index>(idx[r]));
    out.labels.push_back(labels[idx[r]]);
    out.ids.push_back(ids[idx[r]]);
  }
  return out;
}

std::optional<std::size_t> LabeledDataset::IndexOf(SampleId id) const {
  auto it = std::find(ids.begin(), ids.end(), id);
  if (it == ids.end()) return std::nullopt;
  return static_cast<std::size_t>(it - ids.begin());
}

LabeledDataset Concat(const LabeledDataset& a, const LabeledDataset& b) {
  if (a.size() == 0) return b;
  if (b.size() == 0) return a;
  Require(a.dim() == b.dim(), "cannot concatenate datasets of different dims",
          ErrorCode::kDimensionMismatch);
  LabeledDataset out;
  out.num_classes = std::max(a.num_classes, b.num_classes);
  out.features.resize(a.features.rows() + b.features.rows(), a.features.cols());
  out.features << a.features, b.features;
  out.labels = a.labels;
  out.labels.insert(out.labels.end(), b.labels.begin(), b.labels.end());
  out.ids = a.ids;
  out.ids.insert(out.ids.end(), b.ids.begin(), b.ids.end());
  return out;
}

void SplitSpec::Validate(std::size_t train_size, std::size_t test_size) const {
  std::vector<char> mark(train_size, 0);
  for (std::size_t i : retain_idx) {
    Require(i < train_size, "retain index out of range");
    Require(mark[i] == 0, "duplicate retain index");
    mark[i] = 1;
  }
  for (std::size_t i : forget_idx) {
    Require(i < train_size, "forget index out of range");
    Require(mark[i] != 1, "retain and forget sets overlap");
    Require(mark[i] != 2, "duplicate forget index");
    mark[i] = 2;
  }
  for (std::size_t i : test_idx) Require(i < test_size, "test index out of range");
}

AccessAudit::AccessAudit(std::size_t n, const IndexSet& forbidden)
    : forbidden_(n, false) {
  for (std::size_t i : forbidden) {
    Require(i < n, "audited index out of range");
    forbidden_[i] = true;
  }
}

void AccessAudit::Record(std::size_t i) {
  ++reads_;
  if (i < forbidden_.size() && forbidden_[i]) ++violations_;
}

void DatasetView::Touch(std::size_t i) const {
  Require(i < data_->size(), "index " + std::to_string(i) + " out of range");
  if (audit_ != nullptr) audit_->Record(i);
}

LabeledDataset DatasetView::Gather(const IndexSet& idx) const {
  for (std::size_t i : idx) Touch(i);
  return data_->Subset(idx);
}

Vector DatasetView::Row(std::size_t i) const {
  Touch(i);
  return data_->features.row(static_cast<Eigen::Index>(i)).transpose();
}

int DatasetView::Label(std::size_t i) const {
  Touch(i);
  return data_->labels[i];
}

SampleId DatasetView::Id(std::size_t i) const {
  Require(i < data_->size(), "index out of range");
  return data_->ids[i];
}

}  // namespace amun

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

#ifndef AMUN_IDX_HPP_
#define AMUN_IDX_HPP_

#include <cstdint>
#include <span>
#include <string>

#include "amun/dataset.hpp"

namespace amun {

// Big-endian IDX files: images have magic 2051 followed by count, rows, cols
// and row-major unsigned bytes; labels have magic 2049, count and bytes.
// Pixels are scaled by 1/255. Ids are 0..count-1 plus `id_offset`.
LabeledDataset ParseIdx(std::span<const std::uint8_t> images,
                        std::span<const std::uint8_t> labels, SampleId id_offset = 0);

LabeledDataset LoadIdx(const std::string& images_path, const std::string& labels_path,
                       SampleId id_offset = 0);

}  // namespace amun

#endif  // AMUN_IDX_HPP_

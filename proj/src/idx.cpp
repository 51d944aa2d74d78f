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

#include "amun/idx.hpp"

#include <algorithm>
#include <fstream>
#include <iterator>
#include <vector>

namespace amun {
namespace {

constexpr std::uint32_t kImageMagic = 2051;
constexpr std::uint32_t kLabelMagic = 2049;

std::uint32_t ReadU32(std::span<const std::uint8_t> bytes, std::size_t pos,
                      const char* what) {
  if (bytes.size() < pos + 4) {
    Fail(ErrorCode::kFormat, std::string("truncated ") + what + " header");
  }
  return (std::uint32_t{bytes[pos]} << 24) | (std::uint32_t{bytes[pos + 1]} << 16) |
         (std::uint32_t{bytes[pos + 2]} << 8) | std::uint32_t{bytes[pos + 3]};
}

std::vector<std::uint8_t> ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail(ErrorCode::kIo, "cannot open " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

LabeledDataset ParseIdx(std::span<const std::uint8_t> images,
                        std::span<const std::uint8_t> labels, SampleId id_offset) {
  const std::uint32_t image_magic = ReadU32(images, 0, "image");
  if (image_magic != kImageMagic) {
    Fail(ErrorCode::kFormat, "unexpected magic " + std::to_string(image_magic) +
                                 " in image file (want 2051)");
  }
  const std::uint32_t label_magic = ReadU32(labels, 0, "label");
  if (label_magic != kLabelMagic) {
    Fail(ErrorCode::kFormat, "unexpected magic " + std::to_string(label_magic) +
                                 " in label file (want 2049)");
  }
  const std::size_t count = ReadU32(images, 4, "image");
  const std::size_t rows = ReadU32(images, 8, "image");
  const std::size_t cols = ReadU32(images, 12, "image");
  const std::size_t label_count = ReadU32(labels, 4, "label");
  if (count != label_count) {
    Fail(ErrorCode::kFormat, "count mismatch: " + std::to_string(count) + " images, " +
                                 std::to_string(label_count) + " labels");
  }
  const std::size_t pixels = rows * cols;
  if (images.size() - 16 < count * pixels) {
    Fail(ErrorCode::kFormat, "truncated image payload: need " +
                                 std::to_string(count * pixels) + " bytes, have " +
                                 std::to_string(images.size() - 16));
  }
  if (labels.size() - 8 < count) {
    Fail(ErrorCode::kFormat, "truncated label payload: need " + std::to_string(count) +
                                 " bytes, have " + std::to_string(labels.size() - 8));
  }
  LabeledDataset out;
  out.features.resize(static_cast<Eigen::Index>(count), static_cast<Eigen::Index>(pixels));
  out.labels.resize(count);
  out.ids.resize(count);
  int max_label = 0;
  for (std::size_t i = 0; i < count; ++i) {
    for (std::size_t p = 0; p < pixels; ++p) {
      out.features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(p)) =
          images[16 + i * pixels + p] / 255.0;
    }
    out.labels[i] = labels[8 + i];
    out.ids[i] = id_offset + static_cast<SampleId>(i);
    max_label = std::max(max_label, out.labels[i]);
  }
  out.num_classes = max_label + 1;
  return out;
}

LabeledDataset LoadIdx(const std::string& images_path, const std::string& labels_path,
                       SampleId id_offset) {
  const std::vector<std::uint8_t> images = ReadFile(images_path);
  const std::vector<std::uint8_t> labels = ReadFile(labels_path);
  return ParseIdx(images, labels, id_offset);
}

}  // namespace amun

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

#ifndef AMUN_BASE64_HPP_
#define AMUN_BASE64_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "amun/types.hpp"

namespace amun {

std::string Base64Encode(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> Base64Decode(std::string_view text);

// Little-endian IEEE-754 binary64 byte packing, independent of host order.
std::vector<std::uint8_t> PackDoublesLE(const Vector& values);
Vector UnpackDoublesLE(std::span<const std::uint8_t> bytes);

// Shortest decimal text that parses back to the identical double.
std::string FormatDouble(double value);
double ParseDouble(std::string_view text);

}  // namespace amun

#endif  // AMUN_BASE64_HPP_

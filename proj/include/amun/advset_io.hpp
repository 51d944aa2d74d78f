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

#ifndef AMUN_ADVSET_IO_HPP_
#define AMUN_ADVSET_IO_HPP_

#include <iosfwd>
#include <string>

#include "amun/attacks.hpp"

namespace amun {

// Text format:
//   AMUN-ADVSET v1
//   fingerprint=<16 lowercase hex digits>
//   orig_id,y_true,y_adv,eps_used,delta,<base64 of little-endian f64 x_adv>
//   ...
// Reals are written in shortest round-trip form, so save/load is bit-exact.
void WriteAdvSet(std::ostream& out, const AdvSet& adv);
AdvSet ReadAdvSet(std::istream& in);

void SaveAdvSet(const std::string& path, const AdvSet& adv);
AdvSet LoadAdvSet(const std::string& path);

std::string FingerprintHex(std::uint64_t fingerprint);

}  // namespace amun

#endif  // AMUN_ADVSET_IO_HPP_

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

#include "amun/advset_io.hpp"

#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

#include "amun/base64.hpp"

namespace amun {

namespace {

constexpr char kMagic[] = "AMUN-ADVSET v1";
constexpr char kFingerprintKey[] = "fingerprint=";

std::vector<std::string> SplitCsv(const std::string& line) {
  std::vector<std::string> fields;
  std::stringstream ss(line);
  std::string item;
  while (std::getline(ss, item, ',')) fields.push_back(item);
  return fields;
}

long long ParseInt(const std::string& text, const char* what) {
  try {
    std::size_t used = 0;
    const long long v = std::stoll(text, &used);
    if (used == text.size()) return v;
  } catch (const std::exception&) {
  }
  Fail(ErrorCode::kFormat, std::string("bad ") + what + " '" + text + "'");
}

}  // namespace

std::string FingerprintHex(std::uint64_t fingerprint) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fingerprint));
  return buf;
}

void WriteAdvSet(std::ostream& out, const AdvSet& adv) {
  out << kMagic << '\n' << kFingerprintKey << FingerprintHex(adv.source_fingerprint) << '\n';
  for (const AdvRecord& r : adv.records) {
    out << r.orig_id << ',' << r.y_true << ',' << r.y_adv << ','
        << FormatDouble(r.eps_used) << ',' << FormatDouble(r.delta) << ','
        << Base64Encode(PackDoublesLE(r.x_adv)) << '\n';
  }
}

AdvSet ReadAdvSet(std::istream& in) {
  std::string line;
  Require(static_cast<bool>(std::getline(in, line)) && line == kMagic,
          "not an AdvSet file (expected header '" + std::string(kMagic) + "')",
          ErrorCode::kFormat);
  AdvSet adv;
  Require(static_cast<bool>(std::getline(in, line)) &&
              line.rfind(kFingerprintKey, 0) == 0,
          "AdvSet file lacks the fingerprint line", ErrorCode::kFormat);
  const std::string hex = line.substr(sizeof(kFingerprintKey) - 1);
  Require(hex.size() == 16, "AdvSet fingerprint must be 16 hex digits", ErrorCode::kFormat);
  try {
    adv.source_fingerprint = std::stoull(hex, nullptr, 16);
  } catch (const std::exception&) {
    Fail(ErrorCode::kFormat, "bad AdvSet fingerprint '" + hex + "'");
  }
  std::size_t line_no = 2;
  std::size_t dim = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::vector<std::string> f = SplitCsv(line);
    Require(f.size() == 6,
            "AdvSet line " + std::to_string(line_no) + " has " +
                std::to_string(f.size()) + " fields, expected 6",
            ErrorCode::kFormat);
    AdvRecord r;
    r.orig_id = ParseInt(f[0], "orig_id");
    r.y_true = static_cast<int>(ParseInt(f[1], "y_true"));
    r.y_adv = static_cast<int>(ParseInt(f[2], "y_adv"));
    r.eps_used = ParseDouble(f[3]);
    r.delta = ParseDouble(f[4]);
    const std::vector<std::uint8_t> bytes = Base64Decode(f[5]);
    r.x_adv = UnpackDoublesLE(bytes);
    Require(r.x_adv.size() > 0, "AdvSet record has an empty x_adv", ErrorCode::kFormat);
    if (dim == 0) dim = static_cast<std::size_t>(r.x_adv.size());
    Require(static_cast<std::size_t>(r.x_adv.size()) == dim,
            "AdvSet records have inconsistent dimensions", ErrorCode::kFormat);
    Require(r.y_adv != r.y_true,
            "AdvSet line " + std::to_string(line_no) + " has y_adv == y_true",
            ErrorCode::kFormat);
    adv.records.push_back(std::move(r));
  }
  return adv;
}

void SaveAdvSet(const std::string& path, const AdvSet& adv) {
  std::ofstream out(path, std::ios::binary);
  Require(static_cast<bool>(out), "cannot open '" + path + "' for writing", ErrorCode::kIo);
  WriteAdvSet(out, adv);
  Require(static_cast<bool>(out), "write to '" + path + "' failed", ErrorCode::kIo);
}

AdvSet LoadAdvSet(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  Require(static_cast<bool>(in), "cannot open '" + path + "'", ErrorCode::kIo);
  return ReadAdvSet(in);
}

}  // namespace amun

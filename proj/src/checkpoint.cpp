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

#include "amun/checkpoint.hpp"

#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <sstream>
#include <vector>

#include "amun/base64.hpp"

namespace amun {
namespace {

constexpr const char* kMagic = "AMUN-CKPT v1";
constexpr const char* kMagicPrefix = "AMUN-CKPT v";

std::string ShadowName(std::size_t k) {
  std::string digits = std::to_string(k);
  if (digits.size() < 3) digits.insert(0, 3 - digits.size(), '0');
  return "shadow_" + digits + ".ckpt";
}

}  // namespace

void WriteCheckpoint(std::ostream& out, const Checkpoint& ckpt) {
  ckpt.state.Validate();
  Require(ckpt.method.find('\n') == std::string::npos &&
              ckpt.config.find('\n') == std::string::npos,
          "checkpoint method/config must be single-line");
  out << kMagic << '\n'
      << "spec=" << ckpt.state.spec.ToString() << '\n'
      << "method=" << ckpt.method << '\n'
      << "config=" << ckpt.config << '\n'
      << "seed=" << ckpt.state.rng_seed << '\n'
      << "params=" << ckpt.state.params.size() << '\n'
      << '\n';
  const std::vector<std::uint8_t> payload = PackDoublesLE(ckpt.state.params);
  out.write(reinterpret_cast<const char*>(payload.data()),
            static_cast<std::streamsize>(payload.size()));
  if (!out) Fail(ErrorCode::kIo, "checkpoint write failed");
}

Checkpoint ReadCheckpoint(std::istream& in, const std::optional<ModelSpec>& expected) {
  std::string line;
  if (!std::getline(in, line)) Fail(ErrorCode::kFormat, "empty checkpoint");
  if (line != kMagic) {
    if (line.rfind(kMagicPrefix, 0) == 0) {
      Fail(ErrorCode::kFormat, "unsupported checkpoint version '" + line + "' (want '" +
                                   kMagic + "')");
    }
    Fail(ErrorCode::kFormat, "not a checkpoint: bad magic");
  }
  std::map<std::string, std::string> header;
  for (;;) {
    if (!std::getline(in, line)) Fail(ErrorCode::kFormat, "truncated checkpoint header");
    if (line.empty()) break;
    const auto eq = line.find('=');
    if (eq == std::string::npos) Fail(ErrorCode::kFormat, "bad header line: " + line);
    header[line.substr(0, eq)] = line.substr(eq + 1);
  }
  for (const char* key : {"spec", "method", "config", "seed", "params"}) {
    if (!header.contains(key)) {
      Fail(ErrorCode::kFormat, std::string("checkpoint header lacks '") + key + "'");
    }
  }
  Checkpoint ckpt;
  ckpt.state.spec = ModelSpec::Parse(header["spec"]);
  ckpt.method = header["method"];
  ckpt.config = header["config"];
  try {
    ckpt.state.rng_seed = std::stoull(header["seed"]);
  } catch (const std::exception&) {
    Fail(ErrorCode::kFormat, "bad checkpoint seed: " + header["seed"]);
  }
  std::size_t count = 0;
  try {
    count = std::stoull(header["params"]);
  } catch (const std::exception&) {
    Fail(ErrorCode::kFormat, "bad checkpoint parameter count: " + header["params"]);
  }
  const std::size_t want = ParameterCount(ckpt.state.spec);
  if (count != want) {
    Fail(ErrorCode::kFormat, "parameter count " + std::to_string(count) + " does not fit " +
                                 ckpt.state.spec.ToString() + " (" + std::to_string(want) +
                                 ")");
  }
  if (expected.has_value() && !(*expected == ckpt.state.spec)) {
    Fail(ErrorCode::kInvalidArgument, "checkpoint spec " + ckpt.state.spec.ToString() +
                                          " does not match expected spec " +
                                          expected->ToString());
  }
  std::vector<std::uint8_t> payload(count * 8);
  in.read(reinterpret_cast<char*>(payload.data()), static_cast<std::streamsize>(payload.size()));
  if (static_cast<std::size_t>(in.gcount()) != payload.size()) {
    Fail(ErrorCode::kFormat, "truncated checkpoint payload: need " +
                                 std::to_string(payload.size()) + " bytes, have " +
                                 std::to_string(in.gcount()));
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    Fail(ErrorCode::kFormat, "trailing bytes after checkpoint payload");
  }
  ckpt.state.params = UnpackDoublesLE(payload);
  return ckpt;
}

void SaveCheckpoint(const std::string& path, const Checkpoint& ckpt) {
  std::ofstream out(path, std::ios::binary);
  if (!out) Fail(ErrorCode::kIo, "cannot write " + path);
  WriteCheckpoint(out, ckpt);
}

Checkpoint LoadCheckpoint(const std::string& path, const std::optional<ModelSpec>& expected) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail(ErrorCode::kIo, "cannot open " + path);
  return ReadCheckpoint(in, expected);
}

void SaveShadowEnsemble(const std::string& dir, const ShadowEnsemble& ensemble) {
  std::filesystem::create_directories(dir);
  std::ofstream inc(std::filesystem::path(dir) / "inclusion.csv");
  if (!inc) Fail(ErrorCode::kIo, "cannot write " + dir + "/inclusion.csv");
  for (const auto& row : ensemble.inclusion) {
    for (std::size_t j = 0; j < row.size(); ++j) inc << (j ? "," : "") << (row[j] ? 1 : 0);
    inc << '\n';
  }
  for (std::size_t k = 0; k < ensemble.size(); ++k) {
    SaveCheckpoint((std::filesystem::path(dir) / ShadowName(k)).string(),
                   {ensemble.models[k], "shadow", "k=" + std::to_string(k)});
  }
}

ShadowEnsemble LoadShadowEnsemble(const std::string& dir, const LabeledDataset& pool,
                                  const TaylorSoftmaxConfig& taylor) {
  std::ifstream inc(std::filesystem::path(dir) / "inclusion.csv");
  if (!inc) Fail(ErrorCode::kIo, "cannot open " + dir + "/inclusion.csv");
  ShadowEnsemble ens;
  std::string line;
  while (std::getline(inc, line)) {
    if (line.empty()) continue;
    std::vector<bool> row;
    for (std::size_t j = 0; j < line.size(); j += 2) {
      if (line[j] != '0' && line[j] != '1') Fail(ErrorCode::kFormat, "bad inclusion row");
      row.push_back(line[j] == '1');
    }
    if (row.size() != pool.size()) {
      Fail(ErrorCode::kFormat, "inclusion row has " + std::to_string(row.size()) +
                                   " columns, pool has " + std::to_string(pool.size()));
    }
    ens.inclusion.push_back(std::move(row));
  }
  Require(!ens.inclusion.empty(), "empty shadow ensemble", ErrorCode::kFormat);
  for (std::size_t k = 0; k < ens.inclusion.size(); ++k) {
    ens.models.push_back(
        LoadCheckpoint((std::filesystem::path(dir) / ShadowName(k)).string()).state);
  }
  ens.pool = pool;
  ens.taylor = taylor;
  ens.Finalize();
  return ens;
}

}  // namespace amun

// Copyright 2026 The vqsep Authors
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

#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>

#include <json.hpp>

#include "vqsep/circuits.hpp"
#include "vqsep/detect.hpp"
#include "vqsep/qcore.hpp"
#include "vqsep/statelib.hpp"

/// JSON state files, run configs, pool descriptions and verdict reports.
///
/// Qubits are numbered from 1 in every document written here.
namespace vqsep::io {

using json = nlohmann::ordered_json;

/// Malformed or inconsistent user input.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using AnyState = std::variant<PureState, DensityMatrix>;

inline constexpr double kLoadTolerance = 1e-8;

/// {"kind": "pure", "n_qubits": n, "data": [[re, im], ...]}
json state_to_json(const PureState& s);
/// {"kind": "density", "n_qubits": n, "data": [[[re, im], ...], ...]} (row-major)
json state_to_json(const DensityMatrix& s);
json state_to_json(const AnyState& s);

/// Parses a state document. Norm and trace are checked to kLoadTolerance,
/// then renormalized.
AnyState state_from_json(const json& doc);

/// Reads a whole file, transparently inflating gzip content.
std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& content, bool gzip = false);

AnyState read_state_file(const std::filesystem::path& path);
void write_state_file(const std::filesystem::path& path, const AnyState& s, bool gzip = false);

NamedStateSpec spec_from_json(const json& doc);
json spec_to_json(const NamedStateSpec& spec);

/// AdaptiveConfig plus run-level options, as read from --config.
struct RunConfig {
  AdaptiveConfig adaptive;
  int shots = 0;
  std::optional<std::string> out;
  std::optional<std::string> trace_csv;
};

/// Unknown keys are rejected.
RunConfig run_config_from_json(const json& doc);
json run_config_to_json(const RunConfig& cfg);

json circuit_to_json(const ParamCircuit& c);
json pool_to_json(int n, const CircuitPool& pool);
json circuit_ref_to_json(const CircuitRef& ref);
json verdict_to_json(const SeparabilityVerdict& v);

}  // namespace vqsep::io

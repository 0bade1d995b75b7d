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

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "vqsep/io.hpp"

/// Subcommands of the `vqsep` command-line tool. Each returns the process
/// exit code; `run` parses argv and dispatches.
namespace vqsep::cli {

enum ExitCode : int {
  kExitDetected = 0,
  kExitBoundViolated = 1,
  kExitInputError = 2,
  kExitInconclusive = 3,
};

enum class DetectMode { Pure, Noisy, MixedFull, MixedK };

std::string to_string(DetectMode m);
DetectMode detect_mode_from_string(const std::string& s);

/// Flags of `vqsep detect`. Explicit flags override values from --config.
struct DetectOptions {
  DetectMode mode = DetectMode::Pure;
  std::filesystem::path state;
  std::optional<std::filesystem::path> config;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::optional<double> epsilon;
  std::optional<int> s_max;
  std::optional<int> m_max;
  std::optional<int> shots;
  std::optional<std::string> trace_csv;
};

int cmd_pool(int n, const std::string& format, std::ostream& out, std::ostream& err);

/// Builds the report document for a detection run without touching disk.
io::json detect_report(DetectMode mode, const io::AnyState& state, const io::RunConfig& cfg,
                       const TraceSink& trace = {});

int cmd_detect(const DetectOptions& opts, std::ostream& out, std::ostream& err);

/// Writes the state named by `spec`. A `q` entry applies global
/// depolarizing noise and produces a density file.
int cmd_state_gen(const io::json& spec, const std::filesystem::path& out_path, bool gzip,
                  std::ostream& out, std::ostream& err);

/// fig3a, alg1-demo or alg2-demo. Returns kExitBoundViolated when the
/// reproduced numbers miss their bounds. `s_max` replaces the round budget
/// of the two ensemble demos; the bounds checked stay the same.
int cmd_reproduce(const std::string& experiment, const std::filesystem::path& out_dir,
                  std::uint64_t seed, std::optional<int> s_max, std::ostream& out, std::ostream& err);

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace vqsep::cli

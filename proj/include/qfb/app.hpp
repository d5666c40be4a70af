// Copyright 2026 The qfb Authors
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

// Command-line experiment runner: loads a TOML/JSON config, runs one named
// experiment and writes its CSV/JSON artifacts plus a manifest.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace qfb::app {

inline constexpr const char* kToolName = "qfb";
inline constexpr const char* kVersion = "0.1.0";

enum ExitCode : int {
    kExitOk = 0,
    kExitConfig = 2,
    kExitNumerical = 3,
};

struct RunRequest {
    std::string experiment;
    std::filesystem::path config_path;
    std::optional<std::uint64_t> seed;
    unsigned threads = 1;
    std::optional<std::filesystem::path> out_dir;
};

struct RunReport {
    int exit_code = kExitOk;
    std::string message;
    std::filesystem::path out_dir;
    /// Artifact names relative to out_dir, manifest excluded.
    std::vector<std::string> files;
    std::vector<std::string> warnings;
};

const std::vector<std::string>& experiment_names();

/// Errors are reported through the exit code and message, never thrown.
RunReport run(const RunRequest& request, std::ostream& log);

}  // namespace qfb::app

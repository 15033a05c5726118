// Copyright 2026 The mbhqc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Experiment drivers behind the mbhqc command-line tool. Each driver reads a
// JSON config, writes CSV/JSON into the output directory and returns the
// summary it wrote.
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>

namespace mbhqc::cli {

/// Malformed or out-of-range configuration (exit code 2).
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct RunOptions {
  std::filesystem::path out = ".";
  std::optional<std::uint64_t> seed;  // overrides the config's "seed"
  unsigned threads = 0;
};

/// Parses a JSON config file; syntax errors report the line and column.
nlohmann::json load_config(const std::filesystem::path& path);

/// Accepts a number (radians) or a string "pi", "pi/6", "2*pi/400", "0.5pi".
double parse_angle(const nlohmann::json& value, const std::string& field);

nlohmann::json discrete_sweep(const nlohmann::json& config, const RunOptions& options);
nlohmann::json continuous_sweep(const nlohmann::json& config, const RunOptions& options);
nlohmann::json detector_calib(const nlohmann::json& config, const RunOptions& options);
nlohmann::json qec_report(const nlohmann::json& config, const RunOptions& options);
nlohmann::json fokker_planck(const nlohmann::json& config, const RunOptions& options);
nlohmann::json single_run(const nlohmann::json& config, const RunOptions& options);

}  // namespace mbhqc::cli

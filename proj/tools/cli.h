// Copyright 2026 The qreal Authors
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

// The qreal command line: `run` executes an ensemble with optional oracle
// comparisons, `audit` checks the ledger invariants of a scenario.

#ifndef QREAL_TOOLS_CLI_H
#define QREAL_TOOLS_CLI_H

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"
#include "qreal/scenarios.h"

namespace qreal::cli {

enum ExitCode : int { kOk = 0, kConfigError = 1, kInvariantViolation = 2 };

struct RunConfig {
    std::string scenario;
    Parameters parameters;
    uint64_t trials = 10000;
    uint64_t seed = 1;
    std::vector<std::string> compare;   // "ci", "unitary"
    std::string format = "json";        // "json" or "csv"
    std::string output;                 // empty: stdout
    bool audit = false;
    uint64_t audit_seeds = 10;
    size_t threads = 1;
    bool inject_record_mutation = false;
};

/// Reads a JSON config file into `config`; fields present in the file
/// override the current values. ConfigError on malformed input.
void load_config(const std::string &path, RunConfig &config);

/// Checks scenario name, trials, format and comparison names.
void validate(const RunConfig &config);

nlohmann::ordered_json run_report(const RunConfig &config);
nlohmann::ordered_json audit_report(const RunConfig &config);

/// Flattens a report into "section,name,key,value" rows.
std::string to_csv(const nlohmann::ordered_json &report);

/// Full command line entry point; returns the process exit code.
int main(int argc, const char *const *argv, std::ostream &out, std::ostream &err);

}  // namespace qreal::cli

#endif

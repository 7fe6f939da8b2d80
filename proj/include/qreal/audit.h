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

// Invariant audits over trajectories and scenarios: one realized branch per
// epoch, quantized and conserved reality values, monotone records, norm, and
// seed independence of the global state.

#ifndef QREAL_AUDIT_H
#define QREAL_AUDIT_H

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qreal/scenarios.h"

namespace qreal {

struct AuditViolation {
    std::string invariant;
    uint64_t seed = 0;
    size_t epoch = 0;
    std::string detail;
};

/// Appends every violation found in one trajectory.
void audit_trajectory(const Trajectory &trajectory, std::vector<AuditViolation> &out,
                      const Tolerances &tol = kDefaultTolerances);

struct InvariantResult {
    std::string name;
    bool passed = true;
    uint64_t checked = 0;
    std::vector<AuditViolation> violations;
    std::vector<std::string> counterexample;   // ledger lines of the first failing trial
};

struct AuditReport {
    std::string scenario;
    std::vector<InvariantResult> invariants;
    bool passed() const;
    uint64_t violation_count() const;
};

extern const char *const kInvariantExactlyOne;
extern const char *const kInvariantQuantized;
extern const char *const kInvariantConservation;
extern const char *const kInvariantNorm;
extern const char *const kInvariantSeedIndependence;

/// Runs one trial per seed and audits each, then compares final states bitwise.
AuditReport audit_scenario(const ScenarioSpec &spec, std::span<const uint64_t> seeds,
                           const Tolerances &tol = kDefaultTolerances);

/// Consecutive seeds seed_base .. seed_base + n − 1.
AuditReport audit_scenario(const ScenarioSpec &spec, uint64_t n_seeds, uint64_t seed_base,
                           const Tolerances &tol = kDefaultTolerances);

struct FaultReport {
    bool raised = false;
    std::optional<size_t> epoch;
    std::string message;
};

/// Runs one trial with the record-mutation hook and reports whether the
/// contradiction surfaced as HistoryInconsistent.
FaultReport probe_record_mutation(const ScenarioSpec &spec, uint64_t seed,
                                  const Tolerances &tol = kDefaultTolerances);

}  // namespace qreal

#endif

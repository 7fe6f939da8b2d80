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

#include "qreal/audit.h"

#include <cmath>

namespace qreal {

const char *const kInvariantExactlyOne = "exactly_one_realized";
const char *const kInvariantQuantized = "reality_quantized";
const char *const kInvariantConservation = "conservation";
const char *const kInvariantNorm = "norm";
const char *const kInvariantSeedIndependence = "seed_independence";

namespace {

void flag(std::vector<AuditViolation> &out, const char *invariant, uint64_t seed, size_t epoch, std::string detail) {
    out.push_back({invariant, seed, epoch, std::move(detail)});
}

}  // namespace

void audit_trajectory(const Trajectory &trajectory, std::vector<AuditViolation> &out, const Tolerances &tol) {
    const auto &entries = trajectory.ledger.entries;
    const uint64_t seed = trajectory.ledger.rng_seed;
    RealizedRecords previous;
    double cumulative = 0;
    for (size_t k = 0; k < entries.size(); ++k) {
        const LedgerEntry &e = entries[k];
        if (e.epoch != k + 1) {
            flag(out, kInvariantExactlyOne, seed, e.epoch, "epochs are not consecutive");
        }
        if (e.branch_count == 0 || e.branch_index >= (e.event ? e.event->branches.members.size() : e.branch_count)) {
            flag(out, kInvariantExactlyOne, seed, e.epoch, "realized branch index out of range");
        }
        if (e.event) {
            const auto &members = e.event->branches.members;
            if (e.branch_index < members.size() && !members[e.branch_index].retained) {
                flag(out, kInvariantExactlyOne, seed, e.epoch, "realized branch has zero weight");
            }
            // Reality values: 1 on the realized member, 0 elsewhere.
            int sum = 0;
            for (size_t b = 0; b < members.size(); ++b) {
                int value = b == e.branch_index ? 1 : 0;
                if (value != 0 && value != 1) {
                    flag(out, kInvariantQuantized, seed, e.epoch, "reality value outside {0,1}");
                }
                sum += value;
            }
            if (sum != 1) {
                flag(out, kInvariantQuantized, seed, e.epoch, "reality values do not sum to 1");
            }
        }
        if (!(e.probability > 0 && e.probability <= 1)) {
            flag(out, kInvariantQuantized, seed, e.epoch, "realization probability outside (0, 1]");
        }
        if (!(e.info_bits >= 0) || e.info_bits != info_bits_of(e.probability)) {
            flag(out, kInvariantConservation, seed, e.epoch, "information bits inconsistent with probability");
        }
        cumulative += e.info_bits;
        if (std::abs(e.cumulative_bits - cumulative) > 1e-9 * std::max(1.0, cumulative) ||
            (k > 0 && e.cumulative_bits < entries[k - 1].cumulative_bits)) {
            flag(out, kInvariantConservation, seed, e.epoch, "cumulative bits not monotone");
        }
        for (const auto &[r, v] : previous) {
            auto it = e.records_after.find(r);
            if (it == e.records_after.end()) {
                flag(out, kInvariantConservation, seed, e.epoch,
                     "record on subsystem " + std::to_string(r) + " disappeared");
            } else if (it->second != v) {
                flag(out, kInvariantConservation, seed, e.epoch,
                     "record on subsystem " + std::to_string(r) + " changed");
            }
        }
        previous = e.records_after;
    }
    const RealityToken &token = trajectory.token;
    if (token.epoch != entries.size()) {
        flag(out, kInvariantExactlyOne, seed, token.epoch, "token epoch differs from ledger length");
    }
    if (token.realized_records != previous) {
        flag(out, kInvariantConservation, seed, token.epoch, "token records differ from the ledger");
    }
    double drift = std::abs(std::sqrt(trajectory.final_state.squared_norm()) - 1.0);
    if (!(drift <= tol.norm)) {
        flag(out, kInvariantNorm, seed, token.epoch, "norm drift " + std::to_string(drift));
    }
}

bool AuditReport::passed() const {
    for (const auto &inv : invariants) {
        if (!inv.passed) {
            return false;
        }
    }
    return true;
}

uint64_t AuditReport::violation_count() const {
    uint64_t n = 0;
    for (const auto &inv : invariants) {
        n += inv.violations.size();
    }
    return n;
}

AuditReport audit_scenario(const ScenarioSpec &spec, std::span<const uint64_t> seeds, const Tolerances &tol) {
    if (seeds.empty()) {
        throw InvalidParameter("an audit needs at least one seed");
    }
    AuditReport report;
    report.scenario = spec.name;
    for (const char *name : {kInvariantExactlyOne, kInvariantQuantized, kInvariantConservation, kInvariantNorm,
                             kInvariantSeedIndependence}) {
        report.invariants.push_back({name, true, 0, {}, {}});
    }
    auto find = [&](const std::string &name) -> InvariantResult & {
        for (auto &inv : report.invariants) {
            if (inv.name == name) {
                return inv;
            }
        }
        throw InvalidParameter("unknown invariant " + name);
    };
    TrialOptions options;
    options.tol = tol;
    std::optional<StateVector> first_state;
    uint64_t first_seed = 0;
    for (uint64_t seed : seeds) {
        TrialResult trial = run_trial(spec, seed, options);
        std::vector<AuditViolation> found;
        audit_trajectory(trial.trajectory, found, tol);
        for (size_t i = 0; i + 1 < report.invariants.size(); ++i) {
            ++report.invariants[i].checked;
        }
        for (auto &v : found) {
            InvariantResult &inv = find(v.invariant);
            if (inv.counterexample.empty()) {
                for (const auto &e : trial.trajectory.ledger.entries) {
                    inv.counterexample.push_back(ledger_line(e));
                }
            }
            inv.passed = false;
            inv.violations.push_back(std::move(v));
        }
        InvariantResult &seeds_inv = find(kInvariantSeedIndependence);
        if (!first_state) {
            first_state = trial.trajectory.final_state;
            first_seed = seed;
        } else {
            ++seeds_inv.checked;
            if (!first_state->identical(trial.trajectory.final_state)) {
                seeds_inv.passed = false;
                seeds_inv.violations.push_back({kInvariantSeedIndependence, seed, trial.trajectory.token.epoch,
                                                "final state differs from seed " + std::to_string(first_seed)});
            }
        }
    }
    return report;
}

AuditReport audit_scenario(const ScenarioSpec &spec, uint64_t n_seeds, uint64_t seed_base, const Tolerances &tol) {
    std::vector<uint64_t> seeds(n_seeds);
    for (uint64_t i = 0; i < n_seeds; ++i) {
        seeds[i] = seed_base + i;
    }
    return audit_scenario(spec, seeds, tol);
}

FaultReport probe_record_mutation(const ScenarioSpec &spec, uint64_t seed, const Tolerances &tol) {
    TrialOptions options;
    options.inject_record_mutation = true;
    options.tol = tol;
    FaultReport report;
    try {
        run_trial(spec, seed, options);
    } catch (const HistoryInconsistent &e) {
        report.raised = true;
        report.epoch = e.epoch();
        report.message = e.what();
    }
    return report;
}

}  // namespace qreal

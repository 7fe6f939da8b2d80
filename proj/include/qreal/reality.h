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

// The reality token: one realized branch per event, sampled from Born weights
// of the conditioned view, with an append-only ledger of realized outcomes.
// Nothing here ever modifies the global state.

#ifndef QREAL_REALITY_H
#define QREAL_REALITY_H

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "qreal/dynamics.h"
#include "qreal/events.h"

namespace qreal {

struct BranchFactor {
    std::vector<size_t> subsystems;   // global indices, in the factor's digit order
    StateVector state;
};

struct RealizedBranch {
    size_t epoch = 0;
    size_t branch_index = 0;    // index into the event's BranchSet::members
    size_t branch_count = 0;    // number of members of that event
    std::string label;
    std::vector<BranchFactor> factors;
    RealizedRecords conditioning;   // records the branch was conditioned on
};

struct RealityToken {
    RealizedRecords realized_records;
    std::optional<RealizedBranch> realized_branch;
    size_t epoch = 0;
    /// False between an unrecorded event and the next recorded one: the branch
    /// identity is carried but cannot be checked from inside the world.
    bool branch_observable = true;
};

struct LedgerEntry {
    size_t epoch = 0;
    size_t step_index = 0;
    size_t marker_index = 0;
    size_t branch_index = 0;
    size_t branch_count = 0;   // retained branches the choice was made among
    double probability = 1;
    double info_bits = 0;
    double cumulative_bits = 0;
    bool is_event = false;
    bool verifiable = true;    // false once the branches have recohered
    std::string label;
    RealizedRecords records_after;
    std::shared_ptr<const EventRecord> event;
};

struct RealityLedger {
    std::vector<LedgerEntry> entries;
    uint64_t rng_seed = 0;

    /// Appends, filling cumulative_bits from the previous entry.
    void append(LedgerEntry entry);
    double cumulative_bits() const;
};

struct Trajectory {
    StateVector final_state;
    RealityLedger ledger;
    RealityToken token;
};

/// −log₂ p, with exactly 0 for p = 1.
double info_bits_of(double probability);

/// Generator for one trial: the seed is passed through a splitmix64 finalizer
/// first, since consecutive raw seeds give correlated early outputs.
std::mt19937_64 trial_rng(uint64_t seed);

/// Uniform double in [0, 1) from the top 53 bits of one draw.
double uniform01(std::mt19937_64 &rng);

/// Index drawn from a discrete distribution. Consumes exactly one draw.
size_t sample_index(std::span<const double> probabilities, std::mt19937_64 &rng);

/// The branch set an event presents to a token: the event's own when it was
/// built with the token's records, otherwise recomputed from `state`.
BranchSet branches_for_token(const StateVector &state, const EventRecord &event, const RealityToken &token,
                             const Tolerances &tol = kDefaultTolerances);

/// Born probabilities over the retained branches of the conditioned view.
std::vector<double> conditional_branch_distribution(const StateVector &state, const EventRecord &event,
                                                    const RealityToken &token,
                                                    const Tolerances &tol = kDefaultTolerances);

struct Realization {
    RealityToken token;
    LedgerEntry entry;
};

/// Chooses the realized branch of `event` (an event, or a marker that reads
/// records). Draws from `rng` only when more than one branch is retained.
Realization realize_branch(const StateVector &state, const EventRecord &event, const RealityToken &token,
                           std::mt19937_64 &rng, const Tolerances &tol = kDefaultTolerances);

struct BranchQuery {
    size_t epoch = 0;
    size_t branch_index = 0;
};

/// 1 for the realized branch of the token's current epoch, 0 otherwise.
int reality_value(const RealityToken &token, const BranchQuery &query);

/// Checks that the realized branch's factors partition the unconditioned
/// subsystems, one factor per cluster, and that their product reproduces the
/// realized branch of `state` (the post-event state) within tol.recon.
bool constituent_consistency(const RealityToken &token, const StateVector &state, const SubsystemLayout &layout,
                             const Tolerances &tol = kDefaultTolerances);

double info_content(const RealityLedger &ledger);

struct RecoherenceReport {
    std::vector<size_t> branches;                 // member indices compared
    std::vector<std::vector<double>> overlaps;    // root fidelity on side A, pairwise
    double min_overlap = 1;
    bool recohered = false;
    bool which_branch_retrievable = true;
    std::string note;
};

/// Evolves every retained branch of a prior event through `later_steps` and
/// compares the branches' reduced states on the event's side A.
RecoherenceReport recoherence_monitor(const EventRecord &prior, const SubsystemLayout &layout,
                                      std::span<const EvolutionStep> later_steps, double eps);

/// Embeds a branch member of `branches` into the full layout, including the
/// conditioned records, with weight coefficient².
StateVector lift_branch(const BranchSet &branches, size_t member, const SubsystemLayout &layout);

/// "epoch,step,branch,probability,info_bits,cumulative_bits" per line.
std::string ledger_line(const LedgerEntry &entry);
LedgerEntry parse_ledger_line(const std::string &line);
void write_ledger(const RealityLedger &ledger, std::ostream &out);
std::vector<LedgerEntry> read_ledger(std::istream &in);

}  // namespace qreal

#endif

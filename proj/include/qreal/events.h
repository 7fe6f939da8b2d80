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

// Event detection, branch decomposition of conditioned views, relative states
// of an instrument and instrument quality scores.

#ifndef QREAL_EVENTS_H
#define QREAL_EVENTS_H

#include <map>
#include <span>
#include <string>
#include <vector>

#include "qreal/dynamics.h"
#include "qreal/hilbert.h"

namespace qreal {

/// Record subsystem index -> realized pointer index. Pointer bases are the
/// computational bases of the record subsystems.
using RealizedRecords = std::map<size_t, size_t>;

/// The state seen from inside a realized history: ⟨records| applied to the
/// global state and renormalized. The global state itself is untouched.
struct ConditionedView {
    StateVector state;          // normalized, over the non-conditioned subsystems
    double weight = 1;          // squared norm before renormalization
    std::vector<size_t> kept;   // global index of each view subsystem

    /// View index of a global subsystem, or npos if it was conditioned away.
    size_t to_view(size_t global) const;
    static constexpr size_t npos = static_cast<size_t>(-1);
};

/// Throws HistoryInconsistent when the records have weight ≤ tol.null.
ConditionedView condition(const StateVector &state, const RealizedRecords &records,
                          const Tolerances &tol = kDefaultTolerances);

struct BranchMember {
    double coefficient = 0;
    StateVector left;    // over the view's side A subsystems (global order of BranchSet::side_a)
    StateVector right;   // over the view's side B subsystems
    bool retained = false;
    std::string label;
    /// Pointer value of every designated record (event order), when read.
    std::vector<size_t> record_values;

    double weight() const {
        return coefficient * coefficient;
    }
};

struct BranchSet {
    std::vector<BranchMember> members;
    std::vector<size_t> side_a;   // global indices present in the view
    std::vector<size_t> side_b;
    RealizedRecords conditioning;
    double view_weight = 1;

    size_t retained_count() const;
    /// Weights of the retained members renormalized to sum to one.
    std::vector<double> retained_probabilities() const;
    /// Indices (into members) of the retained members.
    std::vector<size_t> retained_indices() const;
};

/// Schmidt decomposition of the normalized conditioned view across the split
/// restricted to the view. When one side is fully conditioned away the view is
/// trivially factorized and yields a single branch.
BranchSet branch_decompose(const StateVector &state, const BipartiteSplit &split,
                           const RealizedRecords &conditioning, const Tolerances &tol = kDefaultTolerances);

struct EventRecord {
    size_t step_index = 0;
    std::string label;
    BipartiteSplit split;
    BranchSet branches;
    bool is_event = false;
    std::vector<size_t> record_designation;
};

/// Event iff the interaction changed the state beyond a global phase and left
/// the conditioned view entangled across the split. Branches are always filled.
EventRecord detect_event(const StateVector &post, const StateVector &reference_post, const BipartiteSplit &split,
                         const RealizedRecords &conditioning, const Tolerances &tol = kDefaultTolerances);

/// As above for a schedule marker; also reads the designated records of every
/// retained branch (UnsupportedRecord if a record is not a pointer state).
EventRecord detect_event(const StateVector &post, const StateVector &reference_post, const EventMarker &marker,
                         const RealizedRecords &conditioning, const Tolerances &tol = kDefaultTolerances);

/// Fills record_values of every retained member.
void read_records(BranchSet &branches, std::span<const size_t> records, const SubsystemLayout &layout,
                  const Tolerances &tol = kDefaultTolerances);

/// Pointer index carried by `subsystem` in a state, if it holds ≥ 1 − eps of
/// the probability on one value.
std::optional<size_t> pointer_value(const StateVector &state, size_t subsystem, double eps);

/// Probability of each value of one subsystem.
std::vector<double> marginal(const StateVector &state, size_t subsystem);

struct MacrostatePartition {
    std::vector<std::vector<size_t>> groups;
    std::vector<std::string> labels;

    /// One macrostate per basis index.
    static MacrostatePartition pointer(size_t dim);
    void validate(size_t dim) const;
};

struct RelativeState {
    double alpha = 0;      // sqrt of the macrostate's Born weight
    StateVector xi;        // normalized, over every subsystem except the instrument
    size_t macrostate = 0;
    double purity = 1;     // purity of the conditional object state
};

/// Relative states of the populated macrostates.
std::vector<RelativeState> relative_states(const StateVector &state, size_t instrument,
                                           const MacrostatePartition &partition,
                                           const Tolerances &tol = kDefaultTolerances);

struct InstrumentMetrics {
    double faithfulness = 1;
    double distinguishability = 0;
    double memory = 1;
    bool degenerate = false;   // fewer than two distinguishable macrostates
};

/// memory compares the macrostate distribution at `state` with each of
/// `later_states` (squared classical fidelity); 1 when none are given.
InstrumentMetrics instrument_metrics(const StateVector &state, size_t instrument,
                                     const MacrostatePartition &partition,
                                     std::span<const StateVector> later_states = {},
                                     const Tolerances &tol = kDefaultTolerances);

}  // namespace qreal

#endif

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

// Many-trial runs. The global state is seed independent, so it is evolved
// once; per-trial work is only the conditioned-view sampling, memoized per
// (marker, realized records).

#ifndef QREAL_ENSEMBLE_H
#define QREAL_ENSEMBLE_H

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "qreal/scenarios.h"

namespace qreal {

using Histogram = std::map<std::string, uint64_t>;
using Distribution = std::map<std::string, double>;

Distribution normalize(const Histogram &histogram);

struct MarkerTally {
    std::string label;
    size_t step_index = 0;
    uint64_t events = 0;         // trials in which the marker was an event
    uint64_t realizations = 0;   // trials in which it produced a ledger entry
    Histogram branches;          // realized branch labels
    std::map<double, uint64_t> bits;   // info bits -> number of trials

    double total_bits() const;
    double max_bits() const;
};

struct EnsembleResult {
    std::string scenario;
    uint64_t trials = 0;
    uint64_t seed_base = 0;
    Histogram outcomes;    // record configurations (ScenarioSpec::outcome_key)
    Histogram summaries;
    double mean_info_bits = 0;
    std::vector<MarkerTally> markers;
    uint64_t ledger_entries = 0;
    uint64_t unverifiable_entries = 0;
    uint64_t audit_violations = 0;
};

/// What one conditioned view offers at one marker.
struct NodeSummary {
    bool realize = false;   // event, or a marker that reads records
    bool is_event = false;
    std::vector<double> probabilities;            // over retained branches
    std::vector<std::vector<size_t>> record_values;
    std::vector<std::string> labels;
    bool verifiable = true;
};

/// A scenario with its (seed independent) global trajectory precomputed.
class PreparedScenario {
   public:
    explicit PreparedScenario(ScenarioSpec spec, const Tolerances &tol = kDefaultTolerances);

    const ScenarioSpec &spec() const {
        return spec_;
    }
    const Tolerances &tolerances() const {
        return tol_;
    }
    /// State after step k.
    const StateVector &post(size_t step) const {
        return post_[step];
    }
    const StateVector &final_state() const {
        return post_.empty() ? spec_.initial_state : post_.back();
    }
    /// Reference evolution of the state before marker m's step.
    const StateVector &reference_post(size_t marker) const {
        return reference_[marker];
    }
    NodeSummary node(size_t marker, const RealizedRecords &records) const;

   private:
    ScenarioSpec spec_;
    Tolerances tol_;
    std::vector<StateVector> post_;
    std::vector<StateVector> reference_;
};

struct EnsembleOptions {
    size_t threads = 1;
};

/// Trial i uses seed seed_base + i and realizes exactly what run_trial would.
EnsembleResult run_ensemble(const PreparedScenario &prepared, uint64_t n_trials, uint64_t seed_base,
                            const EnsembleOptions &options = {});
EnsembleResult run_ensemble(const ScenarioSpec &spec, uint64_t n_trials, uint64_t seed_base,
                            const EnsembleOptions &options = {});

/// Adds `from` into `into` (histograms and tallies; trial-level means are
/// recomputed by the caller).
void merge_tallies(std::vector<MarkerTally> &into, const std::vector<MarkerTally> &from);

}  // namespace qreal

#endif

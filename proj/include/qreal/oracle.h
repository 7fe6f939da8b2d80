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

// Reference semantics to compare against: projective collapse at every event,
// and plain unitary evolution read out once at the end. Plus the statistics
// used to compare sampled outcome distributions.

#ifndef QREAL_ORACLE_H
#define QREAL_ORACLE_H

#include <cstdint>

#include "qreal/ensemble.h"
#include "qreal/scenarios.h"

namespace qreal {

struct CollapseTrial {
    ScenarioOutcome outcome;
    RealizedRecords records;
    StateVector final_state;           // the collapsed state
    std::vector<double> probabilities; // of every choice made
};

/// At each event the state is projected onto the sampled branch (side A
/// factor) and renormalized; branches come from the same decomposition the
/// events module uses.
CollapseTrial run_ci_collapse(const ScenarioSpec &spec, uint64_t seed, const Tolerances &tol = kDefaultTolerances);

/// Trial i equals run_ci_collapse(spec, seed_base + i).
EnsembleResult run_ci_ensemble(const ScenarioSpec &spec, uint64_t n_trials, uint64_t seed_base,
                               const EnsembleOptions &options = {}, const Tolerances &tol = kDefaultTolerances);

struct UnitaryDistribution {
    Distribution outcomes;    // Born distribution of the final record configuration
    Distribution summaries;
    StateVector final_state;
};

UnitaryDistribution run_full_unitary(const ScenarioSpec &spec);

double total_variation(const Distribution &p, const Distribution &q);

struct Comparison {
    double total_variation = 0;
    double chi_square = 0;
    size_t dof = 0;
    double p_value = 1;
    size_t bins = 0;   // after pooling
};

/// Goodness of fit of observed counts to an expected distribution. Bins with
/// expected count below 5 are pooled into one bin (and that bin into the
/// smallest other bin if it is still below 5). Observed counts in a bin of
/// zero expected probability give p = 0.
Comparison compare_distributions(const Histogram &observed, const Distribution &expected);

/// Two-sample homogeneity test with the same pooling rule on the combined counts.
Comparison compare_histograms(const Histogram &a, const Histogram &b);

}  // namespace qreal

#endif

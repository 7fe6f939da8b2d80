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

// Stock experiments as declarative specs, and the single-trial driver that
// runs dynamics -> event detection -> realization at every marker.

#ifndef QREAL_SCENARIOS_H
#define QREAL_SCENARIOS_H

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "qreal/dynamics.h"
#include "qreal/events.h"
#include "qreal/reality.h"

namespace qreal {

using Parameters = std::map<std::string, std::string>;

/// Turns the realized records (and the label of the last realized branch) into
/// the scenario's human-level outcome, e.g. a count or a spin pair.
using Summarizer = std::function<std::string(const RealizedRecords &, const std::string &last_label)>;

struct ScenarioSpec {
    std::string name;
    SubsystemLayout layout;
    StateVector initial_state;
    Schedule schedule;
    Parameters parameters;   // every parameter, defaults filled in
    Summarizer summarize;

    /// Designated records in marker order.
    std::vector<size_t> record_order() const;
    /// Record values in designation order joined by ','; "-" without records.
    std::string outcome_key(const RealizedRecords &records) const;
    void validate(const Tolerances &tol = kDefaultTolerances) const;
};

struct ScenarioOutcome {
    std::string records;   // outcome_key of the final realized records
    std::string summary;
};

/// N-path object with a pointer detector. The object is given the (real)
/// amplitude profile; with `propagate` a discrete Fourier step precedes
/// detection, which turns the profile into an interference pattern.
ScenarioSpec build_grating(size_t n_paths, const std::vector<double> &profile, bool propagate);

/// M atoms, each emitting into the counter's acceptance with probability
/// p_decay * p_detect, and one detection record per atom.
ScenarioSpec build_decay_counter(size_t m_atoms, double p_decay, double p_detect);

/// Singlet pair measured along axis_a then axis_b, each into its own record.
ScenarioSpec build_epr(const std::array<double, 3> &axis_a, const std::array<double, 3> &axis_b);

/// Spin, 3-path position (0 = centre, 1 = +x arm, 2 = −x arm), analyzer
/// environment qubit and a final s_z record.
ScenarioSpec build_stern_gerlach(bool recohere, bool analyzer_marks_environment);

/// Decay qubit followed by a chain of K copying records.
ScenarioSpec build_wigner_chain(size_t k, double p_right);

/// Two d-site particles in a bound pair eigenstate, with `markers` events
/// comparing the bound evolution against free hopping.
ScenarioSpec build_bound_pair(size_t d, double hop, double binding, size_t markers, double dt);

/// Object qubit passing a heavy partner that is rotated by δ on one path,
/// followed by an interference measurement.
ScenarioSpec build_spectator(double delta);

std::vector<std::string> scenario_names();
Parameters default_parameters(const std::string &name);
/// Builds a stock scenario; unknown names or keys raise ConfigError.
ScenarioSpec make_scenario(const std::string &name, const Parameters &overrides = {});

struct TrialOptions {
    /// Test hook: after the first record is realized, overwrite it with a
    /// different pointer value in the global state.
    bool inject_record_mutation = false;
    Tolerances tol = kDefaultTolerances;
};

struct TrialResult {
    Trajectory trajectory;
    ScenarioOutcome outcome;
};

TrialResult run_trial(const ScenarioSpec &spec, uint64_t seed, const TrialOptions &options = {});

/// Parses "x,y,z" into a vector, e.g. for axes and profiles.
std::vector<double> parse_list(const std::string &text);

}  // namespace qreal

#endif

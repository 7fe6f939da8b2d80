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

// Collapse-free evolution of the global state under piecewise-constant
// schedules of generators and unitaries.

#ifndef QREAL_DYNAMICS_H
#define QREAL_DYNAMICS_H

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "qreal/hilbert.h"

namespace qreal {

enum class StepKind { kHermitianGenerator, kExplicitUnitary, kIdentity };

/// One piecewise-constant evolution segment acting on a subset of subsystems.
/// The unitary is computed and validated at construction. A step may carry a
/// declared non-interacting counterpart used only for event detection.
class EvolutionStep {
   public:
    static EvolutionStep identity(std::vector<size_t> target, std::string label = {});
    /// exp(−i·H·duration) by spectral decomposition.
    static EvolutionStep generator(Matrix hamiltonian, double duration, std::vector<size_t> target,
                                   std::string label = {}, const Tolerances &tol = kDefaultTolerances);
    static EvolutionStep unitary(Matrix u, std::vector<size_t> target, std::string label = {},
                                 const Tolerances &tol = kDefaultTolerances);

    /// Copy of this step whose reference evolution is `reference`.
    EvolutionStep with_reference(const EvolutionStep &reference) const;
    /// Copy of this step that is its own reference (no coupling to remove).
    EvolutionStep as_own_reference() const;

    StepKind kind() const {
        return kind_;
    }
    const Matrix &matrix() const {
        return matrix_;
    }
    double duration() const {
        return duration_;
    }
    const std::vector<size_t> &target() const {
        return target_;
    }
    const std::string &label() const {
        return label_;
    }
    /// The unitary actually applied (empty for identity steps).
    const Matrix &unitary() const {
        return unitary_;
    }
    const EvolutionStep *reference() const {
        return reference_.get();
    }
    /// ‖U†U − I‖_max of the applied unitary.
    double unitarity_deviation() const;

   private:
    EvolutionStep() = default;

    StepKind kind_ = StepKind::kIdentity;
    Matrix matrix_;
    Matrix unitary_;
    double duration_ = 0;
    std::vector<size_t> target_;
    std::string label_;
    std::shared_ptr<const EvolutionStep> reference_;
};

/// Event detection runs after `step_index` has been applied. Records listed here
/// become realized when the marker fires and are frozen afterwards.
struct EventMarker {
    size_t step_index = 0;
    BipartiteSplit split;
    std::vector<size_t> records;
    std::string label;
};

struct Schedule {
    std::vector<EvolutionStep> steps;
    std::vector<EventMarker> markers;

    /// Checks targets and matrix sizes, marker ordering, split shapes, that
    /// records are record-tagged and designated once, and that no later step
    /// changes a designated record's pointer value.
    void validate(const SubsystemLayout &layout, const Tolerances &tol = kDefaultTolerances) const;
};

/// op applied to the listed subsystems (first listed is the most significant
/// digit of op's index). op need not be unitary.
StateVector apply_operator(const StateVector &state, const Matrix &op, std::span<const size_t> target);

StateVector evolve_step(const StateVector &state, const EvolutionStep &step);
StateVector evolve_reference(const StateVector &state, const EvolutionStep &step);
StateVector evolve(const StateVector &state, std::span<const EvolutionStep> steps);

/// exp(−i·H·t) for Hermitian H.
Matrix unitary_from_generator(const Matrix &hamiltonian, double duration);

struct UnitarityReport {
    double max_norm_drift = 0;          ///< max_t |‖ψ_t‖ − ‖ψ_0‖|
    double max_unitarity_deviation = 0; ///< max over steps of ‖U†U − I‖_max
    size_t steps = 0;
};

UnitarityReport check_unitarity(const Schedule &schedule, const StateVector &state);

}  // namespace qreal

#endif

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

#include "qreal/dynamics.h"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

namespace qreal {

namespace {

double max_abs(const Matrix &m) {
    return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

void check_target(const SubsystemLayout &layout, std::span<const size_t> target, Eigen::Index matrix_dim) {
    size_t d = 1;
    std::vector<bool> seen(layout.size(), false);
    for (size_t s : target) {
        layout.check_index(s);
        if (seen[s]) {
            throw InvalidSchedule("step targets subsystem " + std::to_string(s) + " twice");
        }
        seen[s] = true;
        d *= layout.dim(s);
    }
    if (matrix_dim >= 0 && static_cast<size_t>(matrix_dim) != d) {
        throw LayoutMismatch("step matrix dimension " + std::to_string(matrix_dim) +
                             " does not match target dimension " + std::to_string(d));
    }
}

// True when `u` (acting on `target`) leaves the pointer value of subsystem
// `record` unchanged: it commutes with every pointer projector of the record.
bool preserves_pointer(const SubsystemLayout &layout, const Matrix &u, std::span<const size_t> target,
                       size_t record, double eps) {
    auto pos = std::find(target.begin(), target.end(), record);
    if (pos == target.end()) {
        return true;
    }
    SubsystemLayout local = layout.select(target);
    size_t k = static_cast<size_t>(pos - target.begin());
    const size_t n = local.total_dim();
    for (size_t r = 0; r < n; ++r) {
        size_t dr = (r / local.stride(k)) % local.dim(k);
        for (size_t c = 0; c < n; ++c) {
            size_t dc = (c / local.stride(k)) % local.dim(k);
            if (dr != dc && std::abs(u(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c))) > eps) {
                return false;
            }
        }
    }
    return true;
}

}  // namespace

EvolutionStep EvolutionStep::identity(std::vector<size_t> target, std::string label) {
    EvolutionStep s;
    s.kind_ = StepKind::kIdentity;
    s.target_ = std::move(target);
    s.label_ = std::move(label);
    return s;
}

EvolutionStep EvolutionStep::generator(Matrix hamiltonian, double duration, std::vector<size_t> target,
                                       std::string label, const Tolerances &tol) {
    if (hamiltonian.rows() != hamiltonian.cols() || hamiltonian.rows() == 0) {
        throw InvalidGenerator("generator must be a nonempty square matrix");
    }
    if (!hamiltonian.allFinite() || !std::isfinite(duration)) {
        throw InvalidGenerator("generator or duration is not finite");
    }
    double scale = std::max(1.0, max_abs(hamiltonian));
    if (max_abs(hamiltonian - hamiltonian.adjoint()) > tol.herm * scale) {
        throw InvalidGenerator("generator '" + label + "' is not Hermitian");
    }
    EvolutionStep s;
    s.kind_ = StepKind::kHermitianGenerator;
    s.unitary_ = unitary_from_generator(hamiltonian, duration);
    s.matrix_ = std::move(hamiltonian);
    s.duration_ = duration;
    s.target_ = std::move(target);
    s.label_ = std::move(label);
    return s;
}

EvolutionStep EvolutionStep::unitary(Matrix u, std::vector<size_t> target, std::string label,
                                     const Tolerances &tol) {
    if (u.rows() != u.cols() || u.rows() == 0) {
        throw InvalidUnitary("unitary must be a nonempty square matrix");
    }
    Matrix gram = u.adjoint() * u - Matrix::Identity(u.rows(), u.cols());
    if (!u.allFinite() || max_abs(gram) > tol.unit) {
        throw InvalidUnitary("matrix for step '" + label + "' is not unitary");
    }
    EvolutionStep s;
    s.kind_ = StepKind::kExplicitUnitary;
    s.unitary_ = u;
    s.matrix_ = std::move(u);
    s.target_ = std::move(target);
    s.label_ = std::move(label);
    return s;
}

EvolutionStep EvolutionStep::with_reference(const EvolutionStep &reference) const {
    EvolutionStep s = *this;
    EvolutionStep ref = reference;
    ref.reference_.reset();
    s.reference_ = std::make_shared<const EvolutionStep>(std::move(ref));
    return s;
}

EvolutionStep EvolutionStep::as_own_reference() const {
    return with_reference(*this);
}

double EvolutionStep::unitarity_deviation() const {
    if (kind_ == StepKind::kIdentity) {
        return 0.0;
    }
    return max_abs(unitary_.adjoint() * unitary_ - Matrix::Identity(unitary_.rows(), unitary_.cols()));
}

Matrix unitary_from_generator(const Matrix &hamiltonian, double duration) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(hamiltonian);
    if (eig.info() != Eigen::Success) {
        throw NumericalFailure("eigendecomposition of generator failed");
    }
    const auto &vals = eig.eigenvalues();
    Eigen::VectorXcd phases(vals.size());
    for (Eigen::Index i = 0; i < vals.size(); ++i) {
        phases(i) = std::polar(1.0, -vals(i) * duration);
    }
    const Matrix &v = eig.eigenvectors();
    return v * phases.asDiagonal() * v.adjoint();
}

void Schedule::validate(const SubsystemLayout &layout, const Tolerances &tol) const {
    for (const auto &step : steps) {
        Eigen::Index d = step.kind() == StepKind::kIdentity ? -1 : step.matrix().rows();
        check_target(layout, step.target(), d);
        if (const auto *ref = step.reference()) {
            Eigen::Index rd = ref->kind() == StepKind::kIdentity ? -1 : ref->matrix().rows();
            check_target(layout, ref->target(), rd);
        }
    }
    std::vector<bool> designated(layout.size(), false);
    size_t previous = 0;
    for (const auto &marker : markers) {
        if (marker.step_index >= steps.size()) {
            throw InvalidSchedule("marker '" + marker.label + "' refers to a missing step");
        }
        if (marker.step_index < previous) {
            throw InvalidSchedule("markers must be ordered by step index");
        }
        previous = marker.step_index;
        marker.split.validate(layout);
        for (const auto *side : {&marker.split.side_a, &marker.split.side_b}) {
            for (size_t s : *side) {
                if (layout.dim(s) < 2) {
                    throw InvalidSchedule("subsystem '" + layout[s].label + "' in an event split has dim < 2");
                }
            }
        }
        for (size_t r : marker.records) {
            layout.check_index(r);
            if (layout[r].role != Role::kRecord) {
                throw InvalidSchedule("subsystem '" + layout[r].label + "' is designated but not record-tagged");
            }
            if (designated[r]) {
                throw InvalidSchedule("record '" + layout[r].label + "' designated twice");
            }
            designated[r] = true;
            for (size_t k = marker.step_index + 1; k < steps.size(); ++k) {
                const auto &later = steps[k];
                if (later.kind() == StepKind::kIdentity) {
                    continue;
                }
                if (!preserves_pointer(layout, later.unitary(), later.target(), r, tol.unit)) {
                    throw InvalidSchedule("step " + std::to_string(k) + " ('" + later.label() +
                                          "') changes frozen record '" + layout[r].label + "'");
                }
            }
        }
    }
}

StateVector apply_operator(const StateVector &state, const Matrix &op, std::span<const size_t> target) {
    const auto &layout = state.layout();
    check_target(layout, target, op.rows());
    if (op.rows() != op.cols()) {
        throw LayoutMismatch("operator must be square");
    }
    std::vector<bool> in_target(layout.size(), false);
    for (size_t s : target) {
        in_target[s] = true;
    }
    // Offsets of the target digit combinations and of the complementary ones.
    std::vector<size_t> t_off{0};
    for (size_t s : target) {
        std::vector<size_t> next;
        for (size_t base : t_off) {
            for (size_t d = 0; d < layout.dim(s); ++d) {
                next.push_back(base + d * layout.stride(s));
            }
        }
        t_off = std::move(next);
    }
    std::vector<size_t> r_off{0};
    for (size_t s = 0; s < layout.size(); ++s) {
        if (in_target[s]) {
            continue;
        }
        std::vector<size_t> next;
        for (size_t base : r_off) {
            for (size_t d = 0; d < layout.dim(s); ++d) {
                next.push_back(base + d * layout.stride(s));
            }
        }
        r_off = std::move(next);
    }
    const auto &in = state.amplitudes();
    Amplitudes out(in.size());
    const Eigen::Index n = op.rows();
    Eigen::VectorXcd buf(n);
    Eigen::VectorXcd res(n);
    for (size_t base : r_off) {
        for (Eigen::Index t = 0; t < n; ++t) {
            buf(t) = in(static_cast<Eigen::Index>(base + t_off[static_cast<size_t>(t)]));
        }
        res.noalias() = op * buf;
        for (Eigen::Index t = 0; t < n; ++t) {
            out(static_cast<Eigen::Index>(base + t_off[static_cast<size_t>(t)])) = res(t);
        }
    }
    return StateVector(layout, std::move(out));
}

StateVector evolve_step(const StateVector &state, const EvolutionStep &step) {
    if (step.kind() == StepKind::kIdentity) {
        check_target(state.layout(), step.target(), -1);
        return state;
    }
    return apply_operator(state, step.unitary(), step.target());
}

StateVector evolve_reference(const StateVector &state, const EvolutionStep &step) {
    const EvolutionStep *ref = step.reference();
    if (ref == nullptr) {
        throw MissingReference("step '" + step.label() + "' declares no non-interacting reference");
    }
    return evolve_step(state, *ref);
}

StateVector evolve(const StateVector &state, std::span<const EvolutionStep> steps) {
    StateVector current = state;
    for (const auto &step : steps) {
        current = evolve_step(current, step);
    }
    return current;
}

UnitarityReport check_unitarity(const Schedule &schedule, const StateVector &state) {
    UnitarityReport report;
    const double initial = state.amplitudes().norm();
    StateVector current = state;
    for (const auto &step : schedule.steps) {
        current = evolve_step(current, step);
        report.max_norm_drift = std::max(report.max_norm_drift, std::abs(current.amplitudes().norm() - initial));
        report.max_unitarity_deviation = std::max(report.max_unitarity_deviation, step.unitarity_deviation());
        ++report.steps;
    }
    return report;
}

}  // namespace qreal

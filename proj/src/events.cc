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

#include "qreal/events.h"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

namespace qreal {

namespace {

std::string digits_label(const SubsystemLayout &layout, size_t index) {
    std::string out;
    auto digits = layout.digits(index);
    for (size_t i = 0; i < digits.size(); ++i) {
        if (i) {
            out += '.';
        }
        out += std::to_string(digits[i]);
    }
    return out;
}

// Label of a branch: its side A pointer digits when the left factor is a basis
// state, otherwise its position in the decomposition.
std::string branch_label(const StateVector &left, size_t k, double eps) {
    if (left.layout().size() > 0) {
        const auto &amps = left.amplitudes();
        Eigen::Index best = 0;
        amps.cwiseAbs2().maxCoeff(&best);
        if (std::norm(amps(best)) >= 1 - eps) {
            return digits_label(left.layout(), static_cast<size_t>(best));
        }
    }
    return "b" + std::to_string(k);
}

}  // namespace

size_t ConditionedView::to_view(size_t global) const {
    auto it = std::find(kept.begin(), kept.end(), global);
    return it == kept.end() ? npos : static_cast<size_t>(it - kept.begin());
}

ConditionedView condition(const StateVector &state, const RealizedRecords &records, const Tolerances &tol) {
    ConditionedView view;
    std::vector<size_t> subsystems;
    std::vector<size_t> values;
    for (const auto &[s, v] : records) {
        subsystems.push_back(s);
        values.push_back(v);
    }
    for (size_t i = 0; i < state.layout().size(); ++i) {
        if (!records.contains(i)) {
            view.kept.push_back(i);
        }
    }
    StateVector raw = records.empty() ? state : partial_inner(state, subsystems, values);
    view.weight = raw.squared_norm();
    if (!(view.weight > tol.null)) {
        throw HistoryInconsistent("realized records have zero weight in the global state");
    }
    view.state = raw.scaled(1.0 / std::sqrt(view.weight));
    return view;
}

size_t BranchSet::retained_count() const {
    return static_cast<size_t>(std::count_if(members.begin(), members.end(), [](const auto &m) { return m.retained; }));
}

std::vector<size_t> BranchSet::retained_indices() const {
    std::vector<size_t> out;
    for (size_t k = 0; k < members.size(); ++k) {
        if (members[k].retained) {
            out.push_back(k);
        }
    }
    return out;
}

std::vector<double> BranchSet::retained_probabilities() const {
    std::vector<double> out;
    double total = 0;
    for (const auto &m : members) {
        if (m.retained) {
            out.push_back(m.weight());
            total += m.weight();
        }
    }
    for (double &p : out) {
        p /= total;
    }
    return out;
}

BranchSet branch_decompose(const StateVector &state, const BipartiteSplit &split,
                           const RealizedRecords &conditioning, const Tolerances &tol) {
    split.validate(state.layout());
    ConditionedView view = condition(state, conditioning, tol);
    BranchSet out;
    out.conditioning = conditioning;
    out.view_weight = view.weight;
    BipartiteSplit local;
    for (size_t s : split.side_a) {
        if (size_t v = view.to_view(s); v != ConditionedView::npos) {
            out.side_a.push_back(s);
            local.side_a.push_back(v);
        }
    }
    for (size_t s : split.side_b) {
        if (size_t v = view.to_view(s); v != ConditionedView::npos) {
            out.side_b.push_back(s);
            local.side_b.push_back(v);
        }
    }
    if (local.side_a.empty() || local.side_b.empty()) {
        BranchMember m;
        m.coefficient = 1;
        if (local.side_a.empty()) {
            m.right = permute(view.state, local.side_b);
        } else {
            m.left = permute(view.state, local.side_a);
        }
        m.retained = true;
        m.label = branch_label(m.left, 0, tol.record);
        out.members.push_back(std::move(m));
        return out;
    }
    SchmidtDecomposition sd = schmidt_decompose(view.state, local);
    for (size_t k = 0; k < sd.rank(); ++k) {
        BranchMember m;
        m.coefficient = sd.coefficients[k];
        m.left = std::move(sd.left_states[k]);
        m.right = std::move(sd.right_states[k]);
        m.retained = m.weight() > tol.branch;
        m.label = branch_label(m.left, k, tol.record);
        out.members.push_back(std::move(m));
    }
    return out;
}

EventRecord detect_event(const StateVector &post, const StateVector &reference_post, const BipartiteSplit &split,
                         const RealizedRecords &conditioning, const Tolerances &tol) {
    if (!(post.layout() == reference_post.layout())) {
        throw LayoutMismatch("post and reference states have different layouts");
    }
    EventRecord ev;
    ev.split = split;
    ev.branches = branch_decompose(post, split, conditioning, tol);
    bool changed = !global_phase_equal(post, reference_post, tol.phase);
    ev.is_event = changed && ev.branches.retained_count() >= 2;
    return ev;
}

EventRecord detect_event(const StateVector &post, const StateVector &reference_post, const EventMarker &marker,
                         const RealizedRecords &conditioning, const Tolerances &tol) {
    EventRecord ev = detect_event(post, reference_post, marker.split, conditioning, tol);
    ev.step_index = marker.step_index;
    ev.label = marker.label;
    ev.record_designation = marker.records;
    read_records(ev.branches, marker.records, post.layout(), tol);
    return ev;
}

std::vector<double> marginal(const StateVector &state, size_t subsystem) {
    const auto &layout = state.layout();
    layout.check_index(subsystem);
    std::vector<double> out(layout.dim(subsystem), 0.0);
    const size_t stride = layout.stride(subsystem);
    const size_t d = layout.dim(subsystem);
    const auto &amps = state.amplitudes();
    for (Eigen::Index i = 0; i < amps.size(); ++i) {
        out[(static_cast<size_t>(i) / stride) % d] += std::norm(amps(i));
    }
    return out;
}

std::optional<size_t> pointer_value(const StateVector &state, size_t subsystem, double eps) {
    auto p = marginal(state, subsystem);
    double total = 0;
    for (double x : p) {
        total += x;
    }
    auto best = std::max_element(p.begin(), p.end());
    if (total > 0 && *best / total >= 1 - eps) {
        return static_cast<size_t>(best - p.begin());
    }
    return std::nullopt;
}

void read_records(BranchSet &branches, std::span<const size_t> records, const SubsystemLayout &layout,
                  const Tolerances &tol) {
    for (auto &m : branches.members) {
        m.record_values.clear();
        if (!m.retained) {
            continue;
        }
        for (size_t r : records) {
            const StateVector *factor = nullptr;
            size_t local = 0;
            if (auto it = std::find(branches.side_a.begin(), branches.side_a.end(), r); it != branches.side_a.end()) {
                factor = &m.left;
                local = static_cast<size_t>(it - branches.side_a.begin());
            } else if (auto jt = std::find(branches.side_b.begin(), branches.side_b.end(), r);
                       jt != branches.side_b.end()) {
                factor = &m.right;
                local = static_cast<size_t>(jt - branches.side_b.begin());
            } else {
                throw UnsupportedRecord("record '" + layout[r].label + "' was already realized");
            }
            auto v = pointer_value(*factor, local, tol.record);
            if (!v) {
                throw UnsupportedRecord("record '" + layout[r].label + "' is not a pointer state in branch " +
                                        m.label);
            }
            m.record_values.push_back(*v);
        }
    }
}

MacrostatePartition MacrostatePartition::pointer(size_t dim) {
    MacrostatePartition p;
    for (size_t i = 0; i < dim; ++i) {
        p.groups.push_back({i});
        p.labels.push_back(std::to_string(i));
    }
    return p;
}

void MacrostatePartition::validate(size_t dim) const {
    if (!labels.empty() && labels.size() != groups.size()) {
        throw InvalidParameter("one label is needed per macrostate");
    }
    std::vector<int> seen(dim, 0);
    for (const auto &g : groups) {
        if (g.empty()) {
            throw InvalidParameter("empty macrostate group");
        }
        for (size_t i : g) {
            if (i >= dim) {
                throw IndexError("macrostate index " + std::to_string(i) + " out of range");
            }
            ++seen[i];
        }
    }
    for (int c : seen) {
        if (c != 1) {
            throw InvalidParameter("macrostate groups must be disjoint and exhaustive");
        }
    }
}

std::vector<RelativeState> relative_states(const StateVector &state, size_t instrument,
                                           const MacrostatePartition &partition, const Tolerances &tol) {
    const auto &layout = state.layout();
    layout.check_index(instrument);
    partition.validate(layout.dim(instrument));
    std::vector<size_t> subsystem{instrument};
    std::vector<RelativeState> out;
    for (size_t k = 0; k < partition.groups.size(); ++k) {
        const auto &group = partition.groups[k];
        Matrix v;
        SubsystemLayout rest;
        for (size_t j = 0; j < group.size(); ++j) {
            size_t idx = group[j];
            StateVector c = partial_inner(state, subsystem, std::span<const size_t>(&idx, 1));
            if (j == 0) {
                rest = c.layout();
                v.resize(static_cast<Eigen::Index>(c.dim()), static_cast<Eigen::Index>(group.size()));
            }
            v.col(static_cast<Eigen::Index>(j)) = c.amplitudes();
        }
        double weight = v.squaredNorm();
        if (!(weight > tol.null)) {
            continue;
        }
        // ρ_k = V V† / w shares its nonzero spectrum with the small Gram matrix V† V / w.
        Matrix gram = v.adjoint() * v / weight;
        Eigen::SelfAdjointEigenSolver<Matrix> eig(gram);
        Eigen::Index top = gram.rows() - 1;
        Amplitudes xi = v * eig.eigenvectors().col(top);
        xi /= xi.norm();
        if (auto f = first_nonzero(xi)) {
            Complex a = xi(static_cast<Eigen::Index>(*f));
            xi *= std::conj(a) / std::abs(a);
        }
        RelativeState r;
        r.alpha = std::sqrt(weight);
        r.xi = StateVector(rest, std::move(xi));
        r.macrostate = k;
        r.purity = gram.cwiseAbs2().sum();
        out.push_back(std::move(r));
    }
    return out;
}

InstrumentMetrics instrument_metrics(const StateVector &state, size_t instrument,
                                     const MacrostatePartition &partition,
                                     std::span<const StateVector> later_states, const Tolerances &tol) {
    auto rel = relative_states(state, instrument, partition, tol);
    InstrumentMetrics m;
    for (const auto &r : rel) {
        m.faithfulness = std::min(m.faithfulness, r.purity);
    }
    double max_overlap = 0;
    for (size_t j = 0; j < rel.size(); ++j) {
        for (size_t k = j + 1; k < rel.size(); ++k) {
            max_overlap = std::max(max_overlap, std::abs(inner(rel[j].xi, rel[k].xi)));
        }
    }
    if (rel.size() < 2 || max_overlap >= 1 - tol.orth) {
        m.degenerate = true;
        m.distinguishability = 0;
    } else {
        m.distinguishability = 1 - max_overlap;
    }
    auto macro_distribution = [&](const StateVector &s) {
        auto p = marginal(s, instrument);
        std::vector<double> out(partition.groups.size(), 0.0);
        for (size_t k = 0; k < partition.groups.size(); ++k) {
            for (size_t i : partition.groups[k]) {
                out[k] += p[i];
            }
        }
        return out;
    };
    auto at_event = macro_distribution(state);
    for (const auto &later : later_states) {
        auto now = macro_distribution(later);
        double bc = 0;
        for (size_t k = 0; k < now.size(); ++k) {
            bc += std::sqrt(now[k] * at_event[k]);
        }
        m.memory = std::min(m.memory, bc * bc);
    }
    return m;
}

}  // namespace qreal

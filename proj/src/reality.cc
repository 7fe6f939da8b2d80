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

#include "qreal/reality.h"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include <Eigen/Eigenvalues>

namespace qreal {

namespace {

Matrix psd_sqrt(const Matrix &rho) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(rho);
    Eigen::VectorXd vals = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return eig.eigenvectors() * vals.asDiagonal() * eig.eigenvectors().adjoint();
}

// Root fidelity ‖√ρ √σ‖₁ of two density matrices.
double root_fidelity(const Matrix &rho, const Matrix &sigma) {
    Eigen::JacobiSVD<Matrix> svd(psd_sqrt(rho) * psd_sqrt(sigma));
    return svd.singularValues().sum();
}

}  // namespace

double info_bits_of(double probability) {
    return probability >= 1.0 ? 0.0 : -std::log2(probability);
}

void RealityLedger::append(LedgerEntry entry) {
    entry.cumulative_bits = cumulative_bits() + entry.info_bits;
    entries.push_back(std::move(entry));
}

double RealityLedger::cumulative_bits() const {
    return entries.empty() ? 0.0 : entries.back().cumulative_bits;
}

std::mt19937_64 trial_rng(uint64_t seed) {
    uint64_t z = seed + 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return std::mt19937_64(z ^ (z >> 31));
}

double uniform01(std::mt19937_64 &rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

size_t sample_index(std::span<const double> probabilities, std::mt19937_64 &rng) {
    if (probabilities.empty()) {
        throw InvalidParameter("cannot sample from an empty distribution");
    }
    double u = uniform01(rng);
    double total = 0;
    for (double p : probabilities) {
        total += p;
    }
    u *= total;
    double acc = 0;
    size_t last = 0;
    for (size_t i = 0; i < probabilities.size(); ++i) {
        if (probabilities[i] <= 0) {
            continue;
        }
        last = i;
        acc += probabilities[i];
        if (u < acc) {
            return i;
        }
    }
    return last;
}

BranchSet branches_for_token(const StateVector &state, const EventRecord &event, const RealityToken &token,
                             const Tolerances &tol) {
    if (event.branches.conditioning == token.realized_records) {
        return event.branches;
    }
    BranchSet b = branch_decompose(state, event.split, token.realized_records, tol);
    read_records(b, event.record_designation, state.layout(), tol);
    return b;
}

std::vector<double> conditional_branch_distribution(const StateVector &state, const EventRecord &event,
                                                    const RealityToken &token, const Tolerances &tol) {
    if (event.branches.conditioning == token.realized_records) {
        return event.branches.retained_probabilities();
    }
    return branch_decompose(state, event.split, token.realized_records, tol).retained_probabilities();
}

Realization realize_branch(const StateVector &state, const EventRecord &event, const RealityToken &token,
                           std::mt19937_64 &rng, const Tolerances &tol) {
    if (!event.is_event && event.record_designation.empty()) {
        throw InvalidParameter("marker '" + event.label + "' is neither an event nor a record update");
    }
    BranchSet branches = branches_for_token(state, event, token, tol);
    auto retained = branches.retained_indices();
    auto probs = branches.retained_probabilities();
    size_t pick = probs.size() > 1 ? sample_index(probs, rng) : 0;
    size_t member = retained[pick];
    const BranchMember &m = branches.members[member];

    Realization out;
    out.token = token;
    for (size_t i = 0; i < event.record_designation.size(); ++i) {
        out.token.realized_records[event.record_designation[i]] = m.record_values[i];
    }
    out.token.epoch = token.epoch + 1;
    RealizedBranch rb;
    rb.epoch = out.token.epoch;
    rb.branch_index = member;
    rb.branch_count = branches.members.size();
    rb.label = m.label;
    if (!branches.side_a.empty()) {
        rb.factors.push_back({branches.side_a, m.left});
    }
    if (!branches.side_b.empty()) {
        rb.factors.push_back({branches.side_b, m.right});
    }
    rb.conditioning = branches.conditioning;
    out.token.realized_branch = std::move(rb);
    out.token.branch_observable = !event.record_designation.empty();

    LedgerEntry &e = out.entry;
    e.epoch = out.token.epoch;
    e.step_index = event.step_index;
    e.branch_index = member;
    e.branch_count = retained.size();
    e.probability = probs[pick];
    e.info_bits = info_bits_of(e.probability);
    e.cumulative_bits = e.info_bits;
    e.is_event = event.is_event;
    e.label = m.label;
    e.records_after = out.token.realized_records;
    return out;
}

int reality_value(const RealityToken &token, const BranchQuery &query) {
    if (!token.realized_branch || query.epoch != token.epoch) {
        throw EpochMismatch("query for epoch " + std::to_string(query.epoch) + " but the token is at epoch " +
                            std::to_string(token.epoch));
    }
    if (query.branch_index >= token.realized_branch->branch_count) {
        throw IndexError("branch " + std::to_string(query.branch_index) + " does not exist at this epoch");
    }
    return query.branch_index == token.realized_branch->branch_index ? 1 : 0;
}

bool constituent_consistency(const RealityToken &token, const StateVector &state, const SubsystemLayout &layout,
                             const Tolerances &tol) {
    if (!token.realized_branch) {
        return true;
    }
    if (!(state.layout() == layout)) {
        return false;
    }
    const RealizedBranch &rb = *token.realized_branch;
    std::vector<int> cover(layout.size(), 0);
    for (const auto &[s, v] : rb.conditioning) {
        if (s >= layout.size()) {
            return false;
        }
        ++cover[s];
    }
    for (const auto &f : rb.factors) {
        if (f.subsystems.size() != f.state.layout().size() || !f.state.is_normalized(tol.norm)) {
            return false;
        }
        for (size_t s : f.subsystems) {
            if (s >= layout.size()) {
                return false;
            }
            ++cover[s];
        }
    }
    if (rb.factors.empty() || std::any_of(cover.begin(), cover.end(), [](int c) { return c != 1; })) {
        return false;
    }
    ConditionedView view;
    try {
        view = condition(state, rb.conditioning, tol);
    } catch (const HistoryInconsistent &) {
        return false;
    }
    // Project the view onto every factor but the last; the remainder is what
    // the last factor must be.
    StateVector projected = view.state;
    std::vector<size_t> remaining = view.kept;
    for (size_t i = 0; i + 1 < rb.factors.size(); ++i) {
        const auto &f = rb.factors[i];
        std::vector<size_t> local;
        for (size_t s : f.subsystems) {
            local.push_back(static_cast<size_t>(std::find(remaining.begin(), remaining.end(), s) - remaining.begin()));
        }
        std::vector<size_t> rest;
        std::vector<size_t> rest_global;
        for (size_t j = 0; j < remaining.size(); ++j) {
            if (std::find(local.begin(), local.end(), j) == local.end()) {
                rest.push_back(j);
                rest_global.push_back(remaining[j]);
            }
        }
        BipartiteSplit split{local, rest};
        Matrix m = reshape(projected, split);
        Amplitudes rem = m.transpose() * f.state.amplitudes().conjugate();
        projected = StateVector(projected.layout().select(rest), std::move(rem));
        remaining = rest_global;
    }
    double n = std::sqrt(projected.squared_norm());
    if (!(n > tol.null)) {
        return false;
    }
    // Compare the product of factors with f_0 ⊗ ... ⊗ remainder on the view.
    SubsystemLayout view_layout = layout.select(view.kept);
    auto local_of = [&](const std::vector<size_t> &subs) {
        std::vector<size_t> out;
        for (size_t s : subs) {
            out.push_back(view.to_view(s));
        }
        return out;
    };
    std::vector<std::pair<std::vector<size_t>, StateVector>> product;
    std::vector<std::pair<std::vector<size_t>, StateVector>> reference;
    for (size_t i = 0; i < rb.factors.size(); ++i) {
        const auto &f = rb.factors[i];
        product.emplace_back(local_of(f.subsystems), f.state);
        if (i + 1 < rb.factors.size()) {
            reference.emplace_back(local_of(f.subsystems), f.state);
        }
    }
    std::vector<size_t> last_local = local_of(rb.factors.back().subsystems);
    // The remainder is laid out in `remaining` order; reorder to the last factor's order.
    std::vector<size_t> order;
    for (size_t s : rb.factors.back().subsystems) {
        order.push_back(static_cast<size_t>(std::find(remaining.begin(), remaining.end(), s) - remaining.begin()));
    }
    StateVector tail = permute(projected.scaled(1.0 / n), order);
    reference.emplace_back(last_local, tail);
    StateVector a = combine(view_layout, product);
    StateVector b = combine(view_layout, reference);
    return (a.amplitudes() - b.amplitudes()).norm() <= tol.recon;
}

double info_content(const RealityLedger &ledger) {
    double total = 0;
    for (const auto &e : ledger.entries) {
        total += e.info_bits;
    }
    return total;
}

StateVector lift_branch(const BranchSet &branches, size_t member, const SubsystemLayout &layout) {
    const BranchMember &m = branches.members.at(member);
    std::vector<std::pair<std::vector<size_t>, StateVector>> factors;
    for (const auto &[s, v] : branches.conditioning) {
        size_t digit = v;
        factors.emplace_back(std::vector<size_t>{s},
                             StateVector::basis(layout.select(std::vector<size_t>{s}), std::span(&digit, 1)));
    }
    if (!branches.side_a.empty()) {
        factors.emplace_back(branches.side_a, m.left.scaled(m.coefficient));
    }
    if (!branches.side_b.empty()) {
        factors.emplace_back(branches.side_b, branches.side_a.empty() ? m.right.scaled(m.coefficient) : m.right);
    }
    return combine(layout, factors);
}

RecoherenceReport recoherence_monitor(const EventRecord &prior, const SubsystemLayout &layout,
                                      std::span<const EvolutionStep> later_steps, double eps) {
    RecoherenceReport report;
    report.branches = prior.branches.retained_indices();
    const auto &side_a = prior.branches.side_a;
    std::vector<size_t> rest;
    for (size_t s = 0; s < layout.size(); ++s) {
        if (std::find(side_a.begin(), side_a.end(), s) == side_a.end()) {
            rest.push_back(s);
        }
    }
    std::vector<Matrix> reduced;
    for (size_t k : report.branches) {
        StateVector st = evolve(lift_branch(prior.branches, k, layout), later_steps).normalized();
        if (rest.empty()) {
            reduced.push_back(st.amplitudes() * st.amplitudes().adjoint());
            continue;
        }
        Matrix m = reshape(st, BipartiteSplit{side_a, rest});
        reduced.push_back(m * m.adjoint());
    }
    const size_t n = reduced.size();
    report.overlaps.assign(n, std::vector<double>(n, 1.0));
    for (size_t j = 0; j < n; ++j) {
        for (size_t k = j + 1; k < n; ++k) {
            double f = std::min(1.0, root_fidelity(reduced[j], reduced[k]));
            report.overlaps[j][k] = report.overlaps[k][j] = f;
            report.min_overlap = std::min(report.min_overlap, f);
        }
    }
    report.recohered = n >= 2 && report.min_overlap >= 1 - eps;
    report.which_branch_retrievable = !report.recohered;
    if (report.recohered) {
        report.note = "branches recohered: which-branch information is lost and cannot be retrieved";
    } else if (n < 2) {
        report.note = "single branch";
    } else {
        report.note = "branches remain distinguishable";
    }
    return report;
}

std::string ledger_line(const LedgerEntry &e) {
    char buf[256];
    std::snprintf(buf, sizeof(buf), "%zu,%zu,%zu,%.17g,%.17g,%.17g", e.epoch, e.step_index, e.branch_index,
                  e.probability, e.info_bits, e.cumulative_bits);
    return buf;
}

LedgerEntry parse_ledger_line(const std::string &line) {
    LedgerEntry e;
    std::istringstream in(line);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(in, field, ',')) {
        fields.push_back(field);
    }
    if (fields.size() != 6) {
        throw InvalidParameter("ledger line needs 6 fields: '" + line + "'");
    }
    try {
        e.epoch = std::stoull(fields[0]);
        e.step_index = std::stoull(fields[1]);
        e.branch_index = std::stoull(fields[2]);
        e.probability = std::stod(fields[3]);
        e.info_bits = std::stod(fields[4]);
        e.cumulative_bits = std::stod(fields[5]);
    } catch (const std::logic_error &) {
        throw InvalidParameter("malformed ledger line: '" + line + "'");
    }
    return e;
}

void write_ledger(const RealityLedger &ledger, std::ostream &out) {
    for (const auto &e : ledger.entries) {
        out << ledger_line(e) << '\n';
    }
}

std::vector<LedgerEntry> read_ledger(std::istream &in) {
    std::vector<LedgerEntry> out;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty()) {
            out.push_back(parse_ledger_line(line));
        }
    }
    return out;
}

}  // namespace qreal

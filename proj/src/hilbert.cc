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

#include "qreal/hilbert.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <limits>
#include <numeric>

#include <Eigen/SVD>

namespace qreal {

namespace {

constexpr size_t kDefaultMaxDimension = size_t{1} << 16;

// Singular values at or below this are treated as exact zeros.
constexpr double kSchmidtZero = 1e-13;

// Singular values closer than this form one degenerate block.
constexpr double kDegeneracy = 1e-10;

std::atomic<size_t> g_dimension_override{0};

// Offsets (in the full index space) of every digit combination of the listed
// subsystems, enumerated with the first listed subsystem most significant.
std::vector<size_t> offsets_of(const SubsystemLayout &layout, std::span<const size_t> subsystems) {
    std::vector<size_t> offsets{0};
    for (size_t s : subsystems) {
        std::vector<size_t> next;
        next.reserve(offsets.size() * layout.dim(s));
        for (size_t base : offsets) {
            for (size_t d = 0; d < layout.dim(s); ++d) {
                next.push_back(base + d * layout.stride(s));
            }
        }
        offsets = std::move(next);
    }
    return offsets;
}

void check_permutation(std::span<const size_t> order, size_t n) {
    if (order.size() != n) {
        throw IndexError("permutation length does not match layout");
    }
    std::vector<bool> seen(n, false);
    for (size_t s : order) {
        if (s >= n || seen[s]) {
            throw IndexError("not a permutation of subsystem indices");
        }
        seen[s] = true;
    }
}

StateVector fix_phase(const StateVector &state) {
    auto first = first_nonzero(state.amplitudes());
    if (!first) {
        return state;
    }
    Complex a = state.amplitude(*first);
    return state.scaled(std::conj(a) / std::abs(a));
}

}  // namespace

size_t max_total_dimension() {
    size_t override_value = g_dimension_override.load();
    if (override_value != 0) {
        return override_value;
    }
    if (const char *env = std::getenv("QREAL_MAX_DIM")) {
        char *end = nullptr;
        unsigned long long v = std::strtoull(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) {
            return static_cast<size_t>(v);
        }
    }
    return kDefaultMaxDimension;
}

void set_max_total_dimension(std::optional<size_t> limit) {
    g_dimension_override.store(limit.value_or(0));
}

const char *role_name(Role role) {
    switch (role) {
        case Role::kObject:
            return "object";
        case Role::kInstrument:
            return "instrument";
        case Role::kRecord:
            return "record";
        case Role::kEnvironment:
            return "environment";
    }
    return "?";
}

SubsystemLayout::SubsystemLayout(std::vector<Subsystem> subsystems) : subsystems_(std::move(subsystems)) {
    const size_t limit = max_total_dimension();
    total_dim_ = 1;
    for (const auto &s : subsystems_) {
        if (s.dim == 0) {
            throw InvalidParameter("subsystem '" + s.label + "' has dimension 0");
        }
        if (total_dim_ > limit / s.dim) {
            throw CapacityExceeded("composite dimension exceeds the limit of " + std::to_string(limit));
        }
        total_dim_ *= s.dim;
    }
    strides_.assign(subsystems_.size(), 1);
    size_t stride = 1;
    for (size_t i = subsystems_.size(); i-- > 0;) {
        strides_[i] = stride;
        stride *= subsystems_[i].dim;
    }
}

SubsystemLayout SubsystemLayout::qubits(size_t n, Role role) {
    std::vector<Subsystem> subs;
    for (size_t i = 0; i < n; ++i) {
        subs.push_back({2, role, "q" + std::to_string(i)});
    }
    return SubsystemLayout(std::move(subs));
}

SubsystemLayout SubsystemLayout::from_dims(std::span<const size_t> dims, Role role) {
    std::vector<Subsystem> subs;
    for (size_t i = 0; i < dims.size(); ++i) {
        subs.push_back({dims[i], role, "s" + std::to_string(i)});
    }
    return SubsystemLayout(std::move(subs));
}

std::vector<size_t> SubsystemLayout::dims() const {
    std::vector<size_t> out;
    for (const auto &s : subsystems_) {
        out.push_back(s.dim);
    }
    return out;
}

std::vector<size_t> SubsystemLayout::digits(size_t index) const {
    if (index >= total_dim_) {
        throw IndexError("amplitude index out of range");
    }
    std::vector<size_t> out(subsystems_.size());
    for (size_t i = 0; i < subsystems_.size(); ++i) {
        out[i] = (index / strides_[i]) % subsystems_[i].dim;
    }
    return out;
}

size_t SubsystemLayout::index_of(std::span<const size_t> digits) const {
    if (digits.size() != subsystems_.size()) {
        throw LayoutMismatch("digit count does not match layout");
    }
    size_t index = 0;
    for (size_t i = 0; i < digits.size(); ++i) {
        if (digits[i] >= subsystems_[i].dim) {
            throw IndexError("basis index out of range for subsystem '" + subsystems_[i].label + "'");
        }
        index += digits[i] * strides_[i];
    }
    return index;
}

SubsystemLayout SubsystemLayout::select(std::span<const size_t> subsystems) const {
    std::vector<Subsystem> subs;
    for (size_t s : subsystems) {
        check_index(s);
        subs.push_back(subsystems_[s]);
    }
    return SubsystemLayout(std::move(subs));
}

SubsystemLayout SubsystemLayout::concat(const SubsystemLayout &other) const {
    std::vector<Subsystem> subs = subsystems_;
    subs.insert(subs.end(), other.subsystems_.begin(), other.subsystems_.end());
    return SubsystemLayout(std::move(subs));
}

std::vector<size_t> SubsystemLayout::with_role(Role role) const {
    std::vector<size_t> out;
    for (size_t i = 0; i < subsystems_.size(); ++i) {
        if (subsystems_[i].role == role) {
            out.push_back(i);
        }
    }
    return out;
}

void SubsystemLayout::check_index(size_t subsystem) const {
    if (subsystem >= subsystems_.size()) {
        throw IndexError("subsystem index " + std::to_string(subsystem) + " out of range");
    }
}

StateVector::StateVector(SubsystemLayout layout, Amplitudes amplitudes)
    : layout_(std::move(layout)), amplitudes_(std::move(amplitudes)) {
    if (static_cast<size_t>(amplitudes_.size()) != layout_.total_dim()) {
        throw LayoutMismatch("amplitude count " + std::to_string(amplitudes_.size()) +
                             " does not match layout dimension " + std::to_string(layout_.total_dim()));
    }
}

StateVector StateVector::basis(SubsystemLayout layout, std::span<const size_t> digits) {
    Amplitudes a = Amplitudes::Zero(static_cast<Eigen::Index>(layout.total_dim()));
    a(static_cast<Eigen::Index>(layout.index_of(digits))) = 1.0;
    return StateVector(std::move(layout), std::move(a));
}

StateVector StateVector::from_values(SubsystemLayout layout, std::span<const Complex> values) {
    Amplitudes a(static_cast<Eigen::Index>(values.size()));
    for (size_t i = 0; i < values.size(); ++i) {
        a(static_cast<Eigen::Index>(i)) = values[i];
    }
    return StateVector(std::move(layout), std::move(a));
}

bool StateVector::is_normalized(double eps) const {
    return std::abs(squared_norm() - 1.0) <= eps;
}

StateVector StateVector::normalized() const {
    double n = amplitudes_.norm();
    if (!(n > 0) || !std::isfinite(n)) {
        throw NumericalFailure("cannot normalize a zero or non-finite state");
    }
    return StateVector(layout_, amplitudes_ / n);
}

StateVector StateVector::scaled(Complex factor) const {
    return StateVector(layout_, amplitudes_ * factor);
}

bool StateVector::identical(const StateVector &other) const {
    if (!(layout_ == other.layout_) || amplitudes_.size() != other.amplitudes_.size()) {
        return false;
    }
    return std::memcmp(amplitudes_.data(), other.amplitudes_.data(),
                       sizeof(Complex) * static_cast<size_t>(amplitudes_.size())) == 0;
}

Complex inner(const StateVector &a, const StateVector &b) {
    if (!(a.layout() == b.layout())) {
        throw LayoutMismatch("inner product of states on different layouts");
    }
    return a.amplitudes().dot(b.amplitudes());
}

BipartiteSplit BipartiteSplit::of(const SubsystemLayout &layout, std::vector<size_t> side_a) {
    BipartiteSplit split;
    split.side_a = std::move(side_a);
    for (size_t i = 0; i < layout.size(); ++i) {
        if (std::find(split.side_a.begin(), split.side_a.end(), i) == split.side_a.end()) {
            split.side_b.push_back(i);
        }
    }
    split.validate(layout);
    return split;
}

void BipartiteSplit::validate(const SubsystemLayout &layout) const {
    if (side_a.empty()) {
        throw InvalidParameter("bipartite split needs a nonempty side A");
    }
    std::vector<int> count(layout.size(), 0);
    for (size_t s : side_a) {
        layout.check_index(s);
        ++count[s];
    }
    for (size_t s : side_b) {
        layout.check_index(s);
        ++count[s];
    }
    for (size_t i = 0; i < count.size(); ++i) {
        if (count[i] != 1) {
            throw InvalidParameter("split sides must be disjoint and cover subsystem " + std::to_string(i));
        }
    }
}

Matrix reshape(const StateVector &state, const BipartiteSplit &split) {
    split.validate(state.layout());
    auto rows = offsets_of(state.layout(), split.side_a);
    auto cols = offsets_of(state.layout(), split.side_b);
    Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
    const auto &a = state.amplitudes();
    for (size_t c = 0; c < cols.size(); ++c) {
        for (size_t r = 0; r < rows.size(); ++r) {
            m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                a(static_cast<Eigen::Index>(rows[r] + cols[c]));
        }
    }
    return m;
}

StateVector SchmidtDecomposition::reconstruct(const SubsystemLayout &layout) const {
    Amplitudes sum = Amplitudes::Zero(static_cast<Eigen::Index>(layout.total_dim()));
    for (size_t k = 0; k < coefficients.size(); ++k) {
        std::pair<std::vector<size_t>, StateVector> parts[] = {{split.side_a, left_states[k]},
                                                               {split.side_b, right_states[k]}};
        sum += coefficients[k] * combine(layout, parts).amplitudes();
    }
    return StateVector(layout, std::move(sum));
}

StateVector tensor_product(std::span<const StateVector> states) {
    SubsystemLayout layout;
    Amplitudes amps = Amplitudes::Ones(1);
    for (const auto &s : states) {
        layout = layout.concat(s.layout());
        Amplitudes next(amps.size() * s.amplitudes().size());
        for (Eigen::Index i = 0; i < amps.size(); ++i) {
            next.segment(i * s.amplitudes().size(), s.amplitudes().size()) = amps(i) * s.amplitudes();
        }
        amps = std::move(next);
    }
    return StateVector(std::move(layout), std::move(amps));
}

StateVector tensor_product(const StateVector &a, const StateVector &b) {
    StateVector parts[] = {a, b};
    return tensor_product(parts);
}

StateVector permute(const StateVector &state, std::span<const size_t> order) {
    const auto &layout = state.layout();
    check_permutation(order, layout.size());
    SubsystemLayout out_layout = layout.select(order);
    // Offsets of the input index for each output index.
    auto source = offsets_of(layout, order);
    Amplitudes out(static_cast<Eigen::Index>(source.size()));
    for (size_t i = 0; i < source.size(); ++i) {
        out(static_cast<Eigen::Index>(i)) = state.amplitude(source[i]);
    }
    return StateVector(std::move(out_layout), std::move(out));
}

StateVector combine(const SubsystemLayout &layout,
                    std::span<const std::pair<std::vector<size_t>, StateVector>> factors) {
    std::vector<size_t> order;
    std::vector<StateVector> states;
    for (const auto &[subs, st] : factors) {
        if (subs.size() != st.layout().size()) {
            throw LayoutMismatch("factor subsystem list does not match its layout");
        }
        for (size_t i = 0; i < subs.size(); ++i) {
            layout.check_index(subs[i]);
            if (layout.dim(subs[i]) != st.layout().dim(i)) {
                throw LayoutMismatch("factor dimension mismatch on subsystem " + std::to_string(subs[i]));
            }
        }
        order.insert(order.end(), subs.begin(), subs.end());
        states.push_back(st);
    }
    check_permutation(order, layout.size());
    StateVector joint = tensor_product(states);
    // joint's subsystem j is layout subsystem order[j]; invert.
    std::vector<size_t> inverse(order.size());
    for (size_t j = 0; j < order.size(); ++j) {
        inverse[order[j]] = j;
    }
    StateVector placed = permute(joint, inverse);
    return StateVector(layout, placed.amplitudes());
}

SchmidtDecomposition schmidt_decompose(const StateVector &state, const BipartiteSplit &split) {
    const auto &layout = state.layout();
    Matrix m = reshape(state, split);
    if (!m.allFinite()) {
        throw NumericalFailure("state contains non-finite amplitudes");
    }
    Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeThinU);
    if (svd.info() != Eigen::Success) {
        throw NumericalFailure("singular value decomposition failed");
    }
    const auto &sv = svd.singularValues();
    const Matrix &u = svd.matrixU();

    SchmidtDecomposition out;
    out.split = split;
    SubsystemLayout left_layout = layout.select(split.side_a);
    SubsystemLayout right_layout = layout.select(split.side_b);
    const Eigen::Index rows = m.rows();

    Eigen::Index begin = 0;
    while (begin < sv.size() && sv(begin) > kSchmidtZero) {
        Eigen::Index end = begin + 1;
        while (end < sv.size() && sv(end) > kSchmidtZero && sv(begin) - sv(end) <= kDegeneracy) {
            ++end;
        }
        const Eigen::Index g = end - begin;
        Matrix block = u.middleCols(begin, g);

        // Canonical basis of the block's column space: pivoted Gram-Schmidt over
        // the projections of computational basis vectors.
        // P e_i = block * b_i with b_i = block.row(i)†, and block has orthonormal
        // columns, so residual norms can be taken in the g-dimensional coefficients.
        std::vector<Amplitudes> chosen;
        std::vector<Amplitudes> basis_coeffs;
        for (Eigen::Index round = 0; round < g; ++round) {
            Eigen::Index best = -1;
            double best_norm = -1;
            Amplitudes best_vec;
            for (Eigen::Index i = 0; i < rows; ++i) {
                Amplitudes v = block.row(i).adjoint();
                for (const auto &c : basis_coeffs) {
                    v -= c.dot(v) * c;
                }
                double n = v.norm();
                if (n > best_norm + 1e-9) {
                    best = i;
                    best_norm = n;
                    best_vec = std::move(v);
                }
            }
            if (best < 0 || best_norm <= 1e-12) {
                throw NumericalFailure("degenerate Schmidt block lost rank");
            }
            basis_coeffs.push_back(best_vec / best_norm);
            chosen.push_back(block * basis_coeffs.back());
        }

        struct Member {
            StateVector left;
            Amplitudes right_raw;
            size_t first;
        };
        std::vector<Member> members;
        double weight_sum = 0;
        for (auto &q : chosen) {
            StateVector left = fix_phase(StateVector(left_layout, q));
            Amplitudes right = m.transpose() * left.amplitudes().conjugate();
            weight_sum += right.squaredNorm();
            members.push_back({left, std::move(right), *first_nonzero(left.amplitudes())});
        }
        std::sort(members.begin(), members.end(), [](const Member &x, const Member &y) {
            if (x.first != y.first) {
                return x.first < y.first;
            }
            Complex a = x.left.amplitude(x.first);
            Complex b = y.left.amplitude(y.first);
            if (a.real() != b.real()) {
                return a.real() > b.real();
            }
            return a.imag() < b.imag();
        });
        const double coefficient = std::sqrt(weight_sum / static_cast<double>(g));
        for (auto &mem : members) {
            double n = mem.right_raw.norm();
            out.coefficients.push_back(coefficient);
            out.left_states.push_back(mem.left);
            out.right_states.push_back(StateVector(right_layout, mem.right_raw / n));
        }
        begin = end;
    }
    return out;
}

bool factorization_test(const StateVector &state, const BipartiteSplit &split, double eps_branch) {
    Matrix m = reshape(state, split);
    Eigen::JacobiSVD<Matrix> svd(m);
    const auto &sv = svd.singularValues();
    if (sv.size() < 2) {
        return true;
    }
    return sv(1) * sv(1) <= eps_branch;
}

bool global_phase_equal(const StateVector &a, const StateVector &b, double eps) {
    return std::abs(inner(a, b)) >= 1.0 - eps;
}

StateVector partial_inner(const StateVector &state, std::span<const size_t> subsystems,
                          std::span<const size_t> assignment) {
    const auto &layout = state.layout();
    if (subsystems.size() != assignment.size()) {
        throw InvalidParameter("one basis index is needed per conditioned subsystem");
    }
    std::vector<bool> fixed(layout.size(), false);
    size_t base = 0;
    for (size_t i = 0; i < subsystems.size(); ++i) {
        size_t s = subsystems[i];
        layout.check_index(s);
        if (fixed[s]) {
            throw InvalidParameter("subsystem conditioned twice");
        }
        if (assignment[i] >= layout.dim(s)) {
            throw IndexError("basis index " + std::to_string(assignment[i]) + " out of range for subsystem '" +
                             layout[s].label + "'");
        }
        fixed[s] = true;
        base += assignment[i] * layout.stride(s);
    }
    std::vector<size_t> rest;
    for (size_t i = 0; i < layout.size(); ++i) {
        if (!fixed[i]) {
            rest.push_back(i);
        }
    }
    auto offsets = offsets_of(layout, rest);
    Amplitudes out(static_cast<Eigen::Index>(offsets.size()));
    for (size_t i = 0; i < offsets.size(); ++i) {
        out(static_cast<Eigen::Index>(i)) = state.amplitude(base + offsets[i]);
    }
    return StateVector(layout.select(rest), std::move(out));
}

std::optional<size_t> first_nonzero(const Amplitudes &amplitudes, double threshold) {
    for (Eigen::Index i = 0; i < amplitudes.size(); ++i) {
        if (std::abs(amplitudes(i)) > threshold) {
            return static_cast<size_t>(i);
        }
    }
    return std::nullopt;
}

}  // namespace qreal

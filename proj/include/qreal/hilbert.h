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

// Dense tensor-product linear algebra over small composite systems: layouts,
// state vectors, bipartite Schmidt decomposition and conditioning.

#ifndef QREAL_HILBERT_H
#define QREAL_HILBERT_H

#include <complex>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "qreal/errors.h"

namespace qreal {

using Complex = std::complex<double>;
using Amplitudes = Eigen::VectorXcd;
using Matrix = Eigen::MatrixXcd;

/// Numerical tolerances shared by every module. All of them are plain data so a
/// caller can tighten or loosen a single one.
struct Tolerances {
    double norm = 1e-10;    ///< |‖ψ‖² − 1| accepted as normalized
    double orth = 1e-8;     ///< pairwise overlap accepted as orthogonal
    double recon = 1e-8;    ///< Schmidt reconstruction error
    double branch = 1e-9;   ///< branch weights at or below this are pruned
    double phase = 1e-9;    ///< global-phase equality: |⟨a|b⟩| ≥ 1 − phase
    double null = 1e-12;    ///< conditioned weight at or below this is a contradiction
    double herm = 1e-10;    ///< generator Hermiticity
    double unit = 1e-10;    ///< explicit unitary check ‖U†U − I‖_max
    double record = 1e-9;   ///< record factor must put ≥ 1 − record on one pointer index
};

inline constexpr Tolerances kDefaultTolerances{};

/// Largest composite dimension a layout may have. Defaults to 2^16; the
/// QREAL_MAX_DIM environment variable or set_max_total_dimension overrides it.
size_t max_total_dimension();
void set_max_total_dimension(std::optional<size_t> limit);

enum class Role { kObject, kInstrument, kRecord, kEnvironment };

const char *role_name(Role role);

struct Subsystem {
    size_t dim = 2;
    Role role = Role::kObject;
    std::string label;

    bool operator==(const Subsystem &) const = default;
};

/// Ordered tensor factorization. Amplitude indices are mixed-radix with
/// subsystem 0 as the most significant digit.
class SubsystemLayout {
   public:
    SubsystemLayout() = default;
    explicit SubsystemLayout(std::vector<Subsystem> subsystems);
    static SubsystemLayout qubits(size_t n, Role role = Role::kObject);
    static SubsystemLayout from_dims(std::span<const size_t> dims, Role role = Role::kObject);

    size_t size() const {
        return subsystems_.size();
    }
    const Subsystem &operator[](size_t i) const {
        return subsystems_[i];
    }
    const std::vector<Subsystem> &subsystems() const {
        return subsystems_;
    }
    size_t dim(size_t i) const {
        return subsystems_[i].dim;
    }
    size_t stride(size_t i) const {
        return strides_[i];
    }
    size_t total_dim() const {
        return total_dim_;
    }
    std::vector<size_t> dims() const;

    std::vector<size_t> digits(size_t index) const;
    size_t index_of(std::span<const size_t> digits) const;

    /// Sub-layout made of the listed subsystems, in the listed order.
    SubsystemLayout select(std::span<const size_t> subsystems) const;
    SubsystemLayout concat(const SubsystemLayout &other) const;
    std::vector<size_t> with_role(Role role) const;
    void check_index(size_t subsystem) const;

    bool operator==(const SubsystemLayout &other) const {
        return subsystems_ == other.subsystems_;
    }

   private:
    std::vector<Subsystem> subsystems_;
    std::vector<size_t> strides_;
    size_t total_dim_ = 1;
};

/// A complex amplitude vector over a layout. Immutable once built.
class StateVector {
   public:
    StateVector() : amplitudes_(Amplitudes::Ones(1)) {
    }
    StateVector(SubsystemLayout layout, Amplitudes amplitudes);
    static StateVector basis(SubsystemLayout layout, std::span<const size_t> digits);
    static StateVector from_values(SubsystemLayout layout, std::span<const Complex> values);

    const SubsystemLayout &layout() const {
        return layout_;
    }
    const Amplitudes &amplitudes() const {
        return amplitudes_;
    }
    Complex amplitude(size_t index) const {
        return amplitudes_(static_cast<Eigen::Index>(index));
    }
    size_t dim() const {
        return static_cast<size_t>(amplitudes_.size());
    }
    double squared_norm() const {
        return amplitudes_.squaredNorm();
    }
    bool is_normalized(double eps = kDefaultTolerances.norm) const;
    StateVector normalized() const;
    StateVector scaled(Complex factor) const;

    /// Bitwise equality of layouts and amplitudes.
    bool identical(const StateVector &other) const;

   private:
    SubsystemLayout layout_;
    Amplitudes amplitudes_;
};

Complex inner(const StateVector &a, const StateVector &b);

/// Partition of a layout's subsystems into side A and side B.
struct BipartiteSplit {
    std::vector<size_t> side_a;
    std::vector<size_t> side_b;

    /// side_b becomes every subsystem of the layout not listed in side_a.
    static BipartiteSplit of(const SubsystemLayout &layout, std::vector<size_t> side_a);
    void validate(const SubsystemLayout &layout) const;
    bool operator==(const BipartiteSplit &) const = default;
};

/// Reshape amplitudes into a (dim A) × (dim B) matrix; row and column digits
/// follow the order in which the split lists its subsystems.
Matrix reshape(const StateVector &state, const BipartiteSplit &split);

struct SchmidtDecomposition {
    BipartiteSplit split;
    std::vector<double> coefficients;        // nonincreasing, positive
    std::vector<StateVector> left_states;    // over layout.select(split.side_a)
    std::vector<StateVector> right_states;   // over layout.select(split.side_b)

    size_t rank() const {
        return coefficients.size();
    }
    /// Σ_k c_k left_k ⊗ right_k, laid out on `layout`.
    StateVector reconstruct(const SubsystemLayout &layout) const;
};

StateVector tensor_product(std::span<const StateVector> states);
StateVector tensor_product(const StateVector &a, const StateVector &b);

/// Tensor product of factors placed on the listed subsystems of `layout`. The
/// subsystem lists must partition the layout.
StateVector combine(const SubsystemLayout &layout,
                    std::span<const std::pair<std::vector<size_t>, StateVector>> factors);

/// Reorders subsystems: the result's subsystem i is the input's order[i].
StateVector permute(const StateVector &state, std::span<const size_t> order);

/// Canonical Schmidt decomposition across `split`. Degenerate coefficient blocks
/// get a deterministic basis; every left state has its first nonzero amplitude
/// real and positive.
SchmidtDecomposition schmidt_decompose(const StateVector &state, const BipartiteSplit &split);

/// True iff the second-largest Schmidt weight is at most eps_branch.
bool factorization_test(const StateVector &state, const BipartiteSplit &split,
                        double eps_branch = kDefaultTolerances.branch);

/// True iff |⟨a|b⟩| ≥ 1 − eps.
bool global_phase_equal(const StateVector &a, const StateVector &b, double eps);

/// Applies ⟨assignment| on the listed subsystems. The result lives on the
/// remaining subsystems (layout order kept) and is not renormalized, so its
/// squared norm is the Born weight of the assignment.
StateVector partial_inner(const StateVector &state, std::span<const size_t> subsystems,
                          std::span<const size_t> assignment);

/// Index of the first amplitude with modulus above `threshold`, if any.
std::optional<size_t> first_nonzero(const Amplitudes &amplitudes, double threshold = 1e-9);

}  // namespace qreal

#endif

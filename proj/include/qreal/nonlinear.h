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

// Nonlinear evolution generated by a real Hamiltonian function of the
// amplitudes, the restriction that forbids terms mixing the realized block
// with the rest, and a two-party signaling audit.

#ifndef QREAL_NONLINEAR_H
#define QREAL_NONLINEAR_H

#include <cstdint>
#include <string>
#include <vector>

#include "qreal/hilbert.h"
#include "qreal/reality.h"

namespace qreal {

struct Factor {
    size_t index = 0;
    bool conjugated = false;
    bool operator==(const Factor &) const = default;
};

struct Monomial {
    double coefficient = 0;
    std::vector<Factor> factors;
};

/// h(ψ, ψ*) = Σ c_m Π factors. Every monomial has as many conjugated as plain
/// factors, and the set of monomials is closed under conjugation with equal
/// coefficients, so h is real.
class HamiltonianFunction {
   public:
    HamiltonianFunction() = default;
    HamiltonianFunction(size_t dim, std::vector<Monomial> monomials);

    /// Σ H_ij ψ_i* ψ_j for a real symmetric H.
    static HamiltonianFunction quadratic(const Matrix &h);
    /// One monomial per line: "coefficient index:flag ...", flag 1 = conjugated.
    /// '#' starts a comment.
    static HamiltonianFunction parse(const std::string &text, size_t dim);
    std::string to_text() const;

    size_t dim() const {
        return dim_;
    }
    const std::vector<Monomial> &monomials() const {
        return monomials_;
    }
    bool is_quadratic() const;

    double evaluate(const Amplitudes &psi) const;
    /// ∂h/∂ψ_k* for every k.
    Amplitudes gradient_conj(const Amplitudes &psi) const;

   private:
    size_t dim_ = 0;
    std::vector<Monomial> monomials_;
};

enum class RestrictionMode { kNone, kRealizedBlocks };

/// Blocks are classes of basis indices sharing their realized-record digits.
struct RestrictionPolicy {
    RestrictionMode mode = RestrictionMode::kNone;
    SubsystemLayout layout;
};

/// Drops every monomial that mixes an index of the realized block with an
/// index outside it. MissingToken when blocks are requested without a token.
HamiltonianFunction apply_restriction(const HamiltonianFunction &h, const RestrictionPolicy &policy,
                                      const RealityToken *token);

struct NonlinearResult {
    StateVector state;
    double norm_drift = 0;
    size_t steps = 0;
};

/// Integrates dψ_k/dt = −i ∂h/∂ψ_k* with classical fixed-step RK4. The step is
/// duration / ceil(duration / dt). IntegrationDiverged when the norm drifts by
/// more than max_drift.
NonlinearResult nonlinear_evolve(const StateVector &state, const HamiltonianFunction &h, double duration,
                                 double dt, double max_drift = 1e-6);

struct SignalingSetup {
    std::vector<double> alice_angles;   // radians, measurement axis in the x-z plane
    double bob_angle = 0;
    double duration = 1;
    double dt = 1e-3;
    uint64_t trials = 10000;   // per setting
    uint64_t seed = 1;
};

struct SignalingReport {
    std::vector<double> bob_plus;         // sampled P(Bob = +) per setting
    std::vector<double> exact_bob_plus;   // the probability the sampler draws from
    double max_tv = 0;
    double exact_max_tv = 0;
    double noise_floor = 0;               // 5σ of a difference of two binomial means
    bool signaling = false;               // max_tv above the floor
};

/// Singlet pair on [a, b, record_a, record_b]: Alice measures a along each
/// setting, the global state then evolves under h (restricted to the realized
/// blocks of Alice's record when asked), and Bob measures b.
SignalingReport signaling_test(const SignalingSetup &setup, const HamiltonianFunction &h, RestrictionMode mode);

/// The layout signaling_test works on.
SubsystemLayout signaling_layout();

/// Probe Hamiltonian on signaling_layout(): g·|ψ_p|²(ψ_i*ψ_j + ψ_j*ψ_i), which
/// flips b inside Alice's "+" record block at a rate set by the population of
/// an index in her "−" block, plus λ(|ψ_i|⁴ + |ψ_i|²|ψ_j|²) within the "+" block.
HamiltonianFunction cross_block_probe(double g, double lambda);

}  // namespace qreal

#endif

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

#include "qreal/nonlinear.h"

#include <gtest/gtest.h>

#include <numbers>

#include "qreal/dynamics.h"
#include "test_util.h"

namespace qreal {
namespace {

using testing::random_state;
using testing::taylor_exponential;

// Bob's exact P(+) under cross_block_probe(2, 0.5) for one time unit, Alice
// measuring along z and along x. Frozen from tests/oracles/signaling_sweep.py
// (numpy state construction, scipy DOP853 at rtol 1e-12).
constexpr double kBobPlusAliceZ = 0.852061184639;
constexpr double kBobPlusAliceX = 0.503820545496;

StateVector qubit_state(Complex a0, Complex a1) {
    std::vector<Complex> v{a0, a1};
    return StateVector::from_values(SubsystemLayout::qubits(1), v);
}

TEST(HamiltonianFunction, RejectsUnbalancedAndNonReal) {
    EXPECT_THROW(HamiltonianFunction(2, {{1.0, {{0, true}, {1, true}, {0, false}}}}), InvalidParameter);
    EXPECT_THROW(HamiltonianFunction(2, {{1.0, {{0, true}, {1, false}}}}), InvalidParameter);
    EXPECT_NO_THROW(HamiltonianFunction(2, {{1.0, {{0, true}, {1, false}}}, {1.0, {{1, true}, {0, false}}}}));
    EXPECT_THROW(HamiltonianFunction(2, {{1.0, {{0, true}, {2, false}}}}), IndexError);
}

TEST(HamiltonianFunction, QuadraticEvaluatesExpectation) {
    std::mt19937_64 rng(1);
    Matrix h = Matrix::Zero(3, 3);
    h(0, 0) = 1;
    h(1, 2) = h(2, 1) = 0.5;
    h(2, 2) = -2;
    StateVector s = random_state(SubsystemLayout::from_dims(std::vector<size_t>{3}), rng);
    HamiltonianFunction f = HamiltonianFunction::quadratic(h);
    EXPECT_TRUE(f.is_quadratic());
    EXPECT_NEAR(f.evaluate(s.amplitudes()), (s.amplitudes().adjoint() * h * s.amplitudes())(0).real(), 1e-14);
    EXPECT_LE((f.gradient_conj(s.amplitudes()) - h * s.amplitudes()).norm(), 1e-14);
}

TEST(HamiltonianFunction, TextRoundTrip) {
    HamiltonianFunction f = cross_block_probe(2.0, 0.5);
    HamiltonianFunction g = HamiltonianFunction::parse(f.to_text(), 16);
    EXPECT_EQ(g.to_text(), f.to_text());
    HamiltonianFunction c = HamiltonianFunction::parse("# comment\n1.5 0:1 0:0\n\n", 2);
    ASSERT_EQ(c.monomials().size(), 1u);
    EXPECT_EQ(c.monomials()[0].coefficient, 1.5);
    EXPECT_THROW(HamiltonianFunction::parse("1.0 0:2 0:0", 2), InvalidParameter);
    EXPECT_THROW(HamiltonianFunction::parse("x 0:1 0:0", 2), InvalidParameter);
}

TEST(NonlinearEvolve, LinearCaseMatchesExactExponential) {
    std::mt19937_64 rng(2);
    Matrix h = Matrix::Zero(4, 4);
    std::vector<double> energies{0.3, -1.1, 2.0, 0.7};
    for (int k = 0; k < 4; ++k) {
        h(k, k) = energies[k];
    }
    StateVector s = random_state(SubsystemLayout::qubits(2), rng);
    NonlinearResult r = nonlinear_evolve(s, HamiltonianFunction::quadratic(h), 1.0, 1e-3);
    Amplitudes exact = taylor_exponential(h, 1.0) * s.amplitudes();
    EXPECT_LE((r.state.amplitudes() - exact).cwiseAbs().maxCoeff(), 1e-8);
    EXPECT_EQ(r.steps, 1000u);
}

TEST(NonlinearEvolve, QuadraticFormMatchesEvolveStep) {
    std::mt19937_64 rng(3);
    Matrix h(2, 2);
    h << 0.4, 1.3, 1.3, -0.9;
    StateVector s = random_state(SubsystemLayout::qubits(1), rng);
    StateVector linear = evolve_step(s, EvolutionStep::generator(h, 0.8, {0}));
    NonlinearResult r = nonlinear_evolve(s, HamiltonianFunction::quadratic(h), 0.8, 1e-3);
    EXPECT_LE((r.state.amplitudes() - linear.amplitudes()).norm(), 1e-8);
}

TEST(NonlinearEvolve, ZeroHamiltonianIsIdentity) {
    std::mt19937_64 rng(4);
    StateVector s = random_state(SubsystemLayout::qubits(2), rng);
    NonlinearResult r = nonlinear_evolve(s, HamiltonianFunction(4, {}), 2.0, 0.1);
    EXPECT_TRUE(r.state.identical(s));
    EXPECT_EQ(r.norm_drift, 0.0);
}

// h = λ|ψ₁|⁴: |ψ₁| is conserved and ψ₁(t) = ψ₁(0)·exp(−2iλ|ψ₁|²t), so the
// phase rate depends on the population.
TEST(NonlinearEvolve, QuarticPhaseRateDependsOnPopulation) {
    const double lambda = 1.7, t = 1.5;
    HamiltonianFunction h(2, {{lambda, {{1, true}, {1, true}, {1, false}, {1, false}}}});
    for (double pop : {0.2, 0.5, 0.9}) {
        StateVector s = qubit_state(std::sqrt(1 - pop), std::sqrt(pop));
        NonlinearResult r = nonlinear_evolve(s, h, t, 1e-3);
        Complex expected = std::sqrt(pop) * std::polar(1.0, -2 * lambda * pop * t);
        EXPECT_LE(std::abs(r.state.amplitude(1) - expected), 1e-9) << pop;
        EXPECT_LE(std::abs(r.state.amplitude(0) - std::sqrt(1 - pop)), 1e-12);
    }
}

// Classical RK4: halving the step cuts the error by about 2⁴ against a dense
// reference at dt/10.
TEST(NonlinearEvolve, StepHalvingConvergenceOrder) {
    HamiltonianFunction h = cross_block_probe(2.0, 0.5);
    std::mt19937_64 rng(5);
    StateVector s = random_state(signaling_layout(), rng);
    const double dt = 0.02;
    Amplitudes reference = nonlinear_evolve(s, h, 1.0, dt / 10).state.amplitudes();
    double e1 = (nonlinear_evolve(s, h, 1.0, dt).state.amplitudes() - reference).norm();
    double e2 = (nonlinear_evolve(s, h, 1.0, dt / 2).state.amplitudes() - reference).norm();
    double order = std::log2(e1 / e2);
    EXPECT_GT(order, 3.5);
    EXPECT_LT(order, 4.5);
}

TEST(NonlinearEvolve, Errors) {
    StateVector s = qubit_state(1, 0);
    HamiltonianFunction h(2, {});
    EXPECT_THROW(nonlinear_evolve(s, h, 1.0, 0.0), InvalidParameter);
    EXPECT_THROW(nonlinear_evolve(s, HamiltonianFunction(4, {}), 1.0, 0.1), LayoutMismatch);
    HamiltonianFunction stiff(2, {{50.0, {{1, true}, {1, true}, {1, false}, {1, false}}},
                                  {50.0, {{0, true}, {1, true}, {0, false}, {1, false}}}});
    StateVector mixed = qubit_state(std::sqrt(0.5), std::sqrt(0.5));
    EXPECT_THROW(nonlinear_evolve(mixed, stiff, 1.0, 0.5), IntegrationDiverged);
}

TEST(Restriction, LinearDiagonalUnchanged) {
    Matrix h = Matrix::Zero(16, 16);
    for (int k = 0; k < 16; ++k) {
        h(k, k) = k;
    }
    HamiltonianFunction f = HamiltonianFunction::quadratic(h);
    RealityToken token;
    token.realized_records = {{2, 0}};
    HamiltonianFunction r = apply_restriction(f, {RestrictionMode::kRealizedBlocks, signaling_layout()}, &token);
    EXPECT_EQ(r.to_text(), f.to_text());
}

TEST(Restriction, CrossBlockMonomialRemoved) {
    // Two qubits [object, record]; indices 0 (record 0) and 1 (record 1) lie in different blocks.
    SubsystemLayout layout({{2, Role::kObject, "o"}, {2, Role::kRecord, "r"}});
    HamiltonianFunction f(4, {{1.0, {{0, true}, {0, false}, {1, true}, {1, false}}},
                              {2.0, {{0, true}, {0, false}, {2, true}, {2, false}}}});
    RealityToken token;
    token.realized_records = {{1, 0}};
    HamiltonianFunction r = apply_restriction(f, {RestrictionMode::kRealizedBlocks, layout}, &token);
    ASSERT_EQ(r.monomials().size(), 1u);
    EXPECT_EQ(r.monomials()[0].coefficient, 2.0);   // indices 0 and 2 share record 0
}

TEST(Restriction, SingleBlockAndIdempotence) {
    HamiltonianFunction f = cross_block_probe(1.0, 1.0);
    RealityToken token;
    token.realized_records = {{2, 0}};
    RestrictionPolicy policy{RestrictionMode::kRealizedBlocks, signaling_layout()};
    HamiltonianFunction once = apply_restriction(f, policy, &token);
    HamiltonianFunction twice = apply_restriction(once, policy, &token);
    EXPECT_EQ(once.to_text(), twice.to_text());
    EXPECT_EQ(once.monomials().size(), 2u);   // the cross term is gone, both λ terms stay
    HamiltonianFunction inside(16, {{1.0, {{0, true}, {4, true}, {0, false}, {4, false}}}});
    EXPECT_EQ(apply_restriction(inside, policy, &token).to_text(), inside.to_text());
}

TEST(Restriction, ModeNoneAndMissingToken) {
    HamiltonianFunction f = cross_block_probe(1.0, 1.0);
    EXPECT_EQ(apply_restriction(f, {}, nullptr).to_text(), f.to_text());
    EXPECT_THROW(apply_restriction(f, {RestrictionMode::kRealizedBlocks, signaling_layout()}, nullptr),
                 MissingToken);
}

SignalingSetup two_settings(uint64_t seed) {
    SignalingSetup s;
    s.alice_angles = {0.0, std::numbers::pi / 2};
    s.trials = 10000;
    s.seed = seed;
    return s;
}

TEST(Signaling, LinearHamiltonianDoesNotSignal) {
    Matrix h = Matrix::Zero(16, 16);
    for (int k = 0; k < 16; ++k) {
        h(k, k ^ 4) = 0.7;   // rotates b
        h(k, k) += 0.1 * k;
    }
    SignalingReport r = signaling_test(two_settings(3), HamiltonianFunction::quadratic(h), RestrictionMode::kNone);
    EXPECT_LT(r.exact_max_tv, 1e-10);
    EXPECT_FALSE(r.signaling);
    EXPECT_LT(r.max_tv, r.noise_floor);
}

TEST(Signaling, UnrestrictedCrossBlockSignals) {
    SignalingReport r = signaling_test(two_settings(4), cross_block_probe(2.0, 0.5), RestrictionMode::kNone);
    ASSERT_EQ(r.exact_bob_plus.size(), 2u);
    EXPECT_NEAR(r.exact_bob_plus[0], kBobPlusAliceZ, 1e-8);
    EXPECT_NEAR(r.exact_bob_plus[1], kBobPlusAliceX, 1e-8);
    EXPECT_NEAR(r.exact_max_tv, kBobPlusAliceZ - kBobPlusAliceX, 1e-8);
    EXPECT_TRUE(r.signaling);
    EXPECT_GT(r.max_tv, r.noise_floor);
}

TEST(Signaling, RestrictedCrossBlockDoesNotSignal) {
    SignalingReport r =
        signaling_test(two_settings(5), cross_block_probe(2.0, 0.5), RestrictionMode::kRealizedBlocks);
    EXPECT_LT(r.exact_max_tv, 1e-10);
    EXPECT_FALSE(r.signaling);
}

TEST(Signaling, DeterministicGivenSeed) {
    SignalingReport a = signaling_test(two_settings(6), cross_block_probe(2.0, 0.5), RestrictionMode::kNone);
    SignalingReport b = signaling_test(two_settings(6), cross_block_probe(2.0, 0.5), RestrictionMode::kNone);
    EXPECT_EQ(a.bob_plus, b.bob_plus);
    EXPECT_EQ(a.signaling, b.signaling);
}

}  // namespace
}  // namespace qreal

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

#include <gtest/gtest.h>

#include <numbers>

#include "qreal/ensemble.h"
#include "qreal/scenarios.h"
#include "test_util.h"

namespace qreal {
namespace {

using testing::random_state;

const double kS = 1 / std::sqrt(2.0);

StateVector two_qubit(std::vector<Complex> v) {
    return StateVector::from_values(SubsystemLayout::qubits(2), v);
}

TEST(DetectEvent, PhaseOnlyInteractionIsNotAnEvent) {
    std::mt19937_64 rng(1);
    StateVector s = random_state(SubsystemLayout::qubits(2), rng);
    auto split = BipartiteSplit::of(s.layout(), {0});
    EventRecord ev = detect_event(s.scaled(std::polar(1.0, 0.7)), s, split, {});
    EXPECT_FALSE(ev.is_event);
    EXPECT_FALSE(detect_event(s, s, split, {}).is_event);
}

TEST(DetectEvent, ScatteringIntoEntangledBranches) {
    // Reference: no scattering, |0>|0>. Post: α|no change> + β|deflected>, entangled.
    double alpha = std::sqrt(0.9), beta = std::sqrt(0.1);
    StateVector reference = two_qubit({1, 0, 0, 0});
    StateVector post = two_qubit({alpha, 0, 0, beta});
    EventRecord ev = detect_event(post, reference, BipartiteSplit::of(post.layout(), {1}), {});
    EXPECT_TRUE(ev.is_event);
    ASSERT_EQ(ev.branches.retained_count(), 2u);
    auto p = ev.branches.retained_probabilities();
    EXPECT_NEAR(p[0], 0.9, 1e-12);
    EXPECT_NEAR(p[1], 0.1, 1e-12);
}

TEST(DetectEvent, GlobalPhaseInvariance) {
    StateVector reference = two_qubit({1, 0, 0, 0});
    StateVector post = two_qubit({kS, 0, 0, kS});
    auto split = BipartiteSplit::of(post.layout(), {0});
    for (double theta : {0.0, 1.0, 2.5}) {
        EventRecord ev = detect_event(post.scaled(std::polar(1.0, theta)), reference, split, {});
        EXPECT_TRUE(ev.is_event);
        EXPECT_NEAR(ev.branches.retained_probabilities()[0], 0.5, 1e-12);
    }
}

TEST(DetectEvent, ProductAcrossSplitIsNotAnEvent) {
    StateVector reference = two_qubit({1, 0, 0, 0});
    StateVector post = two_qubit({kS, kS, 0, 0});   // changed, but a product
    EXPECT_FALSE(detect_event(post, reference, BipartiteSplit::of(post.layout(), {0}), {}).is_event);
}

TEST(BranchDecompose, SingletAndProduct) {
    StateVector singlet = two_qubit({0, kS, -kS, 0});
    BranchSet b = branch_decompose(singlet, BipartiteSplit::of(singlet.layout(), {0}), {});
    ASSERT_EQ(b.retained_count(), 2u);
    EXPECT_NEAR(b.members[0].weight(), 0.5, 1e-14);
    EXPECT_NEAR(b.members[1].weight(), 0.5, 1e-14);
    BranchSet p = branch_decompose(two_qubit({0, 1, 0, 0}), BipartiteSplit::of(singlet.layout(), {0}), {});
    ASSERT_EQ(p.retained_count(), 1u);
    EXPECT_NEAR(p.members[0].weight(), 1, 1e-14);
}

TEST(BranchDecompose, PrunedMembersAreKept) {
    StateVector s = two_qubit({std::sqrt(1 - 1e-12), 0, 0, std::sqrt(1e-12)});
    BranchSet b = branch_decompose(s, BipartiteSplit::of(s.layout(), {0}), {});
    ASSERT_EQ(b.members.size(), 2u);
    EXPECT_EQ(b.retained_count(), 1u);
    EXPECT_FALSE(b.members[1].retained);
    double total = b.members[0].weight() + b.members[1].weight();
    EXPECT_NEAR(total, 1, 1e-10);
}

// Eight atoms and counters: branches across a counter match Born sums over
// basis indices carrying each counter value.
TEST(BranchDecompose, DecayCounterMatchesIndexScan) {
    PreparedScenario prepared(build_decay_counter(8, 0.6, 0.7));
    const ScenarioSpec &spec = prepared.spec();
    const StateVector &final_state = prepared.final_state();
    for (size_t m : {0u, 3u, 7u}) {
        const EventMarker &mk = spec.schedule.markers[m];
        size_t counter = mk.records[0];
        BranchSet b = branch_decompose(final_state, mk.split, {});
        std::vector<double> scan(2, 0.0);
        const auto &layout = final_state.layout();
        for (size_t i = 0; i < final_state.dim(); ++i) {
            scan[layout.digits(i)[counter]] += std::norm(final_state.amplitude(i));
        }
        ASSERT_EQ(b.retained_count(), 2u);
        std::vector<double> w{b.members[0].weight(), b.members[1].weight()};
        std::sort(w.begin(), w.end());
        std::sort(scan.begin(), scan.end());
        EXPECT_NEAR(w[0], scan[0], 1e-12);
        EXPECT_NEAR(w[1], scan[1], 1e-12);
        EXPECT_NEAR(std::max(scan[0], scan[1]), std::max(0.42, 0.58), 1e-12);
    }
}

TEST(BranchDecompose, ConditionedView) {
    // Singlet with a record copy of a: conditioning on the record fixes b.
    SubsystemLayout layout({{2, Role::kObject, "a"}, {2, Role::kObject, "b"}, {2, Role::kRecord, "r"}});
    std::vector<Complex> v(8, 0);
    v[0b010] = kS;    // a=0 b=1 r=0
    v[0b101] = -kS;   // a=1 b=0 r=1
    StateVector s = StateVector::from_values(layout, v);
    BranchSet b = branch_decompose(s, BipartiteSplit::of(layout, {1}), {{2, 1}});
    EXPECT_EQ(b.retained_count(), 1u);
    EXPECT_NEAR(b.view_weight, 0.5, 1e-14);
    EXPECT_THROW(branch_decompose(s, BipartiteSplit::of(layout, {1}), {{2, 1}, {0, 0}}), HistoryInconsistent);
}

TEST(Condition, RenormalizesWithoutTouchingState) {
    std::mt19937_64 rng(3);
    StateVector s = random_state(SubsystemLayout::qubits(3), rng);
    StateVector copy = s;
    ConditionedView view = condition(s, {{1, 0}});
    EXPECT_TRUE(s.identical(copy));
    EXPECT_NEAR(view.state.squared_norm(), 1, 1e-12);
    EXPECT_NEAR(view.weight, marginal(s, 1)[0], 1e-14);
    EXPECT_EQ(view.to_view(1), ConditionedView::npos);
    EXPECT_EQ(view.to_view(2), 1u);
}

TEST(Marginal, PointerValue) {
    SubsystemLayout layout = SubsystemLayout::qubits(2);
    StateVector s = StateVector::from_values(layout, std::vector<Complex>{0, kS, 0, kS});
    EXPECT_EQ(pointer_value(s, 1, 1e-9), std::optional<size_t>(1));
    EXPECT_FALSE(pointer_value(s, 0, 1e-9));
    auto m = marginal(s, 0);
    EXPECT_NEAR(m[0], 0.5, 1e-15);
}

TEST(RelativeStates, FaithfulInstrument) {
    // Σ_k a_k ψ_k φ_k with object 0 and instrument 1 (3 levels each).
    std::vector<size_t> dims{3, 3};
    SubsystemLayout layout = SubsystemLayout::from_dims(dims);
    std::vector<double> a{0.6, 0.0, 0.8};
    std::vector<Complex> v(9, 0);
    for (size_t k = 0; k < 3; ++k) {
        v[k * 3 + k] = a[k];
    }
    auto rel = relative_states(StateVector::from_values(layout, v), 1, MacrostatePartition::pointer(3));
    ASSERT_EQ(rel.size(), 2u);
    EXPECT_NEAR(rel[0].alpha, 0.6, 1e-14);
    EXPECT_NEAR(rel[1].alpha, 0.8, 1e-14);
    EXPECT_NEAR(std::abs(rel[0].xi.amplitude(0)), 1, 1e-14);
    EXPECT_NEAR(std::abs(rel[1].xi.amplitude(2)), 1, 1e-14);
    EXPECT_NEAR(std::abs(inner(rel[0].xi, rel[1].xi)), 0, 1e-14);
    InstrumentMetrics m = instrument_metrics(StateVector::from_values(layout, v), 1, MacrostatePartition::pointer(3));
    EXPECT_NEAR(m.faithfulness, 1, 1e-12);
    EXPECT_NEAR(m.distinguishability, 1, 1e-12);
    EXPECT_NEAR(m.memory, 1, 1e-12);
    EXPECT_FALSE(m.degenerate);
}

TEST(RelativeStates, UncorrelatedInstrument) {
    std::mt19937_64 rng(5);
    StateVector object = random_state(SubsystemLayout::qubits(1), rng);
    StateVector instrument = random_state(SubsystemLayout::qubits(1), rng);
    StateVector s = tensor_product(object, instrument);
    auto rel = relative_states(s, 1, MacrostatePartition::pointer(2));
    ASSERT_EQ(rel.size(), 2u);
    EXPECT_NEAR(std::abs(inner(rel[0].xi, rel[1].xi)), 1, 1e-12);
    InstrumentMetrics m = instrument_metrics(s, 1, MacrostatePartition::pointer(2));
    EXPECT_NEAR(m.faithfulness, 1, 1e-12);
    EXPECT_EQ(m.distinguishability, 0);
    EXPECT_TRUE(m.degenerate);
}

// ξ_k assembled directly from the amplitudes β_{j,k} = ⟨j, k|χ⟩ / α_k.
TEST(RelativeStates, OverlapMatchesDirectAssembly) {
    std::mt19937_64 rng(7);
    std::vector<size_t> dims{2, 3, 2};   // object, instrument, environment
    SubsystemLayout layout = SubsystemLayout::from_dims(dims);
    StateVector s = random_state(layout, rng);
    MacrostatePartition partition{{{0, 2}, {1}}, {"low", "high"}};
    auto rel = relative_states(s, 1, partition);
    ASSERT_EQ(rel.size(), 2u);
    double alpha_sq_total = 0;
    for (const auto &r : rel) {
        double scan = 0;
        for (size_t i = 0; i < s.dim(); ++i) {
            size_t k = layout.digits(i)[1];
            const auto &g = partition.groups[r.macrostate];
            if (std::find(g.begin(), g.end(), k) != g.end()) {
                scan += std::norm(s.amplitude(i));
            }
        }
        EXPECT_NEAR(r.alpha * r.alpha, scan, 1e-13);
        EXPECT_NEAR(r.xi.squared_norm(), 1, 1e-12);
        alpha_sq_total += r.alpha * r.alpha;
    }
    EXPECT_NEAR(alpha_sq_total, 1, 1e-12);
}

TEST(InstrumentMetrics, NoisyCouplingAngle) {
    // a|0>_o|0>_i + b(cosθ|0> + sinθ|1>)_o|1>_i : the two relative states overlap by |cos θ|.
    for (double theta : {0.1, 0.7, 1.2, std::numbers::pi / 2}) {
        double a = std::sqrt(0.3), b = std::sqrt(0.7);
        std::vector<Complex> v{a, b * std::cos(theta), 0, b * std::sin(theta)};
        StateVector s = two_qubit(v);
        InstrumentMetrics m = instrument_metrics(s, 1, MacrostatePartition::pointer(2));
        EXPECT_NEAR(m.distinguishability, 1 - std::abs(std::cos(theta)), 1e-12);
        EXPECT_NEAR(m.faithfulness, 1, 1e-12);
    }
}

TEST(InstrumentMetrics, MemoryAgainstLaterStates) {
    StateVector s = two_qubit({kS, 0, 0, kS});
    std::vector<StateVector> same{s, s};
    EXPECT_NEAR(instrument_metrics(s, 1, MacrostatePartition::pointer(2), same).memory, 1, 1e-14);
    std::vector<StateVector> drifted{two_qubit({1, 0, 0, 0})};
    // Macrostate distribution (1/2, 1/2) against (1, 0): squared Bhattacharyya 1/2.
    EXPECT_NEAR(instrument_metrics(s, 1, MacrostatePartition::pointer(2), drifted).memory, 0.5, 1e-14);
}

}  // namespace
}  // namespace qreal

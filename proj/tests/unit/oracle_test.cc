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

#include "qreal/oracle.h"

#include <gtest/gtest.h>

#include <cmath>

#include "test_util.h"

namespace qreal {
namespace {

using testing::binomial_pmf;
using testing::three_sigma;

TEST(CollapseOracle, AgreesOnDecoheringScenarios) {
    const uint64_t n = 20000;
    for (const char *name : {"epr", "decay", "wigner_chain", "grating"}) {
        ScenarioSpec spec = make_scenario(name);
        EnsembleResult rsi = run_ensemble(spec, n, 1);
        EnsembleResult ci = run_ci_ensemble(spec, n, 1 + n);
        Comparison c = compare_histograms(rsi.summaries, ci.summaries);
        EXPECT_GT(c.p_value, 1e-3) << name;
    }
}

TEST(CollapseOracle, SternGerlachHalfUnderCollapse) {
    const uint64_t n = 20000;
    EnsembleResult ci = run_ci_ensemble(build_stern_gerlach(true, true), n, 3);
    double f = static_cast<double>(ci.summaries["sz=+"]) / n;
    EXPECT_NEAR(f, 0.5, three_sigma(0.5, n));
}

TEST(CollapseOracle, SingleBranchEventsIdentical) {
    ScenarioSpec spec = build_wigner_chain(3, 1.0);
    for (uint64_t seed = 0; seed < 10; ++seed) {
        CollapseTrial c = run_ci_collapse(spec, seed);
        TrialResult t = run_trial(spec, seed);
        EXPECT_EQ(c.outcome.summary, t.outcome.summary);
        EXPECT_EQ(c.records, t.trajectory.token.realized_records);
        EXPECT_TRUE(global_phase_equal(c.final_state, t.trajectory.final_state, 1e-12));
    }
}

TEST(CollapseOracle, CollapsedStateIsNormalizedAndConsistent) {
    ScenarioSpec spec = build_epr({0, 0, 1}, {1, 0, 0});
    for (uint64_t seed = 0; seed < 10; ++seed) {
        CollapseTrial c = run_ci_collapse(spec, seed);
        EXPECT_NEAR(c.final_state.squared_norm(), 1, 1e-12);
        for (const auto &[r, v] : c.records) {
            EXPECT_NEAR(marginal(c.final_state, r)[v], 1, 1e-12);
        }
    }
}

TEST(CollapseOracle, EnsembleTrialMatchesSingleRuns) {
    ScenarioSpec spec = build_decay_counter(4, 0.5, 0.8);
    EnsembleResult e = run_ci_ensemble(spec, 40, 100);
    Histogram h;
    for (uint64_t i = 0; i < 40; ++i) {
        ++h[run_ci_collapse(spec, 100 + i).outcome.summary];
    }
    EXPECT_EQ(e.summaries, h);
}

TEST(FullUnitary, Examples) {
    UnitaryDistribution epr = run_full_unitary(build_epr({0, 0, 1}, {0, 0, 1}));
    EXPECT_NEAR(epr.summaries["+-"], 0.5, 1e-14);
    EXPECT_NEAR(epr.summaries["-+"], 0.5, 1e-14);
    EXPECT_EQ(epr.summaries.count("++"), 0u);
    UnitaryDistribution sg = run_full_unitary(build_stern_gerlach(true, true));
    EXPECT_NEAR(sg.summaries["sz=+"], 1, 1e-12);
    std::vector<double> profile{3, 1, 0, 2};
    UnitaryDistribution g = run_full_unitary(build_grating(4, profile, false));
    for (size_t k = 0; k < 4; ++k) {
        EXPECT_NEAR(g.summaries["x=" + std::to_string(k)], profile[k] * profile[k] / 14.0, 1e-14);
    }
}

TEST(TotalVariation, Examples) {
    Distribution p{{"a", 0.3}, {"b", 0.7}};
    EXPECT_EQ(total_variation(p, p), 0.0);
    EXPECT_NEAR(total_variation({{"a", 1.0}}, {{"b", 1.0}}), 1.0, 1e-15);
    EXPECT_NEAR(total_variation(p, {{"a", 0.5}, {"b", 0.5}}), 0.2, 1e-15);
}

// Empirical binomial against its exact law: TV below a 3σ envelope
// ½ Σ_k 3·sqrt(p_k(1 − p_k)/n).
TEST(CompareDistributions, BinomialWithinEnvelope) {
    const uint64_t n = 50000;
    EnsembleResult r = run_ensemble(build_decay_counter(6, 0.5, 0.8), n, 31);
    Distribution expected;
    double envelope = 0;
    for (size_t k = 0; k <= 6; ++k) {
        double p = binomial_pmf(6, k, 0.4);
        expected["count=" + std::to_string(k)] = p;
        envelope += 0.5 * three_sigma(p, n);
    }
    Comparison c = compare_distributions(r.summaries, expected);
    EXPECT_LT(c.total_variation, envelope);
    EXPECT_GT(c.p_value, 1e-3);
}

// For 2 degrees of freedom the chi-square upper tail is exp(−x/2).
TEST(CompareDistributions, ChiSquareTwoDofClosedForm) {
    Histogram observed{{"a", 120}, {"b", 90}, {"c", 90}};
    Distribution expected{{"a", 1.0 / 3}, {"b", 1.0 / 3}, {"c", 1.0 / 3}};
    Comparison c = compare_distributions(observed, expected);
    double x = (20.0 * 20 + 10 * 10 + 10 * 10) / 100.0;
    EXPECT_NEAR(c.chi_square, x, 1e-12);
    EXPECT_EQ(c.dof, 2u);
    EXPECT_NEAR(c.p_value, std::exp(-x / 2), 1e-12);
}

TEST(CompareDistributions, PoolsSmallBins) {
    Histogram observed{{"a", 50}, {"b", 48}, {"c", 1}, {"d", 1}};
    Distribution expected{{"a", 0.49}, {"b", 0.49}, {"c", 0.01}, {"d", 0.01}};
    Comparison c = compare_distributions(observed, expected);
    EXPECT_EQ(c.bins, 2u);   // c and d pooled, then pooled into the smallest other bin
    EXPECT_GT(c.p_value, 0.5);
}

TEST(CompareDistributions, ObservedInZeroExpectedBin) {
    Comparison c = compare_distributions({{"a", 10}, {"b", 1}}, {{"a", 1.0}});
    EXPECT_EQ(c.p_value, 0.0);
}

TEST(CompareHistograms, IdenticalAndDisjoint) {
    Histogram a{{"x", 500}, {"y", 500}};
    EXPECT_NEAR(compare_histograms(a, a).p_value, 1, 1e-12);
    EXPECT_EQ(compare_histograms(a, a).total_variation, 0.0);
    Comparison d = compare_histograms({{"x", 1000}}, {{"y", 1000}});
    EXPECT_NEAR(d.total_variation, 1, 1e-15);
    EXPECT_LT(d.p_value, 1e-10);
}

}  // namespace
}  // namespace qreal

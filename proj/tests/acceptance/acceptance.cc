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

// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "qreal/audit.h"
#include "qreal/ensemble.h"
#include "qreal/nonlinear.h"
#include "qreal/oracle.h"
#include "qreal/scenarios.h"
#include "test_util.h"

namespace {

using namespace qreal;

constexpr uint64_t kTrials = 100000;

// Frozen from tests/oracles/signaling_sweep.py: Bob's P(+) under
// cross_block_probe(2, 0.5) for one time unit, Alice along z and along x.
constexpr double kBobPlusAliceZ = 0.852061184639;
constexpr double kBobPlusAliceX = 0.503820545496;

struct Verdict {
    bool pass = true;
    std::string detail;
};

void note(Verdict &v, bool ok, const std::string &text) {
    v.pass = v.pass && ok;
    if (!v.detail.empty()) {
        v.detail += "; ";
    }
    v.detail += text + (ok ? "" : " [fail]");
}

std::string fmt(const char *format, double a, double b = 0, double c = 0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, format, a, b, c);
    return buf;
}

double frequency(const Histogram &h, const std::function<bool(const std::string &)> &pick) {
    uint64_t hit = 0, total = 0;
    for (const auto &[k, n] : h) {
        total += n;
        if (pick(k)) {
            hit += n;
        }
    }
    return total ? static_cast<double>(hit) / static_cast<double>(total) : 0.0;
}

bool anti(const std::string &k) {
    return k == "+-" || k == "-+";
}

Verdict epr_anticorrelation() {
    Verdict v;
    auto start = std::chrono::steady_clock::now();
    EnsembleResult r = run_ensemble(make_scenario("epr"), kTrials, 1);
    double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    uint64_t bad = 0;
    for (const auto &[k, n] : r.summaries) {
        if (!anti(k)) {
            bad += n;
        }
    }
    note(v, bad == 0 && r.trials == kTrials, fmt("non-anticorrelated trials %.0f of %.0f", double(bad), double(r.trials)));
    note(v, seconds < 10, fmt("runtime %.2f s", seconds));
    return v;
}

Verdict epr_rotated() {
    Verdict v;
    for (double theta : {30.0, 60.0, 90.0}) {
        EnsembleResult r =
            run_ensemble(make_scenario("epr", {{"theta_b", fmt("%.17g", theta)}}), kTrials, 1000 + uint64_t(theta));
        double f = frequency(r.summaries, anti);
        double p = std::pow(std::cos(theta * std::numbers::pi / 360), 2);
        double sigma3 = qreal::testing::three_sigma(p, kTrials);
        note(v, std::abs(f - p) <= sigma3, fmt("theta %.0f: %.5f vs %.5f", theta, f, p) + fmt(" (3sigma %.5f)", sigma3));
    }
    return v;
}

Verdict collapse_equivalence() {
    Verdict v;
    struct Case {
        const char *name;
        Parameters params;
    };
    const std::vector<Case> cases{{"epr", {}},
                                  {"decay", {{"atoms", "8"}}},
                                  {"grating", {{"paths", "4"}}},
                                  {"wigner_chain", {{"k", "5"}}}};
    for (const auto &c : cases) {
        ScenarioSpec spec = make_scenario(c.name, c.params);
        EnsembleResult rsi = run_ensemble(spec, kTrials, 1);
        EnsembleResult ci = run_ci_ensemble(spec, kTrials, 1 + kTrials);
        // The decay counter's joint record space has 2^8 cells; its scenario
        // outcome is the click count, compared here. The joint figure is shown too.
        const bool by_count = std::string(c.name) == "decay";
        double tv = by_count ? total_variation(normalize(rsi.summaries), normalize(ci.summaries))
                             : total_variation(normalize(rsi.outcomes), normalize(ci.outcomes));
        std::string text = std::string(c.name) + fmt(" TV %.4f", tv);
        if (by_count) {
            text += fmt(" (count), joint 256-cell TV %.4f",
                        total_variation(normalize(rsi.outcomes), normalize(ci.outcomes)));
        }
        note(v, tv < 0.02, text);
    }
    return v;
}

Verdict recoherence_divergence() {
    Verdict v;
    const uint64_t n = 10000;
    ScenarioSpec spec = make_scenario("stern_gerlach", {{"recohere", "true"}});
    EnsembleResult rsi = run_ensemble(spec, n, 1);
    EnsembleResult ci = run_ci_ensemble(spec, n, 1 + n);
    UnitaryDistribution u = run_full_unitary(spec);
    auto up = [](const std::string &k) { return k == "sz=+"; };
    double f_rsi = frequency(rsi.summaries, up);
    double f_ci = frequency(ci.summaries, up);
    double p_unitary = u.summaries.count("sz=+") ? u.summaries.at("sz=+") : 0.0;
    note(v, f_rsi == 1.0, fmt("RSI sz=+ %.6f", f_rsi));
    note(v, std::abs(p_unitary - 1.0) < 1e-12, fmt("unitary sz=+ %.12f", p_unitary));
    note(v, std::abs(f_ci - 0.5) <= qreal::testing::three_sigma(0.5, n), fmt("CI sz=+ %.4f", f_ci));
    double tv = total_variation(normalize(rsi.summaries), normalize(ci.summaries));
    note(v, tv >= 0.45, fmt("TV %.4f", tv));
    return v;
}

Verdict seed_independence() {
    Verdict v;
    for (const auto &name : scenario_names()) {
        ScenarioSpec spec = make_scenario(name);
        StateVector first = run_trial(spec, 101).trajectory.final_state;
        bool same = true;
        for (uint64_t seed = 102; seed <= 110; ++seed) {
            same = same && run_trial(spec, seed).trajectory.final_state.identical(first);
        }
        note(v, same, name);
    }
    return v;
}

Verdict quantization_audit() {
    Verdict v;
    const uint64_t n = 10000;
    for (const auto &name : scenario_names()) {
        ScenarioSpec spec = make_scenario(name);
        EnsembleResult r = run_ensemble(spec, n, 1);
        std::vector<AuditViolation> violations;
        for (uint64_t seed = 1; seed <= 1000; ++seed) {
            audit_trajectory(run_trial(spec, seed).trajectory, violations);
        }
        uint64_t total = r.audit_violations + violations.size();
        note(v, total == 0, name + fmt(" violations %.0f", double(total)));
    }
    return v;
}

Verdict wigner_locality() {
    Verdict v;
    ScenarioSpec spec = make_scenario("wigner_chain", {{"k", "5"}});
    uint64_t bad = 0;
    double first_bits = 0;
    for (uint64_t seed = 1; seed <= 10000; ++seed) {
        const auto &entries = run_trial(spec, seed).trajectory.ledger.entries;
        if (entries.size() != 5 || !(entries[0].info_bits > 0)) {
            ++bad;
            continue;
        }
        first_bits += entries[0].info_bits;
        for (size_t e = 1; e < entries.size(); ++e) {
            if (entries[e].info_bits != 0.0) {
                ++bad;
                break;
            }
        }
    }
    note(v, bad == 0, fmt("trials with bits after epoch 1: %.0f; mean epoch-1 bits %.4f", double(bad),
                          first_bits / 10000));
    return v;
}

Verdict numerical_hygiene() {
    Verdict v;
    std::mt19937_64 rng(8);
    SubsystemLayout three = SubsystemLayout::qubits(3);
    StateVector state = qreal::testing::random_state(three, rng);
    double worst = 0;
    for (int step = 0; step < 100; ++step) {
        std::vector<size_t> targets{static_cast<size_t>(step % 3), static_cast<size_t>((step + 1) % 3)};
        state = evolve_step(state, EvolutionStep::generator(qreal::testing::random_hermitian(4, rng), 0.3, targets));
        worst = std::max(worst, std::abs(std::sqrt(state.squared_norm()) - 1));
    }
    note(v, worst <= 1e-9, fmt("norm drift %.2e over 100 steps", worst));

    double recon = 0;
    for (int t = 0; t < 1000; ++t) {
        std::uniform_int_distribution<size_t> dim(2, 8);
        std::vector<size_t> dims{dim(rng), dim(rng)};
        SubsystemLayout layout = SubsystemLayout::from_dims(dims);
        StateVector s = qreal::testing::random_state(layout, rng);
        SchmidtDecomposition d = schmidt_decompose(s, BipartiteSplit::of(layout, {0}));
        recon = std::max(recon, (d.reconstruct(layout).amplitudes() - s.amplitudes()).norm());
    }
    note(v, recon <= 1e-8, fmt("max Schmidt reconstruction error %.2e over 1000 states", recon));
    return v;
}

Verdict nonlinear_no_signaling() {
    Verdict v;
    SignalingSetup setup;
    setup.alice_angles = {0.0, std::numbers::pi / 2};
    setup.trials = 10000;
    setup.seed = 7;
    Matrix h = Matrix::Zero(16, 16);
    for (int k = 0; k < 16; ++k) {
        h(k, k ^ 4) = 0.7;
        h(k, k) += 0.1 * k;
    }
    SignalingReport linear = signaling_test(setup, HamiltonianFunction::quadratic(h), RestrictionMode::kNone);
    note(v, !linear.signaling, fmt("linear TV %.4f floor %.4f", linear.max_tv, linear.noise_floor));
    HamiltonianFunction probe = cross_block_probe(2.0, 0.5);
    SignalingReport restricted = signaling_test(setup, probe, RestrictionMode::kRealizedBlocks);
    note(v, !restricted.signaling, fmt("restricted TV %.4f floor %.4f", restricted.max_tv, restricted.noise_floor));
    SignalingReport open = signaling_test(setup, probe, RestrictionMode::kNone);
    note(v, open.signaling, fmt("unrestricted TV %.4f floor %.4f", open.max_tv, open.noise_floor));
    double expected = kBobPlusAliceZ - kBobPlusAliceX;
    note(v, std::abs(open.exact_max_tv - expected) < 1e-8,
         fmt("exact TV %.9f vs sweep %.9f", open.exact_max_tv, expected));
    note(v, std::abs(open.max_tv - expected) < open.noise_floor,
         fmt("sampled TV within floor of sweep (%.4f)", std::abs(open.max_tv - expected)));
    return v;
}

Verdict bound_pair_stability() {
    Verdict v;
    const uint64_t n = 10000;
    ScenarioSpec spec = make_scenario("bound_pair");
    const size_t d = 4;
    StateVector final_state = run_trial(spec, 1).trajectory.final_state;
    double overlap = std::abs(inner(spec.initial_state, final_state));
    note(v, overlap >= 1 - 1e-9 && global_phase_equal(final_state, spec.initial_state, 1e-9),
         fmt("overlap %.15f", overlap));
    EnsembleResult r = run_ensemble(spec, n, 1);
    // Eigenstate weights: sin²(π(j+1)/(d+1)) normalized.
    double z = 0;
    for (size_t j = 0; j < d; ++j) {
        z += std::pow(std::sin(std::numbers::pi * double(j + 1) / double(d + 1)), 2);
    }
    bool ok = true;
    std::string text = "occupancy";
    for (size_t j = 0; j < d; ++j) {
        double p = std::pow(std::sin(std::numbers::pi * double(j + 1) / double(d + 1)), 2) / z;
        std::string key = "x=" + std::to_string(j);
        double f = frequency(r.summaries, [&](const std::string &k) { return k == key; });
        ok = ok && std::abs(f - p) <= qreal::testing::three_sigma(p, n);
        text += fmt(" %.4f/%.4f", f, p);
    }
    note(v, ok, text);
    return v;
}

}  // namespace

int main() {
    const std::vector<std::pair<const char *, Verdict (*)()>> criteria{
        {"epr_anticorrelation", epr_anticorrelation},
        {"epr_rotated_axes", epr_rotated},
        {"collapse_equivalence", collapse_equivalence},
        {"recoherence_divergence", recoherence_divergence},
        {"seed_independence", seed_independence},
        {"reality_quantization", quantization_audit},
        {"wigner_chain_locality", wigner_locality},
        {"numerical_hygiene", numerical_hygiene},
        {"nonlinear_no_signaling", nonlinear_no_signaling},
        {"bound_pair_stability", bound_pair_stability},
    };
    int failures = 0;
    for (size_t i = 0; i < criteria.size(); ++i) {
        auto start = std::chrono::steady_clock::now();
        Verdict v;
        try {
            v = criteria[i].second();
        } catch (const std::exception &e) {
            v = {false, std::string("exception: ") + e.what()};
        }
        double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::printf("%s %2zu %s (%.2f s): %s\n", v.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, seconds,
                    v.detail.c_str());
        std::fflush(stdout);
        failures += v.pass ? 0 : 1;
    }
    return failures == 0 ? 0 : 1;
}

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

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <random>
#include <sstream>

#include "qreal/scenarios.h"

namespace qreal {

namespace {

// Sorted plain indices and sorted conjugated indices of a monomial.
using MonomialKey = std::pair<std::vector<size_t>, std::vector<size_t>>;

MonomialKey key_of(const Monomial &m) {
    MonomialKey k;
    for (const auto &f : m.factors) {
        (f.conjugated ? k.second : k.first).push_back(f.index);
    }
    std::sort(k.first.begin(), k.first.end());
    std::sort(k.second.begin(), k.second.end());
    return k;
}

Complex factor_value(const Factor &f, const Amplitudes &psi) {
    Complex v = psi(static_cast<Eigen::Index>(f.index));
    return f.conjugated ? std::conj(v) : v;
}

}  // namespace

HamiltonianFunction::HamiltonianFunction(size_t dim, std::vector<Monomial> monomials)
    : dim_(dim), monomials_(std::move(monomials)) {
    std::map<MonomialKey, double> weight;
    double scale = 0;
    for (const auto &m : monomials_) {
        if (!std::isfinite(m.coefficient)) {
            throw InvalidParameter("monomial coefficient is not finite");
        }
        size_t conj = 0;
        for (const auto &f : m.factors) {
            if (f.index >= dim_) {
                throw IndexError("monomial index " + std::to_string(f.index) + " out of range");
            }
            conj += f.conjugated;
        }
        if (2 * conj != m.factors.size()) {
            throw InvalidParameter("every monomial needs equal numbers of plain and conjugated factors");
        }
        weight[key_of(m)] += m.coefficient;
        scale = std::max(scale, std::abs(m.coefficient));
    }
    for (const auto &[k, w] : weight) {
        MonomialKey mirrored{k.second, k.first};
        auto it = weight.find(mirrored);
        double other = it == weight.end() ? 0.0 : it->second;
        if (std::abs(w - other) > 1e-12 * std::max(1.0, scale)) {
            throw InvalidParameter("Hamiltonian function is not real: a monomial lacks its conjugate partner");
        }
    }
}

HamiltonianFunction HamiltonianFunction::quadratic(const Matrix &h) {
    if (h.rows() != h.cols()) {
        throw InvalidParameter("quadratic form needs a square matrix");
    }
    if (h.imag().cwiseAbs().maxCoeff() > 0 || (h - h.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
        throw InvalidParameter("quadratic form needs a real symmetric matrix");
    }
    std::vector<Monomial> ms;
    for (Eigen::Index i = 0; i < h.rows(); ++i) {
        for (Eigen::Index j = 0; j < h.cols(); ++j) {
            double c = h(i, j).real();
            if (c != 0) {
                ms.push_back({c, {{static_cast<size_t>(i), true}, {static_cast<size_t>(j), false}}});
            }
        }
    }
    return HamiltonianFunction(static_cast<size_t>(h.rows()), std::move(ms));
}

HamiltonianFunction HamiltonianFunction::parse(const std::string &text, size_t dim) {
    std::vector<Monomial> ms;
    std::istringstream in(text);
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) {
            line.resize(hash);
        }
        std::istringstream fields(line);
        std::string tok;
        if (!(fields >> tok)) {
            continue;
        }
        Monomial m;
        try {
            size_t used = 0;
            m.coefficient = std::stod(tok, &used);
            if (used != tok.size()) {
                throw std::invalid_argument(tok);
            }
            while (fields >> tok) {
                auto colon = tok.find(':');
                if (colon == std::string::npos) {
                    throw std::invalid_argument(tok);
                }
                Factor f;
                f.index = std::stoull(tok.substr(0, colon));
                std::string flag = tok.substr(colon + 1);
                if (flag != "0" && flag != "1") {
                    throw std::invalid_argument(tok);
                }
                f.conjugated = flag == "1";
                m.factors.push_back(f);
            }
        } catch (const std::logic_error &) {
            throw InvalidParameter("cannot parse monomial on line " + std::to_string(lineno) + ": '" + line + "'");
        }
        ms.push_back(std::move(m));
    }
    return HamiltonianFunction(dim, std::move(ms));
}

std::string HamiltonianFunction::to_text() const {
    std::string out;
    char buf[64];
    for (const auto &m : monomials_) {
        std::snprintf(buf, sizeof(buf), "%.17g", m.coefficient);
        out += buf;
        for (const auto &f : m.factors) {
            out += " " + std::to_string(f.index) + ":" + (f.conjugated ? "1" : "0");
        }
        out += '\n';
    }
    return out;
}

bool HamiltonianFunction::is_quadratic() const {
    return std::all_of(monomials_.begin(), monomials_.end(), [](const auto &m) { return m.factors.size() == 2; });
}

double HamiltonianFunction::evaluate(const Amplitudes &psi) const {
    if (static_cast<size_t>(psi.size()) != dim_) {
        throw LayoutMismatch("state dimension does not match the Hamiltonian function");
    }
    Complex total = 0;
    for (const auto &m : monomials_) {
        Complex term = m.coefficient;
        for (const auto &f : m.factors) {
            term *= factor_value(f, psi);
        }
        total += term;
    }
    return total.real();
}

Amplitudes HamiltonianFunction::gradient_conj(const Amplitudes &psi) const {
    if (static_cast<size_t>(psi.size()) != dim_) {
        throw LayoutMismatch("state dimension does not match the Hamiltonian function");
    }
    Amplitudes grad = Amplitudes::Zero(psi.size());
    for (const auto &m : monomials_) {
        for (size_t q = 0; q < m.factors.size(); ++q) {
            if (!m.factors[q].conjugated) {
                continue;
            }
            Complex term = m.coefficient;
            for (size_t r = 0; r < m.factors.size(); ++r) {
                if (r != q) {
                    term *= factor_value(m.factors[r], psi);
                }
            }
            grad(static_cast<Eigen::Index>(m.factors[q].index)) += term;
        }
    }
    return grad;
}

HamiltonianFunction apply_restriction(const HamiltonianFunction &h, const RestrictionPolicy &policy,
                                      const RealityToken *token) {
    if (policy.mode == RestrictionMode::kNone) {
        return h;
    }
    if (token == nullptr) {
        throw MissingToken("realized-block restriction needs a reality token");
    }
    const auto &layout = policy.layout;
    if (layout.total_dim() != h.dim()) {
        throw LayoutMismatch("restriction layout does not match the Hamiltonian function");
    }
    for (const auto &[r, v] : token->realized_records) {
        layout.check_index(r);
        if (v >= layout.dim(r)) {
            throw IndexError("realized record value out of range");
        }
    }
    auto realized = [&](size_t index) {
        for (const auto &[r, v] : token->realized_records) {
            if ((index / layout.stride(r)) % layout.dim(r) != v) {
                return false;
            }
        }
        return true;
    };
    std::vector<Monomial> kept;
    for (const auto &m : h.monomials()) {
        bool inside = false;
        bool outside = false;
        for (const auto &f : m.factors) {
            (realized(f.index) ? inside : outside) = true;
        }
        if (!(inside && outside)) {
            kept.push_back(m);
        }
    }
    return HamiltonianFunction(h.dim(), std::move(kept));
}

NonlinearResult nonlinear_evolve(const StateVector &state, const HamiltonianFunction &h, double duration, double dt,
                                 double max_drift) {
    if (!(dt > 0) || !(duration >= 0) || !std::isfinite(duration)) {
        throw InvalidParameter("nonlinear evolution needs dt > 0 and a finite duration >= 0");
    }
    if (state.dim() != h.dim()) {
        throw LayoutMismatch("state dimension does not match the Hamiltonian function");
    }
    const Complex minus_i(0, -1);
    auto rhs = [&](const Amplitudes &psi) -> Amplitudes { return minus_i * h.gradient_conj(psi); };
    NonlinearResult out;
    out.steps = duration == 0 ? 0 : static_cast<size_t>(std::ceil(duration / dt - 1e-12));
    const double step = out.steps ? duration / static_cast<double>(out.steps) : 0;
    const double n0 = state.amplitudes().norm();
    Amplitudes psi = state.amplitudes();
    for (size_t s = 0; s < out.steps; ++s) {
        Amplitudes k1 = rhs(psi);
        Amplitudes k2 = rhs(psi + (step / 2) * k1);
        Amplitudes k3 = rhs(psi + (step / 2) * k2);
        Amplitudes k4 = rhs(psi + step * k3);
        psi += (step / 6) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        double drift = std::abs(psi.norm() - n0);
        out.norm_drift = std::max(out.norm_drift, drift);
        if (!(drift <= max_drift)) {
            throw IntegrationDiverged("norm drifted by " + std::to_string(drift) + " after " + std::to_string(s + 1) +
                                      " steps");
        }
    }
    out.state = StateVector(state.layout(), std::move(psi));
    return out;
}

SubsystemLayout signaling_layout() {
    return build_epr({0, 0, 1}, {0, 0, 1}).layout;
}

HamiltonianFunction cross_block_probe(double g, double lambda) {
    // Indices on [a, b, record_a, record_b]: 8a + 4b + 2·record_a + record_b.
    const size_t i = 4;    // a=0, b=1, record_a=0
    const size_t j = 0;    // a=0, b=0, record_a=0
    const size_t p = 10;   // a=1, b=0, record_a=1
    std::vector<Monomial> ms{
        {g, {{p, true}, {p, false}, {i, true}, {j, false}}},
        {g, {{p, true}, {p, false}, {j, true}, {i, false}}},
        {lambda, {{i, true}, {i, true}, {i, false}, {i, false}}},
        {lambda, {{i, true}, {j, true}, {i, false}, {j, false}}},
    };
    return HamiltonianFunction(16, std::move(ms));
}

SignalingReport signaling_test(const SignalingSetup &setup, const HamiltonianFunction &h, RestrictionMode mode) {
    if (setup.alice_angles.size() < 2 || setup.trials == 0) {
        throw InvalidParameter("signaling test needs at least two settings and one trial");
    }
    const std::array<double, 3> bob_axis{std::sin(setup.bob_angle), 0, std::cos(setup.bob_angle)};
    const size_t rec_a = 2;
    const size_t rec_b = 3;
    SignalingReport report;
    for (size_t s = 0; s < setup.alice_angles.size(); ++s) {
        double alpha = setup.alice_angles[s];
        ScenarioSpec epr = build_epr({std::sin(alpha), 0, std::cos(alpha)}, bob_axis);
        if (epr.layout.total_dim() != h.dim()) {
            throw LayoutMismatch("Hamiltonian function must act on the 16-dimensional signaling layout");
        }
        const auto &alice = epr.schedule.steps[0];
        const auto &bob = epr.schedule.steps[1];
        StateVector measured = evolve_step(epr.initial_state, alice);
        std::vector<double> p_alice = marginal(measured, rec_a);
        std::vector<double> p_bob_plus(2, 0.0);
        std::optional<StateVector> shared;
        for (size_t a = 0; a < 2; ++a) {
            if (!(p_alice[a] > kDefaultTolerances.null)) {
                continue;
            }
            StateVector evolved;
            if (mode == RestrictionMode::kNone) {
                if (!shared) {
                    shared = nonlinear_evolve(measured, h, setup.duration, setup.dt).state;
                }
                evolved = *shared;
            } else {
                RealityToken token;
                token.realized_records[rec_a] = a;
                HamiltonianFunction restricted = apply_restriction(h, {mode, epr.layout}, &token);
                evolved = nonlinear_evolve(measured, restricted, setup.duration, setup.dt).state;
            }
            StateVector final_state = evolve_step(evolved, bob);
            ConditionedView view = condition(final_state, {{rec_a, a}});
            p_bob_plus[a] = marginal(view.state, view.to_view(rec_b))[0];
        }
        double exact = p_alice[0] * p_bob_plus[0] + p_alice[1] * p_bob_plus[1];
        std::mt19937_64 rng = trial_rng(setup.seed + s);
        uint64_t plus = 0;
        for (uint64_t t = 0; t < setup.trials; ++t) {
            size_t a = sample_index(p_alice, rng);
            std::array<double, 2> pb{p_bob_plus[a], 1 - p_bob_plus[a]};
            plus += sample_index(pb, rng) == 0;
        }
        report.exact_bob_plus.push_back(exact);
        report.bob_plus.push_back(static_cast<double>(plus) / static_cast<double>(setup.trials));
    }
    double spread = 0;
    for (size_t s = 0; s < report.bob_plus.size(); ++s) {
        for (size_t t = s + 1; t < report.bob_plus.size(); ++t) {
            report.max_tv = std::max(report.max_tv, std::abs(report.bob_plus[s] - report.bob_plus[t]));
            report.exact_max_tv =
                std::max(report.exact_max_tv, std::abs(report.exact_bob_plus[s] - report.exact_bob_plus[t]));
            double pbar = (report.bob_plus[s] + report.bob_plus[t]) / 2;
            spread = std::max(spread, std::sqrt(pbar * (1 - pbar)));
        }
    }
    report.noise_floor = 5 * std::sqrt(2.0 / static_cast<double>(setup.trials)) * spread;
    report.signaling = report.max_tv > report.noise_floor;
    return report;
}

}  // namespace qreal

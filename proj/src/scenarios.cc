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

#include "qreal/scenarios.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace qreal {

namespace {

using std::numbers::pi;

Matrix kron(const Matrix &a, const Matrix &b) {
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
        }
    }
    return out;
}

Matrix pauli_x() {
    Matrix m = Matrix::Zero(2, 2);
    m(0, 1) = m(1, 0) = 1;
    return m;
}

Matrix ry(double theta) {
    Matrix m(2, 2);
    double c = std::cos(theta / 2);
    double s = std::sin(theta / 2);
    m << c, -s, s, c;
    return m;
}

Matrix hadamard() {
    Matrix m(2, 2);
    double r = 1 / std::sqrt(2.0);
    m << r, r, r, -r;
    return m;
}

// |j, k⟩ -> |j, k + j mod d_target⟩ on a (d_control × d_target) pair.
Matrix controlled_shift(size_t d_control, size_t d_target) {
    const auto n = static_cast<Eigen::Index>(d_control * d_target);
    Matrix m = Matrix::Zero(n, n);
    for (size_t j = 0; j < d_control; ++j) {
        for (size_t k = 0; k < d_target; ++k) {
            size_t from = j * d_target + k;
            size_t to = j * d_target + (k + j) % d_target;
            m(static_cast<Eigen::Index>(to), static_cast<Eigen::Index>(from)) = 1;
        }
    }
    return m;
}

Matrix dft(size_t n) {
    Matrix m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    double norm = 1 / std::sqrt(static_cast<double>(n));
    for (size_t k = 0; k < n; ++k) {
        for (size_t j = 0; j < n; ++j) {
            double angle = 2 * pi * static_cast<double>((j * k) % n) / static_cast<double>(n);
            m(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j)) = std::polar(norm, angle);
        }
    }
    return m;
}

// Measurement coupling along a unit axis: P₊ ⊗ I + P₋ ⊗ X on (spin, record).
Matrix axis_measurement(const std::array<double, 3> &n) {
    Matrix sigma(2, 2);
    sigma << Complex(n[2], 0), Complex(n[0], -n[1]), Complex(n[0], n[1]), Complex(-n[2], 0);
    Matrix id = Matrix::Identity(2, 2);
    Matrix plus = (id + sigma) / 2.0;
    Matrix minus = (id - sigma) / 2.0;
    return kron(plus, id) + kron(minus, pauli_x());
}

EventMarker marker(size_t step, std::vector<size_t> side_a, size_t n, std::vector<size_t> records, std::string label) {
    EventMarker m;
    m.step_index = step;
    m.split.side_a = side_a;
    for (size_t i = 0; i < n; ++i) {
        if (std::find(side_a.begin(), side_a.end(), i) == side_a.end()) {
            m.split.side_b.push_back(i);
        }
    }
    m.records = std::move(records);
    m.label = std::move(label);
    return m;
}

void check_probability(double p, const char *name) {
    if (!(p >= 0 && p <= 1)) {
        throw InvalidParameter(std::string(name) + " must lie in [0, 1]");
    }
}

std::string format_double(double x) {
    std::ostringstream out;
    out.precision(17);
    out << x;
    return out.str();
}

std::array<double, 3> unit_axis(double theta_deg, double phi_deg) {
    double t = theta_deg * pi / 180;
    double p = phi_deg * pi / 180;
    return {std::sin(t) * std::cos(p), std::sin(t) * std::sin(p), std::cos(t)};
}

}  // namespace

std::vector<size_t> ScenarioSpec::record_order() const {
    std::vector<size_t> out;
    for (const auto &m : schedule.markers) {
        out.insert(out.end(), m.records.begin(), m.records.end());
    }
    return out;
}

std::string ScenarioSpec::outcome_key(const RealizedRecords &records) const {
    std::string out;
    for (size_t r : record_order()) {
        if (!out.empty()) {
            out += ',';
        }
        auto it = records.find(r);
        out += it == records.end() ? "?" : std::to_string(it->second);
    }
    return out.empty() ? "-" : out;
}

void ScenarioSpec::validate(const Tolerances &tol) const {
    if (!(initial_state.layout() == layout)) {
        throw LayoutMismatch("scenario initial state is not on the scenario layout");
    }
    if (!initial_state.is_normalized(tol.norm)) {
        throw InvalidParameter("scenario initial state is not normalized");
    }
    schedule.validate(layout, tol);
}

std::vector<double> parse_list(const std::string &text) {
    std::vector<double> out;
    std::istringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        try {
            size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (item.find_first_not_of(" \t", used) != std::string::npos) {
                throw InvalidParameter("bad number '" + item + "'");
            }
        } catch (const std::logic_error &) {
            throw InvalidParameter("bad number '" + item + "'");
        }
    }
    return out;
}

ScenarioSpec build_grating(size_t n_paths, const std::vector<double> &profile, bool propagate) {
    if (n_paths < 2) {
        throw InvalidParameter("a grating needs at least 2 paths");
    }
    if (profile.size() != n_paths) {
        throw InvalidProfile("profile has " + std::to_string(profile.size()) + " entries for " +
                             std::to_string(n_paths) + " paths");
    }
    double norm2 = 0;
    for (double a : profile) {
        if (!std::isfinite(a)) {
            throw InvalidProfile("profile entries must be finite");
        }
        norm2 += a * a;
    }
    if (!(norm2 > 0)) {
        throw InvalidProfile("profile is not normalizable");
    }
    ScenarioSpec s;
    s.name = "grating";
    s.layout = SubsystemLayout({{n_paths, Role::kObject, "electron"}, {n_paths, Role::kRecord, "screen"}});
    Amplitudes amps = Amplitudes::Zero(static_cast<Eigen::Index>(n_paths * n_paths));
    for (size_t j = 0; j < n_paths; ++j) {
        amps(static_cast<Eigen::Index>(j * n_paths)) = profile[j] / std::sqrt(norm2);
    }
    s.initial_state = StateVector(s.layout, std::move(amps));
    if (propagate) {
        s.schedule.steps.push_back(EvolutionStep::unitary(dft(n_paths), {0}, "propagate").as_own_reference());
    }
    s.schedule.steps.push_back(EvolutionStep::unitary(controlled_shift(n_paths, n_paths), {0, 1}, "detect")
                                   .with_reference(EvolutionStep::identity({0, 1})));
    s.schedule.markers.push_back(marker(s.schedule.steps.size() - 1, {1}, 2, {1}, "impact"));
    std::ostringstream prof;
    for (size_t j = 0; j < n_paths; ++j) {
        prof << (j ? "," : "") << format_double(profile[j]);
    }
    s.parameters = {{"paths", std::to_string(n_paths)}, {"profile", prof.str()},
                    {"propagate", propagate ? "true" : "false"}};
    s.summarize = [](const RealizedRecords &r, const std::string &) {
        auto it = r.find(1);
        return it == r.end() ? std::string("none") : "x=" + std::to_string(it->second);
    };
    s.validate();
    return s;
}

ScenarioSpec build_decay_counter(size_t m_atoms, double p_decay, double p_detect) {
    if (m_atoms < 1 || m_atoms > 10) {
        throw InvalidParameter("decay counter supports 1 to 10 atoms");
    }
    check_probability(p_decay, "p_decay");
    check_probability(p_detect, "p_detect");
    std::vector<Subsystem> subs;
    for (size_t i = 0; i < m_atoms; ++i) {
        subs.push_back({2, Role::kObject, "atom_" + std::to_string(i)});
    }
    for (size_t i = 0; i < m_atoms; ++i) {
        subs.push_back({2, Role::kRecord, "counter_" + std::to_string(i)});
    }
    ScenarioSpec s;
    s.name = "decay";
    s.layout = SubsystemLayout(std::move(subs));
    std::vector<size_t> zeros(2 * m_atoms, 0);
    s.initial_state = StateVector::basis(s.layout, zeros);
    const size_t n = 2 * m_atoms;
    // Amplitude for "emitted into the counter's acceptance".
    double theta = 2 * std::asin(std::sqrt(p_decay * p_detect));
    for (size_t i = 0; i < m_atoms; ++i) {
        size_t rec = m_atoms + i;
        s.schedule.steps.push_back(
            EvolutionStep::unitary(ry(theta), {i}, "decay_" + std::to_string(i)).as_own_reference());
        s.schedule.steps.push_back(EvolutionStep::unitary(controlled_shift(2, 2), {i, rec}, "count_" + std::to_string(i))
                                       .with_reference(EvolutionStep::identity({i, rec})));
        s.schedule.markers.push_back(marker(s.schedule.steps.size() - 1, {rec}, n, {rec}, "click_" + std::to_string(i)));
    }
    s.parameters = {{"atoms", std::to_string(m_atoms)},
                    {"p_decay", format_double(p_decay)},
                    {"p_detect", format_double(p_detect)}};
    s.summarize = [m_atoms](const RealizedRecords &r, const std::string &) {
        size_t count = 0;
        for (size_t i = 0; i < m_atoms; ++i) {
            auto it = r.find(m_atoms + i);
            count += it != r.end() && it->second == 1;
        }
        return "count=" + std::to_string(count);
    };
    s.validate();
    return s;
}

ScenarioSpec build_epr(const std::array<double, 3> &axis_a, const std::array<double, 3> &axis_b) {
    for (const auto *axis : {&axis_a, &axis_b}) {
        double n = std::sqrt((*axis)[0] * (*axis)[0] + (*axis)[1] * (*axis)[1] + (*axis)[2] * (*axis)[2]);
        if (std::abs(n - 1) > 1e-9) {
            throw InvalidParameter("analyzer axes must be unit vectors");
        }
    }
    ScenarioSpec s;
    s.name = "epr";
    s.layout = SubsystemLayout({{2, Role::kObject, "a"},
                                {2, Role::kObject, "b"},
                                {2, Role::kRecord, "analyzer_a"},
                                {2, Role::kRecord, "analyzer_b"}});
    Amplitudes amps = Amplitudes::Zero(16);
    // (|01⟩ − |10⟩)/√2 on (a, b), records at 0.
    amps(0b0100) = 1 / std::sqrt(2.0);
    amps(0b1000) = -1 / std::sqrt(2.0);
    s.initial_state = StateVector(s.layout, std::move(amps));
    s.schedule.steps.push_back(EvolutionStep::unitary(axis_measurement(axis_a), {0, 2}, "measure_a")
                                   .with_reference(EvolutionStep::identity({0, 2})));
    s.schedule.markers.push_back(marker(0, {2}, 4, {2}, "P1"));
    s.schedule.steps.push_back(EvolutionStep::unitary(axis_measurement(axis_b), {1, 3}, "measure_b")
                                   .with_reference(EvolutionStep::identity({1, 3})));
    s.schedule.markers.push_back(marker(1, {3}, 4, {3}, "P2"));
    auto fmt = [](const std::array<double, 3> &v) {
        return format_double(v[0]) + "," + format_double(v[1]) + "," + format_double(v[2]);
    };
    s.parameters = {{"axis_a", fmt(axis_a)}, {"axis_b", fmt(axis_b)}};
    s.summarize = [](const RealizedRecords &r, const std::string &) {
        std::string out;
        for (size_t rec : {2u, 3u}) {
            auto it = r.find(rec);
            out += it == r.end() ? '?' : (it->second == 0 ? '+' : '-');
        }
        return out;
    };
    s.validate();
    return s;
}

ScenarioSpec build_stern_gerlach(bool recohere, bool analyzer_marks_environment) {
    const bool env_is_record = analyzer_marks_environment && !recohere;
    ScenarioSpec s;
    s.name = "stern_gerlach";
    s.layout = SubsystemLayout({{2, Role::kObject, "spin"},
                                {3, Role::kObject, "path"},
                                {2, env_is_record ? Role::kRecord : Role::kEnvironment, "analyzer_env"},
                                {2, Role::kRecord, "sz_detector"}});
    std::vector<size_t> zeros(4, 0);
    s.initial_state = StateVector::basis(s.layout, zeros);

    Matrix id2 = Matrix::Identity(2, 2);
    Matrix plus_x = (id2 + pauli_x()) / 2.0;
    Matrix minus_x = (id2 - pauli_x()) / 2.0;
    Matrix to_right = Matrix::Identity(3, 3);
    to_right.row(0).swap(to_right.row(1));
    Matrix to_left = Matrix::Identity(3, 3);
    to_left.row(0).swap(to_left.row(2));
    Matrix analyzer = kron(plus_x, to_right) + kron(minus_x, to_left);
    Matrix left_arm = Matrix::Zero(3, 3);
    left_arm(2, 2) = 1;
    Matrix mark = kron(Matrix::Identity(3, 3) - left_arm, id2) + kron(left_arm, pauli_x());

    s.schedule.steps.push_back(EvolutionStep::unitary(analyzer, {0, 1}, "split_x").as_own_reference());
    if (analyzer_marks_environment) {
        s.schedule.steps.push_back(
            EvolutionStep::unitary(mark, {1, 2}, "mark_env").with_reference(EvolutionStep::identity({1, 2})));
    } else {
        s.schedule.steps.push_back(EvolutionStep::identity({1, 2}, "mark_env").as_own_reference());
    }
    std::vector<size_t> env_records;
    if (env_is_record) {
        env_records.push_back(2);
    }
    s.schedule.markers.push_back(marker(1, {2}, 4, env_records, "splitter"));
    if (recohere && analyzer_marks_environment) {
        s.schedule.steps.push_back(
            EvolutionStep::unitary(mark, {1, 2}, "unmark_env").with_reference(EvolutionStep::identity({1, 2})));
    }
    s.schedule.steps.push_back(EvolutionStep::unitary(analyzer.adjoint(), {0, 1}, "recombine").as_own_reference());
    s.schedule.steps.push_back(EvolutionStep::unitary(controlled_shift(2, 2), {0, 3}, "measure_z")
                                   .with_reference(EvolutionStep::identity({0, 3})));
    s.schedule.markers.push_back(marker(s.schedule.steps.size() - 1, {3}, 4, {3}, "final_z"));
    s.parameters = {{"recohere", recohere ? "true" : "false"},
                    {"marks_environment", analyzer_marks_environment ? "true" : "false"}};
    s.summarize = [](const RealizedRecords &r, const std::string &) {
        auto it = r.find(3);
        return it == r.end() ? std::string("?") : std::string(it->second == 0 ? "sz=+" : "sz=-");
    };
    s.validate();
    return s;
}

ScenarioSpec build_wigner_chain(size_t k, double p_right) {
    static const char *kNames[] = {"detector", "lever", "dog", "friend", "wigner", "audience_1", "audience_2",
                                   "audience_3"};
    if (k < 1 || k > 8) {
        throw InvalidParameter("chain length must be between 1 and 8");
    }
    check_probability(p_right, "p_right");
    std::vector<Subsystem> subs{{2, Role::kObject, "particle"}};
    for (size_t i = 0; i < k; ++i) {
        subs.push_back({2, Role::kRecord, kNames[i]});
    }
    ScenarioSpec s;
    s.name = "wigner_chain";
    s.layout = SubsystemLayout(std::move(subs));
    Amplitudes amps = Amplitudes::Zero(static_cast<Eigen::Index>(s.layout.total_dim()));
    // particle |1⟩ = emitted to the right (towards the detector).
    size_t one = s.layout.stride(0);
    amps(0) = std::sqrt(1 - p_right);
    amps(static_cast<Eigen::Index>(one)) = std::sqrt(p_right);
    s.initial_state = StateVector(s.layout, std::move(amps));
    for (size_t i = 0; i < k; ++i) {
        size_t src = i;   // particle for the first link, previous record after
        size_t dst = i + 1;
        s.schedule.steps.push_back(EvolutionStep::unitary(controlled_shift(2, 2), {src, dst}, kNames[i])
                                       .with_reference(EvolutionStep::identity({src, dst})));
        s.schedule.markers.push_back(marker(i, {dst}, k + 1, {dst}, kNames[i]));
    }
    s.parameters = {{"k", std::to_string(k)}, {"p_right", format_double(p_right)}};
    s.summarize = [k](const RealizedRecords &r, const std::string &) {
        auto it = r.find(k);
        return it == r.end() ? std::string("?") : std::string(it->second == 1 ? "right" : "left");
    };
    s.validate();
    return s;
}

ScenarioSpec build_bound_pair(size_t d, double hop, double binding, size_t markers, double dt) {
    if (d < 2) {
        throw InvalidParameter("bound pair needs at least 2 positions");
    }
    if (markers < 1 || !(dt > 0) || !std::isfinite(hop) || !std::isfinite(binding)) {
        throw InvalidParameter("bound pair needs markers >= 1, dt > 0 and finite couplings");
    }
    ScenarioSpec s;
    s.name = "bound_pair";
    s.layout = SubsystemLayout({{d, Role::kObject, "particle_a"}, {d, Role::kObject, "particle_b"}});
    const auto n = static_cast<Eigen::Index>(d * d);
    auto at = [d](size_t j, size_t k) { return static_cast<Eigen::Index>(j * d + k); };

    Matrix single = Matrix::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
    for (size_t j = 0; j + 1 < d; ++j) {
        single(static_cast<Eigen::Index>(j + 1), static_cast<Eigen::Index>(j)) = -hop;
        single(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j + 1)) = -hop;
    }
    Matrix id = Matrix::Identity(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
    Matrix free = kron(single, id) + kron(id, single);
    Matrix bound = Matrix::Zero(n, n);
    for (size_t j = 0; j < d; ++j) {
        for (size_t k = 0; k < d; ++k) {
            if (j != k) {
                bound(at(j, k), at(j, k)) = binding;
            }
        }
    }
    for (size_t j = 0; j + 1 < d; ++j) {
        bound(at(j + 1, j + 1), at(j, j)) = -hop;
        bound(at(j, j), at(j + 1, j + 1)) = -hop;
    }
    Amplitudes amps = Amplitudes::Zero(n);
    for (size_t j = 0; j < d; ++j) {
        amps(at(j, j)) = std::sin(pi * static_cast<double>(j + 1) / static_cast<double>(d + 1));
    }
    amps /= amps.norm();
    s.initial_state = StateVector(s.layout, std::move(amps));
    EvolutionStep step = EvolutionStep::generator(bound, dt, {0, 1}, "bound")
                             .with_reference(EvolutionStep::generator(free, dt, {0, 1}, "free"));
    for (size_t t = 0; t < markers; ++t) {
        s.schedule.steps.push_back(step);
        s.schedule.markers.push_back(marker(t, {0}, 2, {}, "t" + std::to_string(t + 1)));
    }
    s.parameters = {{"d", std::to_string(d)},
                    {"hop", format_double(hop)},
                    {"binding", format_double(binding)},
                    {"markers", std::to_string(markers)},
                    {"dt", format_double(dt)}};
    s.summarize = [](const RealizedRecords &, const std::string &last) { return "x=" + last; };
    s.validate();
    return s;
}

ScenarioSpec build_spectator(double delta) {
    if (!(delta >= 0 && delta <= pi / 2 + 1e-12)) {
        throw InvalidParameter("spectator shift must lie in [0, pi/2]");
    }
    ScenarioSpec s;
    s.name = "spectator";
    s.layout = SubsystemLayout(
        {{2, Role::kObject, "object"}, {2, Role::kEnvironment, "spectator"}, {2, Role::kRecord, "screen"}});
    Amplitudes amps = Amplitudes::Zero(8);
    amps(0) = amps(4) = 1 / std::sqrt(2.0);
    s.initial_state = StateVector(s.layout, std::move(amps));
    Matrix id2 = Matrix::Identity(2, 2);
    Matrix p0 = Matrix::Zero(2, 2);
    p0(0, 0) = 1;
    Matrix p1 = id2 - p0;
    Matrix nudge = kron(p0, id2) + kron(p1, ry(2 * delta));
    s.schedule.steps.push_back(
        EvolutionStep::unitary(nudge, {0, 1}, "pass").with_reference(EvolutionStep::identity({0, 1})));
    s.schedule.markers.push_back(marker(0, {1}, 3, {}, "spectator"));
    s.schedule.steps.push_back(EvolutionStep::unitary(hadamard(), {0}, "recombine").as_own_reference());
    s.schedule.steps.push_back(EvolutionStep::unitary(controlled_shift(2, 2), {0, 2}, "detect")
                                   .with_reference(EvolutionStep::identity({0, 2})));
    s.schedule.markers.push_back(marker(2, {2}, 3, {2}, "screen"));
    s.parameters = {{"delta", format_double(delta)}};
    s.summarize = [](const RealizedRecords &r, const std::string &) {
        auto it = r.find(2);
        return it == r.end() ? std::string("?") : "port=" + std::to_string(it->second);
    };
    s.validate();
    return s;
}

std::vector<std::string> scenario_names() {
    return {"bound_pair", "decay", "epr", "grating", "spectator", "stern_gerlach", "wigner_chain"};
}

Parameters default_parameters(const std::string &name) {
    if (name == "grating") {
        return {{"paths", "4"}, {"profile", "1,1,0,0"}, {"propagate", "true"}};
    }
    if (name == "decay") {
        return {{"atoms", "8"}, {"p_decay", "0.5"}, {"p_detect", "0.9"}};
    }
    if (name == "epr") {
        return {{"theta_a", "0"}, {"phi_a", "0"}, {"theta_b", "0"}, {"phi_b", "0"}};
    }
    if (name == "stern_gerlach") {
        return {{"recohere", "true"}, {"marks_environment", "true"}};
    }
    if (name == "wigner_chain") {
        return {{"k", "5"}, {"p_right", "0.5"}};
    }
    if (name == "bound_pair") {
        return {{"d", "4"}, {"hop", "1"}, {"binding", "4"}, {"markers", "8"}, {"dt", "0.25"}};
    }
    if (name == "spectator") {
        return {{"delta", "0.78539816339744828"}};
    }
    throw ConfigError("unknown scenario '" + name + "'");
}

namespace {

double get_double(const Parameters &p, const std::string &key) {
    const std::string &v = p.at(key);
    try {
        size_t used = 0;
        double x = std::stod(v, &used);
        if (used != v.size()) {
            throw ConfigError("");
        }
        return x;
    } catch (const std::exception &) {
        throw ConfigError("parameter '" + key + "' is not a number: '" + v + "'");
    }
}

size_t get_size(const Parameters &p, const std::string &key) {
    const std::string &v = p.at(key);
    if (v.empty() || v.find_first_not_of("0123456789") != std::string::npos) {
        throw ConfigError("parameter '" + key + "' is not a nonnegative integer: '" + v + "'");
    }
    try {
        return std::stoull(v);
    } catch (const std::exception &) {
        throw ConfigError("parameter '" + key + "' is out of range: '" + v + "'");
    }
}

bool get_bool(const Parameters &p, const std::string &key) {
    const std::string &v = p.at(key);
    if (v == "true" || v == "1" || v == "yes") {
        return true;
    }
    if (v == "false" || v == "0" || v == "no") {
        return false;
    }
    throw ConfigError("parameter '" + key + "' is not a boolean: '" + v + "'");
}

}  // namespace

ScenarioSpec make_scenario(const std::string &name, const Parameters &overrides) {
    Parameters p = default_parameters(name);
    for (const auto &[k, v] : overrides) {
        if (!p.contains(k)) {
            throw ConfigError("scenario '" + name + "' has no parameter '" + k + "'");
        }
        p[k] = v;
    }
    ScenarioSpec s;
    if (name == "grating") {
        std::vector<double> profile;
        try {
            profile = parse_list(p.at("profile"));
        } catch (const InvalidParameter &e) {
            throw InvalidProfile(e.what());
        }
        s = build_grating(get_size(p, "paths"), profile, get_bool(p, "propagate"));
    } else if (name == "decay") {
        s = build_decay_counter(get_size(p, "atoms"), get_double(p, "p_decay"), get_double(p, "p_detect"));
    } else if (name == "epr") {
        s = build_epr(unit_axis(get_double(p, "theta_a"), get_double(p, "phi_a")),
                      unit_axis(get_double(p, "theta_b"), get_double(p, "phi_b")));
    } else if (name == "stern_gerlach") {
        s = build_stern_gerlach(get_bool(p, "recohere"), get_bool(p, "marks_environment"));
    } else if (name == "wigner_chain") {
        s = build_wigner_chain(get_size(p, "k"), get_double(p, "p_right"));
    } else if (name == "bound_pair") {
        s = build_bound_pair(get_size(p, "d"), get_double(p, "hop"), get_double(p, "binding"),
                             get_size(p, "markers"), get_double(p, "dt"));
    } else {
        s = build_spectator(get_double(p, "delta"));
    }
    s.parameters = p;
    return s;
}

TrialResult run_trial(const ScenarioSpec &spec, uint64_t seed, const TrialOptions &options) {
    const auto &tol = options.tol;
    const auto &steps = spec.schedule.steps;
    const auto &markers = spec.schedule.markers;
    TrialResult result;
    Trajectory &tr = result.trajectory;
    tr.ledger.rng_seed = seed;
    std::mt19937_64 rng = trial_rng(seed);
    StateVector state = spec.initial_state;
    bool mutated = false;
    size_t m = 0;
    for (size_t k = 0; k < steps.size(); ++k) {
        StateVector pre = state;
        state = evolve_step(state, steps[k]);
        for (; m < markers.size() && markers[m].step_index == k; ++m) {
            const EventMarker &mk = markers[m];
            try {
                StateVector ref = evolve_reference(pre, steps[k]);
                EventRecord ev = detect_event(state, ref, mk, tr.token.realized_records, tol);
                if (!ev.is_event && mk.records.empty()) {
                    continue;
                }
                Realization r = realize_branch(state, ev, tr.token, rng, tol);
                r.entry.marker_index = m;
                if (ev.is_event && mk.records.empty()) {
                    auto later = std::span<const EvolutionStep>(steps).subspan(k + 1);
                    r.entry.verifiable =
                        !recoherence_monitor(ev, spec.layout, later, tol.phase).recohered;
                }
                r.entry.event = std::make_shared<const EventRecord>(std::move(ev));
                tr.token = std::move(r.token);
                tr.ledger.append(std::move(r.entry));
            } catch (const HistoryInconsistent &e) {
                if (e.epoch()) {
                    throw;
                }
                throw HistoryInconsistent(e.what(), tr.token.epoch + 1);
            }
            if (options.inject_record_mutation && !mutated && !mk.records.empty()) {
                // Undo the recording coupling, then write a different pointer value.
                mutated = true;
                if (steps[k].kind() != StepKind::kIdentity) {
                    state = apply_operator(state, steps[k].unitary().adjoint(), steps[k].target());
                }
                size_t rec = mk.records.front();
                size_t d = spec.layout.dim(rec);
                size_t shift = (tr.token.realized_records.at(rec) + 1) % d;
                Matrix x = Matrix::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
                for (size_t i = 0; i < d; ++i) {
                    x(static_cast<Eigen::Index>((i + shift) % d), static_cast<Eigen::Index>(i)) = 1;
                }
                state = apply_operator(state, x, std::vector<size_t>{rec});
                try {
                    condition(state, tr.token.realized_records, tol);
                } catch (const HistoryInconsistent &e) {
                    throw HistoryInconsistent("record '" + spec.layout[rec].label + "' was overwritten: " + e.what(),
                                              tr.token.epoch);
                }
            }
        }
    }
    tr.final_state = std::move(state);
    std::string last = tr.token.realized_branch ? tr.token.realized_branch->label : std::string();
    result.outcome.records = spec.outcome_key(tr.token.realized_records);
    result.outcome.summary = spec.summarize ? spec.summarize(tr.token.realized_records, last) : result.outcome.records;
    return result;
}

}  // namespace qreal

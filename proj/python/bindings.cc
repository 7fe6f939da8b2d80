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

// Python extension: scenario runs and audits with the same reports as the
// command line, one-trial ledgers, Schmidt decomposition and the signaling test.

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <numbers>

#include "cli.h"
#include "qreal/audit.h"
#include "qreal/nonlinear.h"
#include "qreal/scenarios.h"

namespace py = pybind11;

namespace {

using namespace qreal;

cli::RunConfig make_config(const std::string &scenario, uint64_t trials, uint64_t seed, const Parameters &parameters,
                           const std::vector<std::string> &compare, size_t threads) {
    cli::RunConfig c;
    c.scenario = scenario;
    c.trials = trials;
    c.seed = seed;
    c.parameters = parameters;
    c.compare = compare;
    c.threads = threads;
    cli::validate(c);
    return c;
}

py::dict trial(const std::string &scenario, uint64_t seed, const Parameters &parameters) {
    TrialResult r = run_trial(make_scenario(scenario, parameters), seed);
    py::list ledger;
    for (const auto &e : r.trajectory.ledger.entries) {
        py::dict d;
        d["epoch"] = e.epoch;
        d["step"] = e.step_index;
        d["branch"] = e.branch_index;
        d["branch_count"] = e.branch_count;
        d["label"] = e.label;
        d["probability"] = e.probability;
        d["info_bits"] = e.info_bits;
        d["cumulative_bits"] = e.cumulative_bits;
        d["is_event"] = e.is_event;
        d["records"] = e.records_after;
        ledger.append(d);
    }
    py::dict out;
    out["records"] = r.outcome.records;
    out["summary"] = r.outcome.summary;
    out["ledger"] = ledger;
    out["final_state"] = r.trajectory.final_state.amplitudes();
    return out;
}

py::tuple schmidt(const Amplitudes &amplitudes, const std::vector<size_t> &dims, const std::vector<size_t> &side_a) {
    SubsystemLayout layout = SubsystemLayout::from_dims(dims);
    SchmidtDecomposition d = schmidt_decompose(StateVector(layout, amplitudes), BipartiteSplit::of(layout, side_a));
    std::vector<Amplitudes> left, right;
    for (size_t k = 0; k < d.rank(); ++k) {
        left.push_back(d.left_states[k].amplitudes());
        right.push_back(d.right_states[k].amplitudes());
    }
    return py::make_tuple(d.coefficients, left, right);
}

py::dict signaling(const std::vector<double> &alice_angles, double g, double lambda, bool restricted,
                   uint64_t trials, uint64_t seed) {
    SignalingSetup setup;
    setup.alice_angles = alice_angles;
    setup.trials = trials;
    setup.seed = seed;
    SignalingReport r = signaling_test(setup, cross_block_probe(g, lambda),
                                       restricted ? RestrictionMode::kRealizedBlocks : RestrictionMode::kNone);
    py::dict out;
    out["bob_plus"] = r.bob_plus;
    out["exact_bob_plus"] = r.exact_bob_plus;
    out["max_tv"] = r.max_tv;
    out["exact_max_tv"] = r.exact_max_tv;
    out["noise_floor"] = r.noise_floor;
    out["signaling"] = r.signaling;
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "qreal simulation core";
    static py::exception<Error> error(m, "QrealError", PyExc_RuntimeError);
    py::register_exception<ConfigError>(m, "ConfigError", error.ptr());
    py::register_exception<HistoryInconsistent>(m, "HistoryInconsistent", error.ptr());

    m.def("scenario_names", &scenario_names);
    m.def("default_parameters", &default_parameters, py::arg("scenario"));
    m.def(
        "run_json",
        [](const std::string &scenario, uint64_t trials, uint64_t seed, const Parameters &parameters,
           const std::vector<std::string> &compare, size_t threads) {
            return cli::run_report(make_config(scenario, trials, seed, parameters, compare, threads)).dump();
        },
        py::arg("scenario"), py::arg("trials") = 10000, py::arg("seed") = 1, py::arg("parameters") = Parameters{},
        py::arg("compare") = std::vector<std::string>{}, py::arg("threads") = 1,
        py::call_guard<py::gil_scoped_release>());
    m.def(
        "audit_json",
        [](const std::string &scenario, uint64_t seeds, uint64_t seed, const Parameters &parameters) {
            cli::RunConfig c = make_config(scenario, 1, seed, parameters, {}, 1);
            c.audit_seeds = seeds;
            cli::validate(c);
            return cli::audit_report(c).dump();
        },
        py::arg("scenario"), py::arg("seeds") = 10, py::arg("seed") = 1, py::arg("parameters") = Parameters{},
        py::call_guard<py::gil_scoped_release>());
    m.def("trial", &trial, py::arg("scenario"), py::arg("seed") = 1, py::arg("parameters") = Parameters{});
    m.def("schmidt", &schmidt, py::arg("amplitudes"), py::arg("dims"), py::arg("side_a"));
    m.def("signaling", &signaling, py::arg("alice_angles") = std::vector<double>{0.0, std::numbers::pi / 2},
          py::arg("g") = 2.0, py::arg("lam") = 0.5, py::arg("restricted") = false, py::arg("trials") = 10000,
          py::arg("seed") = 1);
}

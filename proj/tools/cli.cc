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

#include "cli.h"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "qreal/audit.h"
#include "qreal/ensemble.h"
#include "qreal/oracle.h"

namespace qreal::cli {

using nlohmann::ordered_json;

namespace {

constexpr double kDivergenceLevel = 1e-3;

std::string scalar_text(const nlohmann::json &v) {
    if (v.is_string()) {
        return v.get<std::string>();
    }
    if (v.is_boolean()) {
        return v.get<bool>() ? "true" : "false";
    }
    if (v.is_number_integer() || v.is_number_unsigned()) {
        return v.dump();
    }
    if (v.is_number_float()) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%.17g", v.get<double>());
        return buf;
    }
    throw ConfigError("parameter values must be strings, numbers or booleans");
}

std::vector<std::string> split_commas(const std::string &text) {
    std::vector<std::string> out;
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        if (!item.empty()) {
            out.push_back(item);
        }
    }
    return out;
}

ordered_json histogram_json(const Histogram &h) {
    ordered_json out = ordered_json::object();
    for (const auto &[k, c] : h) {
        out[k] = c;
    }
    return out;
}

ordered_json distribution_json(const Distribution &d) {
    ordered_json out = ordered_json::object();
    for (const auto &[k, p] : d) {
        out[k] = p;
    }
    return out;
}

ordered_json comparison_json(const Comparison &c) {
    ordered_json out;
    out["total_variation"] = c.total_variation;
    out["chi_square"] = c.chi_square;
    out["dof"] = c.dof;
    out["p_value"] = c.p_value;
    out["bins"] = c.bins;
    out["diverges"] = c.p_value < kDivergenceLevel;
    return out;
}

ordered_json definitions() {
    ordered_json d;
    d["trials"] = "number of independent trials; trial i uses seed + i";
    d["seed"] = "base seed of the 64-bit Mersenne Twister";
    d["outcomes"] = "trial counts per final record configuration (record values in designation order)";
    d["summaries"] = "trial counts per scenario-level outcome";
    d["observables"] = "frequencies over trials: epr anticorrelation, stern_gerlach s_z = +1/2, wigner_chain right; decay mean click count";
    d["mean_info_bits"] = "bits; mean over trials of the summed -log2 p of every realized branch";
    d["events.events"] = "trials in which the marker was an event";
    d["events.realizations"] = "trials in which the marker produced a ledger entry";
    d["events.branches"] = "trial counts per realized branch label";
    d["events.total_bits"] = "bits; information summed over trials at this marker";
    d["events.max_bits"] = "bits; largest single-trial information at this marker";
    d["ledger_entries"] = "ledger entries over all trials";
    d["unverifiable_entries"] = "entries whose branches later recohered";
    d["comparisons.total_variation"] = "dimensionless; half the L1 distance between empirical distributions";
    d["comparisons.chi_square"] = "Pearson statistic after pooling bins with expected count below 5";
    d["comparisons.dof"] = "degrees of freedom of the chi-square test";
    d["comparisons.p_value"] = "upper tail probability of the chi-square statistic";
    d["comparisons.bins"] = "bins after pooling";
    d["comparisons.diverges"] = "p_value below 0.001";
    d["comparisons.oracle"] = "oracle distribution or trial counts; ci trials use seeds seed + trials + i";
    d["comparisons.compared"] = "which histogram was compared: record outcomes, or summaries when the scenario has no records";
    d["audit.passed"] = "invariants that held on every audited trial";
    d["audit.failed"] = "invariants violated at least once";
    d["audit.checked"] = "trials (or trial pairs) the invariant was checked on";
    d["audit.ensemble_violations"] = "invariant violations counted during the ensemble run";
    return d;
}

ordered_json audit_json(const AuditReport &report, uint64_t ensemble_violations) {
    ordered_json out;
    size_t passed = 0;
    ordered_json invariants = ordered_json::array();
    for (const auto &inv : report.invariants) {
        passed += inv.passed;
        ordered_json j;
        j["name"] = inv.name;
        j["passed"] = inv.passed;
        j["checked"] = inv.checked;
        ordered_json violations = ordered_json::array();
        for (const auto &v : inv.violations) {
            violations.push_back({{"seed", v.seed}, {"epoch", v.epoch}, {"detail", v.detail}});
        }
        j["violations"] = violations;
        j["counterexample"] = inv.counterexample;
        invariants.push_back(j);
    }
    out["passed"] = passed;
    out["failed"] = report.invariants.size() - passed;
    out["ensemble_violations"] = ensemble_violations;
    out["invariants"] = invariants;
    return out;
}

// Scenario-level readouts of the summary histogram.
ordered_json observables(const std::string &scenario, const Histogram &summaries, uint64_t trials) {
    ordered_json out = ordered_json::object();
    auto freq = [&](auto pred) {
        uint64_t n = 0;
        for (const auto &[k, c] : summaries) {
            n += pred(k) ? c : 0;
        }
        return static_cast<double>(n) / static_cast<double>(trials);
    };
    if (scenario == "epr") {
        out["anticorrelation"] = freq([](const std::string &k) { return k.size() == 2 && k[0] != k[1]; });
    } else if (scenario == "stern_gerlach") {
        out["sz_plus"] = freq([](const std::string &k) { return k == "sz=+"; });
    } else if (scenario == "wigner_chain") {
        out["right"] = freq([](const std::string &k) { return k == "right"; });
    } else if (scenario == "decay") {
        double mean = 0;
        for (const auto &[k, c] : summaries) {
            mean += std::stod(k.substr(k.find('=') + 1)) * static_cast<double>(c);
        }
        out["mean_count"] = mean / static_cast<double>(trials);
    }
    return out;
}

ordered_json config_json(const RunConfig &config) {
    ordered_json out;
    out["scenario"] = config.scenario;
    ordered_json params = ordered_json::object();
    for (const auto &[k, v] : make_scenario(config.scenario, config.parameters).parameters) {
        params[k] = v;
    }
    out["parameters"] = params;
    out["trials"] = config.trials;
    out["seed"] = config.seed;
    return out;
}

uint64_t fnv1a(const StateVector &state) {
    uint64_t h = 1469598103934665603ULL;
    const auto *bytes = reinterpret_cast<const unsigned char *>(state.amplitudes().data());
    size_t n = state.dim() * sizeof(Complex);
    for (size_t i = 0; i < n; ++i) {
        h = (h ^ bytes[i]) * 1099511628211ULL;
    }
    return h;
}

std::string hex(uint64_t v) {
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

void flatten(const ordered_json &node, const std::string &path, std::vector<std::pair<std::string, std::string>> &rows) {
    if (node.is_object()) {
        for (const auto &[k, v] : node.items()) {
            flatten(v, path.empty() ? k : path + "." + k, rows);
        }
    } else if (node.is_array()) {
        for (size_t i = 0; i < node.size(); ++i) {
            flatten(node[i], path + "." + std::to_string(i), rows);
        }
    } else {
        rows.emplace_back(path, node.is_string() ? node.get<std::string>() : node.dump());
    }
}

std::string csv_field(const std::string &s) {
    if (s.find_first_of(",\"\n") == std::string::npos) {
        return s;
    }
    std::string out = "\"";
    for (char c : s) {
        out += c;
        if (c == '"') {
            out += '"';
        }
    }
    return out + "\"";
}

}  // namespace

void load_config(const std::string &path, RunConfig &config) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config file " + path);
    }
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception &e) {
        throw ConfigError("malformed config file " + path + ": " + e.what());
    }
    if (!j.is_object()) {
        throw ConfigError("config file must hold a JSON object");
    }
    static const std::vector<std::string> known{"scenario", "parameters", "trials", "seed",    "compare",
                                                "format",   "output",     "audit",  "threads", "audit_seeds"};
    try {
        for (const auto &[k, v] : j.items()) {
            if (std::find(known.begin(), known.end(), k) == known.end()) {
                throw ConfigError("unknown config field '" + k + "'");
            }
        }
        if (j.contains("scenario")) {
            config.scenario = j["scenario"].get<std::string>();
        }
        if (j.contains("parameters")) {
            for (const auto &[k, v] : j["parameters"].items()) {
                config.parameters[k] = scalar_text(v);
            }
        }
        if (j.contains("trials")) {
            if (!j["trials"].is_number_integer() || j["trials"].get<int64_t>() < 0) {
                throw ConfigError("trials must be a non-negative integer");
            }
            config.trials = j["trials"].get<uint64_t>();
        }
        if (j.contains("seed")) {
            config.seed = j["seed"].get<uint64_t>();
        }
        if (j.contains("compare")) {
            config.compare = j["compare"].get<std::vector<std::string>>();
        }
        if (j.contains("format")) {
            config.format = j["format"].get<std::string>();
        }
        if (j.contains("output")) {
            config.output = j["output"].get<std::string>();
        }
        if (j.contains("audit")) {
            config.audit = j["audit"].get<bool>();
        }
        if (j.contains("audit_seeds")) {
            config.audit_seeds = j["audit_seeds"].get<uint64_t>();
        }
        if (j.contains("threads")) {
            config.threads = j["threads"].get<size_t>();
        }
    } catch (const nlohmann::json::exception &e) {
        throw ConfigError(std::string("bad config field type: ") + e.what());
    }
}

void validate(const RunConfig &config) {
    if (config.scenario.empty()) {
        throw ConfigError("no scenario given");
    }
    const auto names = scenario_names();
    if (std::find(names.begin(), names.end(), config.scenario) == names.end()) {
        throw ConfigError("unknown scenario '" + config.scenario + "'");
    }
    if (config.trials == 0) {
        throw ConfigError("trials must be at least 1");
    }
    if (config.format != "json" && config.format != "csv") {
        throw ConfigError("format must be json or csv");
    }
    for (const auto &c : config.compare) {
        if (c != "ci" && c != "unitary") {
            throw ConfigError("unknown comparison '" + c + "' (expected ci or unitary)");
        }
    }
    if (config.threads == 0) {
        throw ConfigError("threads must be at least 1");
    }
    if (config.audit_seeds < 2) {
        throw ConfigError("an audit needs at least 2 seeds");
    }
}

ordered_json run_report(const RunConfig &config) {
    validate(config);
    ScenarioSpec spec = make_scenario(config.scenario, config.parameters);
    EnsembleOptions options;
    options.threads = config.threads;
    EnsembleResult result = run_ensemble(spec, config.trials, config.seed, options);

    ordered_json report;
    report["schema"] = "qreal.run/1";
    report.update(config_json(config));
    report["outcomes"] = histogram_json(result.outcomes);
    report["summaries"] = histogram_json(result.summaries);
    report["observables"] = observables(config.scenario, result.summaries, result.trials);
    report["mean_info_bits"] = result.mean_info_bits;
    ordered_json events = ordered_json::array();
    for (const auto &m : result.markers) {
        ordered_json e;
        e["label"] = m.label;
        e["step"] = m.step_index;
        e["events"] = m.events;
        e["realizations"] = m.realizations;
        e["branches"] = histogram_json(m.branches);
        e["total_bits"] = m.total_bits();
        e["max_bits"] = m.max_bits();
        events.push_back(e);
    }
    report["events"] = events;
    report["ledger_entries"] = result.ledger_entries;
    report["unverifiable_entries"] = result.unverifiable_entries;

    ordered_json comparisons = ordered_json::object();
    for (const auto &name : config.compare) {
        ordered_json c;
        if (name == "ci") {
            // Disjoint seeds, so the two samples are independent.
            EnsembleResult ci = run_ci_ensemble(spec, config.trials, config.seed + config.trials, options);
            const bool by_records = !spec.record_order().empty();
            c = comparison_json(by_records ? compare_histograms(result.outcomes, ci.outcomes)
                                           : compare_histograms(result.summaries, ci.summaries));
            c["compared"] = by_records ? "outcomes" : "summaries";
            c["oracle"] = histogram_json(ci.outcomes);
            c["oracle_summaries"] = histogram_json(ci.summaries);
        } else {
            UnitaryDistribution u = run_full_unitary(spec);
            c = comparison_json(compare_distributions(result.outcomes, u.outcomes));
            c["compared"] = "outcomes";
            c["oracle"] = distribution_json(u.outcomes);
            c["oracle_summaries"] = distribution_json(u.summaries);
        }
        comparisons[name] = c;
    }
    report["comparisons"] = comparisons;
    if (config.audit) {
        report["audit"] = audit_json(audit_scenario(spec, config.audit_seeds, config.seed), result.audit_violations);
    } else {
        report["audit"] = {{"passed", 0}, {"failed", 0}, {"ensemble_violations", result.audit_violations}};
    }
    report["definitions"] = definitions();
    return report;
}

ordered_json audit_report(const RunConfig &config) {
    RunConfig checked = config;
    checked.trials = std::max<uint64_t>(checked.trials, 1);
    validate(checked);
    ScenarioSpec spec = make_scenario(config.scenario, config.parameters);
    ordered_json report;
    report["schema"] = "qreal.audit/1";
    report["scenario"] = config.scenario;
    report["seed"] = config.seed;
    report["seeds"] = config.audit_seeds;
    EnsembleResult ensemble = run_ensemble(spec, checked.trials, config.seed);
    report["audit"] = audit_json(audit_scenario(spec, config.audit_seeds, config.seed), ensemble.audit_violations);

    TrialResult a = run_trial(spec, config.seed);
    TrialResult b = run_trial(spec, config.seed + 1);
    ordered_json bytes;
    bytes["fnv1a_first"] = hex(fnv1a(a.trajectory.final_state));
    bytes["fnv1a_second"] = hex(fnv1a(b.trajectory.final_state));
    bytes["identical"] = a.trajectory.final_state.identical(b.trajectory.final_state);
    report["final_state_bytes"] = bytes;

    if (config.inject_record_mutation) {
        FaultReport fault = probe_record_mutation(spec, config.seed);
        ordered_json f;
        f["raised"] = fault.raised;
        f["epoch"] = fault.epoch ? ordered_json(*fault.epoch) : ordered_json(nullptr);
        f["message"] = fault.message;
        report["history_inconsistent"] = f;
    }
    ordered_json d;
    d["audit.passed"] = "invariants that held on every audited trial";
    d["audit.failed"] = "invariants violated at least once";
    d["audit.checked"] = "trials (or trial pairs) the invariant was checked on";
    d["audit.ensemble_violations"] = "invariant violations counted during the ensemble run";
    d["final_state_bytes"] = "FNV-1a of the raw amplitude bytes of two trials with consecutive seeds";
    d["history_inconsistent.epoch"] = "epoch at which the mutated record contradicted the amplitudes";
    report["definitions"] = d;
    return report;
}

std::string to_csv(const ordered_json &report) {
    std::vector<std::pair<std::string, std::string>> rows;
    flatten(report, "", rows);
    std::string out = "key,value\n";
    for (const auto &[k, v] : rows) {
        out += csv_field(k) + "," + csv_field(v) + "\n";
    }
    return out;
}

int main(int argc, const char *const *argv, std::ostream &out, std::ostream &err) {
    CLI::App app{"qreal: single-world branch realization on a state-vector simulator"};
    app.require_subcommand(1, 1);
    RunConfig config;
    std::string config_path;
    std::vector<std::string> sets;
    std::string compare;
    auto add_common = [&](CLI::App *sub) {
        sub->add_option("--config", config_path, "JSON config file");
        sub->add_option("--scenario", config.scenario, "scenario name");
        sub->add_option("--set", sets, "parameter override key=value (repeatable)");
        sub->add_option("--trials", config.trials, "number of trials");
        sub->add_option("--seed", config.seed, "base seed");
        sub->add_option("--format", config.format, "json or csv");
        sub->add_option("--output", config.output, "output file (default stdout)");
        sub->add_option("--threads", config.threads, "worker threads");
        sub->add_option("--audit-seeds", config.audit_seeds, "seeds used by the invariant audit");
    };
    CLI::App *run = app.add_subcommand("run", "run an ensemble");
    add_common(run);
    run->add_option("--compare", compare, "comma separated oracles: ci,unitary");
    run->add_flag("--audit", config.audit, "also run the invariant audit");
    run->add_flag("--inject-record-mutation", config.inject_record_mutation, "test hook: corrupt the first record");
    CLI::App *audit = app.add_subcommand("audit", "check ledger invariants");
    add_common(audit);
    audit->add_flag("--inject-record-mutation", config.inject_record_mutation, "test hook: corrupt the first record");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        int code = app.exit(e, out, err);
        return code == 0 ? kOk : kConfigError;
    }

    try {
        if (!config_path.empty()) {
            // Flags given on the command line win over the file.
            RunConfig from_file;
            load_config(config_path, from_file);
            CLI::App *sub = run->parsed() ? run : audit;
            auto given = [&](const char *flag) { return sub->count(flag) > 0; };
            if (!given("--scenario")) config.scenario = from_file.scenario;
            if (!given("--trials")) config.trials = from_file.trials;
            if (!given("--seed")) config.seed = from_file.seed;
            if (!given("--format")) config.format = from_file.format;
            if (!given("--output")) config.output = from_file.output;
            if (!given("--threads")) config.threads = from_file.threads;
            if (!given("--audit-seeds")) config.audit_seeds = from_file.audit_seeds;
            if (sub == run && !given("--compare")) config.compare = from_file.compare;
            if (sub == run && !given("--audit")) config.audit = from_file.audit;
            config.parameters = from_file.parameters;
        }
        for (const auto &s : sets) {
            auto eq = s.find('=');
            if (eq == std::string::npos || eq == 0) {
                throw ConfigError("--set expects key=value, got '" + s + "'");
            }
            config.parameters[s.substr(0, eq)] = s.substr(eq + 1);
        }
        if (!compare.empty()) {
            config.compare = split_commas(compare);
        }

        ordered_json report;
        int code = kOk;
        if (run->parsed()) {
            validate(config);
            if (config.inject_record_mutation) {
                TrialOptions options;
                options.inject_record_mutation = true;
                run_trial(make_scenario(config.scenario, config.parameters), config.seed, options);
            }
            report = run_report(config);
            if (report["audit"]["failed"].get<uint64_t>() > 0 ||
                report["audit"]["ensemble_violations"].get<uint64_t>() > 0) {
                code = kInvariantViolation;
            }
        } else {
            report = audit_report(config);
            if (report["audit"]["failed"].get<uint64_t>() > 0 ||
                report["audit"]["ensemble_violations"].get<uint64_t>() > 0 ||
                !report["final_state_bytes"]["identical"].get<bool>() ||
                (report.contains("history_inconsistent") && report["history_inconsistent"]["raised"].get<bool>())) {
                code = kInvariantViolation;
            }
        }
        std::string text = config.format == "csv" ? to_csv(report) : report.dump(2) + "\n";
        if (config.output.empty()) {
            out << text;
        } else {
            std::ofstream file(config.output, std::ios::binary);
            if (!file) {
                throw ConfigError("cannot write " + config.output);
            }
            file << text;
        }
        if (code == kInvariantViolation) {
            err << "invariant violation detected\n";
        }
        return code;
    } catch (const HistoryInconsistent &e) {
        err << "HistoryInconsistent: " << e.what() << "\n";
        return kInvariantViolation;
    } catch (const Error &e) {
        err << "error: " << e.what() << "\n";
        return kConfigError;
    }
}

}  // namespace qreal::cli

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

#include <cmath>
#include <limits>
#include <optional>
#include <random>

#include <boost/math/distributions/chi_squared.hpp>

#include "trial_pool.h"

namespace qreal {

namespace {

// One marker as seen by the collapse semantics.
struct CollapseNode {
    bool realize = false;
    bool is_event = false;
    std::vector<double> probabilities;
    std::vector<std::vector<size_t>> record_values;
    std::vector<std::string> labels;
    std::vector<StateVector> left;   // side A factor of each retained branch
    std::vector<size_t> side_a;
    std::optional<StateVector> pre;  // state before the marker's step
    std::optional<StateVector> post; // state after it, before collapse
    size_t pending = 0;              // children not yet built
};

// Evolves `state` from step `first` through the marker's step and inspects it.
CollapseNode inspect(const ScenarioSpec &spec, size_t marker, StateVector state, std::optional<StateVector> pre,
                     size_t first, const Tolerances &tol) {
    const auto &steps = spec.schedule.steps;
    const EventMarker &mk = spec.schedule.markers[marker];
    for (size_t k = first; k <= mk.step_index; ++k) {
        pre = state;
        state = evolve_step(state, steps[k]);
    }
    StateVector ref = evolve_reference(*pre, steps[mk.step_index]);
    EventRecord ev = detect_event(state, ref, mk, RealizedRecords{}, tol);
    CollapseNode n;
    n.is_event = ev.is_event;
    n.realize = ev.is_event || !mk.records.empty();
    if (n.realize) {
        n.probabilities = ev.branches.retained_probabilities();
        for (size_t idx : ev.branches.retained_indices()) {
            n.record_values.push_back(ev.branches.members[idx].record_values);
            n.labels.push_back(ev.branches.members[idx].label);
            n.left.push_back(ev.branches.members[idx].left);
        }
        n.side_a = ev.branches.side_a;
    }
    n.pre = std::move(pre);
    n.post = std::move(state);
    n.pending = n.realize ? n.probabilities.size() : 1;
    return n;
}

// State handed to the next marker after choosing `pick` at this one.
StateVector collapse(const CollapseNode &n, size_t pick) {
    if (!n.realize || n.probabilities.size() < 2) {
        return *n.post;
    }
    const Amplitudes &l = n.left[pick].amplitudes();
    Matrix projector = l * l.adjoint();
    return apply_operator(*n.post, projector, n.side_a).normalized();
}

size_t next_step(const ScenarioSpec &spec, size_t marker) {
    return spec.schedule.markers[marker].step_index + 1;
}

class CollapseEngine {
   public:
    CollapseEngine(const ScenarioSpec &spec, const Tolerances &tol) : spec_(spec), tol_(tol) {
    }

    internal::TrialSlot operator()(uint64_t seed, internal::WorkerTotals &totals) {
        const auto &markers = spec_.schedule.markers;
        std::mt19937_64 rng = trial_rng(seed);
        RealizedRecords records;
        std::vector<uint32_t> path;
        double info = 0;
        std::string last;
        for (size_t m = 0; m < markers.size(); ++m) {
            const CollapseNode &node = lookup(path);
            MarkerTally &tally = totals.markers[m];
            tally.events += node.is_event;
            if (!node.realize) {
                path.push_back(0);
                continue;
            }
            size_t pick = node.probabilities.size() > 1 ? sample_index(node.probabilities, rng) : 0;
            double bits = info_bits_of(node.probabilities[pick]);
            for (size_t i = 0; i < markers[m].records.size(); ++i) {
                records[markers[m].records[i]] = node.record_values[pick][i];
            }
            info += bits;
            last = node.labels[pick];
            ++tally.realizations;
            ++tally.branches[last];
            ++tally.bits[bits];
            ++totals.entries;
            path.push_back(static_cast<uint32_t>(pick));
        }
        internal::TrialSlot slot;
        slot.outcome = spec_.outcome_key(records);
        slot.summary = spec_.summarize ? spec_.summarize(records, last) : slot.outcome;
        slot.info_bits = info;
        return slot;
    }

   private:
    const CollapseNode &lookup(const std::vector<uint32_t> &path) {
        auto it = cache_.find(path);
        if (it != cache_.end()) {
            return it->second;
        }
        size_t marker = path.size();
        CollapseNode node;
        if (marker == 0) {
            node = inspect(spec_, 0, spec_.initial_state, std::nullopt, 0, tol_);
        } else {
            std::vector<uint32_t> parent_path(path.begin(), path.end() - 1);
            CollapseNode &parent = cache_.at(parent_path);
            StateVector start = collapse(parent, path.back());
            node = inspect(spec_, marker, std::move(start), parent.pre, next_step(spec_, marker - 1), tol_);
            if (--parent.pending == 0) {
                parent.pre.reset();
                parent.post.reset();
            }
        }
        if (marker + 1 == spec_.schedule.markers.size()) {
            node.pre.reset();
            node.post.reset();
        }
        return cache_.emplace(path, std::move(node)).first->second;
    }

    const ScenarioSpec &spec_;
    Tolerances tol_;
    std::map<std::vector<uint32_t>, CollapseNode> cache_;
};

double chi_square_sf(double statistic, size_t dof) {
    if (dof == 0) {
        return 1.0;
    }
    if (!std::isfinite(statistic)) {
        return 0.0;
    }
    boost::math::chi_squared dist(static_cast<double>(dof));
    return boost::math::cdf(boost::math::complement(dist, statistic));
}

// Pools every bin whose expected weight is below `floor` into one bin; if the
// pooled bin is itself below the floor it joins the smallest remaining bin.
std::vector<std::vector<std::string>> pool_bins(const std::map<std::string, double> &expected, double floor) {
    std::vector<std::vector<std::string>> bins;
    std::vector<std::string> pooled;
    double pooled_weight = 0;
    for (const auto &[k, e] : expected) {
        if (e < floor) {
            pooled.push_back(k);
            pooled_weight += e;
        } else {
            bins.push_back({k});
        }
    }
    if (!pooled.empty()) {
        if (pooled_weight >= floor || bins.empty()) {
            bins.push_back(pooled);
        } else {
            size_t smallest = 0;
            for (size_t i = 1; i < bins.size(); ++i) {
                if (expected.at(bins[i][0]) < expected.at(bins[smallest][0])) {
                    smallest = i;
                }
            }
            bins[smallest].insert(bins[smallest].end(), pooled.begin(), pooled.end());
        }
    }
    return bins;
}

template <class Map>
double sum_over(const Map &m, const std::vector<std::string> &keys) {
    double total = 0;
    for (const auto &k : keys) {
        auto it = m.find(k);
        if (it != m.end()) {
            total += static_cast<double>(it->second);
        }
    }
    return total;
}

}  // namespace

CollapseTrial run_ci_collapse(const ScenarioSpec &spec, uint64_t seed, const Tolerances &tol) {
    spec.validate(tol);
    const auto &markers = spec.schedule.markers;
    std::mt19937_64 rng = trial_rng(seed);
    CollapseTrial out;
    StateVector state = spec.initial_state;
    std::optional<StateVector> pre;
    size_t first = 0;
    std::string last;
    for (size_t m = 0; m < markers.size(); ++m) {
        CollapseNode node = inspect(spec, m, std::move(state), pre, first, tol);
        size_t pick = 0;
        if (node.realize) {
            pick = node.probabilities.size() > 1 ? sample_index(node.probabilities, rng) : 0;
            for (size_t i = 0; i < markers[m].records.size(); ++i) {
                out.records[markers[m].records[i]] = node.record_values[pick][i];
            }
            out.probabilities.push_back(node.probabilities[pick]);
            last = node.labels[pick];
        }
        state = collapse(node, pick);
        pre = node.pre;
        first = next_step(spec, m);
    }
    const auto &steps = spec.schedule.steps;
    for (size_t k = first; k < steps.size(); ++k) {
        state = evolve_step(state, steps[k]);
    }
    out.final_state = std::move(state);
    out.outcome.records = spec.outcome_key(out.records);
    out.outcome.summary = spec.summarize ? spec.summarize(out.records, last) : out.outcome.records;
    return out;
}

EnsembleResult run_ci_ensemble(const ScenarioSpec &spec, uint64_t n_trials, uint64_t seed_base,
                               const EnsembleOptions &options, const Tolerances &tol) {
    spec.validate(tol);
    return internal::run_pool(spec, n_trials, seed_base, options.threads,
                              [&spec, &tol] { return CollapseEngine(spec, tol); });
}

UnitaryDistribution run_full_unitary(const ScenarioSpec &spec) {
    spec.validate();
    UnitaryDistribution out;
    out.final_state = evolve(spec.initial_state, spec.schedule.steps);
    auto order = spec.record_order();
    const auto &layout = spec.layout;
    std::map<std::vector<size_t>, double> weights;
    const auto &amps = out.final_state.amplitudes();
    std::vector<size_t> key(order.size());
    for (Eigen::Index i = 0; i < amps.size(); ++i) {
        double w = std::norm(amps(i));
        if (w == 0) {
            continue;
        }
        for (size_t j = 0; j < order.size(); ++j) {
            key[j] = (static_cast<size_t>(i) / layout.stride(order[j])) % layout.dim(order[j]);
        }
        weights[key] += w;
    }
    for (const auto &[values, w] : weights) {
        if (w < 1e-15) {
            continue;
        }
        RealizedRecords records;
        for (size_t j = 0; j < order.size(); ++j) {
            records[order[j]] = values[j];
        }
        out.outcomes[spec.outcome_key(records)] += w;
        out.summaries[spec.summarize ? spec.summarize(records, "") : spec.outcome_key(records)] += w;
    }
    return out;
}

double total_variation(const Distribution &p, const Distribution &q) {
    double total = 0;
    for (const auto &[k, v] : p) {
        auto it = q.find(k);
        total += std::abs(v - (it == q.end() ? 0.0 : it->second));
    }
    for (const auto &[k, v] : q) {
        if (!p.contains(k)) {
            total += std::abs(v);
        }
    }
    return total / 2;
}

Comparison compare_distributions(const Histogram &observed, const Distribution &expected) {
    Comparison c;
    c.total_variation = total_variation(normalize(observed), expected);
    uint64_t n = 0;
    for (const auto &[k, v] : observed) {
        n += v;
    }
    if (n == 0) {
        throw InvalidParameter("no observations to compare");
    }
    double expected_total = 0;
    for (const auto &[k, p] : expected) {
        expected_total += p;
    }
    std::map<std::string, double> counts;
    for (const auto &[k, p] : expected) {
        if (p > 0) {
            counts[k] = p / expected_total * static_cast<double>(n);
        }
    }
    for (const auto &[k, v] : observed) {
        if (v > 0 && !counts.contains(k)) {
            c.chi_square = std::numeric_limits<double>::infinity();
            c.p_value = 0;
            c.bins = counts.size() + 1;
            c.dof = c.bins - 1;
            return c;
        }
    }
    auto bins = pool_bins(counts, 5.0);
    for (const auto &bin : bins) {
        double e = sum_over(counts, bin);
        double o = sum_over(observed, bin);
        c.chi_square += (o - e) * (o - e) / e;
    }
    c.bins = bins.size();
    c.dof = bins.empty() ? 0 : bins.size() - 1;
    c.p_value = chi_square_sf(c.chi_square, c.dof);
    return c;
}

Comparison compare_histograms(const Histogram &a, const Histogram &b) {
    Comparison c;
    c.total_variation = total_variation(normalize(a), normalize(b));
    double na = 0;
    double nb = 0;
    for (const auto &[k, v] : a) {
        na += static_cast<double>(v);
    }
    for (const auto &[k, v] : b) {
        nb += static_cast<double>(v);
    }
    if (na == 0 || nb == 0) {
        throw InvalidParameter("no observations to compare");
    }
    // Expected count of the smaller sample under the pooled proportions.
    std::map<std::string, double> expected;
    for (const auto *h : {&a, &b}) {
        for (const auto &[k, v] : *h) {
            expected[k] += static_cast<double>(v) / (na + nb) * std::min(na, nb);
        }
    }
    auto bins = pool_bins(expected, 5.0);
    for (const auto &bin : bins) {
        double oa = sum_over(a, bin);
        double ob = sum_over(b, bin);
        double total = oa + ob;
        if (total == 0) {
            continue;
        }
        double ea = total * na / (na + nb);
        double eb = total * nb / (na + nb);
        c.chi_square += (oa - ea) * (oa - ea) / ea + (ob - eb) * (ob - eb) / eb;
    }
    c.bins = bins.size();
    c.dof = bins.empty() ? 0 : bins.size() - 1;
    c.p_value = chi_square_sf(c.chi_square, c.dof);
    return c;
}

}  // namespace qreal

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

#include "qreal/ensemble.h"

#include <random>

#include "trial_pool.h"

namespace qreal {

Distribution normalize(const Histogram &histogram) {
    uint64_t total = 0;
    for (const auto &[k, c] : histogram) {
        total += c;
    }
    Distribution out;
    for (const auto &[k, c] : histogram) {
        out[k] = total ? static_cast<double>(c) / static_cast<double>(total) : 0.0;
    }
    return out;
}

double MarkerTally::total_bits() const {
    double total = 0;
    for (const auto &[b, c] : bits) {
        total += b * static_cast<double>(c);
    }
    return total;
}

double MarkerTally::max_bits() const {
    double best = 0;
    for (const auto &[b, c] : bits) {
        if (c > 0) {
            best = std::max(best, b);
        }
    }
    return best;
}

void merge_tallies(std::vector<MarkerTally> &into, const std::vector<MarkerTally> &from) {
    if (into.size() != from.size()) {
        throw InvalidParameter("cannot merge tallies of different schedules");
    }
    for (size_t m = 0; m < into.size(); ++m) {
        into[m].events += from[m].events;
        into[m].realizations += from[m].realizations;
        for (const auto &[k, c] : from[m].branches) {
            into[m].branches[k] += c;
        }
        for (const auto &[k, c] : from[m].bits) {
            into[m].bits[k] += c;
        }
    }
}

PreparedScenario::PreparedScenario(ScenarioSpec spec, const Tolerances &tol) : spec_(std::move(spec)), tol_(tol) {
    spec_.validate(tol_);
    const auto &steps = spec_.schedule.steps;
    StateVector state = spec_.initial_state;
    size_t m = 0;
    for (size_t k = 0; k < steps.size(); ++k) {
        StateVector pre = state;
        state = evolve_step(state, steps[k]);
        for (; m < spec_.schedule.markers.size() && spec_.schedule.markers[m].step_index == k; ++m) {
            reference_.push_back(evolve_reference(pre, steps[k]));
        }
        post_.push_back(state);
    }
}

NodeSummary PreparedScenario::node(size_t marker, const RealizedRecords &records) const {
    const EventMarker &mk = spec_.schedule.markers.at(marker);
    EventRecord ev = detect_event(post_[mk.step_index], reference_[marker], mk, records, tol_);
    NodeSummary n;
    n.is_event = ev.is_event;
    n.realize = ev.is_event || !mk.records.empty();
    if (!n.realize) {
        return n;
    }
    n.probabilities = ev.branches.retained_probabilities();
    for (size_t idx : ev.branches.retained_indices()) {
        n.record_values.push_back(ev.branches.members[idx].record_values);
        n.labels.push_back(ev.branches.members[idx].label);
    }
    if (ev.is_event && mk.records.empty()) {
        auto later = std::span<const EvolutionStep>(spec_.schedule.steps).subspan(mk.step_index + 1);
        n.verifiable = !recoherence_monitor(ev, spec_.layout, later, tol_.phase).recohered;
    }
    return n;
}

namespace {

class RsiEngine {
   public:
    explicit RsiEngine(const PreparedScenario &prepared) : prepared_(prepared) {
    }

    internal::TrialSlot operator()(uint64_t seed, internal::WorkerTotals &totals) {
        const ScenarioSpec &spec = prepared_.spec();
        const auto &markers = spec.schedule.markers;
        std::mt19937_64 rng = trial_rng(seed);
        RealizedRecords records;
        size_t epoch = 0;
        double info = 0;
        std::string last;
        for (size_t m = 0; m < markers.size(); ++m) {
            const NodeSummary &node = lookup(m, records, epoch);
            MarkerTally &tally = totals.markers[m];
            tally.events += node.is_event;
            if (!node.realize) {
                continue;
            }
            size_t pick = node.probabilities.size() > 1 ? sample_index(node.probabilities, rng) : 0;
            double p = node.probabilities[pick];
            double bits = info_bits_of(p);
            if (!(p > 0 && p <= 1) || !(bits >= 0)) {
                ++totals.violations;
            }
            const auto &values = node.record_values[pick];
            for (size_t i = 0; i < markers[m].records.size(); ++i) {
                size_t r = markers[m].records[i];
                auto [it, inserted] = records.emplace(r, values[i]);
                if (!inserted && it->second != values[i]) {
                    ++totals.violations;   // a realized record may never change
                }
            }
            ++epoch;
            info += bits;
            last = node.labels[pick];
            ++tally.realizations;
            ++tally.branches[last];
            ++tally.bits[bits];
            ++totals.entries;
            totals.unverifiable += !node.verifiable;
        }
        internal::TrialSlot slot;
        slot.outcome = spec.outcome_key(records);
        slot.summary = spec.summarize ? spec.summarize(records, last) : slot.outcome;
        slot.info_bits = info;
        return slot;
    }

   private:
    const NodeSummary &lookup(size_t marker, const RealizedRecords &records, size_t epoch) {
        auto key = std::make_pair(marker, records);
        auto it = cache_.find(key);
        if (it != cache_.end()) {
            return it->second;
        }
        try {
            return cache_.emplace(std::move(key), prepared_.node(marker, records)).first->second;
        } catch (const HistoryInconsistent &e) {
            if (e.epoch()) {
                throw;
            }
            throw HistoryInconsistent(e.what(), epoch + 1);
        }
    }

    const PreparedScenario &prepared_;
    std::map<std::pair<size_t, RealizedRecords>, NodeSummary> cache_;
};

}  // namespace

EnsembleResult run_ensemble(const PreparedScenario &prepared, uint64_t n_trials, uint64_t seed_base,
                            const EnsembleOptions &options) {
    return internal::run_pool(prepared.spec(), n_trials, seed_base, options.threads,
                              [&prepared] { return RsiEngine(prepared); });
}

EnsembleResult run_ensemble(const ScenarioSpec &spec, uint64_t n_trials, uint64_t seed_base,
                            const EnsembleOptions &options) {
    if (n_trials == 0) {
        throw InvalidParameter("an ensemble needs at least one trial");
    }
    PreparedScenario prepared(spec);
    return run_ensemble(prepared, n_trials, seed_base, options);
}

}  // namespace qreal

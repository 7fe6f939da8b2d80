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

// Worker pool shared by the ensemble runners. Each worker owns its engine
// (and so its caches); per-trial results land in slots indexed by trial so the
// aggregate does not depend on scheduling.

#ifndef QREAL_TRIAL_POOL_H
#define QREAL_TRIAL_POOL_H

#include <algorithm>
#include <exception>
#include <string>
#include <thread>
#include <vector>

#include "qreal/ensemble.h"

namespace qreal::internal {

struct WorkerTotals {
    std::vector<MarkerTally> markers;
    uint64_t entries = 0;
    uint64_t unverifiable = 0;
    uint64_t violations = 0;
};

struct TrialSlot {
    std::string outcome;
    std::string summary;
    double info_bits = 0;
};

inline std::vector<MarkerTally> empty_tallies(const ScenarioSpec &spec) {
    std::vector<MarkerTally> out;
    for (const auto &m : spec.schedule.markers) {
        MarkerTally t;
        t.label = m.label;
        t.step_index = m.step_index;
        out.push_back(std::move(t));
    }
    return out;
}

/// make_engine() builds one engine per worker; engine(seed, totals) runs a
/// trial and returns its slot.
template <class MakeEngine>
EnsembleResult run_pool(const ScenarioSpec &spec, uint64_t n_trials, uint64_t seed_base, size_t threads,
                        MakeEngine make_engine) {
    if (n_trials == 0) {
        throw InvalidParameter("an ensemble needs at least one trial");
    }
    threads = std::max<size_t>(1, std::min<size_t>(threads, n_trials));
    std::vector<TrialSlot> slots(n_trials);
    std::vector<WorkerTotals> totals(threads);
    std::vector<std::exception_ptr> errors(threads);
    auto work = [&](size_t w) {
        try {
            totals[w].markers = empty_tallies(spec);
            auto engine = make_engine();
            for (uint64_t i = w; i < n_trials; i += threads) {
                slots[i] = engine(seed_base + i, totals[w]);
            }
        } catch (...) {
            errors[w] = std::current_exception();
        }
    };
    if (threads == 1) {
        work(0);
    } else {
        std::vector<std::thread> pool;
        for (size_t w = 0; w < threads; ++w) {
            pool.emplace_back(work, w);
        }
        for (auto &t : pool) {
            t.join();
        }
    }
    for (auto &e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }
    EnsembleResult r;
    r.scenario = spec.name;
    r.trials = n_trials;
    r.seed_base = seed_base;
    r.markers = empty_tallies(spec);
    for (const auto &t : totals) {
        merge_tallies(r.markers, t.markers);
        r.ledger_entries += t.entries;
        r.unverifiable_entries += t.unverifiable;
        r.audit_violations += t.violations;
    }
    double info = 0;
    for (const auto &s : slots) {
        ++r.outcomes[s.outcome];
        ++r.summaries[s.summary];
        info += s.info_bits;
    }
    r.mean_info_bits = info / static_cast<double>(n_trials);
    return r;
}

}  // namespace qreal::internal

#endif

/*
Copyright 2026 The hfsts Authors

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
*/

#include "hfsts/schedule.hpp"

#include <algorithm>
#include <numeric>

namespace hfsts {

Decoder::Decoder(const ProblemInstance& inst)
    : inst_(&inst), ready_(static_cast<std::size_t>(inst.num_jobs())),
      keys_(static_cast<std::size_t>(inst.num_jobs())),
      pos_of_job_(static_cast<std::size_t>(inst.num_jobs())) {
    int widest = 0;
    for (int m : inst.processors_per_stage()) widest = std::max(widest, m);
    avail_.resize(static_cast<std::size_t>(widest));
    procs_.resize(static_cast<std::size_t>(widest));
}

Time Decoder::makespan(std::span<const int> order) { return run<false>(order, nullptr); }

Schedule Decoder::schedule(std::span<const int> order) {
    Schedule s;
    s.num_jobs = inst_->num_jobs();
    s.num_stages = inst_->num_stages();
    const auto cells = static_cast<std::size_t>(s.num_jobs) * static_cast<std::size_t>(s.num_stages);
    s.start.resize(cells);
    s.completion.resize(cells);
    s.assignment.resize(cells);
    s.makespan = run<true>(order, &s);
    return s;
}

template <bool Record>
Time Decoder::run(std::span<const int> order, Schedule* out) {
    const ProblemInstance& inst = *inst_;
    const int n = inst.num_jobs();
    const auto un = static_cast<std::size_t>(n);

    for (std::size_t pos = 0; pos < un; ++pos) {
        pos_of_job_[static_cast<std::size_t>(order[pos])] = static_cast<int>(pos);
        ready_[pos] = 0;
    }

    Time cmax = 0;
    for (int stage = 0; stage < inst.num_stages(); ++stage) {
        // Unique key per job: ready time first, permutation position second.
        for (std::size_t pos = 0; pos < un; ++pos) {
            const int job = order[pos];
            keys_[pos] = ready_[static_cast<std::size_t>(job)] * n + static_cast<std::int64_t>(pos);
        }
        if (stage > 0) std::sort(keys_.begin(), keys_.begin() + n);

        const int m = inst.processors(stage);
        const auto um = static_cast<std::size_t>(m);
        std::fill_n(avail_.begin(), um, Time{0});

        for (std::size_t k = 0; k < un; ++k) {
            const int job = order[static_cast<std::size_t>(keys_[k] % n)];
            const int width = inst.width(job, stage);
            const Time ready = ready_[static_cast<std::size_t>(job)];

            std::iota(procs_.begin(), procs_.begin() + m, 0);
            std::partial_sort(procs_.begin(), procs_.begin() + width, procs_.begin() + m,
                              [this](int a, int b) {
                                  const auto ua = static_cast<std::size_t>(a);
                                  const auto ub = static_cast<std::size_t>(b);
                                  return avail_[ua] != avail_[ub] ? avail_[ua] < avail_[ub] : a < b;
                              });

            const Time start =
                std::max(ready, avail_[static_cast<std::size_t>(procs_[static_cast<std::size_t>(width - 1)])]);
            const Time done = start + inst.duration(job, stage);
            for (int w = 0; w < width; ++w) avail_[static_cast<std::size_t>(procs_[static_cast<std::size_t>(w)])] = done;

            if constexpr (Record) {
                const auto c = out->cell(job, stage);
                out->start[c] = start;
                out->completion[c] = done;
                out->assignment[c].assign(procs_.begin(), procs_.begin() + width);
                std::sort(out->assignment[c].begin(), out->assignment[c].end());
            }
            ready_[static_cast<std::size_t>(job)] = done;
            cmax = std::max(cmax, done);
        }
    }
    return cmax;
}

Schedule build_schedule(const ProblemInstance& inst, const Permutation& perm) {
    if (perm.size() != inst.num_jobs())
        throw std::invalid_argument("permutation length does not match job count");
    Decoder decoder(inst);
    return decoder.schedule(perm.order());
}

Time makespan(const Schedule& s) {
    Time best = 0;
    for (Time c : s.completion) best = std::max(best, c);
    return best;
}

} // namespace hfsts

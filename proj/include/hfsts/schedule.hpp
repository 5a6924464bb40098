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

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "hfsts/instance.hpp"
#include "hfsts/permutation.hpp"

namespace hfsts {

/// Start/completion times and processor assignment of every task.
struct Schedule {
    int num_jobs = 0;
    int num_stages = 0;
    std::vector<Time> start;      // row-major n x m
    std::vector<Time> completion; // row-major n x m
    std::vector<std::vector<int>> assignment; // per task, processor ids at its stage
    Time makespan = 0;

    Time start_at(int job, int stage) const { return start[cell(job, stage)]; }
    Time completion_at(int job, int stage) const { return completion[cell(job, stage)]; }
    const std::vector<int>& processors_of(int job, int stage) const { return assignment[cell(job, stage)]; }

    std::size_t cell(int job, int stage) const {
        return static_cast<std::size_t>(job) * static_cast<std::size_t>(num_stages) +
               static_cast<std::size_t>(stage);
    }
};

/**
 * List-scheduling decoder.
 *
 * Stage 0 dispatches jobs in permutation order; every later stage dispatches
 * them by nondecreasing completion time at the previous stage, ties by
 * permutation position. A task starts at the earliest time not before its
 * ready time at which its width of processors is free, and takes the
 * processors with the smallest availability times (lowest id on ties).
 *
 * The object owns scratch buffers so repeated decoding does not allocate; one
 * instance per thread.
 */
class Decoder {
  public:
    explicit Decoder(const ProblemInstance& inst);

    /// Makespan only. order must be a permutation of the instance's jobs.
    Time makespan(std::span<const int> order);

    /// Full schedule including processor assignments.
    Schedule schedule(std::span<const int> order);

  private:
    template <bool Record>
    Time run(std::span<const int> order, Schedule* out);

    const ProblemInstance* inst_;
    std::vector<Time> ready_;        // completion at previous stage, per job
    std::vector<std::int64_t> keys_; // dispatch keys for the current stage
    std::vector<int> pos_of_job_;
    std::vector<Time> avail_;
    std::vector<int> procs_;
};

Schedule build_schedule(const ProblemInstance& inst, const Permutation& perm);

/// Maximum completion time over all tasks of s.
Time makespan(const Schedule& s);

} // namespace hfsts

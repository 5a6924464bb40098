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
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace hfsts {

/// Time in integer units. Durations are positive, start/completion times non-negative.
using Time = std::int64_t;

/// Raised when an instance violates its invariants (dimension mismatch, width out of range, ...).
class InstanceError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// Raised when instance text cannot be parsed. The message carries the position or field path.
class ParseError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/**
 * A hybrid flow shop with multiprocessor tasks.
 *
 * Every job passes all stages in order 0..m-1. At stage i the task of job j
 * occupies widths(j,i) of the processors_per_stage(i) identical processors for
 * duration(j,i) time units. Matrices are stored row-major with one row per job.
 */
class ProblemInstance {
  public:
    ProblemInstance(int num_jobs, int num_stages, std::vector<int> processors_per_stage,
                    std::vector<Time> durations, std::vector<int> widths);

    int num_jobs() const noexcept { return num_jobs_; }
    int num_stages() const noexcept { return num_stages_; }

    int processors(int stage) const { return processors_[static_cast<std::size_t>(stage)]; }
    std::span<const int> processors_per_stage() const noexcept { return processors_; }

    Time duration(int job, int stage) const { return durations_[index(job, stage)]; }
    int width(int job, int stage) const { return widths_[index(job, stage)]; }

    std::span<const Time> durations() const noexcept { return durations_; }
    std::span<const int> widths() const noexcept { return widths_; }

    /// Sum of durations of a job over all stages (its chain length).
    Time total_work(int job) const;

    bool operator==(const ProblemInstance&) const = default;

  private:
    std::size_t index(int job, int stage) const {
        return static_cast<std::size_t>(job) * static_cast<std::size_t>(num_stages_) +
               static_cast<std::size_t>(stage);
    }

    int num_jobs_;
    int num_stages_;
    std::vector<int> processors_;
    std::vector<Time> durations_;
    std::vector<int> widths_;
};

/// Seeded random instance: durations uniform in [1,100], widths uniform in [1,machines_per_stage].
ProblemInstance generate_instance(int num_jobs, int num_stages, int machines_per_stage,
                                  std::uint64_t seed);

/// Canonical JSON text: {"m":..,"machines":[..],"n":..,"p":[[..]..],"size":[[..]..]}.
std::string serialize_instance(const ProblemInstance& inst);

ProblemInstance parse_instance(std::string_view text);

/// Hex-encoded SHA-256 of serialize_instance(inst).
std::string instance_digest(const ProblemInstance& inst);

} // namespace hfsts

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

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "hfsts/search.hpp"

namespace hfsts {

/// Slice number lane of range split into lanes parts whose sizes differ by at most one.
NeighborhoodSlice lane_slice(NeighborhoodSlice range, int lanes, int lane);

/// Contiguous, disjoint cover of [0, N) with lane sizes differing by at most one.
std::vector<NeighborhoodSlice> partition_equal(MoveIndex total, int lanes);
std::vector<NeighborhoodSlice> partition_equal(NeighborhoodSlice range, int lanes);

struct EvalEvent {
    enum class Kind { progress, error, result };

    Kind kind = Kind::progress;
    int lane = 0;
    double fraction = 0.0;  // progress
    std::string error;      // error
    SliceResult result;     // result
    NeighborhoodSlice slice; // the lane's slice
};

/// Receives events from several lanes at once; implementations must be thread-safe.
using EventSink = std::function<void(const EvalEvent&)>;

/// A lane failed twice (in its lane and on the retry in the caller's context).
class EvalFailure : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Outcome of a possibly deadline-bounded range evaluation.
struct RangeOutcome {
    SliceResult result;            // best over the evaluated prefix [range.begin, remaining.begin)
    bool complete = true;
    NeighborhoodSlice remaining;   // empty when complete
    std::int64_t moves_total = 0;  // includes work past the prefix that had to be discarded
};

/// Physical core count, falling back to the logical count.
int default_lane_count();

/**
 * Splits a neighborhood range into equal contiguous parts and evaluates them
 * on OpenMP threads. Every lane works on its own copy of the permutation and
 * tabu list; the instance is shared read-only. A lane that throws is retried
 * once on the calling thread before the round fails.
 *
 * The result is identical to evaluate_slice over the same range for every
 * lane count.
 */
class ParallelEvaluator final : public Evaluator {
  public:
    explicit ParallelEvaluator(int lanes = default_lane_count(), EventSink sink = {});

    SliceResult evaluate(const EvalContext& ctx) override;

    /// Evaluates range; stops at move boundaries once control's deadline or stop fires.
    RangeOutcome evaluate_range(const EvalContext& ctx, NeighborhoodSlice range,
                                const EvalControl& control = {});

    int lanes() const noexcept { return lanes_; }
    void set_sink(EventSink sink) { sink_ = std::move(sink); }

    /// Test hook, called at the start of every lane attempt; attempt 0 is the lane, 1 the retry.
    void set_fault_injector(std::function<void(int lane, int attempt)> hook) { fault_ = std::move(hook); }

  private:
    void emit(const EvalEvent& ev) const {
        if (sink_) sink_(ev);
    }

    int lanes_;
    EventSink sink_;
    std::function<void(int, int)> fault_;
};

/// One-shot form over the full neighborhood of ctx.
SliceResult evaluate_parallel(const EvalContext& ctx, int lanes, const EventSink& sink = {});

} // namespace hfsts

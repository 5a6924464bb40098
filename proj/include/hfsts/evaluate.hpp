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

#include <chrono>
#include <functional>
#include <optional>
#include <stop_token>

#include "hfsts/neighborhood.hpp"
#include "hfsts/tabu_list.hpp"

namespace hfsts {

using Clock = std::chrono::steady_clock;

/// Per-iteration inputs of a neighborhood evaluation. Frozen for the duration of a round.
struct EvalContext {
    const ProblemInstance* instance = nullptr; // non-owning, outlives the round
    Permutation permutation;
    TabuList tabu;
    Time incumbent = 0; // aspiration threshold
};

/// Optional knobs for a single slice evaluation.
struct EvalControl {
    /// Stop before starting a move once this instant has passed.
    std::optional<Clock::time_point> deadline;
    std::stop_token stop;
    /// Minimum wall time per move; evaluation is paced to this rate when nonzero.
    std::chrono::nanoseconds pace{0};
    /// Called with the completed fraction of the slice, nondecreasing, ending at 1.0 when complete.
    std::function<void(double)> progress;
    int progress_steps = 8;
};

/**
 * Serial reference evaluation of the moves in [slice.begin, slice.end).
 *
 * A move is admissible when it is not tabu, or when it is tabu but its
 * makespan is strictly below best_known. Returns the admissible move with the
 * smallest (makespan, index). When the control stops the loop early,
 * moves_evaluated tells how long the evaluated prefix of the slice is.
 */
SliceResult evaluate_slice(const ProblemInstance& inst, const Permutation& perm, const TabuList& tabu,
                           Time best_known, NeighborhoodSlice slice, const EvalControl& control = {});

inline SliceResult evaluate_slice(const EvalContext& ctx, NeighborhoodSlice slice,
                                  const EvalControl& control = {}) {
    return evaluate_slice(*ctx.instance, ctx.permutation, ctx.tabu, ctx.incumbent, slice, control);
}

} // namespace hfsts

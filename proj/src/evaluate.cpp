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

#include "hfsts/evaluate.hpp"

#include <algorithm>
#include <stdexcept>
#include <thread>
#include <vector>

#include "hfsts/schedule.hpp"

namespace hfsts {

SliceResult evaluate_slice(const ProblemInstance& inst, const Permutation& perm, const TabuList& tabu,
                           Time best_known, NeighborhoodSlice slice, const EvalControl& control) {
    const int n = perm.size();
    if (n != inst.num_jobs()) throw std::invalid_argument("permutation does not match instance");
    if (slice.begin < 0 || slice.end > neighborhood_size(n) || slice.begin > slice.end)
        throw std::out_of_range("slice outside neighborhood");

    const auto t0 = Clock::now();
    SliceResult result;
    Decoder decoder(inst);
    std::vector<int> buffer(static_cast<std::size_t>(n));
    const auto base = perm.order();

    const MoveIndex length = slice.size();
    const int steps = std::max(1, control.progress_steps);
    MoveIndex next_report = control.progress ? std::max<MoveIndex>(1, length / steps) : length + 1;

    for (MoveIndex k = slice.begin; k < slice.end; ++k) {
        if (control.stop.stop_requested()) break;
        if (control.deadline && Clock::now() >= *control.deadline) break;

        const Move mv = decode_move(k, n);
        std::copy(base.begin(), base.end(), buffer.begin());
        apply_move_inplace(buffer, mv);
        const Time ms = decoder.makespan(buffer);

        const bool admissible = ms < best_known || !tabu.is_tabu(mv, base);
        if (admissible && (!result.best_index || better_move(ms, k, *result.best_makespan, *result.best_index))) {
            result.best_index = k;
            result.best_makespan = ms;
        }
        ++result.moves_evaluated;

        if (control.pace.count() > 0) std::this_thread::sleep_until(t0 + result.moves_evaluated * control.pace);
        if (result.moves_evaluated >= next_report && result.moves_evaluated < length) {
            control.progress(static_cast<double>(result.moves_evaluated) / static_cast<double>(length));
            next_report += std::max<MoveIndex>(1, length / steps);
        }
    }
    if (control.progress && result.moves_evaluated == length) control.progress(1.0);

    result.elapsed = std::chrono::duration<double>(Clock::now() - t0).count();
    return result;
}

} // namespace hfsts

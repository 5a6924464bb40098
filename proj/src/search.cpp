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

#include "hfsts/search.hpp"

#include <algorithm>
#include <numeric>

#include "hfsts/schedule.hpp"

namespace hfsts {

SliceResult SequentialEvaluator::evaluate(const EvalContext& ctx) {
    return evaluate_slice(ctx, NeighborhoodSlice{0, neighborhood_size(ctx.permutation.size())});
}

Permutation initial_solution(const ProblemInstance& inst) {
    std::vector<int> order(static_cast<std::size_t>(inst.num_jobs()));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return inst.total_work(a) > inst.total_work(b); });
    return Permutation(std::move(order));
}

Permutation diversify(const Permutation& perm, int strength, std::mt19937_64& rng) {
    const int n = perm.size();
    const MoveIndex size = neighborhood_size(n);
    if (strength <= 0 || size == 0) return perm;

    std::vector<int> order(perm.order().begin(), perm.order().end());
    std::uniform_int_distribution<MoveIndex> pick(0, size - 1);
    for (int r = 0; r < strength; ++r) apply_move_inplace(order, decode_move(pick(rng), n));
    return Permutation(std::move(order));
}

SearchResult run_search(const ProblemInstance& inst, const SearchParams& params, Evaluator& evaluator,
                        const TraceObserver& observer) {
    if (params.iterations < 0) throw std::invalid_argument("iterations must be >= 0");
    const int n = inst.num_jobs();
    const int strength = params.diversify_strength < 0 ? n : params.diversify_strength;

    Decoder decoder(inst);
    SearchResult out;
    out.initial = initial_solution(inst);
    out.initial_makespan = decoder.makespan(out.initial.order());
    out.best = out.initial;
    out.best_makespan = out.initial_makespan;

    if (neighborhood_size(n) == 0) return out;

    EvalContext ctx{&inst, out.initial, TabuList(params.tenure), out.best_makespan};
    std::mt19937_64 rng(params.seed);
    int stagnation = 0;
    Time current = out.initial_makespan;

    for (int it = 0; it < params.iterations; ++it) {
        ctx.incumbent = out.best_makespan;

        SliceResult step;
        try {
            step = evaluator.evaluate(ctx);
        } catch (const std::exception& e) {
            throw SearchError(std::string("neighborhood evaluation failed: ") + e.what(), out.best,
                              out.best_makespan, it);
        }

        TraceRecord rec;
        rec.iteration = it;
        bool improved = false;
        if (step.best_index) {
            const Move mv = decode_move(*step.best_index, n);
            ctx.tabu.push(mv, ctx.permutation);
            ctx.permutation = apply_move(ctx.permutation, mv);
            current = *step.best_makespan;
            rec.move = step.best_index;
            if (current < out.best_makespan) {
                out.best = ctx.permutation;
                out.best_makespan = current;
                improved = true;
            }
        } else {
            // Every move tabu and none aspirated: let the oldest ban lapse.
            ctx.tabu.pop_oldest();
        }
        rec.makespan = current;

        stagnation = improved ? 0 : stagnation + 1;
        if (params.diversify_after > 0 && strength > 0 && stagnation >= params.diversify_after) {
            ctx.permutation = diversify(ctx.permutation, strength, rng);
            current = decoder.makespan(ctx.permutation.order());
            if (current < out.best_makespan) {
                out.best = ctx.permutation;
                out.best_makespan = current;
            }
            stagnation = 0;
            rec.diversified = true;
        }
        rec.incumbent = out.best_makespan;

        out.trace.push_back(rec);
        if (observer) observer(rec);
    }
    return out;
}

} // namespace hfsts

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
#include <functional>
#include <random>
#include <stdexcept>
#include <vector>

#include "hfsts/evaluate.hpp"

namespace hfsts {

struct SearchParams {
    int iterations = 100;
    int tenure = TabuList::kDefaultTenure;
    /// Consecutive non-improving iterations before diversifying; 0 disables.
    int diversify_after = 20;
    /// Random moves applied when diversifying; negative means the job count, 0 disables.
    int diversify_strength = -1;
    std::uint64_t seed = 1;
};

struct TraceRecord {
    int iteration = 0;
    std::optional<MoveIndex> move; // empty when every move was tabu
    Time makespan = 0;             // current solution after the move
    Time incumbent = 0;            // best seen so far
    bool diversified = false;

    bool operator==(const TraceRecord&) const = default;
};

struct SearchResult {
    Permutation best;
    Time best_makespan = 0;
    Permutation initial;
    Time initial_makespan = 0;
    std::vector<TraceRecord> trace;
};

/// Supplies the best admissible move over the whole neighborhood of ctx.
class Evaluator {
  public:
    virtual ~Evaluator() = default;
    virtual SliceResult evaluate(const EvalContext& ctx) = 0;
};

/// Single-threaded evaluator over the full neighborhood.
class SequentialEvaluator final : public Evaluator {
  public:
    SliceResult evaluate(const EvalContext& ctx) override;
};

/// Raised when the evaluator fails; carries the incumbent at the time of failure.
class SearchError : public std::runtime_error {
  public:
    SearchError(const std::string& what, Permutation incumbent, Time incumbent_makespan, int iteration)
        : std::runtime_error(what), incumbent(std::move(incumbent)),
          incumbent_makespan(incumbent_makespan), iteration(iteration) {}

    Permutation incumbent;
    Time incumbent_makespan;
    int iteration;
};

/// Jobs by nonincreasing total work, ties by job id.
Permutation initial_solution(const ProblemInstance& inst);

/// Applies strength uniformly drawn insertion moves in sequence.
Permutation diversify(const Permutation& perm, int strength, std::mt19937_64& rng);

using TraceObserver = std::function<void(const TraceRecord&)>;

SearchResult run_search(const ProblemInstance& inst, const SearchParams& params, Evaluator& evaluator,
                        const TraceObserver& observer = {});

} // namespace hfsts

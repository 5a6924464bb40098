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
#include <optional>
#include <span>

#include "hfsts/instance.hpp"
#include "hfsts/permutation.hpp"

namespace hfsts {

/// Index into the insertion neighborhood, in [0, n(n-1)).
using MoveIndex = std::int64_t;

/// Remove the job at from_pos and reinsert it so that it ends up at to_pos.
struct Move {
    int from_pos = 0;
    int to_pos = 0;

    bool operator==(const Move&) const = default;
};

/// Half-open range of move indices.
struct NeighborhoodSlice {
    MoveIndex begin = 0;
    MoveIndex end = 0;

    MoveIndex size() const noexcept { return end > begin ? end - begin : 0; }
    bool empty() const noexcept { return end <= begin; }
    bool contains(MoveIndex k) const noexcept { return k >= begin && k < end; }

    bool operator==(const NeighborhoodSlice&) const = default;
};

/// Best admissible move found in a slice. best_* are empty when no move was admissible.
struct SliceResult {
    std::optional<MoveIndex> best_index;
    std::optional<Time> best_makespan;
    std::int64_t moves_evaluated = 0;
    double elapsed = 0.0; // seconds

    bool operator==(const SliceResult&) const = default;
};

/// n(n-1) for n >= 2, zero otherwise.
MoveIndex neighborhood_size(int n) noexcept;

/// O(1) index-to-move map. Throws std::out_of_range for k outside [0, n(n-1)).
Move decode_move(MoveIndex k, int n);

/// Inverse of decode_move.
MoveIndex encode_move(Move mv, int n);

/// The move that undoes mv.
inline Move inverse(Move mv) noexcept { return Move{mv.to_pos, mv.from_pos}; }

Permutation apply_move(const Permutation& perm, Move mv);

/// In-place variant on a raw order buffer; no validation.
void apply_move_inplace(std::span<int> order, Move mv) noexcept;

/// True when (makespan, index) of a is lexicographically smaller than that of b.
inline bool better_move(Time ms_a, MoveIndex idx_a, Time ms_b, MoveIndex idx_b) noexcept {
    return ms_a != ms_b ? ms_a < ms_b : idx_a < idx_b;
}

/// Combine two partial results: argmin by (makespan, index), moves summed, elapsed maxed.
SliceResult merge_results(const SliceResult& a, const SliceResult& b);

} // namespace hfsts

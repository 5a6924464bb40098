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

#include "hfsts/neighborhood.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace hfsts {

MoveIndex neighborhood_size(int n) noexcept {
    return n < 2 ? 0 : static_cast<MoveIndex>(n) * static_cast<MoveIndex>(n - 1);
}

Move decode_move(MoveIndex k, int n) {
    if (k < 0 || k >= neighborhood_size(n))
        throw std::out_of_range("move index " + std::to_string(k) + " outside neighborhood of n=" +
                                std::to_string(n));
    const auto from = static_cast<int>(k / (n - 1));
    const auto r = static_cast<int>(k % (n - 1));
    return Move{from, r < from ? r : r + 1};
}

MoveIndex encode_move(Move mv, int n) {
    if (mv.from_pos < 0 || mv.to_pos < 0 || mv.from_pos >= n || mv.to_pos >= n || mv.from_pos == mv.to_pos)
        throw std::out_of_range("invalid move for n=" + std::to_string(n));
    const int r = mv.to_pos < mv.from_pos ? mv.to_pos : mv.to_pos - 1;
    return static_cast<MoveIndex>(mv.from_pos) * (n - 1) + r;
}

void apply_move_inplace(std::span<int> order, Move mv) noexcept {
    const auto first = order.begin();
    if (mv.from_pos < mv.to_pos)
        std::rotate(first + mv.from_pos, first + mv.from_pos + 1, first + mv.to_pos + 1);
    else
        std::rotate(first + mv.to_pos, first + mv.from_pos, first + mv.from_pos + 1);
}

Permutation apply_move(const Permutation& perm, Move mv) {
    const int n = perm.size();
    if (mv.from_pos < 0 || mv.to_pos < 0 || mv.from_pos >= n || mv.to_pos >= n || mv.from_pos == mv.to_pos)
        throw std::invalid_argument("invalid move for permutation of size " + std::to_string(n));
    std::vector<int> order(perm.order().begin(), perm.order().end());
    apply_move_inplace(order, mv);
    return Permutation(std::move(order));
}

SliceResult merge_results(const SliceResult& a, const SliceResult& b) {
    SliceResult out;
    out.moves_evaluated = a.moves_evaluated + b.moves_evaluated;
    out.elapsed = std::max(a.elapsed, b.elapsed);
    const bool take_b = b.best_index &&
                        (!a.best_index || better_move(*b.best_makespan, *b.best_index,
                                                      *a.best_makespan, *a.best_index));
    const SliceResult& src = take_b ? b : a;
    out.best_index = src.best_index;
    out.best_makespan = src.best_makespan;
    return out;
}

} // namespace hfsts

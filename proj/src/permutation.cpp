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

#include "hfsts/permutation.hpp"

#include <numeric>

namespace hfsts {

bool is_permutation_of_indices(std::span<const int> order) {
    std::vector<char> seen(order.size(), 0);
    for (int v : order) {
        if (v < 0 || static_cast<std::size_t>(v) >= order.size() || seen[static_cast<std::size_t>(v)])
            return false;
        seen[static_cast<std::size_t>(v)] = 1;
    }
    return true;
}

Permutation::Permutation(std::vector<int> order) : order_(std::move(order)) {
    if (!is_permutation_of_indices(order_))
        throw std::invalid_argument("not a permutation of 0..n-1");
}

Permutation Permutation::identity(int n) {
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    return Permutation(std::move(order));
}

} // namespace hfsts

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

#include <span>
#include <stdexcept>
#include <vector>

namespace hfsts {

/// A job ordering: each index in [0, n) exactly once.
class Permutation {
  public:
    Permutation() = default;

    /// Throws std::invalid_argument unless order is a permutation of 0..n-1.
    explicit Permutation(std::vector<int> order);

    static Permutation identity(int n);

    int size() const noexcept { return static_cast<int>(order_.size()); }
    int operator[](int pos) const { return order_[static_cast<std::size_t>(pos)]; }
    std::span<const int> order() const noexcept { return order_; }

    bool operator==(const Permutation&) const = default;

  private:
    std::vector<int> order_;
};

bool is_permutation_of_indices(std::span<const int> order);

} // namespace hfsts

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

#include <deque>

#include "hfsts/neighborhood.hpp"

namespace hfsts {

/// (job, position) pair: the job may not be moved back to that position while recorded.
struct TabuAttribute {
    int job = 0;
    int position = 0;

    bool operator==(const TabuAttribute&) const = default;
};

/// FIFO of forbidden attributes with bounded tenure.
class TabuList {
  public:
    static constexpr int kDefaultTenure = 7;

    explicit TabuList(int tenure = kDefaultTenure);
    TabuList(int tenure, std::deque<TabuAttribute> entries);

    /// Records (moved job, origin position) of mv applied to perm. Evicts the oldest beyond tenure.
    void push(Move mv, const Permutation& perm);
    void push(TabuAttribute attr);

    /// True when mv would put its job back at a recorded position.
    bool is_tabu(Move mv, std::span<const int> order) const noexcept;
    bool is_tabu(Move mv, const Permutation& perm) const noexcept { return is_tabu(mv, perm.order()); }

    /// Forgets the oldest attribute; no-op when empty.
    void pop_oldest() noexcept;

    int tenure() const noexcept { return tenure_; }
    const std::deque<TabuAttribute>& entries() const noexcept { return entries_; }
    bool empty() const noexcept { return entries_.empty(); }

    bool operator==(const TabuList&) const = default;

  private:
    int tenure_;
    std::deque<TabuAttribute> entries_;
};

// Value-returning forms.
TabuList tabu_push(TabuList t, Move mv, const Permutation& perm);
bool is_tabu(const TabuList& t, Move mv, const Permutation& perm);

} // namespace hfsts

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

#include "hfsts/tabu_list.hpp"

#include <algorithm>
#include <stdexcept>

namespace hfsts {

TabuList::TabuList(int tenure) : tenure_(tenure) {
    if (tenure_ < 0) throw std::invalid_argument("tabu tenure must be >= 0");
}

TabuList::TabuList(int tenure, std::deque<TabuAttribute> entries)
    : tenure_(tenure), entries_(std::move(entries)) {
    if (tenure_ < 0) throw std::invalid_argument("tabu tenure must be >= 0");
    if (entries_.size() > static_cast<std::size_t>(tenure_))
        throw std::invalid_argument("tabu list holds more entries than its tenure");
}

void TabuList::push(Move mv, const Permutation& perm) {
    push(TabuAttribute{perm[mv.from_pos], mv.from_pos});
}

void TabuList::push(TabuAttribute attr) {
    if (tenure_ == 0) return;
    entries_.push_back(attr);
    while (entries_.size() > static_cast<std::size_t>(tenure_)) entries_.pop_front();
}

bool TabuList::is_tabu(Move mv, std::span<const int> order) const noexcept {
    const int job = order[static_cast<std::size_t>(mv.from_pos)];
    return std::any_of(entries_.begin(), entries_.end(), [&](const TabuAttribute& a) {
        return a.job == job && a.position == mv.to_pos;
    });
}

void TabuList::pop_oldest() noexcept {
    if (!entries_.empty()) entries_.pop_front();
}

TabuList tabu_push(TabuList t, Move mv, const Permutation& perm) {
    t.push(mv, perm);
    return t;
}

bool is_tabu(const TabuList& t, Move mv, const Permutation& perm) { return t.is_tabu(mv, perm); }

} // namespace hfsts

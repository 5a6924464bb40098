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

#include "hfsts/balance.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace hfsts {

namespace {
constexpr long double kTieTolerance = 1e-9L;
}

void NodePerfHistory::record(std::int64_t moves, double speed) {
    if (moves <= 0) throw std::invalid_argument("history entries need moves > 0");
    if (!(speed > 0.0) || !std::isfinite(speed)) throw std::invalid_argument("history entries need speed > 0");
    samples_.push_back(PerfSample{moves, speed});
}

std::int64_t NodePerfHistory::total_moves() const noexcept {
    std::int64_t sum = 0;
    for (const auto& s : samples_) sum += s.moves;
    return sum;
}

double WeightedAveragePredictor::predict(const NodePerfHistory& history) const {
    const auto& s = history.samples();
    if (s.empty()) throw PredictionUnavailable("no performance history; calibrate first");
    const std::size_t first = window_ == 0 || window_ >= s.size() ? 0 : s.size() - window_;
    long double weighted = 0.0L, weight = 0.0L;
    for (std::size_t k = first; k < s.size(); ++k) {
        weighted += static_cast<long double>(s[k].moves) * static_cast<long double>(s[k].speed);
        weight += static_cast<long double>(s[k].moves);
    }
    return static_cast<double>(weighted / weight);
}

double predict(const NodePerfHistory& history, std::size_t window) {
    return WeightedAveragePredictor(window).predict(history);
}

PartitionPlan plan_partition(std::span<const double> speeds, NeighborhoodSlice range) {
    const MoveIndex total = range.size();
    long double sum = 0.0L;
    for (double s : speeds)
        if (s > 0.0 && std::isfinite(s)) sum += s;
    if (!(sum > 0.0L)) throw PlanningError("no node with positive predicted speed");

    const std::size_t count = speeds.size();
    std::vector<MoveIndex> size(count, 0);
    std::vector<long double> frac(count, -1.0L);
    MoveIndex assigned = 0;
    for (std::size_t i = 0; i < count; ++i) {
        if (!(speeds[i] > 0.0) || !std::isfinite(speeds[i])) continue;
        const long double ideal = static_cast<long double>(speeds[i]) * static_cast<long double>(total) / sum;
        // Snap values within rounding noise of an integer so exact shares stay exact.
        const long double nearest = std::round(ideal);
        const long double snapped = std::abs(ideal - nearest) <= kTieTolerance * std::max(1.0L, ideal) ? nearest : ideal;
        const auto whole = static_cast<MoveIndex>(std::floor(snapped));
        size[i] = std::min(whole, total);
        frac[i] = std::max(0.0L, snapped - static_cast<long double>(size[i]));
        assigned += size[i];
    }

    std::vector<std::size_t> order(count);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return frac[a] > frac[b] + kTieTolerance; });
    for (std::size_t k = 0; assigned < total; k = (k + 1) % count) {
        if (frac[order[k]] < 0.0L) continue;
        ++size[order[k]];
        ++assigned;
    }
    while (assigned > total) { // only reachable through rounding noise
        auto it = std::max_element(size.begin(), size.end());
        --*it;
        --assigned;
    }

    PartitionPlan plan;
    plan.total = total;
    MoveIndex cursor = range.begin;
    for (std::size_t i = 0; i < count; ++i) {
        plan.slices.push_back(NeighborhoodSlice{cursor, cursor + size[i]});
        cursor += size[i];
    }
    return plan;
}

PartitionPlan plan_partition(std::span<const double> speeds, MoveIndex total) {
    return plan_partition(speeds, NeighborhoodSlice{0, total});
}

} // namespace hfsts

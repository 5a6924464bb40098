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

#include "hfsts/parallel_eval.hpp"

#include <omp.h>

#include <fstream>
#include <set>
#include <thread>
#include <utility>

namespace hfsts {

NeighborhoodSlice lane_slice(NeighborhoodSlice range, int lanes, int lane) {
    if (lanes < 1) throw std::invalid_argument("lane count must be >= 1");
    const MoveIndex size = range.size();
    const MoveIndex q = size / lanes;
    const MoveIndex r = size % lanes;
    const MoveIndex begin = range.begin + lane * q + std::min<MoveIndex>(lane, r);
    return NeighborhoodSlice{begin, begin + q + (lane < r ? 1 : 0)};
}

std::vector<NeighborhoodSlice> partition_equal(NeighborhoodSlice range, int lanes) {
    if (lanes < 1) throw std::invalid_argument("lane count must be >= 1");
    std::vector<NeighborhoodSlice> out;
    out.reserve(static_cast<std::size_t>(lanes));
    for (int lane = 0; lane < lanes; ++lane) out.push_back(lane_slice(range, lanes, lane));
    return out;
}

std::vector<NeighborhoodSlice> partition_equal(MoveIndex total, int lanes) {
    return partition_equal(NeighborhoodSlice{0, total}, lanes);
}

int default_lane_count() {
    std::ifstream cpuinfo("/proc/cpuinfo");
    std::set<std::pair<std::string, std::string>> cores;
    std::string line, physical = "0";
    while (std::getline(cpuinfo, line)) {
        const auto colon = line.find(':');
        if (colon == std::string::npos) continue;
        const auto value = colon + 2 <= line.size() ? line.substr(colon + 2) : std::string();
        if (line.rfind("physical id", 0) == 0) physical = value;
        if (line.rfind("core id", 0) == 0) cores.emplace(physical, value);
    }
    if (!cores.empty()) return static_cast<int>(cores.size());
    return std::max(1u, std::thread::hardware_concurrency());
}

ParallelEvaluator::ParallelEvaluator(int lanes, EventSink sink) : lanes_(lanes), sink_(std::move(sink)) {
    if (lanes_ < 1) throw std::invalid_argument("lane count must be >= 1");
}

SliceResult ParallelEvaluator::evaluate(const EvalContext& ctx) {
    return evaluate_range(ctx, NeighborhoodSlice{0, neighborhood_size(ctx.permutation.size())}).result;
}

RangeOutcome ParallelEvaluator::evaluate_range(const EvalContext& ctx, NeighborhoodSlice range,
                                               const EvalControl& control) {
    const auto t0 = Clock::now();
    const auto parts = partition_equal(range, lanes_);

    struct LaneState {
        SliceResult result;
        bool ok = false;
        std::string error;
    };
    std::vector<LaneState> lanes(parts.size());

    auto run_lane = [&](int lane, int attempt) {
        const auto& part = parts[static_cast<std::size_t>(lane)];
        // Private copies of the mutable context for this lane.
        const Permutation perm = ctx.permutation;
        const TabuList tabu = ctx.tabu;
        if (fault_) fault_(lane, attempt);

        EvalControl lane_control = control;
        if (sink_)
            lane_control.progress = [this, lane, part](double f) {
                EvalEvent ev;
                ev.kind = EvalEvent::Kind::progress;
                ev.lane = lane;
                ev.fraction = f;
                ev.slice = part;
                emit(ev);
            };
        return evaluate_slice(*ctx.instance, perm, tabu, ctx.incumbent, part, lane_control);
    };

    auto report = [&](int lane, const LaneState& st) {
        EvalEvent ev;
        ev.lane = lane;
        ev.slice = parts[static_cast<std::size_t>(lane)];
        if (st.ok) {
            ev.kind = EvalEvent::Kind::result;
            ev.result = st.result;
        } else {
            ev.kind = EvalEvent::Kind::error;
            ev.error = st.error;
        }
        emit(ev);
    };

    const int count = static_cast<int>(parts.size());
#pragma omp parallel for num_threads(count) schedule(static, 1)
    for (int lane = 0; lane < count; ++lane) {
        if (parts[static_cast<std::size_t>(lane)].empty()) continue;
        auto& st = lanes[static_cast<std::size_t>(lane)];
        try {
            st.result = run_lane(lane, 0);
            st.ok = true;
        } catch (const std::exception& e) {
            st.error = e.what();
        } catch (...) {
            st.error = "unknown lane failure";
        }
        report(lane, st);
    }

    for (int lane = 0; lane < count; ++lane) {
        auto& st = lanes[static_cast<std::size_t>(lane)];
        if (parts[static_cast<std::size_t>(lane)].empty() || st.ok) continue;
        try {
            st.result = run_lane(lane, 1);
            st.ok = true;
            st.error.clear();
        } catch (const std::exception& e) {
            st.error = e.what();
        }
        report(lane, st);
        if (!st.ok) throw EvalFailure("lane " + std::to_string(lane) + " failed twice: " + st.error);
    }

    RangeOutcome out;
    for (int lane = 0; lane < count; ++lane) {
        const auto& part = parts[static_cast<std::size_t>(lane)];
        const auto& st = lanes[static_cast<std::size_t>(lane)];
        out.moves_total += st.result.moves_evaluated;
        if (!out.complete || part.empty()) continue;
        out.result = merge_results(out.result, st.result);
        if (st.result.moves_evaluated < part.size()) {
            out.complete = false;
            out.remaining = NeighborhoodSlice{part.begin + st.result.moves_evaluated, range.end};
        }
    }
    out.result.elapsed = std::chrono::duration<double>(Clock::now() - t0).count();
    return out;
}

SliceResult evaluate_parallel(const EvalContext& ctx, int lanes, const EventSink& sink) {
    ParallelEvaluator evaluator(lanes, sink);
    return evaluator.evaluate(ctx);
}

} // namespace hfsts

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

#include "doctest.h"

#include <atomic>
#include <map>
#include <mutex>
#include <random>

#include "hfsts/parallel_eval.hpp"
#include "hfsts/schedule.hpp"

using namespace hfsts;

namespace {

std::vector<MoveIndex> sizes(const std::vector<NeighborhoodSlice>& v) {
    std::vector<MoveIndex> out;
    for (const auto& s : v) out.push_back(s.size());
    return out;
}

EvalContext random_context(const ProblemInstance& inst, std::mt19937_64& rng) {
    std::vector<int> order(static_cast<std::size_t>(inst.num_jobs()));
    for (int i = 0; i < inst.num_jobs(); ++i) order[static_cast<std::size_t>(i)] = i;
    std::shuffle(order.begin(), order.end(), rng);
    EvalContext ctx{&inst, Permutation(order), TabuList(7), 0};
    for (int k = 0; k < 7; ++k)
        ctx.tabu.push(TabuAttribute{static_cast<int>(rng() % static_cast<unsigned>(inst.num_jobs())),
                                    static_cast<int>(rng() % static_cast<unsigned>(inst.num_jobs()))});
    ctx.incumbent = build_schedule(inst, ctx.permutation).makespan - static_cast<Time>(rng() % 30);
    return ctx;
}

struct Recorder {
    std::mutex mu;
    std::vector<EvalEvent> events;
    EventSink sink() {
        return [this](const EvalEvent& ev) {
            std::lock_guard lock(mu);
            events.push_back(ev);
        };
    }
};

} // namespace

TEST_CASE("partition_equal examples") {
    const auto a = partition_equal(12, 4);
    CHECK(a == std::vector<NeighborhoodSlice>{{0, 3}, {3, 6}, {6, 9}, {9, 12}});
    CHECK(sizes(partition_equal(10, 4)) == std::vector<MoveIndex>{3, 3, 2, 2});
    CHECK(sizes(partition_equal(5, 8)) == std::vector<MoveIndex>{1, 1, 1, 1, 1, 0, 0, 0});
    CHECK_THROWS(partition_equal(5, 0));
}

TEST_CASE("partition_equal covers any range contiguously") {
    std::mt19937_64 rng(4);
    for (int trial = 0; trial < 500; ++trial) {
        const MoveIndex begin = static_cast<MoveIndex>(rng() % 100);
        const MoveIndex end = begin + static_cast<MoveIndex>(rng() % 3000);
        const int lanes = 1 + static_cast<int>(rng() % 16);
        const auto parts = partition_equal({begin, end}, lanes);
        REQUIRE(parts.size() == static_cast<std::size_t>(lanes));
        MoveIndex cursor = begin, lo = end, hi = 0;
        for (const auto& p : parts) {
            REQUIRE(p.begin == cursor);
            cursor = p.end;
            lo = std::min(lo, p.size());
            hi = std::max(hi, p.size());
        }
        REQUIRE(cursor == end);
        REQUIRE(hi - lo <= 1);
    }
}

TEST_CASE("one lane equals the serial reference") {
    const auto inst = generate_instance(10, 2, 5, 1);
    std::mt19937_64 rng(1);
    const auto ctx = random_context(inst, rng);
    auto r = evaluate_parallel(ctx, 1);
    auto s = evaluate_slice(ctx, {0, neighborhood_size(10)});
    r.elapsed = s.elapsed = 0;
    CHECK(r == s);
}

TEST_CASE("result is identical for lane counts 1..8") {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 20; ++trial) {
        const auto inst = generate_instance(3 + static_cast<int>(rng() % 10), 1 + static_cast<int>(rng() % 4), 3, rng());
        const auto ctx = random_context(inst, rng);
        const auto ref = evaluate_slice(ctx, {0, neighborhood_size(inst.num_jobs())});
        for (int lanes = 1; lanes <= 8; ++lanes) {
            const auto r = evaluate_parallel(ctx, lanes);
            REQUIRE(r.best_index == ref.best_index);
            REQUIRE(r.best_makespan == ref.best_makespan);
            REQUIRE(r.moves_evaluated == ref.moves_evaluated);
        }
    }
}

TEST_CASE("event discipline: one result per nonempty lane, monotone progress") {
    const auto inst = generate_instance(4, 2, 2, 3); // N = 12
    std::mt19937_64 rng(2);
    const auto ctx = random_context(inst, rng);
    for (int lanes : {1, 3, 5, 16}) {
        Recorder rec;
        ParallelEvaluator eval(lanes, rec.sink());
        eval.evaluate(ctx);
        std::map<int, int> results;
        std::map<int, double> last_progress;
        for (const auto& ev : rec.events) {
            if (ev.kind == EvalEvent::Kind::result) ++results[ev.lane];
            if (ev.kind == EvalEvent::Kind::progress) {
                CHECK(ev.fraction >= last_progress[ev.lane]);
                last_progress[ev.lane] = ev.fraction;
            }
            CHECK(ev.kind != EvalEvent::Kind::error);
        }
        const int nonempty = std::min<int>(lanes, 12);
        CHECK(static_cast<int>(results.size()) == nonempty);
        for (const auto& [lane, count] : results) CHECK(count == 1);
    }
}

TEST_CASE("a failing lane is retried on the caller and the result is unchanged") {
    const auto inst = generate_instance(9, 3, 3, 12);
    std::mt19937_64 rng(9);
    const auto ctx = random_context(inst, rng);
    const auto ref = evaluate_slice(ctx, {0, neighborhood_size(9)});

    Recorder rec;
    ParallelEvaluator eval(4, rec.sink());
    eval.set_fault_injector([](int lane, int attempt) {
        if (lane == 2 && attempt == 0) throw std::runtime_error("injected");
    });
    const auto r = eval.evaluate(ctx);
    CHECK(r.best_index == ref.best_index);
    CHECK(r.best_makespan == ref.best_makespan);
    const auto errors = std::count_if(rec.events.begin(), rec.events.end(),
                                      [](const EvalEvent& e) { return e.kind == EvalEvent::Kind::error; });
    const auto results = std::count_if(rec.events.begin(), rec.events.end(),
                                       [](const EvalEvent& e) { return e.kind == EvalEvent::Kind::result; });
    CHECK(errors == 1);
    CHECK(results == 4);
    CHECK(rec.events.back().kind == EvalEvent::Kind::result);
    CHECK(rec.events.back().lane == 2);
}

TEST_CASE("a lane failing twice fails the round") {
    const auto inst = generate_instance(9, 3, 3, 12);
    std::mt19937_64 rng(9);
    const auto ctx = random_context(inst, rng);
    Recorder rec;
    ParallelEvaluator eval(3, rec.sink());
    eval.set_fault_injector([](int lane, int) {
        if (lane == 1) throw std::runtime_error("broken lane");
    });
    CHECK_THROWS_AS(eval.evaluate(ctx), EvalFailure);
    const auto errors = std::count_if(rec.events.begin(), rec.events.end(),
                                      [](const EvalEvent& e) { return e.kind == EvalEvent::Kind::error; });
    CHECK(errors == 2);
}

TEST_CASE("deadline-bounded range returns a sound prefix and remainder") {
    const auto inst = generate_instance(12, 3, 3, 5);
    std::mt19937_64 rng(6);
    const auto ctx = random_context(inst, rng);
    const NeighborhoodSlice range{7, 120};
    for (int lanes : {1, 2, 3}) {
        ParallelEvaluator eval(lanes);
        EvalControl control;
        control.pace = std::chrono::milliseconds(1);
        control.deadline = Clock::now() + std::chrono::milliseconds(30);
        const auto out = eval.evaluate_range(ctx, range, control);
        REQUIRE_FALSE(out.complete);
        CHECK(out.remaining.end == range.end);
        CHECK(out.remaining.begin == range.begin + out.result.moves_evaluated);
        CHECK(out.moves_total >= out.result.moves_evaluated);
        const auto replay = evaluate_slice(ctx, {range.begin, out.remaining.begin});
        CHECK(replay.best_index == out.result.best_index);
        CHECK(replay.best_makespan == out.result.best_makespan);
    }
}

TEST_CASE("parallel evaluator drives the search identically to the serial one") {
    const auto inst = generate_instance(10, 5, 5, 77);
    SearchParams params;
    params.iterations = 30;
    params.diversify_after = 8;
    SequentialEvaluator serial;
    ParallelEvaluator parallel(4);
    const auto a = run_search(inst, params, serial);
    const auto b = run_search(inst, params, parallel);
    CHECK(a.trace == b.trace);
}

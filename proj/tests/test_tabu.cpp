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

#include <random>

#include "hfsts/evaluate.hpp"
#include "hfsts/schedule.hpp"
#include "oracle/brute_force.hpp"

using namespace hfsts;

namespace {

std::vector<std::pair<int, int>> attrs(const TabuList& t) {
    std::vector<std::pair<int, int>> out;
    for (const auto& a : t.entries()) out.emplace_back(a.job, a.position);
    return out;
}

struct RandomContext {
    ProblemInstance inst;
    Permutation perm;
    TabuList tabu;
    Time best_known;
};

RandomContext random_context(std::mt19937_64& rng) {
    const int n = 2 + static_cast<int>(rng() % 7);
    const int m = 1 + static_cast<int>(rng() % 3);
    auto inst = generate_instance(n, m, 1 + static_cast<int>(rng() % 3), rng());
    std::vector<int> order(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
    std::shuffle(order.begin(), order.end(), rng);
    Permutation perm(order);
    TabuList tabu(7);
    const int pushes = static_cast<int>(rng() % 10);
    for (int k = 0; k < pushes; ++k)
        tabu.push(TabuAttribute{static_cast<int>(rng() % n), static_cast<int>(rng() % n)});
    const Time current = build_schedule(inst, perm).makespan;
    const Time best_known = current - static_cast<Time>(rng() % 40) + 20;
    return {std::move(inst), std::move(perm), std::move(tabu), best_known};
}

} // namespace

TEST_CASE("empty tabu list forbids nothing") {
    const TabuList t;
    const auto perm = Permutation::identity(5);
    for (MoveIndex k = 0; k < neighborhood_size(5); ++k) CHECK_FALSE(is_tabu(t, decode_move(k, 5), perm));
}

TEST_CASE("reversal of the last move is tabu") {
    const auto perm = Permutation({3, 1, 0, 2});
    const Move mv{1, 3};
    const auto t = tabu_push(TabuList(), mv, perm);
    const auto moved = apply_move(perm, mv);
    CHECK(is_tabu(t, inverse(mv), moved));
    CHECK(t.entries().front() == TabuAttribute{1, 1});
    CHECK_FALSE(is_tabu(t, Move{3, 0}, moved));
}

TEST_CASE("FIFO eviction after tenure + 1 pushes") {
    TabuList t(3);
    auto perm = Permutation::identity(6);
    const Move first{0, 5};
    t.push(first, perm);
    const int job = perm[0];
    for (int k = 0; k < 3; ++k) t.push(TabuAttribute{5, k + 1});
    CHECK(t.entries().size() == 3);
    const bool still_there = std::any_of(t.entries().begin(), t.entries().end(),
                                         [&](const TabuAttribute& a) { return a.job == job && a.position == 0; });
    CHECK_FALSE(still_there);
}

TEST_CASE("zero tenure keeps the list empty") {
    TabuList t(0);
    t.push(Move{0, 1}, Permutation::identity(2));
    CHECK(t.empty());
}

TEST_CASE("evaluate_slice on a 2-job instance picks the better move") {
    const ProblemInstance inst(2, 2, {1, 1}, {2, 2, 3, 1}, {1, 1, 1, 1});
    const auto perm = Permutation({0, 1});
    const auto r = evaluate_slice(inst, perm, TabuList(), 1000, {0, 2});
    const auto oracle = oracle::best_move(inst, {0, 1}, {}, 1000, 0, 2);
    REQUIRE(r.best_index.has_value());
    CHECK(r.best_index == oracle.index);
    CHECK(r.best_makespan == oracle.makespan);
    CHECK(r.moves_evaluated == 2);
    // Both moves produce the order (1,0), so the makespans tie and index 0 wins.
    CHECK(*r.best_index == 0);
}

TEST_CASE("equal makespans resolve to the smaller index") {
    // Identical jobs make every move equivalent.
    const ProblemInstance inst(4, 1, {1}, {5, 5, 5, 5}, {1, 1, 1, 1});
    const auto r = evaluate_slice(inst, Permutation::identity(4), TabuList(), 1000, {3, 9});
    CHECK(r.best_index == 3);
    CHECK(r.best_makespan == 20);
}

TEST_CASE("all-tabu slice without aspiration yields no move") {
    const ProblemInstance inst(2, 1, {1}, {5, 5}, {1, 1});
    TabuList t;
    t.push(TabuAttribute{0, 1});
    t.push(TabuAttribute{1, 0});
    const auto r = evaluate_slice(inst, Permutation::identity(2), t, 10, {0, 2});
    CHECK_FALSE(r.best_index.has_value());
    CHECK(r.moves_evaluated == 2);
    // Strictly better than best_known aspirates.
    const auto a = evaluate_slice(inst, Permutation::identity(2), t, 11, {0, 2});
    CHECK(a.best_index == 0);
}

TEST_CASE("evaluate_slice matches the brute-force oracle on random contexts") {
    std::mt19937_64 rng(101);
    for (int trial = 0; trial < 300; ++trial) {
        auto ctx = random_context(rng);
        const int n = ctx.perm.size();
        const MoveIndex size = neighborhood_size(n);
        const MoveIndex b = static_cast<MoveIndex>(rng() % static_cast<unsigned long>(size + 1));
        const MoveIndex e = b + static_cast<MoveIndex>(rng() % static_cast<unsigned long>(size - b + 1));
        const auto r = evaluate_slice(ctx.inst, ctx.perm, ctx.tabu, ctx.best_known, {b, e});
        const std::vector<int> order(ctx.perm.order().begin(), ctx.perm.order().end());
        const auto o = oracle::best_move(ctx.inst, order, attrs(ctx.tabu), ctx.best_known, b, e);
        REQUIRE(r.best_index == o.index);
        REQUIRE(r.best_makespan == o.makespan);
        REQUIRE(r.moves_evaluated == e - b);
        if (r.best_index) CHECK((*r.best_index >= b && *r.best_index < e));
    }
}

TEST_CASE("partition independence over random partitions") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 50; ++trial) {
        auto ctx = random_context(rng);
        const MoveIndex size = neighborhood_size(ctx.perm.size());
        const auto whole = evaluate_slice(ctx.inst, ctx.perm, ctx.tabu, ctx.best_known, {0, size});
        for (int part = 0; part < 20; ++part) {
            std::vector<MoveIndex> cuts{0, size};
            const int k = static_cast<int>(rng() % 6);
            for (int c = 0; c < k; ++c) cuts.push_back(static_cast<MoveIndex>(rng() % static_cast<unsigned long>(size + 1)));
            std::sort(cuts.begin(), cuts.end());
            SliceResult merged;
            for (std::size_t c = 1; c < cuts.size(); ++c)
                merged = merge_results(merged, evaluate_slice(ctx.inst, ctx.perm, ctx.tabu, ctx.best_known, {cuts[c - 1], cuts[c]}));
            REQUIRE(merged.best_index == whole.best_index);
            REQUIRE(merged.best_makespan == whole.best_makespan);
            REQUIRE(merged.moves_evaluated == size);
        }
    }
}

TEST_CASE("a past deadline evaluates nothing") {
    const auto inst = generate_instance(12, 3, 3, 4);
    EvalControl control;
    control.deadline = Clock::now();
    const auto r = evaluate_slice(inst, Permutation::identity(12), TabuList(), 0, {0, 132}, control);
    CHECK(r.moves_evaluated == 0);
    CHECK_FALSE(r.best_index.has_value());
}

TEST_CASE("deadline stops at a move boundary; the prefix result replays exactly") {
    const auto inst = generate_instance(12, 3, 3, 4);
    const auto perm = Permutation::identity(12);
    EvalControl control;
    control.pace = std::chrono::milliseconds(2);
    control.deadline = Clock::now() + std::chrono::milliseconds(25);
    const auto r = evaluate_slice(inst, perm, TabuList(), 0, {10, 132}, control);
    CHECK(r.moves_evaluated > 0);
    CHECK(r.moves_evaluated < 122);
    const auto replay = evaluate_slice(inst, perm, TabuList(), 0, {10, 10 + r.moves_evaluated});
    CHECK(replay.best_index == r.best_index);
    CHECK(replay.best_makespan == r.best_makespan);
}

TEST_CASE("stop token halts evaluation and progress is monotone") {
    const auto inst = generate_instance(10, 2, 3, 9);
    std::stop_source source;
    std::vector<double> seen;
    EvalControl control;
    control.stop = source.get_token();
    control.progress = [&](double f) {
        seen.push_back(f);
        if (f >= 0.5) source.request_stop();
    };
    const auto r = evaluate_slice(inst, Permutation::identity(10), TabuList(), 0, {0, 90}, control);
    CHECK(r.moves_evaluated < 90);
    CHECK(std::is_sorted(seen.begin(), seen.end()));

    seen.clear();
    EvalControl full;
    full.progress = [&](double f) { seen.push_back(f); };
    evaluate_slice(inst, Permutation::identity(10), TabuList(), 0, {0, 90}, full);
    CHECK(std::is_sorted(seen.begin(), seen.end()));
    CHECK(seen.back() == 1.0);
}

TEST_CASE("out-of-range slices are rejected") {
    const auto inst = generate_instance(3, 1, 1, 1);
    CHECK_THROWS(evaluate_slice(inst, Permutation::identity(3), TabuList(), 0, {0, 7}));
    CHECK_THROWS(evaluate_slice(inst, Permutation::identity(3), TabuList(), 0, {4, 2}));
}

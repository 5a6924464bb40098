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

#include <algorithm>
#include <numeric>
#include <random>

#include "hfsts/schedule.hpp"
#include "oracle/simulator.hpp"

using namespace hfsts;

namespace {

ProblemInstance random_small(std::mt19937_64& rng) {
    const int n = 1 + static_cast<int>(rng() % 6);
    const int m = 1 + static_cast<int>(rng() % 3);
    std::vector<int> machines;
    for (int i = 0; i < m; ++i) machines.push_back(1 + static_cast<int>(rng() % 3));
    std::vector<Time> p;
    std::vector<int> w;
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < m; ++i) {
            p.push_back(1 + static_cast<Time>(rng() % 20));
            w.push_back(1 + static_cast<int>(rng() % static_cast<unsigned>(machines[static_cast<std::size_t>(i)])));
        }
    return ProblemInstance(n, m, machines, p, w);
}

std::vector<int> random_order(int n, std::mt19937_64& rng) {
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    return order;
}

} // namespace

TEST_CASE("single task") {
    const ProblemInstance inst(1, 1, {1}, {5}, {1});
    const auto s = build_schedule(inst, Permutation::identity(1));
    CHECK(s.makespan == 5);
    CHECK(makespan(s) == 5);
    CHECK(s.processors_of(0, 0) == std::vector<int>{0});
}

TEST_CASE("full-width tasks serialize") {
    const ProblemInstance inst(2, 1, {2}, {3, 4}, {2, 2});
    const auto s = build_schedule(inst, Permutation({0, 1}));
    CHECK(s.makespan == 7);
    CHECK(s.start_at(1, 0) == 3);
}

TEST_CASE("two-stage flow shop example") {
    const ProblemInstance inst(2, 2, {1, 1}, {2, 2, 3, 1}, {1, 1, 1, 1});
    const auto s = build_schedule(inst, Permutation({0, 1}));
    CHECK(s.start_at(0, 0) == 0);
    CHECK(s.completion_at(0, 0) == 2);
    CHECK(s.start_at(0, 1) == 2);
    CHECK(s.completion_at(0, 1) == 4);
    CHECK(s.start_at(1, 0) == 2);
    CHECK(s.completion_at(1, 0) == 5);
    CHECK(s.start_at(1, 1) == 5);
    CHECK(s.completion_at(1, 1) == 6);
    CHECK(s.makespan == 6);
    CHECK(oracle::simulate_makespan(inst, {0, 1}) == 6);
}

TEST_CASE("later stages dispatch by ready time, not permutation order") {
    // Job 0 is long at stage 0 on a 2-processor stage; job 1 finishes first and goes first at stage 1.
    const ProblemInstance inst(2, 2, {2, 1}, {10, 1, 2, 5}, {1, 1, 1, 1});
    const auto s = build_schedule(inst, Permutation({0, 1}));
    CHECK(s.start_at(1, 1) == 2);
    CHECK(s.start_at(0, 1) == 10);
    CHECK(s.makespan == 11);
}

TEST_CASE("makespan of a hand-built schedule is the max completion") {
    Schedule s;
    s.num_jobs = 2;
    s.num_stages = 2;
    s.completion = {0, 0, 9, 0};
    CHECK(makespan(s) == 9);
}

TEST_CASE("equal availability picks lowest processor ids") {
    const ProblemInstance inst(1, 1, {4}, {3}, {2});
    const auto s = build_schedule(inst, Permutation::identity(1));
    CHECK(s.processors_of(0, 0) == std::vector<int>{0, 1});
}

TEST_CASE("permutation length mismatch is rejected") {
    const ProblemInstance inst(2, 1, {1}, {1, 1}, {1, 1});
    CHECK_THROWS(build_schedule(inst, Permutation::identity(3)));
}

TEST_CASE("feasibility and oracle equivalence over 200 random instances") {
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 200; ++trial) {
        const auto inst = random_small(rng);
        const auto order = random_order(inst.num_jobs(), rng);
        const auto s = build_schedule(inst, Permutation(order));
        INFO("trial " << trial);
        REQUIRE(oracle::audit(inst, s).empty());
        REQUIRE(s.makespan == oracle::simulate_makespan(inst, order));
        const auto done = oracle::simulate(inst, order);
        REQUIRE(done == s.completion);
    }
}

TEST_CASE("makespan respects chain and area lower bounds") {
    std::mt19937_64 rng(77);
    for (int trial = 0; trial < 200; ++trial) {
        const auto inst = random_small(rng);
        const auto s = build_schedule(inst, Permutation(random_order(inst.num_jobs(), rng)));
        for (int j = 0; j < inst.num_jobs(); ++j) CHECK(s.makespan >= inst.total_work(j));
        for (int i = 0; i < inst.num_stages(); ++i) {
            Time area = 0;
            for (int j = 0; j < inst.num_jobs(); ++j) area += inst.duration(j, i) * inst.width(j, i);
            CHECK(s.makespan * inst.processors(i) >= area);
        }
    }
}

TEST_CASE("decoding is deterministic and the fast path agrees") {
    const auto inst = generate_instance(30, 5, 5, 1);
    std::mt19937_64 rng(5);
    Decoder decoder(inst);
    for (int trial = 0; trial < 20; ++trial) {
        const auto order = random_order(30, rng);
        const auto a = build_schedule(inst, Permutation(order));
        const auto b = build_schedule(inst, Permutation(order));
        CHECK(a.completion == b.completion);
        CHECK(a.assignment == b.assignment);
        CHECK(decoder.makespan(order) == a.makespan);
        CHECK(oracle::audit(inst, a).empty());
    }
}

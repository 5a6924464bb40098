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

#include <thread>

#include "support/loopback.hpp"

using namespace hfsts;
using namespace hfsts::testing;
using namespace std::chrono_literals;

namespace {

struct Cluster {
    std::vector<std::unique_ptr<Worker>> workers;
    std::vector<net::Endpoint> endpoints() const {
        std::vector<net::Endpoint> out;
        for (const auto& w : workers) out.push_back(w->endpoint());
        return out;
    }
};

Cluster cluster(int count, int lanes = 1) {
    Cluster c;
    for (int k = 0; k < count; ++k) c.workers.push_back(start_worker(lanes));
    return c;
}

SearchParams params(int iterations, std::uint64_t seed = 3) {
    SearchParams p;
    p.iterations = iterations;
    p.seed = seed;
    return p;
}

SearchResult local_run(const ProblemInstance& inst, const SearchParams& p) {
    SequentialEvaluator ev;
    return run_search(inst, p, ev);
}

void check_coverage(const Coordinator& coord, MoveIndex total) {
    for (const auto& rep : coord.reports()) {
        CAPTURE(rep.iteration);
        CHECK(rep.complete);
        CHECK(coverage_exact(rep.evaluated, {0, total}));
    }
}

void check_histories(const Coordinator& coord) {
    for (const auto& n : coord.status()) {
        const auto& s = n.history.samples();
        std::int64_t after_calibration = 0;
        for (std::size_t k = 0; k < s.size(); ++k) {
            CHECK(s[k].moves > 0);
            CHECK(s[k].speed > 0.0);
            if (k > 0) after_calibration += s[k].moves;
        }
        CHECK(after_calibration <= n.moves_assigned);
    }
}

} // namespace

TEST_CASE("coverage_exact") {
    CHECK(coverage_exact({{0, 3}, {3, 10}}, {0, 10}));
    CHECK(coverage_exact({{3, 10}, {5, 5}, {0, 3}}, {0, 10}));
    CHECK_FALSE(coverage_exact({{0, 3}, {4, 10}}, {0, 10}));
    CHECK_FALSE(coverage_exact({{0, 4}, {3, 10}}, {0, 10}));
    CHECK_FALSE(coverage_exact({{0, 3}}, {0, 10}));
    CHECK(coverage_exact({}, {4, 4}));
}

TEST_CASE("calibration initializes every history and marks unreachable nodes dead") {
    auto c = cluster(2);
    auto eps = c.endpoints();
    net::Endpoint down;
    {
        auto gone = start_worker();
        down = gone->endpoint();
        gone->kill();
    }
    eps.push_back(down);
    Coordinator coord(eps, fast_options());
    coord.calibrate();
    const auto st = coord.status();
    CHECK(st[0].history.samples().size() == 1);
    CHECK(st[1].history.samples().size() == 1);
    CHECK(st[0].history.samples()[0].speed > 0.0);
    CHECK(st[2].state == NodeState::dead);
    CHECK(coord.live_nodes() == 2);

    Coordinator nobody({down}, fast_options());
    CHECK_THROWS(nobody.calibrate());
}

TEST_CASE("one worker reproduces the local trace") {
    const auto inst = generate_instance(8, 3, 3, 11);
    auto c = cluster(1);
    Coordinator coord(c.endpoints(), fast_options());
    const auto p = params(40);
    const auto dist = run_distributed_search(inst, p, coord);
    const auto local = local_run(inst, p);
    CHECK(dist.trace == local.trace);
    CHECK(dist.best_makespan == local.best_makespan);
    check_coverage(coord, neighborhood_size(8));
    check_histories(coord);
}

TEST_CASE("three workers follow the same trajectory as one") {
    const auto inst = generate_instance(10, 5, 5, 7);
    auto c = cluster(3);
    Coordinator one({c.workers[0]->endpoint()}, fast_options());
    Coordinator three(c.endpoints(), fast_options());
    const auto p = params(100);
    const auto a = run_distributed_search(inst, p, one);
    const auto b = run_distributed_search(inst, p, three);
    CHECK(a.trace == b.trace);
    CHECK(a.trace == local_run(inst, p).trace);
    check_coverage(three, 90);
    for (const auto& n : three.status()) CHECK(n.moves_completed > 0);
}

TEST_CASE("a worker killed mid-iteration changes nothing") {
    const auto inst = generate_instance(10, 5, 5, 21);
    auto c = cluster(3);
    Coordinator coord(c.endpoints(), fast_options());
    coord.on_round_dispatched([&](int iteration, int round) {
        if (iteration == 20 && round == 0) c.workers[1]->kill();
    });
    const auto p = params(40);
    const auto dist = run_distributed_search(inst, p, coord);
    CHECK(dist.trace == local_run(inst, p).trace);
    check_coverage(coord, 90);
    check_histories(coord);
    CHECK(coord.status()[1].state == NodeState::dead);
    CHECK(coord.live_nodes() == 2);
}

TEST_CASE("tight deadlines force extra rounds without changing the result") {
    const auto inst = generate_instance(12, 3, 3, 5);
    Cluster c;
    c.workers.push_back(start_worker(1, 300us));
    c.workers.push_back(start_worker(1, 300us));
    auto opt = fast_options();
    opt.slack_factor = 0.3;
    opt.slack_constant = 0ms;
    Coordinator coord(c.endpoints(), opt);
    const auto p = params(8);
    const auto dist = run_distributed_search(inst, p, coord);
    CHECK(dist.trace == local_run(inst, p).trace);
    check_coverage(coord, neighborhood_size(12));
    int extra = 0;
    for (const auto& rep : coord.reports()) extra += rep.rounds > 1;
    CHECK(extra > 0);
    CHECK(coord.live_nodes() == 2);
}

TEST_CASE("losing every node is a fatal iteration error") {
    const auto inst = generate_instance(8, 2, 2, 5);
    auto c = cluster(2);
    Coordinator coord(c.endpoints(), fast_options());
    coord.on_round_dispatched([&](int iteration, int) {
        if (iteration == 3)
            for (auto& w : c.workers) w->kill();
    });
    CHECK_THROWS_AS(run_distributed_search(inst, params(10), coord), SearchError);
}

TEST_CASE("a node added mid-run is calibrated and used") {
    const auto inst = generate_instance(9, 3, 3, 2);
    auto c = cluster(2);
    Coordinator coord({c.workers[0]->endpoint()}, fast_options());
    coord.calibrate();
    coord.set_problem(inst);
    int added = -1;
    TraceObserver observer = [&](const TraceRecord& rec) {
        if (rec.iteration == 5) added = coord.add_node(c.workers[1]->endpoint());
    };
    const auto p = params(15);
    const auto dist = run_search(inst, p, coord, observer);
    CHECK(dist.trace == local_run(inst, p).trace);
    REQUIRE(added == 1);
    const auto st = coord.status();
    CHECK(st[1].history.samples().size() > 1);
    CHECK(st[1].moves_completed > 0);
}

TEST_CASE("super-servers answer like flat coordinators") {
    auto c = cluster(4);
    const auto inst = generate_instance(9, 3, 3, 13);
    std::mt19937_64 rng(8);

    auto super2 = start_super({c.workers[0]->endpoint(), c.workers[1]->endpoint()}, fast_options());
    auto super1 = start_super({c.workers[2]->endpoint()}, fast_options());
    auto inner = start_super({c.workers[3]->endpoint()}, fast_options());
    auto depth2 = start_super({inner->endpoint(), super1->endpoint()}, fast_options());

    Coordinator flat({c.workers[0]->endpoint(), c.workers[1]->endpoint()}, fast_options());
    flat.calibrate();
    flat.set_problem(inst);

    Client via2(super2->endpoint()), via1(super1->endpoint()), direct(c.workers[2]->endpoint()), viad(depth2->endpoint());
    std::int64_t id = 1;
    for (Client* cl : {&via2, &via1, &direct, &viad}) cl->send({id++, proto::SetProblem{instance_digest(inst), inst}});

    auto ask = [&](Client& cl, const EvalContext& ctx, NeighborhoodSlice s) {
        cl.send({id, proto::EvalRequest{instance_digest(inst), ctx.permutation, ctx.tabu, ctx.incumbent, s, 60.0}});
        auto m = cl.reply(60s);
        REQUIRE(m);
        REQUIRE(m->request_id == id++);
        const auto* r = std::get_if<proto::EvalResult>(&m->body);
        REQUIRE(r);
        CHECK(r->complete);
        CHECK(r->result.moves_evaluated == s.size());
        CHECK(r->speed > 0.0);
        return r->result;
    };

    for (int t = 0; t < 10; ++t) {
        const auto ctx = random_context(inst, rng);
        const NeighborhoodSlice all{0, neighborhood_size(9)};
        const auto expect = flat.evaluate_range(ctx, all).result;
        CHECK(same_choice(expect, evaluate_slice(ctx, all)));
        CHECK(same_choice(ask(via2, ctx, all), expect));
        CHECK(same_choice(ask(via1, ctx, all), ask(direct, ctx, all)));
        CHECK(same_choice(ask(viad, ctx, all), expect));
        const NeighborhoodSlice part{7, 50};
        CHECK(same_choice(ask(viad, ctx, part), evaluate_slice(ctx, part)));
    }
}

TEST_CASE("a super-server reports its lanes and can drive a whole search") {
    auto c = cluster(2, 2);
    auto sup = start_super(c.endpoints(), fast_options());
    Client cl(sup->endpoint());
    cl.send({1, proto::Hello{}});
    auto m = cl.reply();
    REQUIRE(m);
    CHECK(std::get<proto::Hello>(m->body).lanes == 4);
    CHECK(std::get<proto::Hello>(m->body).role == "super");

    const auto inst = generate_instance(8, 3, 3, 4);
    Coordinator coord({sup->endpoint()}, fast_options());
    const auto p = params(20);
    CHECK(run_distributed_search(inst, p, coord).trace == local_run(inst, p).trace);
}

TEST_CASE("a single job needs no evaluation") {
    const auto inst = generate_instance(1, 2, 2, 1);
    auto c = cluster(1);
    Coordinator coord(c.endpoints(), fast_options());
    const auto r = run_distributed_search(inst, params(10), coord);
    CHECK(r.best == Permutation::identity(1));
    CHECK(r.best_makespan == build_schedule(inst, r.best).makespan);
}

TEST_CASE("injected latency slows the run but keeps the trajectory") {
    const auto inst = generate_instance(8, 2, 2, 6);
    auto c = cluster(2);
    auto opt = fast_options();
    opt.message_latency = 20ms;
    Coordinator slow(c.endpoints(), opt);
    const auto p = params(6);
    const auto t0 = Clock::now();
    const auto r = run_distributed_search(inst, p, slow);
    const auto took = Clock::now() - t0;
    CHECK(r.trace == local_run(inst, p).trace);
    CHECK(took >= 6 * 40ms);
}

TEST_CASE("a node that exits gracefully is dropped at once") {
    const auto inst = generate_instance(12, 3, 3, 31);
    Cluster c;
    c.workers.push_back(start_worker(1, 1ms)); // slow enough to be mid-evaluation when stopped
    c.workers.push_back(start_worker(1, 1ms));
    Coordinator coord(c.endpoints(), fast_options());
    std::jthread stopper;
    coord.on_round_dispatched([&](int iteration, int round) {
        if (iteration == 4 && round == 0)
            stopper = std::jthread([&] {
                std::this_thread::sleep_for(5ms);
                c.workers[1]->shutdown("maintenance");
            });
    });
    const auto p = params(10);
    const auto dist = run_distributed_search(inst, p, coord);
    CHECK(dist.trace == local_run(inst, p).trace);
    check_coverage(coord, neighborhood_size(12));
    const auto st = coord.status();
    CHECK(st[1].state == NodeState::dead);
    CHECK(st[1].failures == 1);
    CHECK(coord.reports()[4].redistributed > 0);
}

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

#include <chrono>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "hfsts/coordinator.hpp"
#include "hfsts/net.hpp"
#include "hfsts/protocol.hpp"
#include "hfsts/schedule.hpp"
#include "hfsts/worker.hpp"

namespace hfsts::testing {

/// Synchronous protocol client for driving a worker by hand.
class Client {
  public:
    explicit Client(const net::Endpoint& ep) : channel_(net::connect(ep, std::chrono::seconds(2))) {}

    void send(const proto::Message& m) { channel_.write(proto::encode(m)); }
    void send_raw(std::string_view line) { channel_.write(line); }

    /// Next message, or nullopt when the peer closed or nothing arrived within timeout.
    std::optional<proto::Message> read(std::chrono::milliseconds timeout = std::chrono::seconds(10)) {
        std::string line;
        if (channel_.read_line(line, Clock::now() + timeout) != net::LineChannel::Status::line) return std::nullopt;
        return proto::decode(line);
    }

    /// Next message that is not PROGRESS.
    std::optional<proto::Message> reply(std::chrono::milliseconds timeout = std::chrono::seconds(10)) {
        for (;;) {
            auto m = read(timeout);
            if (!m || m->type() != proto::MessageType::progress) return m;
        }
    }

    bool closed(std::chrono::milliseconds timeout = std::chrono::seconds(5)) {
        std::string line;
        const auto until = Clock::now() + timeout;
        for (;;) {
            const auto st = channel_.read_line(line, until);
            if (st == net::LineChannel::Status::closed) return true;
            if (st == net::LineChannel::Status::timeout) return false;
        }
    }

  private:
    net::LineChannel channel_;
};

inline std::unique_ptr<Worker> start_worker(int lanes = 1, std::chrono::nanoseconds pace = {}) {
    auto w = std::make_unique<Worker>(std::make_unique<LocalBackend>(lanes, pace));
    w->start(net::Endpoint{"127.0.0.1", 0});
    return w;
}

inline std::unique_ptr<Worker> start_super(std::vector<net::Endpoint> children, CoordinatorOptions options = {}) {
    auto w = std::make_unique<Worker>(std::make_unique<ClusterBackend>(std::move(children), options));
    w->start(net::Endpoint{"127.0.0.1", 0});
    return w;
}

/// Short calibration keeps test runtime down.
inline CoordinatorOptions fast_options() {
    CoordinatorOptions o;
    o.calibration_budget_s = 0.2;
    o.calibration_jobs = 12;
    return o;
}

inline EvalContext random_context(const ProblemInstance& inst, std::mt19937_64& rng) {
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

inline bool same_choice(const SliceResult& a, const SliceResult& b) {
    return a.best_index == b.best_index && a.best_makespan == b.best_makespan;
}

} // namespace hfsts::testing

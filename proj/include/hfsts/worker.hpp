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

#include <atomic>
#include <chrono>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <ostream>
#include <stop_token>
#include <thread>
#include <vector>

#include "hfsts/net.hpp"
#include "hfsts/parallel_eval.hpp"
#include "hfsts/protocol.hpp"

namespace hfsts {

using ProgressFn = std::function<void(double)>;

/// What a worker daemon runs behind the protocol: local lanes, or a cluster of child nodes.
class EvalBackend {
  public:
    virtual ~EvalBackend() = default;

    virtual int lanes() const = 0;
    virtual std::string role() const = 0;

    virtual void set_problem(std::shared_ptr<const ProblemInstance> inst, const std::string& digest) = 0;

    /// Evaluates req.slice against inst; stops at move boundaries when deadline or stop fires.
    virtual proto::EvalResult eval(const ProblemInstance& inst, const proto::EvalRequest& req,
                                   Clock::time_point deadline, std::stop_token stop, const ProgressFn& progress) = 0;

    virtual proto::CalibrateResult calibrate(const proto::Calibrate& req, std::stop_token stop) = 0;
};

/// Evaluates on this host's OpenMP lanes.
class LocalBackend final : public EvalBackend {
  public:
    /// pace > 0 throttles every lane to at most one move per pace (for heterogeneity experiments).
    explicit LocalBackend(int lanes, std::chrono::nanoseconds pace = {});

    int lanes() const override { return evaluator_.lanes(); }
    std::string role() const override { return "worker"; }
    void set_problem(std::shared_ptr<const ProblemInstance>, const std::string&) override {}
    proto::EvalResult eval(const ProblemInstance& inst, const proto::EvalRequest& req, Clock::time_point deadline,
                           std::stop_token stop, const ProgressFn& progress) override;
    proto::CalibrateResult calibrate(const proto::Calibrate& req, std::stop_token stop) override;

  private:
    ParallelEvaluator evaluator_;
    std::chrono::nanoseconds pace_;
};

/// Deadline-bounded evaluation: the shared core of LocalBackend::eval, exposed for tests.
proto::EvalResult handle_eval(ParallelEvaluator& evaluator, const ProblemInstance& inst,
                              const proto::EvalRequest& req, const EvalControl& control);

/// Calibration: evaluates neighborhoods of req.instance until the budget is spent.
proto::CalibrateResult handle_calibrate(ParallelEvaluator& evaluator, const proto::Calibrate& req,
                                        std::stop_token stop, std::chrono::nanoseconds pace = {});

struct WorkerOptions {
    std::ostream* log = nullptr; // one line per request when set
};

/**
 * Protocol server. Each connection gets a thread; evaluations are serialized
 * daemon-wide. shutdown() sends EXIT_REPORT on every open connection, kill()
 * drops them silently as a crash would.
 */
class Worker {
  public:
    Worker(std::unique_ptr<EvalBackend> backend, WorkerOptions options = {});
    ~Worker();
    Worker(const Worker&) = delete;
    Worker& operator=(const Worker&) = delete;

    /// Binds and starts accepting. Throws net::NetError when the address cannot be bound.
    void start(const net::Endpoint& bind);
    net::Endpoint endpoint() const { return endpoint_; }

    void shutdown(const std::string& reason = "shutdown");
    void kill();
    /// Blocks until shutdown() or kill() has completed.
    void wait();

    bool running() const noexcept { return running_.load(); }
    std::int64_t requests_served() const noexcept { return served_.load(); }

  private:
    struct Connection {
        std::shared_ptr<net::LineChannel> channel;
        std::jthread thread;
        std::atomic<bool> done{false};
    };

    void accept_loop(std::stop_token stop);
    void serve_connection(Connection& conn, std::stop_token stop);
    void stop_all(bool graceful, const std::string& reason);

    std::shared_ptr<const ProblemInstance> find_problem(const std::string& digest);
    void log_line(std::string_view type, double seconds, std::int64_t moves);

    std::unique_ptr<EvalBackend> backend_;
    WorkerOptions options_;
    net::Listener listener_;
    net::Endpoint endpoint_;
    std::jthread acceptor_;

    std::mutex conn_mu_;
    std::vector<std::unique_ptr<Connection>> connections_;

    std::mutex problem_mu_;
    std::map<std::string, std::shared_ptr<const ProblemInstance>> problems_;

    std::mutex eval_mu_;
    std::stop_source eval_stop_;
    std::atomic<bool> running_{false};
    std::atomic<bool> graceful_{true};
    std::atomic<std::int64_t> served_{0};
    std::string exit_reason_ = "shutdown";
    std::mutex stop_mu_;
    std::mutex log_mu_;
};

} // namespace hfsts

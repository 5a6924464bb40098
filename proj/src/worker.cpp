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

#include "hfsts/worker.hpp"

#include <iomanip>

#include "hfsts/schedule.hpp"

namespace hfsts {

using namespace std::chrono_literals;

proto::EvalResult handle_eval(ParallelEvaluator& evaluator, const ProblemInstance& inst,
                              const proto::EvalRequest& req, const EvalControl& control) {
    if (req.permutation.size() != inst.num_jobs())
        throw std::invalid_argument("permutation length does not match the problem");
    if (req.slice.begin < 0 || req.slice.end > neighborhood_size(inst.num_jobs()) || req.slice.begin > req.slice.end)
        throw std::invalid_argument("slice outside the neighborhood");

    const EvalContext ctx{&inst, req.permutation, req.tabu, req.incumbent};
    const auto outcome = evaluator.evaluate_range(ctx, req.slice, control);

    proto::EvalResult r;
    r.result = outcome.result;
    r.complete = outcome.complete;
    if (!outcome.complete) r.remaining = outcome.remaining;
    r.speed = r.result.elapsed > 0.0 ? static_cast<double>(r.result.moves_evaluated) / r.result.elapsed : 0.0;
    return r;
}

proto::CalibrateResult handle_calibrate(ParallelEvaluator& evaluator, const proto::Calibrate& req,
                                        std::stop_token stop, std::chrono::nanoseconds pace) {
    if (!(req.budget_s > 0.0)) throw std::invalid_argument("calibration budget must be positive");
    const auto& inst = req.instance;
    const MoveIndex size = neighborhood_size(inst.num_jobs());
    if (size == 0) throw std::invalid_argument("calibration instance needs at least two jobs");

    const EvalContext ctx{&inst, initial_solution(inst), TabuList(), 0};
    const auto t0 = Clock::now();
    const auto end = t0 + std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(req.budget_s));

    EvalControl control;
    control.deadline = end;
    control.stop = stop;
    control.pace = pace;

    std::int64_t moves = 0;
    do {
        moves += evaluator.evaluate_range(ctx, {0, size}, control).moves_total;
    } while (Clock::now() < end && !stop.stop_requested());
    if (moves == 0) moves += evaluate_slice(ctx, {0, 1}).moves_evaluated;

    proto::CalibrateResult r;
    r.moves_evaluated = moves;
    r.elapsed_s = std::chrono::duration<double>(Clock::now() - t0).count();
    r.speed = static_cast<double>(moves) / r.elapsed_s;
    return r;
}

LocalBackend::LocalBackend(int lanes, std::chrono::nanoseconds pace) : evaluator_(lanes), pace_(pace) {}

proto::EvalResult LocalBackend::eval(const ProblemInstance& inst, const proto::EvalRequest& req,
                                     Clock::time_point deadline, std::stop_token stop, const ProgressFn& progress) {
    EvalControl control;
    control.deadline = deadline;
    control.stop = stop;
    control.pace = pace_;

    // Overall fraction from per-lane progress, weighted by lane size.
    std::mutex mu;
    std::vector<double> done(static_cast<std::size_t>(evaluator_.lanes()), 0.0);
    const auto total = static_cast<double>(std::max<MoveIndex>(1, req.slice.size()));
    if (progress)
        evaluator_.set_sink([&](const EvalEvent& ev) {
            if (ev.kind != EvalEvent::Kind::progress) return;
            double overall = 0.0;
            {
                std::lock_guard lock(mu);
                done[static_cast<std::size_t>(ev.lane)] = ev.fraction * static_cast<double>(ev.slice.size());
                for (double d : done) overall += d;
            }
            progress(std::min(1.0, overall / total));
        });
    try {
        auto r = handle_eval(evaluator_, inst, req, control);
        evaluator_.set_sink({});
        return r;
    } catch (...) {
        evaluator_.set_sink({});
        throw;
    }
}

proto::CalibrateResult LocalBackend::calibrate(const proto::Calibrate& req, std::stop_token stop) {
    return handle_calibrate(evaluator_, req, stop, pace_);
}

// ---------------------------------------------------------------------------

Worker::Worker(std::unique_ptr<EvalBackend> backend, WorkerOptions options)
    : backend_(std::move(backend)), options_(options) {}

Worker::~Worker() { shutdown(); }

void Worker::start(const net::Endpoint& bind) {
    listener_ = net::Listener::bind(bind);
    endpoint_ = listener_.local();
    if (endpoint_.host == "0.0.0.0") endpoint_.host = "127.0.0.1";
    running_ = true;
    acceptor_ = std::jthread([this](std::stop_token st) { accept_loop(st); });
}

void Worker::accept_loop(std::stop_token stop) {
    while (!stop.stop_requested()) {
        std::optional<net::Socket> sock;
        try {
            sock = listener_.accept(100ms);
        } catch (const net::NetError&) {
            return;
        }
        std::lock_guard lock(conn_mu_);
        std::erase_if(connections_, [](const auto& c) { return c->done.load(); });
        if (!sock || stop.stop_requested()) continue;
        auto conn = std::make_unique<Connection>();
        conn->channel = std::make_shared<net::LineChannel>(std::move(*sock));
        auto* raw = conn.get();
        conn->thread = std::jthread([this, raw](std::stop_token st) { serve_connection(*raw, st); });
        connections_.push_back(std::move(conn));
    }
}

std::shared_ptr<const ProblemInstance> Worker::find_problem(const std::string& digest) {
    std::lock_guard lock(problem_mu_);
    auto it = problems_.find(digest);
    return it == problems_.end() ? nullptr : it->second;
}

void Worker::log_line(std::string_view type, double seconds, std::int64_t moves) {
    if (!options_.log) return;
    std::lock_guard lock(log_mu_);
    *options_.log << type << ' ' << std::fixed << std::setprecision(4) << seconds << "s " << moves << " moves\n"
                  << std::flush;
}

void Worker::serve_connection(Connection& conn, std::stop_token stop) {
    auto& ch = *conn.channel;
    auto reply = [&](std::optional<std::int64_t> id, proto::Body body) {
        ch.write(proto::encode(proto::Message{id, std::move(body)}));
    };

    try {
        std::string line;
        while (!stop.stop_requested()) {
            const auto status = ch.read_line(line, Clock::now() + 100ms);
            if (status == net::LineChannel::Status::timeout) continue;
            if (status == net::LineChannel::Status::closed) break;

            proto::Message msg;
            try {
                msg = proto::decode(line);
            } catch (const proto::ProtocolError&) {
                break; // garbage on the wire ends this connection only
            }
            const auto id = msg.request_id;
            const auto t0 = Clock::now();
            ++served_;

            if (auto* hello = std::get_if<proto::Hello>(&msg.body)) {
                if (hello->major != proto::kVersionMajor) {
                    reply(id, proto::Error{"protocol version mismatch: worker speaks " +
                                           std::to_string(proto::kVersionMajor) + ".x"});
                    break;
                }
                reply(id, proto::Hello{proto::kVersionMajor, proto::kVersionMinor, backend_->lanes(), backend_->role()});
                log_line("HELLO", 0.0, 0);
            } else if (auto* sp = std::get_if<proto::SetProblem>(&msg.body)) {
                if (instance_digest(sp->instance) != sp->digest) {
                    reply(id, proto::Error{"digest does not match instance"});
                    continue;
                }
                auto inst = std::make_shared<const ProblemInstance>(sp->instance);
                {
                    std::lock_guard lock(problem_mu_);
                    problems_[sp->digest] = inst;
                }
                {
                    std::lock_guard lock(eval_mu_);
                    backend_->set_problem(inst, sp->digest);
                }
                log_line("SET_PROBLEM", std::chrono::duration<double>(Clock::now() - t0).count(), 0);
            } else if (auto* ev = std::get_if<proto::EvalRequest>(&msg.body)) {
                const auto deadline =
                    t0 + std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(ev->deadline_s));
                auto inst = find_problem(ev->digest);
                if (!inst) {
                    reply(id, proto::Error{"unknown problem"});
                    continue;
                }
                std::optional<proto::EvalResult> result;
                std::string failure;
                {
                    std::lock_guard lock(eval_mu_);
                    auto last_progress = Clock::now();
                    std::mutex progress_mu;
                    ProgressFn progress = [&](double f) {
                        std::lock_guard plock(progress_mu);
                        if (Clock::now() - last_progress < 100ms) return;
                        last_progress = Clock::now();
                        reply(id, proto::Progress{f});
                    };
                    try {
                        result = backend_->eval(*inst, *ev, deadline, eval_stop_.get_token(), progress);
                    } catch (const std::exception& e) {
                        failure = e.what();
                    }
                }
                if (eval_stop_.stop_requested()) break; // peer discards the partial result
                if (result) {
                    reply(id, *result);
                    log_line("EVAL", std::chrono::duration<double>(Clock::now() - t0).count(),
                             result->result.moves_evaluated);
                } else {
                    reply(id, proto::Error{"evaluation failed: " + failure});
                }
            } else if (auto* cal = std::get_if<proto::Calibrate>(&msg.body)) {
                std::optional<proto::CalibrateResult> result;
                std::string failure;
                {
                    std::lock_guard lock(eval_mu_);
                    try {
                        result = backend_->calibrate(*cal, eval_stop_.get_token());
                    } catch (const std::exception& e) {
                        failure = e.what();
                    }
                }
                if (eval_stop_.stop_requested()) break;
                if (result) {
                    reply(id, *result);
                    log_line("CALIBRATE", result->elapsed_s, result->moves_evaluated);
                } else {
                    reply(id, proto::Error{"calibration failed: " + failure});
                }
            } else if (id) {
                reply(id, proto::Error{"unexpected message " + std::string(proto::to_string(msg.type()))});
            }
        }
        if (graceful_.load() && eval_stop_.stop_requested())
            reply(std::nullopt, proto::ExitReport{"shutdown", exit_reason_});
    } catch (const std::exception&) {
        // Peer vanished or the channel was torn down by kill().
    }
    conn.channel->shutdown();
    conn.done = true;
}

void Worker::stop_all(bool graceful, const std::string& reason) {
    std::lock_guard stop_lock(stop_mu_);
    if (!running_.load()) return;
    graceful_ = graceful;
    exit_reason_ = reason;
    eval_stop_.request_stop();

    acceptor_.request_stop();
    if (acceptor_.joinable()) acceptor_.join();
    listener_.close();

    std::vector<std::unique_ptr<Connection>> conns;
    {
        std::lock_guard lock(conn_mu_);
        conns.swap(connections_);
    }
    for (auto& c : conns) {
        c->thread.request_stop();
        if (!graceful) c->channel->shutdown();
    }
    for (auto& c : conns)
        if (c->thread.joinable()) c->thread.join();

    running_ = false;
    running_.notify_all();
}

void Worker::shutdown(const std::string& reason) { stop_all(true, reason); }

void Worker::kill() { stop_all(false, "killed"); }

void Worker::wait() { running_.wait(true); }

} // namespace hfsts

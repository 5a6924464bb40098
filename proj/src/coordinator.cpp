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

#include "hfsts/coordinator.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <thread>
#include <variant>

namespace hfsts {

using namespace std::chrono_literals;

std::string_view to_string(NodeState s) noexcept {
    switch (s) {
    case NodeState::idle: return "idle";
    case NodeState::busy: return "busy";
    case NodeState::suspect: return "suspect";
    case NodeState::dead: return "dead";
    }
    return "?";
}

double NodeStatus::mean_speed() const {
    return busy_s > 0.0 ? static_cast<double>(moves_completed) / busy_s : 0.0;
}

bool coverage_exact(std::vector<NeighborhoodSlice> pieces, NeighborhoodSlice range) {
    std::erase_if(pieces, [](const NeighborhoodSlice& s) { return s.empty(); });
    std::sort(pieces.begin(), pieces.end(), [](const auto& a, const auto& b) { return a.begin < b.begin; });
    MoveIndex cursor = range.begin;
    for (const auto& p : pieces) {
        if (p.begin != cursor) return false;
        cursor = p.end;
    }
    return cursor == std::max(range.begin, range.end);
}

// ---------------------------------------------------------------------------

struct Completion {
    enum class Kind { ok, error, timeout, lost, exited, unreachable };

    int node = 0;
    std::uint64_t ticket = 0;
    Kind kind = Kind::ok;
    NeighborhoodSlice slice;
    std::variant<std::monostate, proto::Hello, proto::EvalResult, proto::CalibrateResult> payload;
    std::string detail;
};

namespace {

struct ProxyJob {
    std::uint64_t ticket = 0;
    std::variant<std::monostate, proto::EvalRequest, proto::Calibrate> request; // monostate: handshake only
    std::chrono::milliseconds timeout{0};
};

} // namespace

/// Owns the connection to one node and executes its jobs one at a time on a private thread.
class NodeProxy {
  public:
    using Sink = std::function<void(Completion)>;

    NodeProxy(int id, net::Endpoint ep, const CoordinatorOptions& options, Sink sink)
        : id_(id), ep_(std::move(ep)), options_(options), sink_(std::move(sink)),
          thread_([this](std::stop_token st) { loop(st); }) {}

    ~NodeProxy() {
        thread_.request_stop();
        {
            std::lock_guard lock(mu_);
            if (channel_) channel_->shutdown();
        }
        cv_.notify_all();
    }

    void post(ProxyJob job) {
        {
            std::lock_guard lock(mu_);
            jobs_.push_back(std::move(job));
        }
        cv_.notify_all();
    }

    void set_problem(std::shared_ptr<const proto::SetProblem> problem) {
        std::lock_guard lock(mu_);
        problem_ = std::move(problem);
    }

  private:
    void loop(std::stop_token stop) {
        while (!stop.stop_requested()) {
            ProxyJob job;
            {
                std::unique_lock lock(mu_);
                cv_.wait(lock, stop, [this] { return !jobs_.empty(); });
                if (stop.stop_requested()) return;
                job = std::move(jobs_.front());
                jobs_.pop_front();
            }
            Completion c = run(job, stop);
            c.node = id_;
            c.ticket = job.ticket;
            if (const auto* req = std::get_if<proto::EvalRequest>(&job.request)) c.slice = req->slice;
            sink_(std::move(c));
        }
    }

    void drop() {
        std::lock_guard lock(mu_);
        if (channel_) channel_->shutdown();
        channel_.reset();
        sent_digest_.clear();
    }

    void send(const proto::Message& m) {
        if (options_.message_latency.count() > 0) std::this_thread::sleep_for(options_.message_latency);
        channel_->write(proto::encode(m));
    }

    Completion fail(Completion::Kind kind, std::string detail) {
        Completion c;
        c.kind = kind;
        c.detail = std::move(detail);
        if (kind != Completion::Kind::error) drop();
        return c;
    }

    // Reads until a reply to id arrives. PROGRESS and stale replies are skipped.
    Completion await(std::int64_t id, Clock::time_point until, std::stop_token stop) {
        std::string line;
        for (;;) {
            if (stop.stop_requested()) return fail(Completion::Kind::lost, "coordinator stopping");
            const auto st = channel_->read_line(line, until);
            if (st == net::LineChannel::Status::timeout) return fail(Completion::Kind::timeout, "no reply before timeout");
            if (st == net::LineChannel::Status::closed) return fail(Completion::Kind::lost, "connection closed");
            proto::Message msg;
            try {
                msg = proto::decode(line);
            } catch (const proto::ProtocolError& e) {
                return fail(Completion::Kind::lost, std::string("protocol error: ") + e.what());
            }
            if (const auto* exit = std::get_if<proto::ExitReport>(&msg.body))
                return fail(Completion::Kind::exited, "node exited: " + exit->reason);
            if (msg.type() == proto::MessageType::progress || msg.request_id != id) continue;

            if (options_.message_latency.count() > 0) std::this_thread::sleep_for(options_.message_latency);
            Completion c;
            if (const auto* err = std::get_if<proto::Error>(&msg.body)) return fail(Completion::Kind::error, err->message);
            if (auto* h = std::get_if<proto::Hello>(&msg.body)) c.payload = *h;
            else if (auto* r = std::get_if<proto::EvalResult>(&msg.body)) c.payload = *r;
            else if (auto* k = std::get_if<proto::CalibrateResult>(&msg.body)) c.payload = *k;
            else return fail(Completion::Kind::lost, "unexpected reply " + std::string(proto::to_string(msg.type())));
            return c;
        }
    }

    std::optional<Completion> ensure_connected(std::stop_token stop) {
        if (channel_) return std::nullopt;
        try {
            auto sock = net::connect(ep_, options_.connect_timeout);
            std::lock_guard lock(mu_);
            channel_ = std::make_shared<net::LineChannel>(std::move(sock));
        } catch (const net::NetError& e) {
            return fail(Completion::Kind::unreachable, e.what());
        }
        const auto id = next_id_++;
        try {
            send(proto::Message{id, proto::Hello{proto::kVersionMajor, proto::kVersionMinor, 0, "coordinator"}});
        } catch (const net::NetError& e) {
            return fail(Completion::Kind::unreachable, e.what());
        }
        auto reply = await(id, Clock::now() + options_.connect_timeout, stop);
        if (reply.kind != Completion::Kind::ok) {
            drop();
            reply.kind = Completion::Kind::unreachable;
            return reply;
        }
        hello_ = std::get<proto::Hello>(reply.payload);
        if (hello_.major != proto::kVersionMajor)
            return fail(Completion::Kind::unreachable, "protocol version mismatch");
        return std::nullopt;
    }

    Completion run(const ProxyJob& job, std::stop_token stop) {
        if (auto failed = ensure_connected(stop)) return *failed;
        if (std::holds_alternative<std::monostate>(job.request)) {
            Completion c;
            c.payload = hello_;
            return c;
        }
        try {
            const auto id = next_id_++;
            if (const auto* req = std::get_if<proto::EvalRequest>(&job.request)) {
                std::shared_ptr<const proto::SetProblem> problem;
                {
                    std::lock_guard lock(mu_);
                    problem = problem_;
                }
                if (problem && sent_digest_ != problem->digest) {
                    send(proto::Message{next_id_++, *problem});
                    sent_digest_ = problem->digest;
                }
                send(proto::Message{id, *req});
            } else {
                send(proto::Message{id, std::get<proto::Calibrate>(job.request)});
            }
            auto c = await(id, Clock::now() + job.timeout + 2 * options_.message_latency, stop);
            if (c.kind == Completion::Kind::ok && std::holds_alternative<proto::Hello>(c.payload))
                return fail(Completion::Kind::lost, "unexpected HELLO");
            return c;
        } catch (const net::NetError& e) {
            return fail(Completion::Kind::lost, e.what());
        }
    }

    int id_;
    net::Endpoint ep_;
    CoordinatorOptions options_;
    Sink sink_;

    std::mutex mu_;
    std::condition_variable_any cv_;
    std::deque<ProxyJob> jobs_;
    std::shared_ptr<const proto::SetProblem> problem_;

    std::shared_ptr<net::LineChannel> channel_;
    std::string sent_digest_;
    proto::Hello hello_;
    std::int64_t next_id_ = 1;

    std::jthread thread_; // last: starts after every member above is constructed
};

// ---------------------------------------------------------------------------

Coordinator::Coordinator(std::vector<net::Endpoint> nodes, CoordinatorOptions options)
    : options_(options), predictor_(options.prediction_window) {
    if (nodes.empty()) throw std::invalid_argument("coordinator needs at least one node");
    for (auto& ep : nodes) {
        NodeStatus st;
        st.id = static_cast<int>(nodes_.size());
        st.endpoint = ep;
        nodes_.push_back(std::move(st));
    }
    for (const auto& st : nodes_)
        proxies_.push_back(std::make_unique<NodeProxy>(st.id, st.endpoint, options_, [this](Completion c) {
            {
                std::lock_guard lock(queue_mu_);
                queue_.push_back(std::move(c));
            }
            queue_cv_.notify_all();
        }));
}

Coordinator::~Coordinator() { proxies_.clear(); }

Completion Coordinator::next_completion() {
    std::unique_lock lock(queue_mu_);
    queue_cv_.wait(lock, [this] { return !queue_.empty(); });
    Completion c = std::move(queue_.front());
    queue_.pop_front();
    return c;
}

int Coordinator::live_nodes() const {
    return static_cast<int>(std::count_if(nodes_.begin(), nodes_.end(),
                                          [](const NodeStatus& n) { return n.state != NodeState::dead; }));
}

int Coordinator::total_lanes() const {
    int sum = 0;
    for (const auto& n : nodes_)
        if (n.state != NodeState::dead) sum += n.lanes;
    return std::max(sum, 1);
}

void Coordinator::strike(NodeStatus& node) {
    ++node.failures;
    node.state = ++node.strikes >= options_.max_strikes ? NodeState::dead : NodeState::suspect;
}

double Coordinator::predicted_speed(const NodeStatus& node) const {
    if (node.state == NodeState::dead || node.history.empty()) return 0.0;
    return predictor_.predict(node.history);
}

int Coordinator::connect() {
    std::vector<std::uint64_t> tickets;
    for (auto& n : nodes_) {
        if (n.state == NodeState::dead) continue;
        proxies_[static_cast<std::size_t>(n.id)]->post(ProxyJob{next_ticket_, std::monostate{}, options_.connect_timeout});
        tickets.push_back(next_ticket_++);
    }
    for (std::size_t k = 0; k < tickets.size(); ++k) {
        auto c = next_completion();
        auto& n = nodes_[static_cast<std::size_t>(c.node)];
        if (c.kind == Completion::Kind::ok)
            n.lanes = std::get<proto::Hello>(c.payload).lanes;
        else
            n.state = NodeState::dead;
    }
    return live_nodes();
}

proto::CalibrateResult Coordinator::calibrate_with(const ProblemInstance& inst, double budget_s) {
    const auto timeout = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::duration<double>(budget_s)) +
                         options_.grace + options_.connect_timeout;
    std::size_t posted = 0;
    for (auto& n : nodes_) {
        if (n.state == NodeState::dead) continue;
        proxies_[static_cast<std::size_t>(n.id)]->post(ProxyJob{next_ticket_++, proto::Calibrate{inst, budget_s}, timeout});
        n.state = NodeState::busy;
        ++posted;
    }

    proto::CalibrateResult total;
    for (std::size_t k = 0; k < posted; ++k) {
        auto c = next_completion();
        auto& n = nodes_[static_cast<std::size_t>(c.node)];
        const auto* r = std::get_if<proto::CalibrateResult>(&c.payload);
        if (c.kind != Completion::Kind::ok || !r || !(r->speed > 0.0) || r->moves_evaluated <= 0) {
            n.state = NodeState::dead;
            continue;
        }
        n.history.clear();
        n.history.record(r->moves_evaluated, r->speed);
        n.state = NodeState::idle;
        total.speed += r->speed;
        total.moves_evaluated += r->moves_evaluated;
        total.elapsed_s = std::max(total.elapsed_s, r->elapsed_s);
    }
    // Lane counts come with the handshake made on the first request.
    if (live_nodes() == 0) throw std::runtime_error("calibration failed: no reachable nodes");
    calibrated_ = true;
    return total;
}

void Coordinator::calibrate() {
    if (!calibration_instance_)
        calibration_instance_ = generate_instance(options_.calibration_jobs, options_.calibration_stages,
                                                  options_.calibration_machines, options_.seed);
    connect();
    if (live_nodes() == 0) throw std::runtime_error("calibration failed: no reachable nodes");
    calibrate_with(*calibration_instance_, options_.calibration_budget_s);
}

int Coordinator::add_node(const net::Endpoint& ep) {
    NodeStatus st;
    st.id = static_cast<int>(nodes_.size());
    st.endpoint = ep;
    nodes_.push_back(st);
    proxies_.push_back(std::make_unique<NodeProxy>(st.id, ep, options_, [this](Completion c) {
        {
            std::lock_guard lock(queue_mu_);
            queue_.push_back(std::move(c));
        }
        queue_cv_.notify_all();
    }));
    auto& proxy = *proxies_.back();
    if (problem_) proxy.set_problem(problem_);

    auto& node = nodes_.back();
    proxy.post(ProxyJob{next_ticket_++, std::monostate{}, options_.connect_timeout});
    auto hello = next_completion();
    if (hello.kind != Completion::Kind::ok) {
        node.state = NodeState::dead;
        return node.id;
    }
    node.lanes = std::get<proto::Hello>(hello.payload).lanes;

    if (!calibration_instance_)
        calibration_instance_ = generate_instance(options_.calibration_jobs, options_.calibration_stages,
                                                  options_.calibration_machines, options_.seed);
    const auto timeout = std::chrono::duration_cast<std::chrono::milliseconds>(
                             std::chrono::duration<double>(options_.calibration_budget_s)) + options_.grace;
    proxy.post(ProxyJob{next_ticket_++, proto::Calibrate{*calibration_instance_, options_.calibration_budget_s}, timeout});
    auto c = next_completion();
    const auto* r = std::get_if<proto::CalibrateResult>(&c.payload);
    if (c.kind != Completion::Kind::ok || !r || !(r->speed > 0.0) || r->moves_evaluated <= 0)
        node.state = NodeState::dead;
    else
        node.history.record(r->moves_evaluated, r->speed);
    return node.id;
}

void Coordinator::set_problem(const ProblemInstance& inst) {
    if (problem_ && problem_->instance == inst) return;
    problem_ = std::make_shared<const proto::SetProblem>(proto::SetProblem{instance_digest(inst), inst});
    for (auto& p : proxies_) p->set_problem(problem_);
}

std::uint64_t Coordinator::post_eval(int node, const EvalContext& ctx, NeighborhoodSlice slice, double deadline_s) {
    proto::EvalRequest req{problem_->digest, ctx.permutation, ctx.tabu, ctx.incumbent, slice, deadline_s};
    const auto timeout = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::duration<double>(deadline_s)) +
                         options_.grace;
    const auto ticket = next_ticket_++;
    proxies_[static_cast<std::size_t>(node)]->post(ProxyJob{ticket, std::move(req), timeout});
    return ticket;
}

SliceResult Coordinator::evaluate(const EvalContext& ctx) {
    if (!calibrated_) calibrate();
    set_problem(*ctx.instance);
    const NeighborhoodSlice all{0, neighborhood_size(ctx.permutation.size())};
    auto r = evaluate_range(ctx, all);
    ++iteration_;
    return r.result;
}

Coordinator::RangeResult Coordinator::evaluate_range(const EvalContext& ctx, NeighborhoodSlice range,
                                                     std::optional<Clock::time_point> deadline, std::stop_token stop) {
    if (!problem_) throw std::logic_error("evaluate_range before set_problem");
    const auto t0 = Clock::now();

    IterationReport report;
    report.iteration = iteration_;
    report.planned.assign(nodes_.size(), 0);

    std::vector<std::pair<NeighborhoodSlice, SliceResult>> pieces;
    std::vector<NeighborhoodSlice> pending;
    if (!range.empty()) pending.push_back(range);

    while (!pending.empty()) {
        if (deadline && Clock::now() >= *deadline) break;
        if (stop.stop_requested()) break;

        std::vector<double> speeds(nodes_.size(), 0.0);
        for (const auto& n : nodes_) speeds[static_cast<std::size_t>(n.id)] = predicted_speed(n);
        if (std::none_of(speeds.begin(), speeds.end(), [](double s) { return s > 0.0; })) {
            std::vector<NeighborhoodSlice> covered;
            for (const auto& p : pieces) covered.push_back(p.first);
            throw IterationError("no live node left to cover the neighborhood", std::move(covered));
        }

        // Plan over the concatenation of pending slices, then map back to real indices.
        MoveIndex pending_total = 0;
        for (const auto& s : pending) pending_total += s.size();
        const auto plan = plan_partition(speeds, pending_total);

        struct Dispatch {
            int node;
            NeighborhoodSlice slice;
        };
        std::vector<Dispatch> dispatches;
        std::size_t cursor_slice = 0;
        MoveIndex cursor_offset = 0;
        for (std::size_t node = 0; node < plan.slices.size(); ++node) {
            MoveIndex want = plan.slices[node].size();
            if (report.rounds == 0) report.planned[node] = want;
            while (want > 0) {
                const auto& src = pending[cursor_slice];
                const MoveIndex take = std::min(want, src.size() - cursor_offset);
                dispatches.push_back({static_cast<int>(node),
                                      {src.begin + cursor_offset, src.begin + cursor_offset + take}});
                want -= take;
                cursor_offset += take;
                if (cursor_offset == src.size()) {
                    ++cursor_slice;
                    cursor_offset = 0;
                }
            }
        }
        if (report.rounds > 0) report.redistributed += pending_total;

        std::map<std::uint64_t, Dispatch> outstanding;
        for (const auto& d : dispatches) {
            auto& n = nodes_[static_cast<std::size_t>(d.node)];
            const double expected_s = static_cast<double>(d.slice.size()) / speeds[static_cast<std::size_t>(d.node)];
            double deadline_s = expected_s * options_.slack_factor +
                                std::chrono::duration<double>(options_.slack_constant).count();
            deadline_s *= static_cast<double>(1 << std::min(report.rounds, 10)); // extra rounds get more slack
            if (deadline)
                deadline_s = std::min(deadline_s,
                                      std::max(0.0, std::chrono::duration<double>(*deadline - Clock::now()).count()));
            outstanding.emplace(post_eval(d.node, ctx, d.slice, deadline_s), d);
            n.moves_assigned += d.slice.size();
            ++n.requests;
            if (n.state == NodeState::idle) n.state = NodeState::busy;
        }
        if (round_hook_) round_hook_(iteration_, report.rounds);
        ++report.rounds;

        std::vector<NeighborhoodSlice> next;
        while (!outstanding.empty()) {
            auto c = next_completion();
            auto it = outstanding.find(c.ticket);
            if (it == outstanding.end()) continue;
            const auto slice = it->second.slice;
            outstanding.erase(it);
            auto& n = nodes_[static_cast<std::size_t>(c.node)];

            using Kind = Completion::Kind;
            const auto* r = std::get_if<proto::EvalResult>(&c.payload);
            bool sound = c.kind == Kind::ok && r;
            if (sound) {
                const MoveIndex covered_end = r->complete ? slice.end : r->remaining->begin;
                sound = covered_end >= slice.begin && covered_end <= slice.end &&
                        r->result.moves_evaluated == covered_end - slice.begin &&
                        (r->complete || r->remaining->end == slice.end) &&
                        (!r->result.best_index || (*r->result.best_index >= slice.begin && *r->result.best_index < covered_end));
            }
            if (!sound) {
                next.push_back(slice);
                if (c.kind == Kind::exited || c.kind == Kind::unreachable) {
                    n.state = NodeState::dead;
                    ++n.failures;
                } else {
                    strike(n);
                }
                continue;
            }

            const MoveIndex covered_end = r->complete ? slice.end : r->remaining->begin;
            if (covered_end > slice.begin) pieces.emplace_back(NeighborhoodSlice{slice.begin, covered_end}, r->result);
            if (r->result.moves_evaluated > 0) n.strikes = 0;
            n.moves_completed += r->result.moves_evaluated;
            n.busy_s += r->result.elapsed;
            if (r->result.moves_evaluated > 0 && r->speed > 0.0) n.history.record(r->result.moves_evaluated, r->speed);
            if (!r->complete) {
                next.push_back(*r->remaining);
                if (r->result.moves_evaluated == 0) strike(n);
            }
            if (n.state != NodeState::dead) n.state = n.strikes > 0 ? NodeState::suspect : NodeState::idle;
        }

        for (auto& n : nodes_)
            if (n.state == NodeState::busy) n.state = NodeState::idle;

        std::sort(next.begin(), next.end(), [](const auto& a, const auto& b) { return a.begin < b.begin; });
        pending.clear();
        for (const auto& s : next) {
            if (s.empty()) continue;
            if (!pending.empty() && pending.back().end == s.begin)
                pending.back().end = s.end;
            else
                pending.push_back(s);
        }
    }

    RangeResult out;
    std::sort(pieces.begin(), pieces.end(), [](const auto& a, const auto& b) { return a.first.begin < b.first.begin; });
    MoveIndex cursor = range.begin;
    for (const auto& [slice, result] : pieces) {
        if (slice.begin != cursor) break; // only the contiguous prefix counts
        out.result = merge_results(out.result, result);
        cursor = slice.end;
        report.evaluated.push_back(slice);
    }
    out.complete = cursor >= range.end;
    if (!out.complete) out.remaining = NeighborhoodSlice{cursor, range.end};
    out.result.moves_evaluated = cursor - range.begin;
    out.result.elapsed = std::chrono::duration<double>(Clock::now() - t0).count();
    report.complete = out.complete;

    if (!deadline && !stop.stop_requested() && !out.complete) {
        // Only reachable if results overlapped or left a hole, which the checks above exclude.
        throw std::logic_error("coordinator lost track of neighborhood coverage");
    }
    reports_.push_back(std::move(report));
    return out;
}

SearchResult run_distributed_search(const ProblemInstance& inst, const SearchParams& params, Coordinator& coordinator,
                                    const TraceObserver& observer) {
    if (!coordinator.calibrated()) coordinator.calibrate();
    coordinator.set_problem(inst);
    return run_search(inst, params, coordinator, observer);
}

// ---------------------------------------------------------------------------

ClusterBackend::ClusterBackend(std::vector<net::Endpoint> children, CoordinatorOptions options)
    : coordinator_(std::move(children), options) {
    coordinator_.connect();
}

void ClusterBackend::set_problem(std::shared_ptr<const ProblemInstance> inst, const std::string&) {
    coordinator_.set_problem(*inst);
}

proto::EvalResult ClusterBackend::eval(const ProblemInstance& inst, const proto::EvalRequest& req,
                                       Clock::time_point deadline, std::stop_token stop, const ProgressFn&) {
    if (!coordinator_.calibrated()) coordinator_.calibrate();
    coordinator_.set_problem(inst);
    const EvalContext ctx{&inst, req.permutation, req.tabu, req.incumbent};
    const auto r = coordinator_.evaluate_range(ctx, req.slice, deadline, stop);

    proto::EvalResult out;
    out.result = r.result;
    out.complete = r.complete;
    if (!r.complete) out.remaining = r.remaining;
    out.speed = r.result.elapsed > 0.0 ? static_cast<double>(r.result.moves_evaluated) / r.result.elapsed : 0.0;
    return out;
}

proto::CalibrateResult ClusterBackend::calibrate(const proto::Calibrate& req, std::stop_token) {
    coordinator_.connect();
    return coordinator_.calibrate_with(req.instance, req.budget_s);
}

} // namespace hfsts

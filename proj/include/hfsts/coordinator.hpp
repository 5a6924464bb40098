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
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <stop_token>
#include <vector>

#include "hfsts/balance.hpp"
#include "hfsts/net.hpp"
#include "hfsts/protocol.hpp"
#include "hfsts/search.hpp"
#include "hfsts/worker.hpp"

namespace hfsts {

struct CoordinatorOptions {
    /// Worker deadline = predicted slice duration * slack_factor + slack_constant.
    double slack_factor = 2.0;
    std::chrono::milliseconds slack_constant{250};
    /// How long past the worker deadline the channel may stay silent before the node is timed out.
    std::chrono::milliseconds grace{1000};
    std::chrono::milliseconds connect_timeout{2000};
    /// Consecutive failed requests (timeouts, dropped connections, errors, no progress) before a node is dead.
    int max_strikes = 2;

    double calibration_budget_s = 2.0;
    int calibration_jobs = 30;
    int calibration_stages = 5;
    int calibration_machines = 5;
    std::uint64_t seed = 1;

    /// Prediction window in history entries; 0 uses the whole history.
    std::size_t prediction_window = 0;

    /// Artificial one-way delay applied to every request and reply.
    std::chrono::milliseconds message_latency{0};
};

enum class NodeState { idle, busy, suspect, dead };
std::string_view to_string(NodeState s) noexcept;

struct NodeStatus {
    int id = 0;
    net::Endpoint endpoint;
    NodeState state = NodeState::idle;
    int lanes = 0;
    int strikes = 0;
    std::int64_t moves_assigned = 0;
    std::int64_t moves_completed = 0;
    std::int64_t requests = 0;
    std::int64_t failures = 0;
    double busy_s = 0.0;
    NodePerfHistory history;

    double mean_speed() const;
};

/// Bookkeeping for one evaluate_range call.
struct IterationReport {
    int iteration = 0;
    int rounds = 0;
    std::vector<NeighborhoodSlice> evaluated; // covered prefix pieces, in index order
    std::vector<MoveIndex> planned;           // first-round slice size per node id
    MoveIndex redistributed = 0;              // moves dispatched again in extra rounds
    bool complete = true;
};

/// True when pieces are disjoint and their union is exactly range.
bool coverage_exact(std::vector<NeighborhoodSlice> pieces, NeighborhoodSlice range);

/// The neighborhood could not be covered because every node died.
class IterationError : public std::runtime_error {
  public:
    IterationError(const std::string& what, std::vector<NeighborhoodSlice> covered)
        : std::runtime_error(what), covered(std::move(covered)) {}
    std::vector<NeighborhoodSlice> covered;
};

class NodeProxy;
struct Completion;

/**
 * Load balancer over remote evaluation nodes.
 *
 * One NodeProxy thread per node performs request/response and timeout
 * monitoring and reports back through a completion queue; all search and
 * balancing state lives in the thread calling evaluate().
 *
 * Every evaluate() covers the neighborhood exactly once: slices that come
 * back incomplete or fail are re-planned over the remaining live nodes in
 * extra rounds, and the chosen move is the global smallest (makespan, index),
 * so results do not depend on topology, timing or failures.
 */
class Coordinator final : public Evaluator {
  public:
    explicit Coordinator(std::vector<net::Endpoint> nodes, CoordinatorOptions options = {});
    ~Coordinator() override;
    Coordinator(const Coordinator&) = delete;
    Coordinator& operator=(const Coordinator&) = delete;

    /// HELLO handshake with every node; unreachable ones are marked dead. Returns the live count.
    int connect();

    /// Calibration round on a generated instance; initializes every history. Throws if none responds.
    void calibrate();
    /// Calibration on a caller-supplied instance; returns the aggregate (sum of speeds and moves).
    proto::CalibrateResult calibrate_with(const ProblemInstance& inst, double budget_s);
    bool calibrated() const noexcept { return calibrated_; }

    /// Registers a node mid-run and calibrates it before it receives work.
    int add_node(const net::Endpoint& ep);

    void set_problem(const ProblemInstance& inst);

    SliceResult evaluate(const EvalContext& ctx) override;

    /// Covers range, or as much of its prefix as fits before deadline.
    struct RangeResult {
        SliceResult result; // best over [range.begin, remaining.begin)
        bool complete = true;
        NeighborhoodSlice remaining;
    };
    RangeResult evaluate_range(const EvalContext& ctx, NeighborhoodSlice range,
                               std::optional<Clock::time_point> deadline = {}, std::stop_token stop = {});

    int live_nodes() const;
    int total_lanes() const;
    std::vector<NodeStatus> status() const { return nodes_; }
    const std::vector<IterationReport>& reports() const noexcept { return reports_; }
    const CoordinatorOptions& options() const noexcept { return options_; }

    /// Test hook: runs after each round's requests have been sent.
    void on_round_dispatched(std::function<void(int iteration, int round)> hook) { round_hook_ = std::move(hook); }

  private:
    std::uint64_t post_eval(int node, const EvalContext& ctx, NeighborhoodSlice slice, double deadline_s);
    Completion next_completion();
    void strike(NodeStatus& node);
    double predicted_speed(const NodeStatus& node) const;

    CoordinatorOptions options_;
    std::vector<NodeStatus> nodes_;
    std::vector<std::unique_ptr<NodeProxy>> proxies_;

    std::mutex queue_mu_;
    std::condition_variable queue_cv_;
    std::deque<Completion> queue_;
    std::uint64_t next_ticket_ = 1;

    std::shared_ptr<const proto::SetProblem> problem_;
    std::optional<ProblemInstance> calibration_instance_;
    bool calibrated_ = false;
    int iteration_ = 0;
    std::vector<IterationReport> reports_;
    std::function<void(int, int)> round_hook_;
    WeightedAveragePredictor predictor_;
};

/// Calibrates, then runs the tabu search with the coordinator as the neighborhood evaluator.
SearchResult run_distributed_search(const ProblemInstance& inst, const SearchParams& params, Coordinator& coordinator,
                                    const TraceObserver& observer = {});

/// Serves the worker protocol on top of child nodes, so a whole subtree looks like one worker.
class ClusterBackend final : public EvalBackend {
  public:
    ClusterBackend(std::vector<net::Endpoint> children, CoordinatorOptions options = {});

    int lanes() const override { return coordinator_.total_lanes(); }
    std::string role() const override { return "super"; }
    void set_problem(std::shared_ptr<const ProblemInstance> inst, const std::string& digest) override;
    proto::EvalResult eval(const ProblemInstance& inst, const proto::EvalRequest& req, Clock::time_point deadline,
                           std::stop_token stop, const ProgressFn& progress) override;
    proto::CalibrateResult calibrate(const proto::Calibrate& req, std::stop_token stop) override;

    Coordinator& coordinator() noexcept { return coordinator_; }

  private:
    Coordinator coordinator_;
};

} // namespace hfsts

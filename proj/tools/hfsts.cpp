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

#include <csignal>
#include <cstdlib>
#include <iostream>
#include <pthread.h>

#include "common.hpp"
#include "hfsts/parallel_eval.hpp"

namespace hfsts::cli {

int lanes_from_env_or(int fallback) {
    if (const char* env = std::getenv("HFSTS_LANES")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0 && v <= 4096) return static_cast<int>(v);
        std::cerr << "ignoring invalid HFSTS_LANES=" << env << "\n";
    }
    return fallback;
}

namespace {

struct GenArgs {
    int jobs = 10, stages = 5, machines = 5;
    std::uint64_t seed = 1;
    std::string out;
};

int run_gen(const GenArgs& a) {
    const auto text = serialize_instance(generate_instance(a.jobs, a.stages, a.machines, a.seed));
    if (a.out.empty()) {
        std::cout << text << "\n";
    } else {
        std::ofstream(a.out) << text << "\n";
        std::cerr << "wrote " << a.out << " digest " << instance_digest(parse_instance(text)) << "\n";
    }
    return 0;
}

struct SolveArgs {
    std::string instance;
    SearchParams params;
    std::vector<std::string> nodes;
    int lanes = 0;
    double calibration_s = 2.0;
    int latency_ms = 0;
    bool quiet = false;
};

int run_solve(const SolveArgs& a) {
    const auto inst = parse_instance(read_file(a.instance));
    const int n = inst.num_jobs();
    TraceObserver observer;
    if (!a.quiet)
        observer = [n](const TraceRecord& r) { std::cout << trace_json(r, n).dump() << "\n"; };

    nlohmann::json summary;
    summary["digest"] = instance_digest(inst);
    summary["seed"] = a.params.seed;
    summary["iterations"] = a.params.iterations;

    const auto t0 = Clock::now();
    SearchResult result;
    std::vector<NodeStatus> nodes;
    if (a.nodes.empty()) {
        const int lanes = a.lanes > 0 ? a.lanes : lanes_from_env_or(default_lane_count());
        ParallelEvaluator evaluator(lanes);
        result = run_search(inst, a.params, evaluator, observer);
        summary["lanes"] = lanes;
    } else {
        CoordinatorOptions opt;
        opt.calibration_budget_s = a.calibration_s;
        opt.seed = a.params.seed;
        opt.message_latency = std::chrono::milliseconds(a.latency_ms);
        Coordinator coord(parse_endpoints(a.nodes), opt);
        result = run_distributed_search(inst, a.params, coord, observer);
        nodes = coord.status();
        MoveIndex redistributed = 0;
        for (const auto& rep : coord.reports()) redistributed += rep.redistributed;
        summary["redistributed_moves"] = redistributed;
    }
    const double wall = std::chrono::duration<double>(Clock::now() - t0).count();

    summary["initial_makespan"] = result.initial_makespan;
    summary["best_makespan"] = result.best_makespan;
    summary["best"] = std::vector<int>(result.best.order().begin(), result.best.order().end());
    summary["wall_s"] = wall;
    summary["trace_hash"] = hex64(trace_hash(result.trace));
    summary["nodes"] = nlohmann::json::array();
    for (const auto& node : nodes) summary["nodes"].push_back(node_json(node, wall));
    std::cout << nlohmann::json{{"summary", summary}}.dump() << "\n";
    return 0;
}

/// Blocks SIGINT/SIGTERM in every thread so sigwait can pick them up.
sigset_t block_termination_signals() {
    sigset_t set;
    sigemptyset(&set);
    sigaddset(&set, SIGINT);
    sigaddset(&set, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &set, nullptr);
    return set;
}

int serve_until_signal(Worker& worker, const sigset_t& set) {
    std::cerr << "listening on " << worker.endpoint().str() << std::endl;
    int sig = 0;
    sigwait(&set, &sig);
    std::cerr << "received " << (sig == SIGTERM ? "SIGTERM" : "SIGINT") << ", shutting down" << std::endl;
    worker.shutdown(sig == SIGTERM ? "terminated" : "interrupted");
    return 0;
}

int run_worker(const std::string& bind, int lanes, int pace_us) {
    const auto set = block_termination_signals();
    const int count = lanes > 0 ? lanes : lanes_from_env_or(default_lane_count());
    WorkerOptions opt;
    opt.log = &std::cerr;
    Worker worker(std::make_unique<LocalBackend>(count, std::chrono::microseconds(pace_us)), opt);
    worker.start(net::Endpoint::parse(bind));
    std::cerr << "worker with " << count << " lanes" << std::endl;
    return serve_until_signal(worker, set);
}

int run_super(const std::string& bind, const std::vector<std::string>& children, double calibration_s) {
    const auto set = block_termination_signals();
    CoordinatorOptions opt;
    opt.calibration_budget_s = calibration_s;
    auto backend = std::make_unique<ClusterBackend>(parse_endpoints(children), opt);
    if (backend->coordinator().live_nodes() == 0) throw std::runtime_error("no reachable child node");
    WorkerOptions wopt;
    wopt.log = &std::cerr;
    Worker worker(std::move(backend), wopt);
    worker.start(net::Endpoint::parse(bind));
    return serve_until_signal(worker, set);
}

} // namespace
} // namespace hfsts::cli

int main(int argc, char** argv) {
    using namespace hfsts::cli;
    CLI::App app{"Tabu search for hybrid flow shops with multiprocessor tasks"};
    app.require_subcommand(1);

    GenArgs gen;
    auto* g = app.add_subcommand("gen", "Generate a random instance as JSON");
    g->add_option("-n,--jobs", gen.jobs, "Number of jobs")->check(CLI::PositiveNumber);
    g->add_option("-m,--stages", gen.stages, "Number of stages")->check(CLI::PositiveNumber);
    g->add_option("--machines", gen.machines, "Processors per stage")->check(CLI::PositiveNumber);
    g->add_option("--seed", gen.seed, "Generator seed");
    g->add_option("-o,--out", gen.out, "Output file (default stdout)");

    SolveArgs solve;
    auto* s = app.add_subcommand("solve", "Run the tabu search, locally or over worker nodes");
    s->add_option("--instance", solve.instance, "Instance JSON file")->required()->check(CLI::ExistingFile);
    s->add_option("--iterations", solve.params.iterations, "Iterations")->check(CLI::NonNegativeNumber);
    s->add_option("--seed", solve.params.seed, "Seed for diversification and calibration");
    s->add_option("--nodes", solve.nodes, "Worker endpoints host:port")->delimiter(',');
    s->add_option("--lanes", solve.lanes, "Local lanes (default: physical cores or HFSTS_LANES)");
    s->add_option("--tenure", solve.params.tenure, "Tabu tenure")->check(CLI::NonNegativeNumber);
    s->add_option("--diversify-after", solve.params.diversify_after, "Non-improving iterations before diversification");
    s->add_option("--calibration", solve.calibration_s, "Calibration budget in seconds")->check(CLI::PositiveNumber);
    s->add_option("--latency-ms", solve.latency_ms, "Artificial delay per message")->check(CLI::NonNegativeNumber);
    s->add_flag("-q,--quiet", solve.quiet, "Print only the summary");

    std::string bind = "0.0.0.0:7070";
    int lanes = 0, pace_us = 0;
    auto* w = app.add_subcommand("worker", "Serve neighborhood evaluation over TCP");
    w->add_option("--bind", bind, "Listen address host:port");
    w->add_option("--lanes", lanes, "Evaluation lanes (default: physical cores or HFSTS_LANES)");
    w->add_option("--pace-us", pace_us, "Throttle: minimum microseconds per move and lane")->check(CLI::NonNegativeNumber);

    std::vector<std::string> children;
    double super_calibration = 2.0;
    auto* sup = app.add_subcommand("super", "Serve the worker protocol on top of child nodes");
    sup->add_option("--bind", bind, "Listen address host:port");
    sup->add_option("--children", children, "Child endpoints host:port")->required()->delimiter(',');
    sup->add_option("--calibration", super_calibration, "Calibration budget in seconds")->check(CLI::PositiveNumber);

    auto* bench = add_bench_command(app);

    CLI11_PARSE(app, argc, argv);
    try {
        if (*g) return run_gen(gen);
        if (*s) return run_solve(solve);
        if (*w) return run_worker(bind, lanes, pace_us);
        if (*sup) return run_super(bind, children, super_calibration);
        if (*bench) return run_bench();
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

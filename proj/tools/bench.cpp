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

#include <algorithm>
#include <iostream>
#include <memory>

#include "common.hpp"
#include "hfsts/parallel_eval.hpp"

namespace hfsts::cli {

namespace {

using Size = std::pair<int, int>; // (jobs, stages)

struct BenchArgs {
    std::string grid = "default";
    int iterations = 100;
    std::uint64_t seed = 1;
    int machines = 5;
    int repeats = 1;
    int tenure = 7;
    int diversify_after = 20;
    std::string out;

    std::vector<int> lanes;

    std::vector<std::string> nodes;
    int spawn_local = 0;
    int spawn_lanes = 1;
    std::vector<int> hosts;
    int latency_ms = 0;
    double calibration_s = 2.0;

    std::string verify_file;
};

BenchArgs args;
CLI::App* local_cmd = nullptr;
CLI::App* dist_cmd = nullptr;
CLI::App* verify_cmd = nullptr;

std::vector<Size> parse_grid(const std::string& grid, bool distributed) {
    if (grid == "default" || grid == "full") {
        const std::vector<int> jobs = distributed ? std::vector<int>{50, 30} : std::vector<int>{10, 30, 50};
        const std::vector<int> stages = grid == "full" ? std::vector<int>{2, 5, 8, 10} : std::vector<int>{2, 5, 10};
        std::vector<Size> out;
        for (int n : jobs)
            for (int m : stages) out.emplace_back(n, m);
        return out;
    }
    std::vector<Size> out; // "n:m,n:m"
    std::stringstream ss(grid);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto colon = item.find(':');
        if (colon == std::string::npos) throw std::runtime_error("grid entries look like n:m, got '" + item + "'");
        out.emplace_back(std::stoi(item.substr(0, colon)), std::stoi(item.substr(colon + 1)));
    }
    if (out.empty()) throw std::runtime_error("empty grid");
    return out;
}

SearchParams search_params() {
    SearchParams p;
    p.iterations = args.iterations;
    p.seed = args.seed;
    p.tenure = args.tenure;
    p.diversify_after = args.diversify_after;
    return p;
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const auto k = v.size() / 2;
    return v.size() % 2 ? v[k] : 0.5 * (v[k - 1] + v[k]);
}

nlohmann::json config_json(const std::string& mode, const std::vector<Size>& grid, const std::vector<int>& columns) {
    nlohmann::json g = nlohmann::json::array();
    for (const auto& [n, m] : grid) g.push_back({n, m});
    nlohmann::json j{{"mode", mode},
                     {"seed", args.seed},
                     {"iterations", args.iterations},
                     {"machines", args.machines},
                     {"tenure", args.tenure},
                     {"diversify_after", args.diversify_after},
                     {"repeats", args.repeats},
                     {"grid", g},
                     {mode == "local" ? "lanes" : "hosts", columns}};
    if (mode == "dist") {
        j["latency_ms"] = args.latency_ms;
        j["calibration_s"] = args.calibration_s;
    }
    return j;
}

struct Output {
    std::ofstream file;
    std::ostream* os = &std::cout;
    explicit Output(const std::string& path) {
        if (path.empty()) return;
        file.open(path);
        if (!file) throw std::runtime_error("cannot write " + path);
        os = &file;
    }
    std::ostream& operator*() { return *os; }
};

void write_row(std::ostream& os, const Size& size, int column, double duration, double baseline) {
    os << size.first << ',' << size.second << ',' << column << ',' << std::fixed << std::setprecision(4) << duration
       << ',' << std::setprecision(3) << (duration > 0.0 ? baseline / duration : 0.0) << '\n'
       << std::defaultfloat << std::flush;
}

struct Measured {
    double duration = 0.0;
    SearchResult result;
};

/// Repeats one configuration; run_once returns its result and the seconds it spent searching.
/// Every repeat must follow the same trajectory.
template <class RunOnce>
Measured measure(RunOnce&& run_once) {
    std::vector<double> times;
    Measured m;
    for (int r = 0; r < args.repeats; ++r) {
        auto [result, seconds] = run_once();
        times.push_back(seconds);
        if (r > 0 && result.trace != m.result.trace) throw std::runtime_error("repeat produced a different trajectory");
        m.result = std::move(result);
    }
    m.duration = median(times);
    return m;
}

void check_same_trajectory(const std::optional<std::uint64_t>& reference, std::uint64_t hash, const Size& size) {
    if (reference && *reference != hash)
        throw std::runtime_error("trajectory changed with the degree of parallelism on " + std::to_string(size.first) +
                                 "x" + std::to_string(size.second));
}

int bench_local() {
    const auto grid = parse_grid(args.grid, false);
    auto lanes = args.lanes;
    if (lanes.empty())
        for (int k = 1; k <= lanes_from_env_or(default_lane_count()); ++k) lanes.push_back(k);

    Output out(args.out);
    *out << "# hfsts bench local\n# config " << config_json("local", grid, lanes).dump() << "\n"
         << "# physical_cores " << default_lane_count() << "\n"
         << "n,m,lanes_or_hosts,duration_s,speedup\n";
    for (const auto& size : grid) {
        const auto inst = generate_instance(size.first, size.second, args.machines, args.seed);
        std::optional<std::uint64_t> reference;
        double baseline = 0.0;
        SearchResult last;
        for (int l : lanes) {
            auto m = measure([&] {
                ParallelEvaluator ev(l);
                const auto t0 = Clock::now();
                auto r = run_search(inst, search_params(), ev);
                return std::pair{std::move(r), std::chrono::duration<double>(Clock::now() - t0).count()};
            });
            if (baseline == 0.0) baseline = m.duration;
            const auto hash = trace_hash(m.result.trace);
            check_same_trajectory(reference, hash, size);
            reference = hash;
            write_row(*out, size, l, m.duration, baseline);
            last = std::move(m.result);
        }
        *out << "# run " << nlohmann::json{{"n", size.first}, {"m", size.second}, {"digest", instance_digest(inst)},
                                           {"trace_hash", hex64(*reference)}, {"best_makespan", last.best_makespan}}
                                .dump()
             << "\n";
    }
    return 0;
}

int bench_dist() {
    const auto grid = parse_grid(args.grid, true);

    std::vector<std::unique_ptr<Worker>> spawned;
    std::vector<net::Endpoint> endpoints = parse_endpoints(args.nodes);
    for (int k = 0; k < args.spawn_local; ++k) {
        spawned.push_back(std::make_unique<Worker>(std::make_unique<LocalBackend>(args.spawn_lanes)));
        spawned.back()->start({"127.0.0.1", 0});
        endpoints.push_back(spawned.back()->endpoint());
    }
    if (endpoints.empty()) throw std::runtime_error("bench dist needs --nodes or --spawn-local");

    { // Probe once and drop nodes that do not answer.
        CoordinatorOptions probe_opt;
        Coordinator probe(endpoints, probe_opt);
        probe.connect();
        std::vector<net::Endpoint> live;
        for (const auto& st : probe.status()) {
            if (st.state == NodeState::dead)
                std::cerr << "warning: " << st.endpoint.str() << " is unreachable, excluded\n";
            else
                live.push_back(st.endpoint);
        }
        endpoints = std::move(live);
    }
    if (endpoints.empty()) throw std::runtime_error("no reachable worker");

    auto hosts = args.hosts;
    if (hosts.empty())
        for (int k = 1; k <= static_cast<int>(endpoints.size()); ++k) hosts.push_back(k);
    for (int h : hosts)
        if (h < 1 || h > static_cast<int>(endpoints.size()))
            throw std::runtime_error("host count " + std::to_string(h) + " exceeds the reachable workers");

    CoordinatorOptions opt;
    opt.calibration_budget_s = args.calibration_s;
    opt.seed = args.seed;
    opt.message_latency = std::chrono::milliseconds(args.latency_ms);

    Output out(args.out);
    *out << "# hfsts bench dist\n# config " << config_json("dist", grid, hosts).dump() << "\n";
    for (const auto& ep : endpoints) *out << "# endpoint " << ep.str() << "\n";
    *out << "n,m,lanes_or_hosts,duration_s,speedup\n";

    for (const auto& size : grid) {
        const auto inst = generate_instance(size.first, size.second, args.machines, args.seed);
        const MoveIndex total = neighborhood_size(size.first);
        std::optional<std::uint64_t> reference;
        double baseline = 0.0;
        for (int h : hosts) {
            nlohmann::json nodes = nlohmann::json::array();
            MoveIndex redistributed = 0;
            int extra_rounds = 0;
            bool coverage = true;
            auto m = measure([&] {
                Coordinator coord(std::vector<net::Endpoint>(endpoints.begin(), endpoints.begin() + h), opt);
                coord.calibrate(); // calibration precedes the first iteration and is not timed
                coord.set_problem(inst);
                const auto t0 = Clock::now();
                auto r = run_search(inst, search_params(), coord);
                const double wall = std::chrono::duration<double>(Clock::now() - t0).count();
                nodes = nlohmann::json::array();
                for (const auto& st : coord.status()) nodes.push_back(node_json(st, wall));
                redistributed = 0;
                extra_rounds = 0;
                for (const auto& rep : coord.reports()) {
                    redistributed += rep.redistributed;
                    extra_rounds += rep.rounds - 1;
                    coverage = coverage && coverage_exact(rep.evaluated, {0, total});
                }
                return std::pair{std::move(r), wall};
            });
            if (baseline == 0.0) baseline = m.duration;
            const auto hash = trace_hash(m.result.trace);
            check_same_trajectory(reference, hash, size);
            reference = hash;
            write_row(*out, size, h, m.duration, baseline);
            *out << "# nodes " << nlohmann::json{{"n", size.first}, {"m", size.second}, {"hosts", h},
                                                 {"redistributed_moves", redistributed}, {"extra_rounds", extra_rounds},
                                                 {"coverage_exact", coverage}, {"nodes", nodes}}
                                      .dump()
                 << "\n";
        }
        *out << "# run " << nlohmann::json{{"n", size.first}, {"m", size.second}, {"digest", instance_digest(inst)},
                                           {"trace_hash", hex64(*reference)}}
                                .dump()
             << "\n";
    }
    return 0;
}

int bench_verify() {
    std::ifstream in(args.verify_file);
    if (!in) throw std::runtime_error("cannot open " + args.verify_file);
    std::optional<nlohmann::json> config;
    int checked = 0, failed = 0;
    for (std::string line; std::getline(in, line);) {
        if (line.rfind("# config ", 0) == 0) config = nlohmann::json::parse(line.substr(9));
        if (line.rfind("# run ", 0) != 0) continue;
        if (!config) throw std::runtime_error("run line before the config line");
        const auto run = nlohmann::json::parse(line.substr(6));
        const int n = run.at("n"), m = run.at("m");
        const auto inst = generate_instance(n, m, config->at("machines").get<int>(), config->at("seed").get<std::uint64_t>());
        SearchParams p;
        p.iterations = config->at("iterations");
        p.seed = config->at("seed");
        p.tenure = config->at("tenure");
        p.diversify_after = config->at("diversify_after");
        SequentialEvaluator ev;
        const auto r = run_search(inst, p, ev);
        const bool ok = instance_digest(inst) == run.at("digest").get<std::string>() &&
                        hex64(trace_hash(r.trace)) == run.at("trace_hash").get<std::string>();
        std::cout << n << "x" << m << (ok ? " reproduced" : " MISMATCH") << "\n";
        ++checked;
        failed += ok ? 0 : 1;
    }
    std::cout << checked << " runs checked, " << failed << " mismatches\n";
    return failed == 0 && checked > 0 ? 0 : 1;
}

void add_common(CLI::App* cmd) {
    cmd->add_option("--grid", args.grid, "default, full, or a list n:m,n:m");
    cmd->add_option("--iterations", args.iterations, "Iterations per run")->check(CLI::NonNegativeNumber);
    cmd->add_option("--seed", args.seed, "Seed for instances and search");
    cmd->add_option("--machines", args.machines, "Processors per stage")->check(CLI::PositiveNumber);
    cmd->add_option("--repeats", args.repeats, "Timed repeats per cell (median reported)")->check(CLI::PositiveNumber);
    cmd->add_option("--tenure", args.tenure, "Tabu tenure")->check(CLI::NonNegativeNumber);
    cmd->add_option("--diversify-after", args.diversify_after, "Non-improving iterations before diversification");
    cmd->add_option("-o,--out", args.out, "CSV output file (default stdout)");
}

} // namespace

CLI::App* add_bench_command(CLI::App& app) {
    auto* bench = app.add_subcommand("bench", "Timing tables for local and distributed runs");
    bench->require_subcommand(1);

    local_cmd = bench->add_subcommand("local", "Duration over the grid for each lane count");
    add_common(local_cmd);
    local_cmd->add_option("--lanes", args.lanes, "Lane counts (default 1..physical cores)")->delimiter(',');

    dist_cmd = bench->add_subcommand("dist", "Duration over the grid for each worker count");
    add_common(dist_cmd);
    dist_cmd->add_option("--nodes", args.nodes, "Worker endpoints host:port")->delimiter(',');
    dist_cmd->add_option("--spawn-local", args.spawn_local, "Start this many loopback workers in-process")
        ->check(CLI::NonNegativeNumber);
    dist_cmd->add_option("--spawn-lanes", args.spawn_lanes, "Lanes per spawned worker")->check(CLI::PositiveNumber);
    dist_cmd->add_option("--hosts", args.hosts, "Worker counts to bench (default 1..all)")->delimiter(',');
    dist_cmd->add_option("--latency-ms", args.latency_ms, "Artificial delay per message")->check(CLI::NonNegativeNumber);
    dist_cmd->add_option("--calibration", args.calibration_s, "Calibration budget in seconds")
        ->check(CLI::PositiveNumber);

    verify_cmd = bench->add_subcommand("verify", "Re-run the trajectories recorded in a bench file");
    verify_cmd->add_option("file", args.verify_file, "Bench CSV")->required()->check(CLI::ExistingFile);
    return bench;
}

int run_bench() {
    if (*local_cmd) return bench_local();
    if (*dist_cmd) return bench_dist();
    if (*verify_cmd) return bench_verify();
    return 2;
}

} // namespace hfsts::cli

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

#include <cstdint>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "hfsts/coordinator.hpp"
#include "hfsts/net.hpp"
#include "hfsts/search.hpp"

namespace hfsts::cli {

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline std::vector<net::Endpoint> parse_endpoints(const std::vector<std::string>& items) {
    std::vector<net::Endpoint> out;
    for (const auto& s : items) out.push_back(net::Endpoint::parse(s));
    return out;
}

inline nlohmann::json trace_json(const TraceRecord& r, int num_jobs) {
    nlohmann::json j{{"iteration", r.iteration},
                     {"makespan", r.makespan},
                     {"incumbent", r.incumbent},
                     {"diversified", r.diversified}};
    if (r.move) {
        const auto mv = decode_move(*r.move, num_jobs);
        j["move"] = *r.move;
        j["from"] = mv.from_pos;
        j["to"] = mv.to_pos;
    } else {
        j["move"] = nullptr;
    }
    return j;
}

/// FNV-1a over the trace; equal hashes mean equal trajectories.
inline std::uint64_t trace_hash(const std::vector<TraceRecord>& trace) {
    std::uint64_t h = 1469598103934665603ULL;
    auto mix = [&](std::int64_t v) {
        for (int b = 0; b < 8; ++b) {
            h ^= static_cast<std::uint64_t>(v >> (8 * b)) & 0xffu;
            h *= 1099511628211ULL;
        }
    };
    for (const auto& r : trace) {
        mix(r.iteration);
        mix(r.move ? *r.move : -1);
        mix(r.makespan);
        mix(r.incumbent);
        mix(r.diversified ? 1 : 0);
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    std::ostringstream ss;
    ss << std::hex << std::setw(16) << std::setfill('0') << v;
    return ss.str();
}

inline nlohmann::json node_json(const NodeStatus& n, double wall_s) {
    return {{"endpoint", n.endpoint.str()},
            {"state", std::string(to_string(n.state))},
            {"lanes", n.lanes},
            {"moves_assigned", n.moves_assigned},
            {"moves_completed", n.moves_completed},
            {"mean_speed", n.mean_speed()},
            {"utilization", wall_s > 0.0 ? n.busy_s / wall_s : 0.0},
            {"requests", n.requests},
            {"failures", n.failures}};
}

int lanes_from_env_or(int fallback);

/// Registers the bench subcommand; run_bench executes whichever bench mode was parsed.
CLI::App* add_bench_command(CLI::App& app);
int run_bench();

} // namespace hfsts::cli

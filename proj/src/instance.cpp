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

#include "hfsts/instance.hpp"

#include <array>
#include <random>

#include <openssl/evp.h>

#include "json.hpp"

namespace hfsts {

using nlohmann::json;

ProblemInstance::ProblemInstance(int num_jobs, int num_stages, std::vector<int> processors_per_stage,
                                 std::vector<Time> durations, std::vector<int> widths)
    : num_jobs_(num_jobs), num_stages_(num_stages), processors_(std::move(processors_per_stage)),
      durations_(std::move(durations)), widths_(std::move(widths)) {
    if (num_jobs_ < 1) throw InstanceError("instance needs at least one job");
    if (num_stages_ < 1) throw InstanceError("instance needs at least one stage");
    const auto cells = static_cast<std::size_t>(num_jobs_) * static_cast<std::size_t>(num_stages_);
    if (processors_.size() != static_cast<std::size_t>(num_stages_))
        throw InstanceError("machines: expected " + std::to_string(num_stages_) + " entries, got " +
                            std::to_string(processors_.size()));
    if (durations_.size() != cells) throw InstanceError("p: matrix size does not match n x m");
    if (widths_.size() != cells) throw InstanceError("size: matrix size does not match n x m");

    for (int i = 0; i < num_stages_; ++i)
        if (processors(i) < 1)
            throw InstanceError("machines[" + std::to_string(i) + "]: must be >= 1");

    for (int j = 0; j < num_jobs_; ++j) {
        for (int i = 0; i < num_stages_; ++i) {
            const auto at = "[" + std::to_string(j) + "][" + std::to_string(i) + "]";
            if (duration(j, i) <= 0) throw InstanceError("p" + at + ": duration must be > 0");
            if (width(j, i) < 1 || width(j, i) > processors(i))
                throw InstanceError("size" + at + ": width " + std::to_string(width(j, i)) +
                                    " outside [1," + std::to_string(processors(i)) + "]");
        }
    }
}

Time ProblemInstance::total_work(int job) const {
    Time sum = 0;
    for (int i = 0; i < num_stages_; ++i) sum += duration(job, i);
    return sum;
}

ProblemInstance generate_instance(int num_jobs, int num_stages, int machines_per_stage,
                                  std::uint64_t seed) {
    if (num_jobs < 1 || num_stages < 1 || machines_per_stage < 1)
        throw InstanceError("generate_instance: dimensions must be positive");

    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<Time> duration(1, 100);
    std::uniform_int_distribution<int> width(1, machines_per_stage);

    const auto cells = static_cast<std::size_t>(num_jobs) * static_cast<std::size_t>(num_stages);
    std::vector<Time> p(cells);
    std::vector<int> size(cells);
    for (std::size_t c = 0; c < cells; ++c) {
        p[c] = duration(rng);
        size[c] = width(rng);
    }
    return ProblemInstance(num_jobs, num_stages,
                           std::vector<int>(static_cast<std::size_t>(num_stages), machines_per_stage),
                           std::move(p), std::move(size));
}

std::string serialize_instance(const ProblemInstance& inst) {
    json p = json::array();
    json size = json::array();
    for (int j = 0; j < inst.num_jobs(); ++j) {
        json prow = json::array();
        json srow = json::array();
        for (int i = 0; i < inst.num_stages(); ++i) {
            prow.push_back(inst.duration(j, i));
            srow.push_back(inst.width(j, i));
        }
        p.push_back(std::move(prow));
        size.push_back(std::move(srow));
    }
    json doc = {{"n", inst.num_jobs()},
                {"m", inst.num_stages()},
                {"machines", std::vector<int>(inst.processors_per_stage().begin(),
                                              inst.processors_per_stage().end())},
                {"p", std::move(p)},
                {"size", std::move(size)}};
    return doc.dump();
}

namespace {

std::string line_col(std::string_view text, std::size_t byte) {
    std::size_t line = 1, col = 1;
    for (std::size_t k = 0; k < byte && k < text.size(); ++k) {
        if (text[k] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

const json& field(const json& obj, const char* name) {
    auto it = obj.find(name);
    if (it == obj.end()) throw ParseError(std::string("missing field '") + name + "'");
    return *it;
}

std::int64_t integer(const json& v, const std::string& path) {
    if (!v.is_number_integer()) throw ParseError(path + ": expected an integer");
    if (v.is_number_unsigned() && v.get<std::uint64_t>() > static_cast<std::uint64_t>(INT64_MAX))
        throw ParseError(path + ": integer out of range");
    return v.get<std::int64_t>();
}

int small_integer(const json& v, const std::string& path) {
    const auto x = integer(v, path);
    if (x < INT32_MIN || x > INT32_MAX) throw ParseError(path + ": integer out of range");
    return static_cast<int>(x);
}

template <typename T, typename Get>
std::vector<T> matrix(const json& v, const char* name, int rows, int cols, Get get) {
    if (!v.is_array()) throw ParseError(std::string(name) + ": expected an array of rows");
    if (v.size() != static_cast<std::size_t>(rows))
        throw ParseError(std::string(name) + ": expected " + std::to_string(rows) + " rows, got " +
                         std::to_string(v.size()));
    std::vector<T> out;
    out.reserve(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols));
    for (int j = 0; j < rows; ++j) {
        const auto& row = v[static_cast<std::size_t>(j)];
        const auto row_path = std::string(name) + "[" + std::to_string(j) + "]";
        if (!row.is_array()) throw ParseError(row_path + ": expected an array");
        if (row.size() != static_cast<std::size_t>(cols))
            throw ParseError(row_path + ": expected " + std::to_string(cols) + " entries, got " +
                             std::to_string(row.size()));
        for (int i = 0; i < cols; ++i)
            out.push_back(get(row[static_cast<std::size_t>(i)],
                              row_path + "[" + std::to_string(i) + "]"));
    }
    return out;
}

} // namespace

ProblemInstance parse_instance(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError("malformed instance at " + line_col(text, e.byte == 0 ? 0 : e.byte - 1) +
                         ": " + e.what());
    }
    if (!doc.is_object()) throw ParseError("instance must be a JSON object");

    const int n = small_integer(field(doc, "n"), "n");
    const int m = small_integer(field(doc, "m"), "m");
    if (n < 1) throw InstanceError("n: must be >= 1");
    if (m < 1) throw InstanceError("m: must be >= 1");

    const auto& machines_json = field(doc, "machines");
    if (!machines_json.is_array()) throw ParseError("machines: expected an array");
    std::vector<int> machines;
    for (std::size_t i = 0; i < machines_json.size(); ++i)
        machines.push_back(small_integer(machines_json[i], "machines[" + std::to_string(i) + "]"));

    auto p = matrix<Time>(field(doc, "p"), "p", n, m, integer);
    auto size = matrix<int>(field(doc, "size"), "size", n, m, small_integer);
    return ProblemInstance(n, m, std::move(machines), std::move(p), std::move(size));
}

std::string instance_digest(const ProblemInstance& inst) {
    const auto text = serialize_instance(inst);
    std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
    unsigned int len = 0;
    if (EVP_Digest(text.data(), text.size(), md.data(), &len, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("sha256 failed");
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned int k = 0; k < len; ++k) {
        out.push_back(hex[md[k] >> 4]);
        out.push_back(hex[md[k] & 0xF]);
    }
    return out;
}

} // namespace hfsts

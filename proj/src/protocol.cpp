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

#include "hfsts/protocol.hpp"

#include <cmath>

#include "json.hpp"

namespace hfsts::proto {

using nlohmann::json;

namespace {

constexpr std::string_view kTypeNames[] = {"HELLO",    "CALIBRATE",   "CALIBRATE_RESULT", "SET_PROBLEM", "EVAL",
                                           "EVAL_RESULT", "PROGRESS", "ERROR",            "EXIT_REPORT"};

bool is_digest(const std::string& s) {
    if (s.size() != 64) return false;
    for (char c : s)
        if (!((c >= '0' && c <= '9') || (c >= 'a' && c <= 'f'))) return false;
    return true;
}

bool finite_nonneg(double x) { return std::isfinite(x) && x >= 0.0; }

// ---- decoding helpers; every failure names the offending field ----

const json& need(const json& obj, const char* key, const std::string& path) {
    if (!obj.is_object()) throw ProtocolError("field '" + path + "': expected an object");
    auto it = obj.find(key);
    if (it == obj.end()) throw ProtocolError("missing field '" + (path.empty() ? key : path + "." + key) + "'");
    return *it;
}

std::int64_t as_int(const json& v, const std::string& path) {
    if (!v.is_number_integer()) throw ProtocolError("field '" + path + "': expected an integer");
    if (v.is_number_unsigned() && v.get<std::uint64_t>() > static_cast<std::uint64_t>(INT64_MAX))
        throw ProtocolError("field '" + path + "': integer out of range");
    return v.get<std::int64_t>();
}

int as_int32(const json& v, const std::string& path) {
    const auto x = as_int(v, path);
    if (x < INT32_MIN || x > INT32_MAX) throw ProtocolError("field '" + path + "': integer out of range");
    return static_cast<int>(x);
}

double as_double(const json& v, const std::string& path) {
    if (!v.is_number()) throw ProtocolError("field '" + path + "': expected a number");
    return v.get<double>();
}

std::string as_string(const json& v, const std::string& path) {
    if (!v.is_string()) throw ProtocolError("field '" + path + "': expected a string");
    return v.get<std::string>();
}

bool as_bool(const json& v, const std::string& path) {
    if (!v.is_boolean()) throw ProtocolError("field '" + path + "': expected a boolean");
    return v.get<bool>();
}

NeighborhoodSlice as_slice(const json& v, const std::string& path) {
    if (!v.is_array() || v.size() != 2) throw ProtocolError("field '" + path + "': expected [begin, end]");
    return NeighborhoodSlice{as_int(v[0], path + "[0]"), as_int(v[1], path + "[1]")};
}

json slice_json(NeighborhoodSlice s) { return json::array({s.begin, s.end}); }

json instance_json(const ProblemInstance& inst) { return json::parse(serialize_instance(inst)); }

ProblemInstance as_instance(const json& v, const std::string& path) {
    if (!v.is_object()) throw ProtocolError("field '" + path + "': expected an instance object");
    try {
        return parse_instance(v.dump());
    } catch (const std::exception& e) {
        throw ProtocolError("field '" + path + "': " + e.what());
    }
}

Permutation as_permutation(const json& v, const std::string& path) {
    if (!v.is_array()) throw ProtocolError("field '" + path + "': expected an array");
    std::vector<int> order;
    order.reserve(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) order.push_back(as_int32(v[i], path + "[" + std::to_string(i) + "]"));
    if (!is_permutation_of_indices(order)) throw ProtocolError("field '" + path + "': not a permutation");
    return Permutation(std::move(order));
}

TabuList as_tabu(const json& v, const std::string& path) {
    const int tenure = as_int32(need(v, "tenure", path), path + ".tenure");
    const auto& entries = need(v, "entries", path);
    if (!entries.is_array()) throw ProtocolError("field '" + path + ".entries': expected an array");
    std::deque<TabuAttribute> attrs;
    for (std::size_t i = 0; i < entries.size(); ++i) {
        const auto& e = entries[i];
        const auto at = path + ".entries[" + std::to_string(i) + "]";
        if (!e.is_array() || e.size() != 2) throw ProtocolError("field '" + at + "': expected [job, position]");
        attrs.push_back(TabuAttribute{as_int32(e[0], at + "[0]"), as_int32(e[1], at + "[1]")});
    }
    if (tenure < 0 || attrs.size() > static_cast<std::size_t>(tenure))
        throw ProtocolError("field '" + path + "': entries exceed tenure");
    return TabuList(tenure, std::move(attrs));
}

json tabu_json(const TabuList& t) {
    json entries = json::array();
    for (const auto& a : t.entries()) entries.push_back(json::array({a.job, a.position}));
    return json{{"tenure", t.tenure()}, {"entries", std::move(entries)}};
}

template <typename T>
std::optional<T> nullable(const json& obj, const char* key, const std::string& path,
                          T (*get)(const json&, const std::string&)) {
    const auto& v = need(obj, key, path);
    if (v.is_null()) return std::nullopt;
    return get(v, path + "." + key);
}

// ---- per-body encoding ----

json body_json(const Hello& b) {
    return {{"major", b.major}, {"minor", b.minor}, {"lanes", b.lanes}, {"role", b.role}};
}
json body_json(const Calibrate& b) { return {{"instance", instance_json(b.instance)}, {"budget_s", b.budget_s}}; }
json body_json(const CalibrateResult& b) {
    return {{"speed", b.speed}, {"moves_evaluated", b.moves_evaluated}, {"elapsed_s", b.elapsed_s}};
}
json body_json(const SetProblem& b) { return {{"digest", b.digest}, {"instance", instance_json(b.instance)}}; }
json body_json(const EvalRequest& b) {
    return {{"digest", b.digest},
            {"permutation", std::vector<int>(b.permutation.order().begin(), b.permutation.order().end())},
            {"tabu", tabu_json(b.tabu)},
            {"incumbent", b.incumbent},
            {"slice", slice_json(b.slice)},
            {"deadline_s", b.deadline_s}};
}
json body_json(const EvalResult& b) {
    json j = {{"best_index", nullptr},
              {"best_makespan", nullptr},
              {"moves_evaluated", b.result.moves_evaluated},
              {"elapsed_s", b.result.elapsed},
              {"speed", b.speed},
              {"complete", b.complete},
              {"remaining", nullptr}};
    if (b.result.best_index) j["best_index"] = *b.result.best_index;
    if (b.result.best_makespan) j["best_makespan"] = *b.result.best_makespan;
    if (b.remaining) j["remaining"] = slice_json(*b.remaining);
    return j;
}
json body_json(const Progress& b) { return {{"fraction", b.fraction}}; }
json body_json(const Error& b) { return {{"message", b.message}}; }
json body_json(const ExitReport& b) { return {{"state", b.state}, {"reason", b.reason}}; }

Body body_from(MessageType type, const json& j) {
    const std::string p = "body";
    switch (type) {
    case MessageType::hello:
        return Hello{as_int32(need(j, "major", p), "body.major"), as_int32(need(j, "minor", p), "body.minor"),
                     as_int32(need(j, "lanes", p), "body.lanes"), as_string(need(j, "role", p), "body.role")};
    case MessageType::calibrate:
        return Calibrate{as_instance(need(j, "instance", p), "body.instance"),
                         as_double(need(j, "budget_s", p), "body.budget_s")};
    case MessageType::calibrate_result:
        return CalibrateResult{as_double(need(j, "speed", p), "body.speed"),
                               as_int(need(j, "moves_evaluated", p), "body.moves_evaluated"),
                               as_double(need(j, "elapsed_s", p), "body.elapsed_s")};
    case MessageType::set_problem:
        return SetProblem{as_string(need(j, "digest", p), "body.digest"),
                          as_instance(need(j, "instance", p), "body.instance")};
    case MessageType::eval:
        return EvalRequest{as_string(need(j, "digest", p), "body.digest"),
                           as_permutation(need(j, "permutation", p), "body.permutation"),
                           as_tabu(need(j, "tabu", p), "body.tabu"),
                           as_int(need(j, "incumbent", p), "body.incumbent"),
                           as_slice(need(j, "slice", p), "body.slice"),
                           as_double(need(j, "deadline_s", p), "body.deadline_s")};
    case MessageType::eval_result: {
        EvalResult r;
        r.result.best_index = nullable<std::int64_t>(j, "best_index", p, as_int);
        r.result.best_makespan = nullable<std::int64_t>(j, "best_makespan", p, as_int);
        r.result.moves_evaluated = as_int(need(j, "moves_evaluated", p), "body.moves_evaluated");
        r.result.elapsed = as_double(need(j, "elapsed_s", p), "body.elapsed_s");
        r.speed = as_double(need(j, "speed", p), "body.speed");
        r.complete = as_bool(need(j, "complete", p), "body.complete");
        r.remaining = nullable<NeighborhoodSlice>(j, "remaining", p, as_slice);
        return r;
    }
    case MessageType::progress:
        return Progress{as_double(need(j, "fraction", p), "body.fraction")};
    case MessageType::error:
        return Error{as_string(need(j, "message", p), "body.message")};
    case MessageType::exit_report:
        return ExitReport{as_string(need(j, "state", p), "body.state"), as_string(need(j, "reason", p), "body.reason")};
    }
    throw ProtocolError("field 'type': unknown message type");
}

void check(bool ok, const std::string& what) {
    if (!ok) throw ProtocolError(what);
}

struct Validator {
    void operator()(const Hello& b) const {
        check(b.lanes >= 0, "field 'body.lanes': must be >= 0");
        check(b.major >= 0 && b.minor >= 0, "field 'body.major': version must be >= 0");
    }
    void operator()(const Calibrate& b) const {
        check(std::isfinite(b.budget_s) && b.budget_s > 0.0, "field 'body.budget_s': budget must be > 0");
    }
    void operator()(const CalibrateResult& b) const {
        check(finite_nonneg(b.speed), "field 'body.speed': must be finite and >= 0");
        check(b.moves_evaluated >= 0, "field 'body.moves_evaluated': must be >= 0");
        check(finite_nonneg(b.elapsed_s), "field 'body.elapsed_s': must be finite and >= 0");
    }
    void operator()(const SetProblem& b) const { check(is_digest(b.digest), "field 'body.digest': expected 64 hex digits"); }
    void operator()(const EvalRequest& b) const {
        check(is_digest(b.digest), "field 'body.digest': expected 64 hex digits");
        const MoveIndex size = neighborhood_size(b.permutation.size());
        check(b.slice.begin >= 0 && b.slice.begin <= b.slice.end && b.slice.end <= size,
              "field 'body.slice': outside the neighborhood");
        check(finite_nonneg(b.deadline_s), "field 'body.deadline_s': must be finite and >= 0");
    }
    void operator()(const EvalResult& b) const {
        check(b.result.best_index.has_value() == b.result.best_makespan.has_value(),
              "field 'body.best_index': best_index and best_makespan must both be set or both null");
        check(b.result.moves_evaluated >= 0, "field 'body.moves_evaluated': must be >= 0");
        check(finite_nonneg(b.result.elapsed), "field 'body.elapsed_s': must be finite and >= 0");
        check(finite_nonneg(b.speed), "field 'body.speed': must be finite and >= 0");
        if (b.complete)
            check(!b.remaining.has_value(), "field 'body.remaining': must be null when complete");
        else
            check(b.remaining.has_value() && !b.remaining->empty() && b.remaining->begin >= 0,
                  "field 'body.remaining': must be a nonempty slice when incomplete");
    }
    void operator()(const Progress& b) const {
        check(std::isfinite(b.fraction) && b.fraction >= 0.0 && b.fraction <= 1.0, "field 'body.fraction': outside [0,1]");
    }
    void operator()(const Error&) const {}
    void operator()(const ExitReport&) const {}
};

} // namespace

std::string_view to_string(MessageType t) noexcept { return kTypeNames[static_cast<std::size_t>(t)]; }

void validate(const Message& m) {
    if (m.type() == MessageType::exit_report)
        check(!m.request_id.has_value(), "field 'id': EXIT_REPORT carries no request id");
    else
        check(m.request_id.has_value(), "missing field 'id'");
    std::visit(Validator{}, m.body);
}

std::string encode(const Message& m) {
    validate(m);
    json j;
    j["type"] = std::string(to_string(m.type()));
    if (m.request_id) j["id"] = *m.request_id;
    j["body"] = std::visit([](const auto& b) { return body_json(b); }, m.body);
    std::string out = j.dump();
    out.push_back('\n');
    return out;
}

Message decode(std::string_view frame) {
    if (!frame.empty() && frame.back() == '\n') frame.remove_suffix(1);
    if (frame.find('\n') != std::string_view::npos) throw ProtocolError("frame contains an embedded newline");
    if (frame.empty()) throw ProtocolError("empty frame");

    json j;
    try {
        j = json::parse(frame);
    } catch (const json::exception& e) {
        throw ProtocolError(std::string("malformed JSON: ") + e.what());
    }
    if (!j.is_object()) throw ProtocolError("frame is not a JSON object");

    const auto type_name = as_string(need(j, "type", ""), "type");
    std::optional<MessageType> type;
    for (std::size_t k = 0; k < std::size(kTypeNames); ++k)
        if (kTypeNames[k] == type_name) type = static_cast<MessageType>(k);
    if (!type) throw ProtocolError("field 'type': unknown message type '" + type_name + "'");

    Message m;
    if (auto it = j.find("id"); it != j.end()) m.request_id = as_int(*it, "id");
    try {
        m.body = body_from(*type, need(j, "body", ""));
    } catch (const ProtocolError&) {
        throw;
    } catch (const std::exception& e) {
        throw ProtocolError(std::string("invalid body: ") + e.what());
    }
    validate(m);
    return m;
}

} // namespace hfsts::proto

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
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>

#include "hfsts/instance.hpp"
#include "hfsts/neighborhood.hpp"
#include "hfsts/tabu_list.hpp"

// Coordinator/worker wire protocol: one JSON object per line,
//   {"type": "<TYPE>", "id": <request id>, "body": {...}}
// EXIT_REPORT is the only message without "id". Field-level layout is
// documented in docs/protocol.md.

namespace hfsts::proto {

inline constexpr int kVersionMajor = 1;
inline constexpr int kVersionMinor = 0;

class ProtocolError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

enum class MessageType {
    hello,
    calibrate,
    calibrate_result,
    set_problem,
    eval,
    eval_result,
    progress,
    error,
    exit_report,
};

std::string_view to_string(MessageType t) noexcept;

struct Hello {
    int major = kVersionMajor;
    int minor = kVersionMinor;
    int lanes = 0;
    std::string role; // "coordinator", "worker" or "super"
    bool operator==(const Hello&) const = default;
};

struct Calibrate {
    ProblemInstance instance;
    double budget_s = 2.0;
    bool operator==(const Calibrate&) const = default;
};

struct CalibrateResult {
    double speed = 0.0; // moves per second
    std::int64_t moves_evaluated = 0;
    double elapsed_s = 0.0;
    bool operator==(const CalibrateResult&) const = default;
};

struct SetProblem {
    std::string digest;
    ProblemInstance instance;
    bool operator==(const SetProblem&) const = default;
};

struct EvalRequest {
    std::string digest;
    Permutation permutation;
    TabuList tabu;
    Time incumbent = 0;
    NeighborhoodSlice slice;
    double deadline_s = 0.0; // relative to receipt
    bool operator==(const EvalRequest&) const = default;
};

struct EvalResult {
    SliceResult result;
    double speed = 0.0; // moves_evaluated / elapsed
    bool complete = true;
    std::optional<NeighborhoodSlice> remaining; // present iff !complete
    bool operator==(const EvalResult&) const = default;
};

struct Progress {
    double fraction = 0.0;
    bool operator==(const Progress&) const = default;
};

struct Error {
    std::string message;
    bool operator==(const Error&) const = default;
};

struct ExitReport {
    std::string state;  // e.g. "shutdown"
    std::string reason;
    bool operator==(const ExitReport&) const = default;
};

using Body = std::variant<Hello, Calibrate, CalibrateResult, SetProblem, EvalRequest, EvalResult, Progress,
                          Error, ExitReport>;

struct Message {
    std::optional<std::int64_t> request_id;
    Body body;

    MessageType type() const noexcept { return static_cast<MessageType>(body.index()); }
    bool operator==(const Message&) const = default;
};

/// Serializes m as one newline-terminated JSON line. Throws ProtocolError for invalid messages.
std::string encode(const Message& m);

/// Parses one frame (trailing newline optional). Never crashes on garbage; throws ProtocolError.
Message decode(std::string_view frame);

/// Structural checks shared by encode and decode.
void validate(const Message& m);

} // namespace hfsts::proto

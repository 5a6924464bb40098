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

// Test-only oracles, written without reference to the library's decoder.

#include <string>
#include <vector>

#include "hfsts/instance.hpp"
#include "hfsts/schedule.hpp"

namespace oracle {

/// Event-queue simulation: per stage a FIFO dispatch queue, a clock and a heap
/// of running tasks; only counts of idle processors are tracked.
/// Returns completion times, row-major n x m.
std::vector<hfsts::Time> simulate(const hfsts::ProblemInstance& inst, const std::vector<int>& order);

hfsts::Time simulate_makespan(const hfsts::ProblemInstance& inst, const std::vector<int>& order);

/// Empty string when feasible, otherwise a description of the first violation.
std::string audit(const hfsts::ProblemInstance& inst, const hfsts::Schedule& s);

} // namespace oracle

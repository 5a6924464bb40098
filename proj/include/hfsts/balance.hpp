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
#include <span>
#include <stdexcept>
#include <vector>

#include "hfsts/neighborhood.hpp"

namespace hfsts {

/// One measurement: moves completed in a request and the speed (moves/s) it ran at.
struct PerfSample {
    std::int64_t moves = 0;
    double speed = 0.0;

    bool operator==(const PerfSample&) const = default;
};

/// Per-node measurement log, oldest first. Entry 0 comes from calibration.
class NodePerfHistory {
  public:
    /// Throws std::invalid_argument unless moves > 0 and speed > 0.
    void record(std::int64_t moves, double speed);
    void clear() noexcept { samples_.clear(); }

    const std::vector<PerfSample>& samples() const noexcept { return samples_; }
    bool empty() const noexcept { return samples_.empty(); }
    std::int64_t total_moves() const noexcept;

  private:
    std::vector<PerfSample> samples_;
};

class PredictionUnavailable : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Speed forecast from a node's history; other forecasting rules plug in here.
class Predictor {
  public:
    virtual ~Predictor() = default;
    virtual double predict(const NodePerfHistory& history) const = 0;
};

/// Average of recorded speeds weighted by the moves each was measured over:
///   sum(n_k * p_k) / sum(n_k), over the last window entries (all when window == 0).
class WeightedAveragePredictor final : public Predictor {
  public:
    explicit WeightedAveragePredictor(std::size_t window = 0) : window_(window) {}
    double predict(const NodePerfHistory& history) const override;

  private:
    std::size_t window_;
};

/// Free-function form of the weighted average. Throws PredictionUnavailable on an empty history.
double predict(const NodePerfHistory& history, std::size_t window = 0);

class PlanningError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct PartitionPlan {
    std::vector<NeighborhoodSlice> slices; // one per node, in node order
    MoveIndex total = 0;
};

/**
 * Splits range proportionally to speeds: node i ideally gets speed_i / sum * N
 * moves; integer sizes come from largest-remainder rounding (ties to the lower
 * node index) and slices are laid out contiguously in node order. Nodes with a
 * non-positive speed get an empty slice. Throws PlanningError when no speed is positive.
 */
PartitionPlan plan_partition(std::span<const double> speeds, NeighborhoodSlice range);
PartitionPlan plan_partition(std::span<const double> speeds, MoveIndex total);

} // namespace hfsts

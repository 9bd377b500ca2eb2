#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "streamad/core.hpp"
#include "streamad/data_io.hpp"
#include "streamad/metrics.hpp"

namespace streamad {

struct BenchConfig {
    /// Each point is observed this many times on fresh state copies; the
    /// median is recorded and one final mutating run advances the real state.
    std::size_t runs_per_point = 10;
    /// Tiling factor applied to short series (fewer than 2000 points).
    std::size_t replication_factor = 1;
    /// Untimed observations before the timed region starts.
    std::size_t warmup_points = 100;
    std::size_t jobs = 1;  // timed cells always serialize
};

/// Lower-middle median (for even counts the lower of the two middles).
double median_lower_middle(std::vector<double> values);

/// Geometric mean; requires every value to be positive.
double geometric_mean(const std::vector<double>& values);

struct TimedObservation {
    DetectorVerdict verdict;
    double elapsed_ms = 0.0;
    bool batched = false;  // measured in a 100-iteration loop and divided
};

/// Times one observe call: runs_per_point timed runs on clones of the
/// pre-point state (clone cost outside the timed region), median duration
/// recorded, then a single mutating run advances the real detector. Ops too
/// fast for the timer are measured in batched loops of 100 and divided.
TimedObservation time_point(Detector& detector, const TimePoint& pt, std::size_t runs);

struct RuntimeStats {
    std::vector<double> per_point_ms;  // per-point medians
    double series_mean_ms = 0.0;
    bool any_batched = false;
    bool clamped = false;  // a non-positive duration was clamped to the floor
};

/// Arithmetic mean within a series; the group level aggregates with the
/// geometric mean (see run_benchmark).
RuntimeStats aggregate_series(const std::vector<double>& per_point_ms);

struct ReplicateResult {
    LabeledSeries series;
    /// Set when the seasonal period does not divide the original length, so
    /// tiling breaks the seasonal phase at copy boundaries.
    bool phase_break = false;
};

/// Tiles the series `factor` times; labels are re-indexed into every copy and
/// timestamps extend at the native granularity.
ReplicateResult replicate(const LabeledSeries& series, std::size_t factor);

struct BenchGroup {
    std::string name;
    std::vector<LabeledSeries> series;
    double beta = 1.0;
    std::size_t match_tolerance = 0;
};

struct BenchResult {
    std::vector<ResultRow> rows;   // one per (detector, group, series)
    std::vector<MapRow> map_rows;  // one per (detector, group)
};

/// Full harness: per-point timing protocol, verdict collection, confusion
/// accounting and group aggregation. A detector failing on a series marks
/// that row as failed and the run continues.
BenchResult run_benchmark(const std::vector<DetectorSpec>& detectors,
                          const std::vector<BenchGroup>& groups, const BenchConfig& cfg);

}  // namespace streamad

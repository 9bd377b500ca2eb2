#include "streamad/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "streamad/registry.hpp"

namespace streamad {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point a, Clock::time_point b) {
    return std::chrono::duration<double, std::milli>(b - a).count();
}

/// Median cost of reading the clock back to back, measured once; durations
/// in this neighbourhood are timer noise, so such ops get batched.
double clock_overhead_ms() {
    static const double overhead = [] {
        std::vector<double> samples;
        for (int i = 0; i < 101; ++i) {
            const auto t0 = Clock::now();
            const auto t1 = Clock::now();
            samples.push_back(elapsed_ms(t0, t1));
        }
        return median_lower_middle(std::move(samples));
    }();
    return overhead;
}

}  // namespace

double median_lower_middle(std::vector<double> values) {
    if (values.empty()) throw config_error("median of an empty sample");
    const std::size_t mid = (values.size() - 1) / 2;  // lower middle for even counts
    std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid),
                     values.end());
    return values[mid];
}

double geometric_mean(const std::vector<double>& values) {
    if (values.empty()) throw config_error("geometric mean of an empty sample");
    double log_acc = 0.0;
    for (double v : values) {
        if (v <= 0.0) throw config_error("geometric mean requires positive values");
        log_acc += std::log(v);
    }
    return std::exp(log_acc / static_cast<double>(values.size()));
}

TimedObservation time_point(Detector& detector, const TimePoint& pt, std::size_t runs) {
    TimedObservation out;
    runs = std::max<std::size_t>(1, runs);
    const double floor = std::max(clock_overhead_ms(), 1e-7);

    // Probe once to pick the measurement mode; the probe clone is discarded.
    double probe;
    {
        auto copy = detector.clone();
        const auto t0 = Clock::now();
        copy->observe(pt);
        const auto t1 = Clock::now();
        probe = elapsed_ms(t0, t1);
    }
    const bool batch = probe < 50.0 * floor;
    out.batched = batch;

    std::vector<double> durations;
    durations.reserve(runs);
    for (std::size_t r = 0; r < runs; ++r) {
        auto copy = detector.clone();
        if (batch) {
            const auto t0 = Clock::now();
            for (int i = 0; i < 100; ++i) copy->observe(pt);
            const auto t1 = Clock::now();
            durations.push_back(elapsed_ms(t0, t1) / 100.0);
        } else {
            const auto t0 = Clock::now();
            copy->observe(pt);
            const auto t1 = Clock::now();
            durations.push_back(elapsed_ms(t0, t1));
        }
    }
    out.elapsed_ms = median_lower_middle(std::move(durations));

    // The one mutating run; its verdict is the canonical one (identical
    // state, identical result).
    out.verdict = detector.observe(pt);
    return out;
}

RuntimeStats aggregate_series(const std::vector<double>& per_point_ms) {
    RuntimeStats stats;
    if (per_point_ms.empty()) throw config_error("aggregate_series: empty input");
    const double floor = std::max(clock_overhead_ms(), 1e-7);
    stats.per_point_ms.reserve(per_point_ms.size());
    double acc = 0.0;
    for (double v : per_point_ms) {
        if (v <= 0.0) {
            v = floor;
            stats.clamped = true;
        }
        stats.per_point_ms.push_back(v);
        acc += v;
    }
    stats.series_mean_ms = acc / static_cast<double>(per_point_ms.size());
    return stats;
}

ReplicateResult replicate(const LabeledSeries& series, std::size_t factor) {
    if (factor == 0) throw config_error("replicate: factor must be >= 1");
    ReplicateResult out;
    out.series = series;
    if (factor == 1) return out;

    const std::size_t n = series.points.size();
    out.series.points.clear();
    out.series.points.reserve(n * factor);
    out.series.labels.clear();
    const std::int64_t t0 =
        series.points.empty() || !series.points.front().timestamp_ms
            ? 0
            : *series.points.front().timestamp_ms;
    for (std::size_t copy = 0; copy < factor; ++copy) {
        for (std::size_t i = 0; i < n; ++i) {
            TimePoint pt = series.points[i];
            pt.index = copy * n + i;
            pt.timestamp_ms =
                t0 + static_cast<std::int64_t>(pt.index) * series.granularity_ms;
            out.series.points.push_back(pt);
        }
        for (std::size_t lbl : series.labels) out.series.labels.insert(copy * n + lbl);
    }
    if (series.seasonal_period_hint && n % *series.seasonal_period_hint != 0)
        out.phase_break = true;
    return out;
}

BenchResult run_benchmark(const std::vector<DetectorSpec>& detectors,
                          const std::vector<BenchGroup>& groups, const BenchConfig& cfg) {
    BenchResult result;
    constexpr std::size_t kShortSeries = 2000;

    for (const BenchGroup& group : groups) {
        for (const DetectorSpec& spec : detectors) {
            std::vector<double> series_means;
            std::vector<Confusion> confusions;
            bool any_failed = false;

            for (const LabeledSeries& original : group.series) {
                ResultRow row;
                row.detector = spec.technique;
                row.group = group.name;
                row.series = original.name;
                row.window = original.window_cap;
                row.beta = group.beta;

                LabeledSeries series = original;
                bool phase_break = false;
                if (cfg.replication_factor > 1 && series.points.size() < kShortSeries) {
                    ReplicateResult rep = replicate(series, cfg.replication_factor);
                    series = std::move(rep.series);
                    phase_break = rep.phase_break;
                    row.flags += "replicated;";
                    if (phase_break) row.flags += "phase-break;";
                }

                try {
                    auto detector = make_detector(spec, series);
                    const std::size_t warmup = std::min(default_warmup(series),
                                                        series.points.size() - 1);
                    const std::size_t timing_skip =
                        std::min(cfg.warmup_points, series.points.size() / 2);

                    std::vector<double> per_point;
                    std::set<std::size_t> detected;
                    std::vector<IndexSpan> spans;
                    bool any_span = false;
                    bool any_batched = false;

                    for (std::size_t i = 0; i < series.points.size(); ++i) {
                        DetectorVerdict verdict;
                        if (i < timing_skip) {
                            verdict = detector->observe(series.points[i]);
                        } else {
                            TimedObservation obs =
                                time_point(*detector, series.points[i], cfg.runs_per_point);
                            verdict = obs.verdict;
                            any_batched = any_batched || obs.batched;
                            per_point.push_back(obs.elapsed_ms);
                        }
                        if (i < warmup || !verdict.is_anomaly) continue;
                        if (verdict.span) {
                            any_span = true;
                            spans.push_back(*verdict.span);
                        } else {
                            detected.insert(i);
                        }
                    }

                    const Confusion c = any_span
                                            ? match_pattern(spans, series.labels)
                                            : match_point(detected, series.labels,
                                                          group.match_tolerance);
                    const PrfScores scores = precision_recall_fbeta(c, {group.beta});
                    row.confusion = c;
                    row.precision = scores.precision;
                    row.recall = scores.recall;
                    row.fbeta = scores.fbeta;
                    if (!per_point.empty()) {
                        RuntimeStats stats = aggregate_series(per_point);
                        row.runtime_ms = stats.series_mean_ms;
                        if (stats.clamped) row.flags += "clamped;";
                    }
                    if (any_batched) row.flags += "batched;";

                    confusions.push_back(c);
                    if (row.runtime_ms > 0.0) series_means.push_back(row.runtime_ms);
                } catch (const std::exception& e) {
                    row.flags += std::string("failed:") + e.what() + ";";
                    any_failed = true;
                }
                result.rows.push_back(std::move(row));
            }

            MapRow map_row;
            map_row.detector = spec.technique;
            map_row.group = group.name;
            if (!series_means.empty()) map_row.runtime_ms = geometric_mean(series_means);
            if (!confusions.empty())
                map_row.fbeta = micro_average(confusions, {group.beta}).fbeta;
            else if (any_failed)
                map_row.fbeta = 0.0;
            result.map_rows.push_back(std::move(map_row));
        }
    }
    return result;
}

}  // namespace streamad

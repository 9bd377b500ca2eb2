#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "streamad/core.hpp"
#include "streamad/metrics.hpp"

namespace streamad {

enum class CsvSchema { kYahoo, kNab, kGeneric };

CsvSchema parse_schema(const std::string& name);  // "yahoo" | "nab" | "generic"

/// Loads a labeled series.
///   yahoo:   header `timestamp,value,is_anomaly`, label column in {0,1}
///   nab:     header `timestamp,value`; labels come from a side file listing
///            anomalous timestamps, one per line
///   generic: header `index,value[,label]`
/// Malformed rows raise data_error with the line number; timestamps must be
/// strictly increasing.
LabeledSeries load_csv(const std::string& path, CsvSchema schema,
                       const std::string& label_path = "");

/// Writes `index,value[,label]` (generic schema) with 17 significant digits,
/// plus a side label file (one anomalous index per line) at path + ".labels".
void write_series_csv(const LabeledSeries& series, const std::string& path);

struct SynthEvent {
    enum class Kind {
        kLevelShift,          // value += magnitude for t >= at
        kVarianceChange,      // noise sigma *= magnitude for t >= at
        kSeasonalLevelShift,  // seasonal amplitude *= magnitude for t >= at
        kSeasonalLevelDrift,  // amplitude *= (1 + magnitude * t) over the series
        kSeasonalJitter       // per-cycle period perturbed by up to +-magnitude points
    };
    Kind kind = Kind::kLevelShift;
    double magnitude = 0.0;
    std::size_t at = 0;
};

struct SynthAnomaly {
    std::size_t index = 0;
    double magnitude_sigma = 0.0;  // offset in units of the base noise sigma
};

struct SynthSpec {
    std::string name = "synth";
    std::size_t length = 1000;
    std::size_t period = 0;  // 0 = no seasonal component
    double amplitude = 0.0;
    double trend_slope = 0.0;
    double noise_sigma = 1.0;
    std::vector<SynthEvent> events;
    std::vector<SynthAnomaly> anomalies;
    /// Change events (LS/VC/SLS) are not labeled as anomalies unless set.
    bool label_changes = false;
    std::uint64_t seed = 0;
    std::int64_t granularity_ms = 60000;
    std::size_t window_cap = 0;  // 0 = derive (10 periods, capped at length)
    std::size_t pattern_length = 0;  // 0 = none
};

/// Deterministic synthetic stream: trend + seasonal + Gaussian noise with the
/// configured non-stationarity events applied in order; injected anomalies
/// become ground-truth labels.
LabeledSeries synth_generate(const SynthSpec& spec);

struct ResultRow {
    std::string detector;
    std::string group;
    std::string series;
    std::size_t window = 0;
    double runtime_ms = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double fbeta = 0.0;
    double beta = 1.0;
    std::string flags;
    /// Raw counts carried along for micro-averaged aggregation (not
    /// serialized into the row itself).
    Confusion confusion;
};

struct MapRow {
    std::string detector;
    std::string group;
    double runtime_ms = 0.0;
    double fbeta = 0.0;
};

/// Writes the result table (header `detector,group,series,window,runtime_ms,
/// precision,recall,fbeta,beta,flags`, rows sorted by group then detector)
/// plus the plot-ready `accuracy_runtime_map.csv` next to it, which carries
/// one row per (detector, group): geometric-mean runtime and micro-averaged
/// F-beta.
void persist_results(const std::vector<ResultRow>& rows, const std::string& path);

std::vector<ResultRow> load_results(const std::string& path);

void write_accuracy_map(const std::vector<MapRow>& rows, const std::string& path);
std::vector<MapRow> load_accuracy_map(const std::string& path);

/// Decimal serialization with 17 significant digits (bit-exact round trips).
std::string format_double(double v);

}  // namespace streamad

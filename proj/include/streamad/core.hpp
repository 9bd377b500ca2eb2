#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace streamad {

/// Malformed input data (files, CSV rows, series invariants).
class data_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid detector or benchmark configuration.
class config_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct TimePoint {
    std::size_t index = 0;
    std::optional<std::int64_t> timestamp_ms;
    double value = 0.0;
};

/// An ordered univariate series plus optional ground-truth anomaly labels
/// and the per-group knobs the harness needs (window cap, pattern length,
/// seasonal period hint).
struct LabeledSeries {
    std::string name;
    std::vector<TimePoint> points;
    std::set<std::size_t> labels;
    std::int64_t granularity_ms = 1000;
    std::optional<std::size_t> seasonal_period_hint;
    std::size_t window_cap = 2;
    std::optional<std::size_t> pattern_length;

    std::size_t size() const { return points.size(); }
    double value(std::size_t i) const { return points[i].value; }
    std::vector<double> values() const;

    /// Throws data_error if indices are not strictly increasing, labels are
    /// out of range, window_cap < 2 or pattern_length < 4.
    void validate() const;
};

/// Fixed-capacity FIFO over doubles. Pushing into a full window evicts the
/// oldest element and returns it.
class SlidingWindow {
public:
    explicit SlidingWindow(std::size_t capacity);

    std::optional<double> push(double x);

    std::size_t size() const { return count_; }
    std::size_t capacity() const { return buf_.size(); }
    bool full() const { return count_ == buf_.size(); }

    /// i = 0 addresses the oldest element.
    double operator[](std::size_t i) const;
    double newest() const { return (*this)[count_ - 1]; }

    /// Appends the contents, oldest first, to out.
    void copy_to(std::vector<double>& out) const;
    std::vector<double> values() const;

private:
    std::vector<double> buf_;
    std::size_t head_ = 0;  // slot of the oldest element
    std::size_t count_ = 0;
};

/// Inclusive [start,end] index interval; pattern detectors only.
using IndexSpan = std::pair<std::size_t, std::size_t>;

struct DetectorVerdict {
    double score = 0.0;
    bool is_anomaly = false;
    std::optional<IndexSpan> span;
};

/// Declarative detector description: technique name, numeric parameters and
/// the retraining cadence. retrain_period = 0 means "use the window cap",
/// which is also the largest value allowed.
struct DetectorSpec {
    std::string technique;
    std::map<std::string, double> params;
    std::size_t retrain_period = 0;

    double param(const std::string& key, double fallback) const;
    bool has_param(const std::string& key) const { return params.count(key) != 0; }
};

/// Incremental anomaly detector. observe() must be called once per point in
/// strictly increasing index order; state is single-writer. clone() yields an
/// independent copy of the full state (used by the benchmark harness to
/// re-run a point on identical state).
class Detector {
public:
    virtual ~Detector() = default;
    virtual DetectorVerdict observe(const TimePoint& pt) = 0;
    virtual std::unique_ptr<Detector> clone() const = 0;
    virtual std::string name() const = 0;
};

/// Degenerate-scale rule shared by every scale-normalized score: when the
/// scale estimate collapses to zero, the score is 0 at the location and
/// +inf anywhere else.
double deviation_score(double x, double location, double scale);

/// Feeds the series through the detector one point at a time. Returns one
/// entry per input point; entries before `warmup` are nullopt (the detector
/// still observes those points, only the verdicts are suppressed).
/// Throws config_error if warmup >= series length.
std::vector<std::optional<DetectorVerdict>>
stream_run(Detector& detector, const LabeledSeries& series, std::size_t warmup);

/// min(W, 2 * seasonal period hint); min(W, 30) when no hint is available.
std::size_t default_warmup(const LabeledSeries& series);

/// Shifts and scales to zero mean and unit sample standard deviation.
/// Constant input maps to all zeros. Requires length >= 2.
std::vector<double> studentize(const std::vector<double>& values);

/// Subtracts the mean; pairwise differences are preserved. Requires
/// length >= 1.
std::vector<double> mean_adjust(const std::vector<double>& values);

double mean_of(const std::vector<double>& values);
/// Sample variance (n-1 denominator); 0 for length < 2.
double sample_variance(const std::vector<double>& values);
/// Median; the input vector is reordered in place.
double median_inplace(std::vector<double>& values);

constexpr double kInfScore = std::numeric_limits<double>::infinity();

}  // namespace streamad

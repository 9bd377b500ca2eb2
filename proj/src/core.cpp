#include "streamad/core.hpp"

#include <algorithm>
#include <cmath>

namespace streamad {

std::vector<double> LabeledSeries::values() const {
    std::vector<double> out;
    out.reserve(points.size());
    for (const auto& p : points) out.push_back(p.value);
    return out;
}

void LabeledSeries::validate() const {
    for (std::size_t i = 1; i < points.size(); ++i) {
        if (points[i].index <= points[i - 1].index)
            throw data_error("series '" + name + "': point indices not strictly increasing");
        if (points[i].timestamp_ms && points[i - 1].timestamp_ms &&
            *points[i].timestamp_ms <= *points[i - 1].timestamp_ms)
            throw data_error("series '" + name + "': timestamps not strictly increasing");
    }
    for (std::size_t lbl : labels) {
        if (lbl >= points.size())
            throw data_error("series '" + name + "': label index " + std::to_string(lbl) +
                             " out of range");
    }
    if (window_cap < 2) throw data_error("series '" + name + "': window_cap must be >= 2");
    if (pattern_length && *pattern_length < 4)
        throw data_error("series '" + name + "': pattern_length must be >= 4");
}

SlidingWindow::SlidingWindow(std::size_t capacity) : buf_(capacity) {
    if (capacity == 0) throw config_error("sliding window capacity must be positive");
}

std::optional<double> SlidingWindow::push(double x) {
    if (count_ < buf_.size()) {
        buf_[(head_ + count_) % buf_.size()] = x;
        ++count_;
        return std::nullopt;
    }
    double evicted = buf_[head_];
    buf_[head_] = x;
    head_ = (head_ + 1) % buf_.size();
    return evicted;
}

double SlidingWindow::operator[](std::size_t i) const {
    return buf_[(head_ + i) % buf_.size()];
}

void SlidingWindow::copy_to(std::vector<double>& out) const {
    for (std::size_t i = 0; i < count_; ++i) out.push_back((*this)[i]);
}

std::vector<double> SlidingWindow::values() const {
    std::vector<double> out;
    out.reserve(count_);
    copy_to(out);
    return out;
}

double DetectorSpec::param(const std::string& key, double fallback) const {
    auto it = params.find(key);
    return it == params.end() ? fallback : it->second;
}

double deviation_score(double x, double location, double scale) {
    if (scale <= 0.0) return x == location ? 0.0 : kInfScore;
    return std::abs(x - location) / scale;
}

std::vector<std::optional<DetectorVerdict>>
stream_run(Detector& detector, const LabeledSeries& series, std::size_t warmup) {
    if (warmup >= series.size())
        throw config_error("warmup (" + std::to_string(warmup) + ") must be shorter than series '" +
                           series.name + "' (" + std::to_string(series.size()) + " points)");
    std::vector<std::optional<DetectorVerdict>> out(series.size());
    for (std::size_t i = 0; i < series.size(); ++i) {
        DetectorVerdict v = detector.observe(series.points[i]);
        if (i >= warmup) out[i] = v;
    }
    return out;
}

std::size_t default_warmup(const LabeledSeries& series) {
    if (series.seasonal_period_hint)
        return std::min(series.window_cap, 2 * *series.seasonal_period_hint);
    return std::min<std::size_t>(series.window_cap, 30);
}

double mean_of(const std::vector<double>& values) {
    if (values.empty()) return 0.0;
    double sum = 0.0;
    for (double v : values) sum += v;
    return sum / static_cast<double>(values.size());
}

double sample_variance(const std::vector<double>& values) {
    if (values.size() < 2) return 0.0;
    double mu = mean_of(values);
    double ss = 0.0;
    for (double v : values) ss += (v - mu) * (v - mu);
    return ss / static_cast<double>(values.size() - 1);
}

double median_inplace(std::vector<double>& values) {
    const std::size_t n = values.size();
    auto mid = values.begin() + static_cast<std::ptrdiff_t>(n / 2);
    std::nth_element(values.begin(), mid, values.end());
    if (n % 2 == 1) return *mid;
    double hi = *mid;
    double lo = *std::max_element(values.begin(), mid);
    return 0.5 * (lo + hi);
}

std::vector<double> studentize(const std::vector<double>& values) {
    if (values.size() < 2) throw config_error("studentize requires at least 2 values");
    double mu = mean_of(values);
    double sd = std::sqrt(sample_variance(values));
    std::vector<double> out(values.size());
    if (sd == 0.0) return out;  // constant input: all zeros
    for (std::size_t i = 0; i < values.size(); ++i) out[i] = (values[i] - mu) / sd;
    return out;
}

std::vector<double> mean_adjust(const std::vector<double>& values) {
    if (values.empty()) throw config_error("mean_adjust requires at least 1 value");
    double mu = mean_of(values);
    std::vector<double> out(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) out[i] = values[i] - mu;
    return out;
}

}  // namespace streamad

#include "streamad/stats.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <map>

#include <boost/math/distributions/students_t.hpp>

namespace streamad {

namespace {

void require_window(const std::vector<double>& window, std::size_t min_len, const char* op) {
    if (window.size() < min_len)
        throw config_error(std::string(op) + " requires a window of at least " +
                           std::to_string(min_len) + " values");
}

double mad_about(const std::vector<double>& window, double center) {
    std::vector<double> dev(window.size());
    for (std::size_t i = 0; i < window.size(); ++i) dev[i] = std::abs(window[i] - center);
    return median_inplace(dev);
}

std::uint64_t xorshift64(std::uint64_t& s) {
    s ^= s << 13;
    s ^= s >> 7;
    s ^= s << 17;
    return s;
}

/// The critical values depend only on (n, alpha); streaming callers test a
/// full window of constant size every point, so memoize them.
const std::vector<double>& cached_lambdas(std::size_t n, std::size_t k, double alpha) {
    thread_local std::map<std::pair<std::size_t, double>, std::vector<double>> cache;
    auto& vec = cache[{n, alpha}];
    while (vec.size() < k) vec.push_back(gesd_critical_value(n, vec.size() + 1, alpha));
    return vec;
}

}  // namespace

double mu_sigma_score(const std::vector<double>& window, double x) {
    require_window(window, 2, "mu_sigma_score");
    double mu = mean_of(window);
    double sd = std::sqrt(sample_variance(window));
    return deviation_score(x, mu, sd);
}

double med_mad_score(const std::vector<double>& window, double x) {
    require_window(window, 2, "med_mad_score");
    std::vector<double> tmp = window;
    double med = median_inplace(tmp);
    double mad = mad_about(window, med);
    if (mad > 0.0) return deviation_score(x, med, kMadToSigma * mad);
    double mean_ad = 0.0;
    for (double v : window) mean_ad += std::abs(v - med);
    mean_ad /= static_cast<double>(window.size());
    return deviation_score(x, med, kMeanAdToSigma * mean_ad);
}

HuberResult huber_location(const std::vector<double>& window, double tuning_c, double tol) {
    require_window(window, 2, "huber_location");
    std::vector<double> tmp = window;
    double med = median_inplace(tmp);
    double scale = kMadToSigma * mad_about(window, med);
    HuberResult res;
    res.estimate = {med, scale};
    if (scale == 0.0) return res;

    constexpr int kMaxIter = 50;
    double loc = med;
    for (int it = 1; it <= kMaxIter; ++it) {
        double wsum = 0.0, wxsum = 0.0;
        for (double v : window) {
            double z = std::abs(v - loc) / scale;
            double w = z <= tuning_c ? 1.0 : tuning_c / z;
            wsum += w;
            wxsum += w * v;
        }
        double next = wxsum / wsum;
        res.iterations = it;
        bool done = std::abs(next - loc) < tol;
        loc = next;
        if (done) {
            res.estimate.location = loc;
            return res;
        }
    }
    res.estimate.location = loc;
    res.converged = false;
    return res;
}

double gesd_critical_value(std::size_t n, std::size_t i, double alpha) {
    // Rosner (1983): lambda_i compares the i-th studentized extreme against a
    // t-quantile on the sample that remains after i-1 removals.
    const double m = static_cast<double>(n - i + 1);  // current sample size
    assert(m >= 3.0);
    const double p = 1.0 - alpha / (2.0 * m);
    boost::math::students_t_distribution<double> dist(m - 2.0);
    const double t = boost::math::quantile(dist, p);
    return (m - 1.0) * t / std::sqrt((m - 2.0 + t * t) * m);
}

std::vector<std::size_t> gesd(const std::vector<double>& window, const GesdConfig& cfg) {
    const std::size_t n = window.size();
    if (n < 15) throw config_error("gesd requires a window of at least 15 values");
    if (cfg.max_anomaly_fraction <= 0.0 || cfg.max_anomaly_fraction >= 1.0)
        throw config_error("gesd max_anomaly_fraction must lie in (0,1)");
    if (cfg.significance <= 0.0 || cfg.significance >= 1.0)
        throw config_error("gesd significance must lie in (0,1)");

    const std::size_t k = static_cast<std::size_t>(
        std::ceil(cfg.max_anomaly_fraction * static_cast<double>(n)));

    std::vector<bool> alive(n, true);
    double sum = 0.0, sumsq = 0.0;
    for (double v : window) {
        sum += v;
        sumsq += v * v;
    }

    std::vector<std::size_t> removed;
    std::size_t declared = 0;
    for (std::size_t i = 1; i <= k; ++i) {
        const double m = static_cast<double>(n - i + 1);
        if (m < 3.0) break;
        const double mean = sum / m;
        const double var = std::max(0.0, (sumsq - sum * sum / m) / (m - 1.0));
        const double sd = std::sqrt(var);

        std::size_t worst = n;
        double worst_dev = -1.0;
        for (std::size_t j = 0; j < n; ++j) {
            if (!alive[j]) continue;
            double dev = std::abs(window[j] - mean);
            if (dev > worst_dev) {
                worst_dev = dev;
                worst = j;
            }
        }
        if (worst == n) break;

        const double r = sd > 0.0 ? worst_dev / sd : 0.0;
        if (r > cached_lambdas(n, k, cfg.significance)[i - 1]) declared = i;

        alive[worst] = false;
        removed.push_back(worst);
        sum -= window[worst];
        sumsq -= window[worst] * window[worst];
    }

    removed.resize(declared);
    std::sort(removed.begin(), removed.end());
    return removed;
}

// --- t-digest ---------------------------------------------------------------

TDigest::TDigest(double compression, std::uint64_t seed) : delta_(compression) {
    if (delta_ <= 0.0 || delta_ > 1.0) throw config_error("t-digest compression must lie in (0,1]");
    rng_state_ = seed != 0 ? seed : 0x9e3779b97f4a7c15ULL;
}

double TDigest::bin_cap(double n, double delta, double q) {
    return std::max(1.0, std::floor(4.0 * n * delta * q * (1.0 - q)));
}

void TDigest::insert(double x) {
    total_ += 1.0;
    if (centroids_.empty()) {
        centroids_.push_back({x, 1.0});
        return;
    }

    // Nearest centroid by mean; ties resolve to the left neighbour.
    auto it = std::lower_bound(centroids_.begin(), centroids_.end(), x,
                               [](const Centroid& c, double v) { return c.mean < v; });
    std::size_t cand;
    if (it == centroids_.begin()) {
        cand = 0;
    } else if (it == centroids_.end()) {
        cand = centroids_.size() - 1;
    } else {
        std::size_t hi = static_cast<std::size_t>(it - centroids_.begin());
        cand = (x - centroids_[hi - 1].mean) <= (centroids_[hi].mean - x) ? hi - 1 : hi;
    }

    double cum_before = 0.0;
    for (std::size_t i = 0; i < cand; ++i) cum_before += centroids_[i].count;
    const double q = (cum_before + centroids_[cand].count / 2.0) / total_;
    const double cap = bin_cap(total_, delta_, q);

    if (centroids_[cand].count + 1.0 <= cap) {
        Centroid& c = centroids_[cand];
        c.count += 1.0;
        c.mean += (x - c.mean) / c.count;
        // A merge can nudge the mean past a neighbour; restore ordering.
        while (cand > 0 && centroids_[cand].mean < centroids_[cand - 1].mean) {
            std::swap(centroids_[cand], centroids_[cand - 1]);
            --cand;
        }
        while (cand + 1 < centroids_.size() && centroids_[cand].mean > centroids_[cand + 1].mean) {
            std::swap(centroids_[cand], centroids_[cand + 1]);
            ++cand;
        }
    } else {
        auto pos = std::lower_bound(centroids_.begin(), centroids_.end(), x,
                                    [](const Centroid& c, double v) { return c.mean < v; });
        centroids_.insert(pos, Centroid{x, 1.0});
    }

    if (static_cast<double>(centroids_.size()) > 10.0 / delta_) compact();
}

void TDigest::compact() {
    std::vector<Centroid> pending = std::move(centroids_);
    centroids_.clear();
    // Re-insert in shuffled order so that no systematic bias accumulates.
    for (std::size_t i = pending.size(); i > 1; --i) {
        std::size_t j = xorshift64(rng_state_) % i;
        std::swap(pending[i - 1], pending[j]);
    }

    double seen = 0.0;
    for (const Centroid& p : pending) {
        seen += p.count;
        if (centroids_.empty()) {
            centroids_.push_back(p);
            continue;
        }
        auto it = std::lower_bound(centroids_.begin(), centroids_.end(), p.mean,
                                   [](const Centroid& c, double v) { return c.mean < v; });
        std::size_t cand;
        if (it == centroids_.begin()) {
            cand = 0;
        } else if (it == centroids_.end()) {
            cand = centroids_.size() - 1;
        } else {
            std::size_t hi = static_cast<std::size_t>(it - centroids_.begin());
            cand = (p.mean - centroids_[hi - 1].mean) <= (centroids_[hi].mean - p.mean) ? hi - 1
                                                                                        : hi;
        }
        double cum_before = 0.0;
        for (std::size_t i = 0; i < cand; ++i) cum_before += centroids_[i].count;
        const double q = (cum_before + centroids_[cand].count / 2.0) / seen;
        const double cap = bin_cap(seen, delta_, q);
        if (centroids_[cand].count + p.count <= cap) {
            Centroid& c = centroids_[cand];
            double merged = c.count + p.count;
            c.mean = (c.mean * c.count + p.mean * p.count) / merged;
            c.count = merged;
            while (cand > 0 && centroids_[cand].mean < centroids_[cand - 1].mean) {
                std::swap(centroids_[cand], centroids_[cand - 1]);
                --cand;
            }
            while (cand + 1 < centroids_.size() &&
                   centroids_[cand].mean > centroids_[cand + 1].mean) {
                std::swap(centroids_[cand], centroids_[cand + 1]);
                ++cand;
            }
        } else {
            auto pos = std::lower_bound(centroids_.begin(), centroids_.end(), p.mean,
                                        [](const Centroid& c, double v) { return c.mean < v; });
            centroids_.insert(pos, p);
        }
    }
}

double TDigest::quantile(double q) const {
    if (centroids_.empty()) throw config_error("t-digest quantile on an empty digest");
    q = std::clamp(q, 0.0, 1.0);
    if (centroids_.size() == 1) return centroids_.front().mean;

    const double target = q * total_;
    double cum = 0.0;
    double prev_mid = 0.0;
    for (std::size_t i = 0; i < centroids_.size(); ++i) {
        const double mid = cum + centroids_[i].count / 2.0;
        if (target <= mid) {
            if (i == 0) return centroids_.front().mean;
            const double frac = (target - prev_mid) / (mid - prev_mid);
            return centroids_[i - 1].mean + frac * (centroids_[i].mean - centroids_[i - 1].mean);
        }
        cum += centroids_[i].count;
        prev_mid = mid;
    }
    return centroids_.back().mean;
}

// --- medcouple / adjusted boxplot -------------------------------------------

double medcouple(const std::vector<double>& window) {
    require_window(window, 4, "medcouple");
    std::vector<double> sorted = window;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t n = sorted.size();
    const double med = n % 2 == 1 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);

    std::vector<double> upper, lower;
    for (double v : sorted) {
        if (v >= med) upper.push_back(v);  // ascending; ties first
        if (v <= med) lower.push_back(v);  // ascending; ties last
    }
    const std::ptrdiff_t ties = std::count(sorted.begin(), sorted.end(), med);

    std::vector<double> kernels;
    kernels.reserve(upper.size() * lower.size());
    for (std::size_t i = 0; i < upper.size(); ++i) {
        for (std::size_t j = 0; j < lower.size(); ++j) {
            const double xi = upper[i], yj = lower[j];
            if (xi == med && yj == med) {
                // Tie kernel: antisymmetric sign rule over tie ranks.
                const std::ptrdiff_t ip = static_cast<std::ptrdiff_t>(i) + 1;  // ties lead upper
                const std::ptrdiff_t jp =
                    static_cast<std::ptrdiff_t>(j) - (static_cast<std::ptrdiff_t>(lower.size()) - ties) + 1;
                const std::ptrdiff_t s = ip + jp - 1 - ties;
                kernels.push_back(s > 0 ? 1.0 : (s < 0 ? -1.0 : 0.0));
            } else {
                kernels.push_back(((xi - med) - (med - yj)) / (xi - yj));
            }
        }
    }
    return median_inplace(kernels);
}

double quantile_type7_inplace(std::vector<double>& values, double q) {
    std::sort(values.begin(), values.end());
    const double h = q * static_cast<double>(values.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(h);
    if (lo + 1 >= values.size()) return values.back();
    const double frac = h - static_cast<double>(lo);
    return values[lo] + frac * (values[lo + 1] - values[lo]);
}

std::pair<double, double> adjusted_fences(const std::vector<double>& window) {
    require_window(window, 4, "adjusted_fences");
    std::vector<double> tmp = window;
    const double q1 = quantile_type7_inplace(tmp, 0.25);
    const double q3 = quantile_type7_inplace(tmp, 0.75);
    const double iqr = q3 - q1;
    const double mc = medcouple(window);
    double lo, hi;
    if (mc >= 0.0) {
        lo = q1 - 1.5 * std::exp(-4.0 * mc) * iqr;
        hi = q3 + 1.5 * std::exp(3.0 * mc) * iqr;
    } else {
        lo = q1 - 1.5 * std::exp(-3.0 * mc) * iqr;
        hi = q3 + 1.5 * std::exp(4.0 * mc) * iqr;
    }
    return {lo, hi};
}

}  // namespace streamad

#include "streamad/seasonal.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/distributions/normal.hpp>

namespace streamad {

namespace {

double tricube(double u) {
    if (u >= 1.0) return 0.0;
    const double t = 1.0 - u * u * u;
    return t * t * t;
}

/// Weighted polynomial fit (degree <= 2) evaluated at the expansion origin.
/// Falls back to the weighted mean when the normal equations are singular.
double weighted_polyfit_origin(const std::vector<double>& ts, const std::vector<double>& ys,
                               const std::vector<double>& ws, int degree) {
    const std::size_t n = ts.size();
    double wsum = 0.0, ysum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        wsum += ws[i];
        ysum += ws[i] * ys[i];
    }
    if (wsum <= 0.0) return 0.0;
    const double wmean = ysum / wsum;
    if (degree == 0) return wmean;

    const int dim = degree + 1;
    double a[3][3] = {{0}};
    double b[3] = {0};
    for (std::size_t i = 0; i < n; ++i) {
        double phi[3] = {1.0, ts[i], ts[i] * ts[i]};
        for (int r = 0; r < dim; ++r) {
            b[r] += ws[i] * ys[i] * phi[r];
            for (int c = 0; c < dim; ++c) a[r][c] += ws[i] * phi[r] * phi[c];
        }
    }
    // Gaussian elimination with partial pivoting.
    int perm[3] = {0, 1, 2};
    for (int col = 0; col < dim; ++col) {
        int piv = col;
        for (int r = col + 1; r < dim; ++r)
            if (std::abs(a[perm[r]][col]) > std::abs(a[perm[piv]][col])) piv = r;
        std::swap(perm[col], perm[piv]);
        const double diag = a[perm[col]][col];
        if (std::abs(diag) < 1e-12 * (1.0 + std::abs(a[perm[0]][0]))) return wmean;
        for (int r = col + 1; r < dim; ++r) {
            const double f = a[perm[r]][col] / diag;
            for (int c = col; c < dim; ++c) a[perm[r]][c] -= f * a[perm[col]][c];
            b[perm[r]] -= f * b[perm[col]];
        }
    }
    double coef[3] = {0};
    for (int r = dim - 1; r >= 0; --r) {
        double acc = b[perm[r]];
        for (int c = r + 1; c < dim; ++c) acc -= a[perm[r]][c] * coef[c];
        coef[r] = acc / a[perm[r]][r];
    }
    return coef[0];  // value at t = 0
}

std::size_t next_odd(double x) {
    auto v = static_cast<std::size_t>(std::ceil(x));
    return v % 2 == 0 ? v + 1 : v;
}

/// Centered moving average of length len (len outputs fewer than inputs).
std::vector<double> moving_average(const std::vector<double>& xs, std::size_t len) {
    std::vector<double> out;
    if (xs.size() < len) return out;
    out.reserve(xs.size() - len + 1);
    double acc = 0.0;
    for (std::size_t i = 0; i < len; ++i) acc += xs[i];
    out.push_back(acc / static_cast<double>(len));
    for (std::size_t i = len; i < xs.size(); ++i) {
        acc += xs[i] - xs[i - len];
        out.push_back(acc / static_cast<double>(len));
    }
    return out;
}

}  // namespace

std::vector<double> acf(const std::vector<double>& series, std::size_t max_lag) {
    const std::size_t n = series.size();
    if (max_lag < 1 || n <= max_lag)
        throw config_error("acf requires series length > max_lag >= 1");
    const double mu = mean_of(series);
    double denom = 0.0;
    for (double v : series) denom += (v - mu) * (v - mu);

    std::vector<double> out(max_lag + 1, 0.0);
    out[0] = 1.0;
    if (denom == 0.0) return out;  // constant series
    for (std::size_t k = 1; k <= max_lag; ++k) {
        double acc = 0.0;
        for (std::size_t t = k; t < n; ++t) acc += (series[t] - mu) * (series[t - k] - mu);
        out[k] = acc / denom;
    }
    return out;
}

std::optional<std::size_t> estimate_period(const std::vector<double>& series) {
    const std::size_t n = series.size();
    if (n < 3) throw config_error("estimate_period requires at least 3 values");
    const std::size_t max_lag = std::min<std::size_t>(n - 2, std::min<std::size_t>(1024, n / 2));
    if (max_lag < 2) return std::nullopt;
    const std::vector<double> r = acf(series, max_lag);

    // White-noise significance bound, Bonferroni-adjusted for the number of
    // lags scanned (a plain 1.96/sqrt(n) fires on noise once many lags are
    // inspected).
    boost::math::normal_distribution<double> normal;
    const double z = boost::math::quantile(normal, 1.0 - 0.025 / static_cast<double>(max_lag));
    const double threshold = z / std::sqrt(static_cast<double>(n));

    std::optional<std::size_t> best;
    for (std::size_t k = 2; k + 1 <= max_lag; ++k) {
        const bool local_max = r[k] > r[k - 1] && (k + 1 > max_lag || r[k] >= r[k + 1]);
        if (!local_max || r[k] <= threshold) continue;
        if (!best || r[k] > r[*best]) best = k;
    }
    return best;
}

double loess_at(const std::vector<double>& xs, const std::vector<double>& ys, double x0,
                std::size_t span, int degree,
                const std::vector<double>* robustness_weights) {
    const std::size_t n = xs.size();
    if (n == 0 || n != ys.size()) throw config_error("loess: empty input or size mismatch");
    if (degree < 0 || degree > 2) throw config_error("loess: degree must be 0, 1 or 2");
    if (span < static_cast<std::size_t>(degree) + 2)
        throw config_error("loess: span must be >= degree + 2");
    const std::size_t q = std::min(span, n);

    // Contiguous q-point neighborhood closest to x0 (xs strictly increasing).
    std::size_t lo = 0;
    {
        auto it = std::lower_bound(xs.begin(), xs.end(), x0);
        std::size_t center = static_cast<std::size_t>(it - xs.begin());
        lo = center > q ? center - q : 0;
        std::size_t best_lo = lo;
        double best_d = std::numeric_limits<double>::infinity();
        for (std::size_t s = lo; s + q <= n && s <= center; ++s) {
            double d = std::max(std::abs(xs[s] - x0), std::abs(xs[s + q - 1] - x0));
            if (d < best_d) {
                best_d = d;
                best_lo = s;
            }
        }
        lo = best_lo;
    }

    double dmax = std::max(std::abs(xs[lo] - x0), std::abs(xs[lo + q - 1] - x0));
    if (span > n) dmax *= static_cast<double>(span) / static_cast<double>(n);

    std::vector<double> ts(q), sub_y(q), ws(q);
    bool any_weight = false;
    for (std::size_t i = 0; i < q; ++i) {
        ts[i] = xs[lo + i] - x0;
        sub_y[i] = ys[lo + i];
        double w = dmax > 0.0 ? tricube(std::abs(ts[i]) / dmax) : 1.0;
        if (robustness_weights) w *= (*robustness_weights)[lo + i];
        ws[i] = w;
        any_weight = any_weight || w > 0.0;
    }
    if (!any_weight) {
        for (std::size_t i = 0; i < q; ++i) ws[i] = 1.0;
    }
    return weighted_polyfit_origin(ts, sub_y, ws, degree);
}

std::vector<double> loess(const std::vector<double>& xs, const std::vector<double>& ys,
                          std::size_t span, int degree,
                          const std::vector<double>* robustness_weights,
                          std::size_t eval_jump) {
    const std::size_t n = xs.size();
    if (n != ys.size()) throw config_error("loess: xs/ys size mismatch");
    std::vector<double> fitted(n);
    if (n == 0) return fitted;
    if (eval_jump <= 1) {
        for (std::size_t i = 0; i < n; ++i)
            fitted[i] = loess_at(xs, ys, xs[i], span, degree, robustness_weights);
        return fitted;
    }
    // Fit at every jump-th point and interpolate linearly in between.
    std::size_t prev = 0;
    fitted[0] = loess_at(xs, ys, xs[0], span, degree, robustness_weights);
    for (std::size_t i = eval_jump; i < n + eval_jump; i += eval_jump) {
        const std::size_t j = std::min(i, n - 1);
        fitted[j] = loess_at(xs, ys, xs[j], span, degree, robustness_weights);
        for (std::size_t t = prev + 1; t < j; ++t) {
            const double f = (xs[t] - xs[prev]) / (xs[j] - xs[prev]);
            fitted[t] = fitted[prev] + f * (fitted[j] - fitted[prev]);
        }
        prev = j;
        if (j == n - 1) break;
    }
    return fitted;
}

Decomposition stl(const std::vector<double>& series, const StlConfig& cfg) {
    const std::size_t n = series.size();
    const std::size_t p = cfg.period;
    if (p < 2) throw config_error("stl: period must be >= 2");
    if (n < 2 * p)
        throw config_error("stl: series length " + std::to_string(n) +
                           " is shorter than two periods (" + std::to_string(2 * p) + ")");

    const bool periodic = cfg.s_window <= 0;
    const std::size_t s_span = periodic ? 0 : static_cast<std::size_t>(cfg.s_window);
    const std::size_t t_span =
        cfg.t_window > 0
            ? static_cast<std::size_t>(cfg.t_window)
            : next_odd(1.5 * static_cast<double>(p) /
                       (1.0 - 1.5 / static_cast<double>(periodic ? 10 * p : s_span)));
    const std::size_t l_span =
        cfg.l_window > 0 ? static_cast<std::size_t>(cfg.l_window) : next_odd(static_cast<double>(p));

    std::vector<double> trend(n, 0.0), seasonal(n, 0.0);
    std::vector<double> rho(n, 1.0);  // robustness weights

    std::vector<double> trend_xs(n);
    for (std::size_t i = 0; i < n; ++i) trend_xs[i] = static_cast<double>(i);
    const std::size_t t_jump = std::max<std::size_t>(1, t_span / 10);
    const std::size_t l_jump = std::max<std::size_t>(1, l_span / 10);

    auto inner = [&]() {
        std::vector<double> detrended(n), ext(n + 2 * p), lowpass;
        for (int pass = 0; pass < std::max(1, cfg.inner_iterations); ++pass) {
            for (std::size_t i = 0; i < n; ++i) detrended[i] = series[i] - trend[i];

            // Cycle sub-series smoothing, extended one period on each side.
            for (std::size_t c = 0; c < p; ++c) {
                std::vector<double> sub_x, sub_y, sub_w;
                for (std::size_t t = c; t < n; t += p) {
                    sub_x.push_back(static_cast<double>(sub_x.size()));
                    sub_y.push_back(detrended[t]);
                    sub_w.push_back(rho[t]);
                }
                const std::size_t m = sub_y.size();
                if (periodic) {
                    double wsum = 0.0, acc = 0.0;
                    for (std::size_t j = 0; j < m; ++j) {
                        wsum += sub_w[j];
                        acc += sub_w[j] * sub_y[j];
                    }
                    const double mean = wsum > 0.0 ? acc / wsum : 0.0;
                    for (std::size_t j = 0; j <= m + 1; ++j) {
                        const std::size_t pos = c + j * p;  // ext index of cycle j-1
                        if (pos < ext.size()) ext[pos] = mean;
                    }
                } else {
                    const std::size_t span = std::max<std::size_t>(3, s_span);
                    for (std::size_t j = 0; j <= m + 1; ++j) {
                        const double x0 = static_cast<double>(j) - 1.0;
                        const std::size_t pos = c + j * p;
                        if (pos < ext.size())
                            ext[pos] = loess_at(sub_x, sub_y, x0, span, 1, &sub_w);
                    }
                }
            }

            // Low-pass: MA(p) twice, MA(3), then a loess polish; subtracting
            // it from the smoothed sub-series keeps low frequencies out of
            // the seasonal component.
            lowpass = moving_average(moving_average(moving_average(ext, p), p), 3);
            std::vector<double> lp_xs(lowpass.size());
            for (std::size_t i = 0; i < lowpass.size(); ++i) lp_xs[i] = static_cast<double>(i);
            lowpass = loess(lp_xs, lowpass, l_span, 1, nullptr, l_jump);

            for (std::size_t i = 0; i < n; ++i) seasonal[i] = ext[i + p] - lowpass[i];

            std::vector<double> deseason(n);
            for (std::size_t i = 0; i < n; ++i) deseason[i] = series[i] - seasonal[i];
            trend = loess(trend_xs, deseason, t_span, 1, &rho, t_jump);
        }
    };

    inner();
    for (int outer = 0; outer < cfg.robust_iterations; ++outer) {
        std::vector<double> abs_rem(n);
        for (std::size_t i = 0; i < n; ++i)
            abs_rem[i] = std::abs(series[i] - seasonal[i] - trend[i]);
        std::vector<double> tmp = abs_rem;
        const double h = 6.0 * median_inplace(tmp);
        if (h <= 0.0) break;  // perfect fit, nothing to down-weight
        for (std::size_t i = 0; i < n; ++i) {
            const double u = abs_rem[i] / h;
            rho[i] = u >= 1.0 ? 0.0 : (1.0 - u * u) * (1.0 - u * u);
        }
        inner();
    }

    Decomposition d;
    d.seasonal = std::move(seasonal);
    d.trend = std::move(trend);
    d.remainder.resize(n);
    for (std::size_t i = 0; i < n; ++i) d.remainder[i] = series[i] - d.seasonal[i] - d.trend[i];
    return d;
}

}  // namespace streamad

#include "streamad/ts_models.hpp"

#include <algorithm>
#include <cmath>

namespace streamad {

namespace {

/// Levinson-Durbin solve of the Toeplitz system given autocovariances
/// cov[0..k]; returns AR coefficients for lags 1..k (empty on failure).
std::vector<double> levinson(const std::vector<double>& cov, std::size_t k) {
    std::vector<double> a;
    double e = cov[0];
    if (e <= 0.0) return {};
    for (std::size_t m = 1; m <= k; ++m) {
        double acc = cov[m];
        for (std::size_t j = 0; j < a.size(); ++j) acc -= a[j] * cov[m - 1 - j];
        const double kappa = acc / e;
        if (!std::isfinite(kappa) || std::abs(kappa) >= 1.0) return {};
        std::vector<double> next(m);
        for (std::size_t j = 0; j + 1 < m; ++j) next[j] = a[j] - kappa * a[m - 2 - j];
        next[m - 1] = kappa;
        a = std::move(next);
        e *= 1.0 - kappa * kappa;
        if (e <= 0.0) return {};
    }
    return a;
}

/// Dense symmetric solve (Gaussian elimination, partial pivoting) for the
/// small regression systems used by the ARMA fit.
std::vector<double> solve_dense(std::vector<std::vector<double>> a, std::vector<double> b) {
    const std::size_t n = b.size();
    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::abs(a[perm[r]][col]) > std::abs(a[perm[piv]][col])) piv = r;
        std::swap(perm[col], perm[piv]);
        const double diag = a[perm[col]][col];
        if (std::abs(diag) < 1e-12) return {};
        for (std::size_t r = col + 1; r < n; ++r) {
            const double f = a[perm[r]][col] / diag;
            for (std::size_t c = col; c < n; ++c) a[perm[r]][c] -= f * a[perm[col]][c];
            b[perm[r]] -= f * b[perm[col]];
        }
    }
    std::vector<double> x(n);
    for (std::size_t ri = n; ri-- > 0;) {
        double acc = b[perm[ri]];
        for (std::size_t c = ri + 1; c < n; ++c) acc -= a[perm[ri]][c] * x[c];
        x[ri] = acc / a[perm[ri]][ri];
    }
    return x;
}

}  // namespace

// --- SDAR --------------------------------------------------------------------

Sdar::Sdar(std::size_t order, double discount_rate)
    : order_(order), rate_(discount_rate), cov_(order + 1, 0.0) {
    if (order_ == 0) throw config_error("sdar order must be >= 1");
    if (rate_ <= 0.0 || rate_ >= 1.0) throw config_error("sdar discount rate must lie in (0,1)");
}

void Sdar::solve_coefficients() {
    coeffs_ = levinson(cov_, order_);
    if (coeffs_.empty()) {
        // Near-singular system: retry with a small ridge on the diagonal.
        std::vector<double> ridged = cov_;
        ridged[0] += 1e-6 * (std::abs(ridged[0]) + 1e-12);
        coeffs_ = levinson(ridged, order_);
        if (coeffs_.empty()) coeffs_.assign(order_, 0.0);
    }
}

Sdar::Step Sdar::step(double x) {
    Step out;
    ++seen_;
    if (lags_.size() < order_) {
        // Still filling the lag buffer; track the discounted mean only.
        mean_ = seen_ == 1 ? x : (1.0 - rate_) * mean_ + rate_ * x;
        lags_.push_front(x);
        out.prediction = mean_;
        return out;
    }

    if (coeffs_.empty()) solve_coefficients();
    double pred = mean_;
    for (std::size_t j = 0; j < order_; ++j) pred += coeffs_[j] * (lags_[j] - mean_);
    out.prediction = pred;
    out.score = deviation_score(x, pred, std::sqrt(std::max(0.0, resid_var_)));
    out.ready = true;

    mean_ = (1.0 - rate_) * mean_ + rate_ * x;
    cov_[0] = (1.0 - rate_) * cov_[0] + rate_ * (x - mean_) * (x - mean_);
    for (std::size_t j = 1; j <= order_; ++j)
        cov_[j] = (1.0 - rate_) * cov_[j] + rate_ * (x - mean_) * (lags_[j - 1] - mean_);
    solve_coefficients();
    resid_var_ = (1.0 - rate_) * resid_var_ + rate_ * (x - pred) * (x - pred);

    lags_.push_front(x);
    lags_.pop_back();
    return out;
}

// --- Kalman -------------------------------------------------------------------

KalmanFilter::KalmanFilter(const KalmanConfig& cfg) : cfg_(cfg) {
    if (cfg_.process_noise < 0.0 || cfg_.observation_noise <= 0.0)
        throw config_error("kalman noise variances must be positive");
    if (cfg_.robust && (cfg_.alpha <= 0.0 || cfg_.beta <= 0.0))
        throw config_error("kalman robust prior parameters must be positive");
}

KalmanFilter::Step KalmanFilter::step(double x) {
    Step out;
    if (!initialized_) {
        m_[0] = x;
        m_[1] = 0.0;
        const double big = 1e4 * (cfg_.observation_noise + cfg_.process_noise);
        p_[0][0] = big;
        p_[1][1] = cfg_.model == KalmanModel::kLocalLinear ? big : 0.0;
        p_[0][1] = p_[1][0] = 0.0;
        initialized_ = true;
        out.prediction = x;
        return out;
    }

    // Predict.
    double pm[2] = {m_[0], m_[1]};
    double pp[2][2] = {{p_[0][0], p_[0][1]}, {p_[1][0], p_[1][1]}};
    if (cfg_.model == KalmanModel::kLocalLinear) {
        pm[0] = m_[0] + m_[1];
        pp[0][0] = p_[0][0] + p_[0][1] + p_[1][0] + p_[1][1] + cfg_.process_noise;
        pp[0][1] = p_[0][1] + p_[1][1];
        pp[1][0] = p_[1][0] + p_[1][1];
        pp[1][1] = p_[1][1] + cfg_.process_noise;
    } else {
        pp[0][0] += cfg_.process_noise;
    }

    const double innovation = x - pm[0];
    const double s = pp[0][0] + cfg_.observation_noise;
    out.prediction = pm[0];
    out.score = deviation_score(x, pm[0], std::sqrt(std::max(0.0, s)));

    double r_eff = cfg_.observation_noise;
    if (cfg_.robust) {
        const double z2 = innovation * innovation / std::max(s, 1e-300);
        out.weight = (cfg_.alpha + 0.5) / (cfg_.beta + 0.5 * z2);
        r_eff = cfg_.observation_noise / out.weight;
    }

    const double s_eff = pp[0][0] + r_eff;
    const double k0 = pp[0][0] / s_eff;
    const double k1 = pp[1][0] / s_eff;
    m_[0] = pm[0] + k0 * innovation;
    m_[1] = pm[1] + k1 * innovation;
    p_[0][0] = (1.0 - k0) * pp[0][0];
    p_[0][1] = (1.0 - k0) * pp[0][1];
    p_[1][0] = pp[1][0] - k1 * pp[0][0];
    p_[1][1] = pp[1][1] - k1 * pp[0][1];

    // Re-symmetrize and clamp eigenvalues at zero.
    const double off = 0.5 * (p_[0][1] + p_[1][0]);
    p_[0][1] = p_[1][0] = off;
    const double tr = p_[0][0] + p_[1][1];
    const double det = p_[0][0] * p_[1][1] - off * off;
    if (p_[0][0] < 0.0) p_[0][0] = 0.0;
    if (p_[1][1] < 0.0) p_[1][1] = 0.0;
    if (det < 0.0) {
        // Project onto the nearest PSD matrix by clamping the negative
        // eigenvalue of the symmetric 2x2.
        const double disc = std::sqrt(std::max(0.0, tr * tr / 4.0 - det));
        const double l1 = tr / 2.0 + disc, l2 = tr / 2.0 - disc;
        double v[2] = {off, l1 - p_[0][0]};
        const double norm = std::hypot(v[0], v[1]);
        if (norm > 0.0 && l2 < 0.0) {
            v[0] /= norm;
            v[1] /= norm;
            const double keep = std::max(0.0, l1);
            p_[0][0] = keep * v[0] * v[0];
            p_[0][1] = p_[1][0] = keep * v[0] * v[1];
            p_[1][1] = keep * v[1] * v[1];
        }
    }
    return out;
}

// --- ARMA ---------------------------------------------------------------------

bool ar_is_stationary(const std::vector<double>& ar) {
    std::vector<double> a = ar;
    for (std::size_t m = a.size(); m >= 1; --m) {
        const double kappa = a[m - 1];
        if (!std::isfinite(kappa) || std::abs(kappa) >= 1.0) return false;
        if (m == 1) break;
        std::vector<double> prev(m - 1);
        const double denom = 1.0 - kappa * kappa;
        for (std::size_t j = 0; j + 1 < m; ++j)
            prev[j] = (a[j] + kappa * a[m - 2 - j]) / denom;
        a = std::move(prev);
    }
    return true;
}

ArmaModel arma_fit(const std::vector<double>& window, std::size_t p, std::size_t q) {
    const std::size_t n = window.size();
    if (n < 2 || n < 10 * (p + q))
        throw config_error("arma_fit requires window length >= 10*(p+q) and >= 2");

    ArmaModel model;
    model.mean = mean_of(window);
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) y[i] = window[i] - model.mean;

    if (p == 0 && q == 0) {
        model.sigma2 = sample_variance(window);
        return model;
    }

    // Stage 1: long AR via Levinson-Durbin on sample autocovariances; its
    // residuals act as innovation proxies.
    const std::size_t long_order =
        std::min<std::size_t>(std::max<std::size_t>(2 * (p + q), 20), n / 4);
    std::vector<double> cov(long_order + 1, 0.0);
    for (std::size_t lag = 0; lag <= long_order; ++lag) {
        double acc = 0.0;
        for (std::size_t t = lag; t < n; ++t) acc += y[t] * y[t - lag];
        cov[lag] = acc / static_cast<double>(n);
    }
    std::vector<double> long_ar = levinson(cov, long_order);
    if (long_ar.empty()) long_ar.assign(long_order, 0.0);

    std::vector<double> resid(n, 0.0);
    for (std::size_t t = long_order; t < n; ++t) {
        double pred = 0.0;
        for (std::size_t j = 0; j < long_order; ++j) pred += long_ar[j] * y[t - 1 - j];
        resid[t] = y[t] - pred;
    }

    // Stage 2: regress y_t on its own lags and the lagged residual proxies.
    const std::size_t dim = p + q;
    const std::size_t start = long_order + std::max(p, q);
    std::vector<std::vector<double>> ata(dim, std::vector<double>(dim, 0.0));
    std::vector<double> atb(dim, 0.0);
    std::size_t rows = 0;
    std::vector<double> phi_row(dim);
    for (std::size_t t = start; t < n; ++t) {
        for (std::size_t j = 0; j < p; ++j) phi_row[j] = y[t - 1 - j];
        for (std::size_t j = 0; j < q; ++j) phi_row[p + j] = resid[t - 1 - j];
        for (std::size_t r = 0; r < dim; ++r) {
            atb[r] += phi_row[r] * y[t];
            for (std::size_t c = 0; c < dim; ++c) ata[r][c] += phi_row[r] * phi_row[c];
        }
        ++rows;
    }
    std::vector<double> beta = solve_dense(ata, atb);
    if (beta.empty()) beta.assign(dim, 0.0);

    model.ar.assign(beta.begin(), beta.begin() + static_cast<std::ptrdiff_t>(p));
    model.ma.assign(beta.begin() + static_cast<std::ptrdiff_t>(p), beta.end());

    // Enforce stationarity by shrinking toward zero.
    while (!model.ar.empty() && !ar_is_stationary(model.ar)) {
        for (double& c : model.ar) c *= 0.99;
        model.shrunk = true;
    }

    // Innovation variance from the conditional residuals of the final model.
    ArmaForecaster fc(model);
    double rss = 0.0;
    std::size_t cnt = 0;
    for (std::size_t t = 0; t < n; ++t) {
        auto st = fc.step(window[t]);
        if (t >= start) {
            const double e = window[t] - st.prediction;
            rss += e * e;
            ++cnt;
        }
    }
    model.sigma2 = cnt > 0 ? rss / static_cast<double>(cnt) : sample_variance(window);
    (void)rows;
    return model;
}

ArmaForecaster::ArmaForecaster(ArmaModel model) : model_(std::move(model)) {}

ArmaForecaster::Step ArmaForecaster::step(double x) {
    Step out;
    double pred = model_.mean;
    for (std::size_t j = 0; j < model_.p() && j < lag_values_.size(); ++j)
        pred += model_.ar[j] * (lag_values_[j] - model_.mean);
    for (std::size_t j = 0; j < model_.q() && j < lag_resid_.size(); ++j)
        pred += model_.ma[j] * lag_resid_[j];
    out.prediction = pred;
    out.score = deviation_score(x, pred, std::sqrt(std::max(0.0, model_.sigma2)));

    lag_values_.push_front(x);
    if (lag_values_.size() > std::max<std::size_t>(model_.p(), 1)) lag_values_.pop_back();
    lag_resid_.push_front(x - pred);
    if (lag_resid_.size() > std::max<std::size_t>(model_.q(), 1)) lag_resid_.pop_back();
    return out;
}

}  // namespace streamad

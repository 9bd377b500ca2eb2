#pragma once

#include <cstddef>
#include <deque>
#include <vector>

#include "streamad/core.hpp"

namespace streamad {

/// Sequentially discounting autoregression: discounted mean, autocovariances
/// and residual variance, with coefficients re-solved each step from the
/// Toeplitz system (O(k^2) per point).
class Sdar {
public:
    Sdar(std::size_t order, double discount_rate);

    struct Step {
        double prediction = 0.0;
        double score = 0.0;
        bool ready = false;
    };

    /// Scores x against the one-step prediction from the current state, then
    /// folds x into the discounted statistics.
    Step step(double x);

    std::size_t order() const { return order_; }
    double discount_rate() const { return rate_; }
    const std::vector<double>& coefficients() const { return coeffs_; }
    double residual_variance() const { return resid_var_; }

private:
    void solve_coefficients();

    std::size_t order_;
    double rate_;
    double mean_ = 0.0;
    std::vector<double> cov_;     // discounted autocovariances, lag 0..k
    std::vector<double> coeffs_;  // AR coefficients, lag 1..k
    double resid_var_ = 0.0;
    std::deque<double> lags_;     // newest in front
    std::size_t seen_ = 0;
};

enum class KalmanModel { kLocalLevel, kLocalLinear };

struct KalmanConfig {
    KalmanModel model = KalmanModel::kLocalLevel;
    double process_noise = 0.01;
    double observation_noise = 1.0;
    bool robust = false;
    /// Gamma prior on the per-point robustness weight (Ting et al. style:
    /// w = (alpha + 1/2) / (beta + z^2/2)).
    double alpha = 1.0;
    double beta = 1.0;
};

/// Scalar-observation Kalman filter over a local-level or local-linear state.
/// In robust mode the innovation's influence is scaled by the Gamma-prior
/// weight before the update, which mutes outliers.
class KalmanFilter {
public:
    explicit KalmanFilter(const KalmanConfig& cfg);

    struct Step {
        double prediction = 0.0;
        double score = 0.0;    // standardized innovation
        double weight = 1.0;   // robustness weight applied (1 when not robust)
    };

    Step step(double x);

    double level() const { return m_[0]; }
    const KalmanConfig& config() const { return cfg_; }

private:
    KalmanConfig cfg_;
    double m_[2] = {0.0, 0.0};
    double p_[2][2] = {{0.0, 0.0}, {0.0, 0.0}};
    bool initialized_ = false;
};

struct ArmaModel {
    std::vector<double> ar;  // phi, lag 1..p
    std::vector<double> ma;  // theta, lag 1..q
    double sigma2 = 0.0;
    double mean = 0.0;
    /// Set when the fitted AR polynomial had to be shrunk toward zero to
    /// restore stationarity.
    bool shrunk = false;

    std::size_t p() const { return ar.size(); }
    std::size_t q() const { return ma.size(); }
};

/// Hannan-Rissanen two-stage ARMA estimate: a long-AR fit supplies residual
/// proxies, then x_t is regressed on its own lags and the lagged residuals.
/// Requires window length >= 10 * (p + q) and >= 2.
ArmaModel arma_fit(const std::vector<double>& window, std::size_t p, std::size_t q);

/// True when every reflection coefficient of the AR polynomial lies inside
/// the unit interval (all roots outside the unit circle).
bool ar_is_stationary(const std::vector<double>& ar);

/// One-step-ahead ARMA forecaster over a fitted model; maintains the residual
/// recursion internally.
class ArmaForecaster {
public:
    explicit ArmaForecaster(ArmaModel model);

    struct Step {
        double prediction = 0.0;
        double score = 0.0;
    };

    Step step(double x);
    const ArmaModel& model() const { return model_; }

private:
    ArmaModel model_;
    std::deque<double> lag_values_;  // newest in front
    std::deque<double> lag_resid_;
};

}  // namespace streamad

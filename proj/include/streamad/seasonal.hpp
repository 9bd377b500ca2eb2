#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "streamad/core.hpp"

namespace streamad {

/// Seasonal/trend/remainder triple; the three components sum back to the
/// input exactly (the remainder is computed as a residual).
struct Decomposition {
    std::vector<double> seasonal;
    std::vector<double> trend;
    std::vector<double> remainder;
};

struct StlConfig {
    std::size_t period = 0;
    /// Loess span for the seasonal sub-series; 0 selects "periodic" mode
    /// (each sub-series collapses to its weighted mean).
    int s_window = 21;
    int robust_iterations = 0;
    /// Trend loess span; 0 = next odd >= 1.5 * period / (1 - 1.5 / s_window).
    int t_window = 0;
    /// Low-pass loess span; 0 = next odd >= period.
    int l_window = 0;
    int inner_iterations = 2;
};

/// Mean-centered sample autocorrelation, acf[0] = 1, values in [-1,1].
/// A constant series yields 0 at every lag >= 1. Requires length > max_lag.
std::vector<double> acf(const std::vector<double>& series, std::size_t max_lag);

/// Lag of the strongest significant local ACF maximum, or nullopt when no
/// peak clears the white-noise significance bound (Bonferroni-adjusted over
/// the scanned lags). Requires length >= 3.
std::optional<std::size_t> estimate_period(const std::vector<double>& series);

/// Locally weighted polynomial smoother with tricube neighborhood weights,
/// optionally multiplied by per-point robustness weights. xs must be strictly
/// increasing. eval_jump > 1 fits every jump-th point and interpolates
/// linearly in between (lines are still reproduced exactly).
std::vector<double> loess(const std::vector<double>& xs, const std::vector<double>& ys,
                          std::size_t span, int degree,
                          const std::vector<double>* robustness_weights = nullptr,
                          std::size_t eval_jump = 1);

/// Loess evaluated at a single position (which may lie outside the data
/// range; the fit extrapolates its local polynomial).
double loess_at(const std::vector<double>& xs, const std::vector<double>& ys, double x0,
                std::size_t span, int degree,
                const std::vector<double>* robustness_weights = nullptr);

/// Seasonal-trend decomposition by loess with the classic inner/outer loop;
/// outer iterations derive bisquare robustness weights from the remainder.
/// Requires length >= 2 * period.
Decomposition stl(const std::vector<double>& series, const StlConfig& cfg);

}  // namespace streamad

#pragma once

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

#include "streamad/core.hpp"

namespace streamad {

struct LocationScale {
    double location = 0.0;
    double scale = 0.0;  // always >= 0
};

/// Consistency factor that turns the MAD into a standard-deviation estimate
/// under a normal model.
constexpr double kMadToSigma = 1.4826;
/// Same, for the mean absolute deviation (sqrt(pi/2)); used when MAD is 0.
constexpr double kMeanAdToSigma = 1.2533141373155003;

/// |x - mean| / sample sd over the window. Degenerate scale follows the
/// shared rule in core. Requires window length >= 2.
double mu_sigma_score(const std::vector<double>& window, double x);

/// Robust z-score |x - median| / (1.4826 * MAD). When the MAD collapses to 0
/// the mean absolute deviation about the median takes its place (with its own
/// consistency factor); if that is 0 too the degenerate rule applies.
double med_mad_score(const std::vector<double>& window, double x);

struct HuberResult {
    LocationScale estimate;
    bool converged = true;
    int iterations = 0;
};

/// Huber M-estimate of location by iterative reweighting (weights
/// min(1, c/|z|)), scale fixed at 1.4826 * MAD. Stops when successive
/// locations differ by less than tol, or after 50 iterations (converged
/// flag cleared). Requires window length >= 2.
HuberResult huber_location(const std::vector<double>& window, double tuning_c = 1.345,
                           double tol = 1e-8);

struct GesdConfig {
    double max_anomaly_fraction = 0.02;  // in (0,1); k = ceil(fraction * n)
    double significance = 0.05;          // alpha in (0,1)
};

/// Generalized ESD test (Rosner 1983). Returns the window indices of the
/// declared outliers, at most ceil(fraction * n) of them. Requires window
/// length >= 15.
std::vector<std::size_t> gesd(const std::vector<double>& window, const GesdConfig& cfg);

/// Rosner critical value for iteration i (1-based) on an initial sample of
/// size n at significance alpha.
double gesd_critical_value(std::size_t n, std::size_t i, double alpha);

/// Streaming quantile sketch with adaptive bin sizes: a centroid sitting at
/// quantile q may hold at most max(1, floor(4*N*delta*q*(1-q))) points, so
/// the tails stay exact while the middle compresses.
class TDigest {
public:
    struct Centroid {
        double mean = 0.0;
        double count = 0.0;
    };

    explicit TDigest(double compression = 0.01, std::uint64_t seed = 0);

    void insert(double x);
    /// Interpolated quantile estimate for q in [0,1]. Throws config_error on
    /// an empty digest.
    double quantile(double q) const;

    double total_count() const { return total_; }
    std::size_t centroid_count() const { return centroids_.size(); }
    const std::vector<Centroid>& centroids() const { return centroids_; }
    double compression() const { return delta_; }

    /// Bin cap at quantile position q for a digest of n points.
    static double bin_cap(double n, double delta, double q);

private:
    void compact();

    std::vector<Centroid> centroids_;  // means non-decreasing
    double total_ = 0.0;
    double delta_;
    std::uint64_t rng_state_;
};

/// Medcouple, a robust skew measure in [-1,1]. O(n^2) kernel evaluation.
/// Requires length >= 4.
double medcouple(const std::vector<double>& window);

/// Skew-adjusted boxplot fences (Hubert & Vandervieren): for mc >= 0 the
/// whiskers are [Q1 - 1.5 e^{-4 mc} IQR, Q3 + 1.5 e^{3 mc} IQR]; the
/// exponents swap to (-3, 4) for mc < 0.
std::pair<double, double> adjusted_fences(const std::vector<double>& window);

/// Type-7 (linear interpolation) quantile of a sample; the input vector is
/// sorted in place.
double quantile_type7_inplace(std::vector<double>& values, double q);

}  // namespace streamad

#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <unordered_map>
#include <utility>
#include <vector>

#include "streamad/core.hpp"

namespace streamad {

using Vec = std::vector<double>;

double euclidean(const Vec& a, const Vec& b);

/// Decayed weighted sufficient statistics of nearby points. All statistics
/// age by 2^(-lambda * dt), so a point's contribution at time t is exactly
/// 2^(-lambda * age) of the original and the center/radius are age-invariant.
struct MicroCluster {
    Vec ls;  // weighted linear sum
    Vec ss;  // weighted squared sum
    double weight = 0.0;
    std::size_t last_update = 0;
    std::size_t created = 0;

    static MicroCluster seeded(const Vec& x, std::size_t t);

    /// Multiplies weight, ls and ss by 2^(-lambda * (now - last_update)).
    void decay_to(std::size_t now, double lambda);
    /// Adds x with the given weight at the current last_update time.
    void insert(const Vec& x, double w = 1.0);
    /// Element-wise sum with another cluster at the same timestamp.
    void merge(const MicroCluster& other);

    Vec center() const;
    /// Root of the component-mean variance, clamped at zero.
    double radius() const;
};

struct DenStreamConfig {
    double lambda = 0.001;
    double beta = 0.5;
    /// Core weight threshold; 0 derives it from lambda and the stream's
    /// steady-state horizon weight.
    double t_alpha = 0.0;
    /// Micro-cluster radius bound; 0 derives 1.5x the median 1-NN distance
    /// of the init buffer.
    double epsilon = 0.0;
    std::size_t init_points = 100;
    /// Alternative mode: treat any point landing in an o_MC as anomalous.
    bool flag_outlier_mcs = false;
};

/// DenStream: potential vs outlier micro-clusters split by the beta*t_alpha
/// weight threshold; the anomaly strength of a point is its distance to the
/// nearest potential micro-cluster center.
class DenStream {
public:
    explicit DenStream(const DenStreamConfig& cfg);

    struct Observation {
        double score = kInfScore;
        bool initializing = true;  // no potential micro-cluster exists yet
        bool absorbed_by_outlier_mc = false;
    };

    Observation observe(const Vec& x, std::size_t t);
    /// Promotion / demotion / stale-outlier removal pass; runs automatically
    /// at the maintenance interval but can be invoked directly.
    void maintain(std::size_t t);

    std::size_t maintenance_interval() const { return interval_; }
    double epsilon() const { return eps_; }
    double core_weight_threshold() const { return beta_t_alpha_; }
    const std::vector<MicroCluster>& potential_mcs() const { return p_mcs_; }
    const std::vector<MicroCluster>& outlier_mcs() const { return o_mcs_; }
    /// Median radius of the potential micro-clusters (flagging scale).
    double median_potential_radius() const;

private:
    void initialize(std::size_t t);

    DenStreamConfig cfg_;
    double beta_t_alpha_ = 0.0;
    double eps_ = 0.0;
    std::size_t interval_ = 1;
    std::vector<MicroCluster> p_mcs_;
    std::vector<MicroCluster> o_mcs_;
    std::vector<std::pair<Vec, std::size_t>> init_buffer_;
    bool initialized_ = false;
    std::size_t last_maintenance_ = 0;
};

struct DBStreamConfig {
    double lambda = 0.001;
    double epsilon = 0.0;  // 0 = derive from init buffer, as in DenStream
    /// Intersection factor: micro-clusters i,j connect when their shared
    /// density reaches alpha * min(w_i, w_j).
    double alpha = 0.3;
    double w_min = 3.0;  // below this a singleton micro-cluster is noise
    std::size_t init_points = 100;
};

/// DBStream: fractional Gaussian-neighborhood absorption plus an on-the-fly
/// shared-density edge map; macro labels come from connected components over
/// the qualifying edges, refreshed for every point.
class DBStream {
public:
    explicit DBStream(const DBStreamConfig& cfg);

    struct Observation {
        double score = kInfScore;
        bool initializing = true;  // no non-noise micro-cluster yet
    };

    Observation observe(const Vec& x, std::size_t t);

    /// Connected-component labels over the live edge map; -1 marks noise.
    /// Re-uses the cached labeling when the structure has not changed.
    const std::unordered_map<std::size_t, int>& recluster();

    struct Edge {
        double weight = 0.0;
        std::size_t last_update = 0;
    };

    double epsilon() const { return eps_; }
    std::size_t cluster_count() const { return mcs_.size(); }
    const std::map<std::size_t, MicroCluster>& micro_clusters() const { return mcs_; }
    const std::map<std::pair<std::size_t, std::size_t>, Edge>& shared_density() const {
        return edges_;
    }
    double median_radius() const;

private:

    void update_state(const Vec& x, std::size_t t);
    void cleanup(std::size_t t);

    DBStreamConfig cfg_;
    double eps_ = 0.0;
    std::size_t gap_ = 1;
    std::size_t next_id_ = 0;
    std::map<std::size_t, MicroCluster> mcs_;
    std::map<std::pair<std::size_t, std::size_t>, Edge> edges_;
    std::vector<std::pair<Vec, std::size_t>> init_buffer_;
    bool initialized_ = false;
    std::size_t last_cleanup_ = 0;
    bool labels_dirty_ = true;
    std::unordered_map<std::size_t, int> labels_;
};

struct MbkConfig {
    std::size_t k = 4;
    std::size_t batch_size = 32;
};

/// Mini-batch k-means with per-centroid learning rate 1/count and warm starts
/// across batches; the anomaly score of a point is its distance to the
/// nearest centroid.
class MiniBatchKMeans {
public:
    explicit MiniBatchKMeans(const MbkConfig& cfg);

    /// True once k distinct points have been seen and centroids exist.
    bool ready() const { return ready_; }
    /// Offer a point for centroid seeding (used until ready).
    void seed(const Vec& x);

    void update(const std::vector<Vec>& batch);
    double score(const Vec& x) const;

    const std::vector<Vec>& centroids() const { return centroids_; }
    const std::vector<std::size_t>& assignment_counts() const { return counts_; }
    double inertia(const std::vector<Vec>& points) const;

private:
    MbkConfig cfg_;
    std::vector<Vec> centroids_;
    std::vector<std::size_t> counts_;
    bool ready_ = false;
};

}  // namespace streamad

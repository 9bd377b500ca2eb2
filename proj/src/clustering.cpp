#include "streamad/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace streamad {

namespace {

/// Median 1-NN distance of a point buffer, times 1.5; the default radius
/// bound for both micro-cluster techniques.
double derive_epsilon(const std::vector<std::pair<Vec, std::size_t>>& buffer) {
    std::vector<double> nn;
    nn.reserve(buffer.size());
    for (std::size_t i = 0; i < buffer.size(); ++i) {
        double best = kInfScore;
        for (std::size_t j = 0; j < buffer.size(); ++j) {
            if (i == j) continue;
            best = std::min(best, euclidean(buffer[i].first, buffer[j].first));
        }
        if (best < kInfScore) nn.push_back(best);
    }
    if (nn.empty()) return 0.0;
    return 1.5 * median_inplace(nn);
}

struct UnionFind {
    std::vector<std::size_t> parent;
    explicit UnionFind(std::size_t n) : parent(n) {
        std::iota(parent.begin(), parent.end(), std::size_t{0});
    }
    std::size_t find(std::size_t x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    }
    void unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
};

}  // namespace

double euclidean(const Vec& a, const Vec& b) {
    if (a.size() != b.size()) throw config_error("euclidean: dimension mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
    }
    return std::sqrt(acc);
}

// --- MicroCluster -------------------------------------------------------------

MicroCluster MicroCluster::seeded(const Vec& x, std::size_t t) {
    MicroCluster mc;
    mc.ls = x;
    mc.ss.resize(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) mc.ss[i] = x[i] * x[i];
    mc.weight = 1.0;
    mc.last_update = t;
    mc.created = t;
    return mc;
}

void MicroCluster::decay_to(std::size_t now, double lambda) {
    if (now < last_update) throw config_error("micro-cluster decay cannot run backwards");
    if (now == last_update) return;
    const double f = std::exp2(-lambda * static_cast<double>(now - last_update));
    weight *= f;
    for (double& v : ls) v *= f;
    for (double& v : ss) v *= f;
    last_update = now;
}

void MicroCluster::insert(const Vec& x, double w) {
    if (x.size() != ls.size()) throw config_error("micro-cluster insert: dimension mismatch");
    weight += w;
    for (std::size_t i = 0; i < x.size(); ++i) {
        ls[i] += w * x[i];
        ss[i] += w * x[i] * x[i];
    }
}

void MicroCluster::merge(const MicroCluster& other) {
    if (other.last_update != last_update)
        throw config_error("micro-cluster merge requires a common timestamp");
    weight += other.weight;
    for (std::size_t i = 0; i < ls.size(); ++i) {
        ls[i] += other.ls[i];
        ss[i] += other.ss[i];
    }
    created = std::min(created, other.created);
}

Vec MicroCluster::center() const {
    Vec c(ls.size());
    for (std::size_t i = 0; i < ls.size(); ++i) c[i] = ls[i] / weight;
    return c;
}

double MicroCluster::radius() const {
    double acc = 0.0;
    for (std::size_t i = 0; i < ls.size(); ++i) {
        const double m = ls[i] / weight;
        acc += ss[i] / weight - m * m;
    }
    return std::sqrt(std::max(0.0, acc / static_cast<double>(ls.size())));
}

// --- DenStream ------------------------------------------------------------------

DenStream::DenStream(const DenStreamConfig& cfg) : cfg_(cfg) {
    if (cfg_.lambda <= 0.0) throw config_error("denstream: lambda must be positive");
    if (cfg_.beta <= 0.0 || cfg_.beta >= 1.0) throw config_error("denstream: beta must lie in (0,1)");
    if (cfg_.init_points < 2) throw config_error("denstream: init_points must be >= 2");

    double t_alpha = cfg_.t_alpha;
    if (t_alpha <= 0.0) {
        // Steady-state weight of one point per step over the decay horizon.
        const double horizon = 1.0 / (1.0 - std::exp2(-cfg_.lambda));
        t_alpha = std::max(4.0, 0.005 * horizon);
    }
    beta_t_alpha_ = cfg_.beta * t_alpha;
    if (beta_t_alpha_ > 1.0) {
        interval_ = static_cast<std::size_t>(std::ceil(
            (1.0 / cfg_.lambda) * std::log2(beta_t_alpha_ / (beta_t_alpha_ - 1.0))));
    } else {
        interval_ = static_cast<std::size_t>(std::ceil(1.0 / cfg_.lambda));
    }
    interval_ = std::max<std::size_t>(1, interval_);
    eps_ = cfg_.epsilon;
}

void DenStream::initialize(std::size_t t) {
    if (cfg_.epsilon <= 0.0) eps_ = derive_epsilon(init_buffer_);
    std::vector<MicroCluster> mcs;
    for (const auto& [x, pt] : init_buffer_) {
        std::size_t best = mcs.size();
        double best_d = kInfScore;
        for (std::size_t i = 0; i < mcs.size(); ++i) {
            const double d = euclidean(mcs[i].center(), x);
            if (d < best_d) {
                best_d = d;
                best = i;
            }
        }
        if (best < mcs.size()) {
            MicroCluster tentative = mcs[best];
            tentative.decay_to(pt, cfg_.lambda);
            tentative.insert(x);
            if (tentative.radius() <= eps_) {
                mcs[best] = std::move(tentative);
                continue;
            }
        }
        mcs.push_back(MicroCluster::seeded(x, pt));
    }
    for (MicroCluster& mc : mcs) {
        mc.decay_to(t, cfg_.lambda);
        (mc.weight >= beta_t_alpha_ ? p_mcs_ : o_mcs_).push_back(std::move(mc));
    }
    init_buffer_.clear();
    initialized_ = true;
    last_maintenance_ = t;
}

DenStream::Observation DenStream::observe(const Vec& x, std::size_t t) {
    Observation obs;
    if (!initialized_) {
        init_buffer_.emplace_back(x, t);
        if (init_buffer_.size() >= cfg_.init_points) initialize(t);
        if (!initialized_) return obs;
    }
    if (t - last_maintenance_ >= interval_) maintain(t);

    std::size_t nearest_p = p_mcs_.size();
    double nearest_p_d = kInfScore;
    for (std::size_t i = 0; i < p_mcs_.size(); ++i) {
        const double d = euclidean(p_mcs_[i].center(), x);
        if (d < nearest_p_d) {
            nearest_p_d = d;
            nearest_p = i;
        }
    }
    if (nearest_p < p_mcs_.size()) {
        obs.initializing = false;
        obs.score = nearest_p_d;
    }

    // Absorption: nearest p_MC first, then nearest o_MC, else a new o_MC.
    if (nearest_p < p_mcs_.size()) {
        MicroCluster tentative = p_mcs_[nearest_p];
        tentative.decay_to(t, cfg_.lambda);
        tentative.insert(x);
        if (tentative.radius() <= eps_) {
            p_mcs_[nearest_p] = std::move(tentative);
            return obs;
        }
    }
    std::size_t nearest_o = o_mcs_.size();
    double nearest_o_d = kInfScore;
    for (std::size_t i = 0; i < o_mcs_.size(); ++i) {
        const double d = euclidean(o_mcs_[i].center(), x);
        if (d < nearest_o_d) {
            nearest_o_d = d;
            nearest_o = i;
        }
    }
    if (nearest_o < o_mcs_.size()) {
        MicroCluster tentative = o_mcs_[nearest_o];
        tentative.decay_to(t, cfg_.lambda);
        tentative.insert(x);
        if (tentative.radius() <= eps_) {
            o_mcs_[nearest_o] = std::move(tentative);
            obs.absorbed_by_outlier_mc = true;
            return obs;
        }
    }
    o_mcs_.push_back(MicroCluster::seeded(x, t));
    obs.absorbed_by_outlier_mc = true;
    return obs;
}

void DenStream::maintain(std::size_t t) {
    if (!initialized_) return;
    last_maintenance_ = t;
    for (auto& mc : p_mcs_) mc.decay_to(t, cfg_.lambda);
    for (auto& mc : o_mcs_) mc.decay_to(t, cfg_.lambda);

    // Promote heavy outlier micro-clusters, drop decayed potential ones.
    for (auto it = o_mcs_.begin(); it != o_mcs_.end();) {
        if (it->weight > beta_t_alpha_) {
            p_mcs_.push_back(std::move(*it));
            it = o_mcs_.erase(it);
        } else {
            ++it;
        }
    }
    std::erase_if(p_mcs_, [&](const MicroCluster& mc) { return mc.weight < beta_t_alpha_; });

    // Stale outlier micro-clusters fall below the age-dependent lower bound.
    const double denom = std::exp2(-cfg_.lambda * static_cast<double>(interval_)) - 1.0;
    std::erase_if(o_mcs_, [&](const MicroCluster& mc) {
        const double age = static_cast<double>(t - mc.created);
        const double xi =
            denom != 0.0
                ? (std::exp2(-cfg_.lambda * (age + static_cast<double>(interval_))) - 1.0) / denom
                : 1.0;
        return mc.weight < xi;
    });
}

double DenStream::median_potential_radius() const {
    if (p_mcs_.empty()) return 0.0;
    std::vector<double> radii;
    radii.reserve(p_mcs_.size());
    for (const auto& mc : p_mcs_) radii.push_back(mc.radius());
    return median_inplace(radii);
}

// --- DBStream -------------------------------------------------------------------

DBStream::DBStream(const DBStreamConfig& cfg) : cfg_(cfg) {
    if (cfg_.lambda <= 0.0) throw config_error("dbstream: lambda must be positive");
    if (cfg_.alpha <= 0.0 || cfg_.alpha >= 1.0)
        throw config_error("dbstream: alpha must lie in (0,1)");
    if (cfg_.w_min <= 1.0) throw config_error("dbstream: w_min must exceed 1");
    if (cfg_.init_points < 2) throw config_error("dbstream: init_points must be >= 2");
    gap_ = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::ceil(
               (1.0 / cfg_.lambda) * std::log2(cfg_.w_min / (cfg_.w_min - 1.0)))));
    eps_ = cfg_.epsilon;
}

DBStream::Observation DBStream::observe(const Vec& x, std::size_t t) {
    Observation obs;
    if (!initialized_) {
        init_buffer_.emplace_back(x, t);
        if (init_buffer_.size() >= cfg_.init_points) {
            if (cfg_.epsilon <= 0.0) eps_ = derive_epsilon(init_buffer_);
            initialized_ = true;
            last_cleanup_ = t;
            for (const auto& [v, pt] : init_buffer_) update_state(v, pt);
            init_buffer_.clear();
        }
        return obs;
    }
    if (t - last_cleanup_ >= gap_) cleanup(t);

    const auto& labels = recluster();
    double best = kInfScore;
    for (const auto& [id, mc] : mcs_) {
        auto it = labels.find(id);
        if (it == labels.end() || it->second < 0) continue;  // noise
        best = std::min(best, euclidean(mc.center(), x));
    }
    if (best < kInfScore) {
        obs.initializing = false;
        obs.score = best;
    }

    update_state(x, t);
    return obs;
}

void DBStream::update_state(const Vec& x, std::size_t t) {
    // All micro-clusters within the radius bound absorb fractionally with a
    // Gaussian neighborhood weight; jointly updated pairs gain shared density.
    std::vector<std::size_t> neighbors;
    for (auto& [id, mc] : mcs_) {
        if (euclidean(mc.center(), x) <= eps_) neighbors.push_back(id);
    }
    if (neighbors.empty()) {
        mcs_.emplace(next_id_++, MicroCluster::seeded(x, t));
        labels_dirty_ = true;
        return;
    }
    const double sigma = eps_ / 3.0;
    for (std::size_t id : neighbors) {
        MicroCluster& mc = mcs_.at(id);
        const double d = euclidean(mc.center(), x);
        const double g = sigma > 0.0 ? std::exp(-(d * d) / (2.0 * sigma * sigma)) : 1.0;
        mc.decay_to(t, cfg_.lambda);
        mc.insert(x, g);
    }
    for (std::size_t i = 0; i < neighbors.size(); ++i) {
        for (std::size_t j = i + 1; j < neighbors.size(); ++j) {
            const auto key = std::minmax(neighbors[i], neighbors[j]);
            auto [it, inserted] = edges_.try_emplace({key.first, key.second});
            Edge& e = it->second;
            if (!inserted && t > e.last_update)
                e.weight *= std::exp2(-cfg_.lambda * static_cast<double>(t - e.last_update));
            e.weight += 1.0;
            e.last_update = t;
            if (inserted) labels_dirty_ = true;
        }
    }
    labels_dirty_ = true;
}

void DBStream::cleanup(std::size_t t) {
    last_cleanup_ = t;
    const double w_weak =
        std::exp2(-cfg_.lambda * static_cast<double>(gap_)) * cfg_.w_min;
    for (auto it = mcs_.begin(); it != mcs_.end();) {
        it->second.decay_to(t, cfg_.lambda);
        it = it->second.weight < w_weak ? mcs_.erase(it) : std::next(it);
    }
    for (auto it = edges_.begin(); it != edges_.end();) {
        Edge& e = it->second;
        if (t > e.last_update) {
            e.weight *= std::exp2(-cfg_.lambda * static_cast<double>(t - e.last_update));
            e.last_update = t;
        }
        const bool dead = !mcs_.count(it->first.first) || !mcs_.count(it->first.second) ||
                          e.weight < cfg_.alpha * w_weak;
        it = dead ? edges_.erase(it) : std::next(it);
    }
    labels_dirty_ = true;
}

const std::unordered_map<std::size_t, int>& DBStream::recluster() {
    if (!labels_dirty_) return labels_;
    labels_dirty_ = false;
    labels_.clear();

    std::vector<std::size_t> ids;
    ids.reserve(mcs_.size());
    std::unordered_map<std::size_t, std::size_t> slot;
    for (const auto& [id, mc] : mcs_) {
        slot[id] = ids.size();
        ids.push_back(id);
    }
    UnionFind uf(ids.size());
    for (const auto& [key, e] : edges_) {
        auto a = slot.find(key.first);
        auto b = slot.find(key.second);
        if (a == slot.end() || b == slot.end()) continue;
        const double wa = mcs_.at(key.first).weight;
        const double wb = mcs_.at(key.second).weight;
        if (e.weight >= cfg_.alpha * std::min(wa, wb)) uf.unite(a->second, b->second);
    }

    std::unordered_map<std::size_t, std::size_t> comp_size;
    for (std::size_t i = 0; i < ids.size(); ++i) ++comp_size[uf.find(i)];
    for (std::size_t i = 0; i < ids.size(); ++i) {
        const std::size_t root = uf.find(i);
        const bool noise = comp_size[root] == 1 && mcs_.at(ids[i]).weight < cfg_.w_min;
        labels_[ids[i]] = noise ? -1 : static_cast<int>(root);
    }
    return labels_;
}

double DBStream::median_radius() const {
    if (mcs_.empty()) return 0.0;
    std::vector<double> radii;
    radii.reserve(mcs_.size());
    for (const auto& [id, mc] : mcs_) radii.push_back(mc.radius());
    return median_inplace(radii);
}

// --- Mini-batch k-means -----------------------------------------------------------

MiniBatchKMeans::MiniBatchKMeans(const MbkConfig& cfg) : cfg_(cfg) {
    if (cfg_.k == 0) throw config_error("mini-batch k-means: k must be >= 1");
    if (cfg_.batch_size == 0) throw config_error("mini-batch k-means: batch size must be >= 1");
}

void MiniBatchKMeans::seed(const Vec& x) {
    if (ready_) return;
    for (const Vec& c : centroids_)
        if (c == x) return;
    centroids_.push_back(x);
    counts_.push_back(0);
    if (centroids_.size() == cfg_.k) ready_ = true;
}

void MiniBatchKMeans::update(const std::vector<Vec>& batch) {
    if (!ready_) throw config_error("mini-batch k-means: update before k distinct points seen");
    for (const Vec& x : batch) {
        std::size_t best = 0;
        double best_d = kInfScore;
        for (std::size_t c = 0; c < centroids_.size(); ++c) {
            const double d = euclidean(centroids_[c], x);
            if (d < best_d) {
                best_d = d;
                best = c;
            }
        }
        ++counts_[best];
        const double eta = 1.0 / static_cast<double>(counts_[best]);
        for (std::size_t i = 0; i < x.size(); ++i)
            centroids_[best][i] += eta * (x[i] - centroids_[best][i]);
    }
    // Re-seed centroids that have never won a point at the most isolated
    // batch member.
    for (std::size_t c = 0; c < centroids_.size(); ++c) {
        if (counts_[c] != 0) continue;
        double far_d = -1.0;
        const Vec* far = nullptr;
        for (const Vec& x : batch) {
            double nd = kInfScore;
            for (std::size_t o = 0; o < centroids_.size(); ++o)
                if (o != c) nd = std::min(nd, euclidean(centroids_[o], x));
            if (nd > far_d) {
                far_d = nd;
                far = &x;
            }
        }
        if (far) {
            centroids_[c] = *far;
            counts_[c] = 1;
        }
    }
}

double MiniBatchKMeans::score(const Vec& x) const {
    double best = kInfScore;
    for (const Vec& c : centroids_) best = std::min(best, euclidean(c, x));
    return best;
}

double MiniBatchKMeans::inertia(const std::vector<Vec>& points) const {
    double acc = 0.0;
    for (const Vec& x : points) {
        const double d = score(x);
        acc += d * d;
    }
    return acc;
}

}  // namespace streamad

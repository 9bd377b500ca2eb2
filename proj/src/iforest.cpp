#include "streamad/iforest.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace streamad {

namespace {

double harmonic(std::size_t i) {
    static std::vector<double> cache{0.0};  // H(0) = 0
    if (i < 4096) {
        while (cache.size() <= i) cache.push_back(cache.back() + 1.0 / static_cast<double>(cache.size()));
        return cache[i];
    }
    const double d = static_cast<double>(i);
    return std::log(d) + 0.57721566490153286 + 1.0 / (2.0 * d) - 1.0 / (12.0 * d * d);
}

std::size_t bounded(std::mt19937_64& rng, std::size_t n) { return rng() % n; }

double unit_fraction(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace

double IsoForest::path_length_norm(std::size_t m) {
    if (m <= 1) return 0.0;
    const double md = static_cast<double>(m);
    return 2.0 * harmonic(m - 1) - 2.0 * (md - 1.0) / md;
}

IsoForest IsoForest::fit(const std::vector<Vec>& points, std::size_t trees,
                         std::size_t subsample, std::uint64_t seed) {
    if (points.size() < 2) throw config_error("iforest: need at least 2 points");
    if (trees == 0) throw config_error("iforest: tree count must be >= 1");
    const std::size_t psi = std::max<std::size_t>(2, std::min(subsample, points.size()));
    const std::size_t dims = points[0].size();
    const int height_limit =
        static_cast<int>(std::ceil(std::log2(static_cast<double>(psi))));

    IsoForest forest;
    forest.psi_ = psi;
    forest.trees_.resize(trees);
    std::mt19937_64 rng(seed);

    std::vector<std::size_t> pool(points.size());
    for (std::size_t i = 0; i < pool.size(); ++i) pool[i] = i;

    for (Tree& tree : forest.trees_) {
        // Subsample without replacement (partial Fisher-Yates).
        for (std::size_t i = 0; i < psi; ++i)
            std::swap(pool[i], pool[i + bounded(rng, pool.size() - i)]);
        std::vector<std::size_t> sample(pool.begin(),
                                        pool.begin() + static_cast<std::ptrdiff_t>(psi));

        // Iterative build with an explicit stack of (index range, depth).
        struct Frame {
            std::size_t lo, hi;
            int depth;
            std::int32_t node;
        };
        tree.nodes.push_back({});
        std::vector<Frame> stack{{0, psi, 0, 0}};
        while (!stack.empty()) {
            Frame f = stack.back();
            stack.pop_back();
            const std::size_t count = f.hi - f.lo;
            if (count <= 1 || f.depth >= height_limit) {
                tree.nodes[static_cast<std::size_t>(f.node)].leaf_size =
                    static_cast<std::int32_t>(count);
                continue;
            }
            // Dimensions with any spread at this node.
            std::vector<int> usable;
            for (std::size_t d = 0; d < dims; ++d) {
                double lo = points[sample[f.lo]][d], hi = lo;
                for (std::size_t i = f.lo + 1; i < f.hi; ++i) {
                    lo = std::min(lo, points[sample[i]][d]);
                    hi = std::max(hi, points[sample[i]][d]);
                }
                if (hi > lo) usable.push_back(static_cast<int>(d));
            }
            if (usable.empty()) {
                tree.nodes[static_cast<std::size_t>(f.node)].leaf_size =
                    static_cast<std::int32_t>(count);
                continue;
            }
            const int dim = usable[bounded(rng, usable.size())];
            double lo = points[sample[f.lo]][static_cast<std::size_t>(dim)], hi = lo;
            for (std::size_t i = f.lo + 1; i < f.hi; ++i) {
                const double v = points[sample[i]][static_cast<std::size_t>(dim)];
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
            double split = lo + unit_fraction(rng) * (hi - lo);
            if (!(split > lo && split < hi)) split = lo + (hi - lo) / 2.0;

            auto mid_it = std::partition(
                sample.begin() + static_cast<std::ptrdiff_t>(f.lo),
                sample.begin() + static_cast<std::ptrdiff_t>(f.hi),
                [&](std::size_t idx) { return points[idx][static_cast<std::size_t>(dim)] < split; });
            const std::size_t mid =
                static_cast<std::size_t>(mid_it - sample.begin());

            const std::int32_t left = static_cast<std::int32_t>(tree.nodes.size());
            tree.nodes.push_back({});
            tree.nodes.push_back({});
            Node& node = tree.nodes[static_cast<std::size_t>(f.node)];
            node.split_dim = dim;
            node.split_value = split;
            node.left = left;
            node.right = left + 1;
            stack.push_back({f.lo, mid, f.depth + 1, left});
            stack.push_back({mid, f.hi, f.depth + 1, left + 1});
        }
    }
    return forest;
}

double IsoForest::tree_path(const Tree& tree, const Vec& x) const {
    std::int32_t node = 0;
    int depth = 0;
    while (tree.nodes[static_cast<std::size_t>(node)].split_dim >= 0) {
        const Node& n = tree.nodes[static_cast<std::size_t>(node)];
        node = x[static_cast<std::size_t>(n.split_dim)] < n.split_value ? n.left : n.right;
        ++depth;
    }
    const Node& leaf = tree.nodes[static_cast<std::size_t>(node)];
    return static_cast<double>(depth) +
           path_length_norm(static_cast<std::size_t>(leaf.leaf_size));
}

double IsoForest::average_path_length(const Vec& x) const {
    double acc = 0.0;
    for (const Tree& t : trees_) acc += tree_path(t, x);
    return acc / static_cast<double>(trees_.size());
}

double IsoForest::score(const Vec& x) const {
    return std::exp2(-average_path_length(x) / path_length_norm(psi_));
}

}  // namespace streamad

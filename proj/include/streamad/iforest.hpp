#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "streamad/core.hpp"
#include "streamad/clustering.hpp"  // Vec

namespace streamad {

/// Isolation forest: trees of uniform random splits; anomalous points sit
/// close to the root, so shorter average path lengths mean higher scores.
class IsoForest {
public:
    /// Builds `trees` trees, each on a subsample of at most `subsample`
    /// points. Deterministic for a fixed seed. Requires |points| >= 2.
    static IsoForest fit(const std::vector<Vec>& points, std::size_t trees,
                         std::size_t subsample, std::uint64_t seed);

    /// Anomaly score in (0,1]: 2^(-E[h(x)] / c(psi)).
    double score(const Vec& x) const;

    /// Raw expected path length E[h(x)], exported for diagnostics (the score
    /// is a log-scale transform of it).
    double average_path_length(const Vec& x) const;

    /// c(m) = 2 H(m-1) - 2 (m-1)/m, the unsuccessful-search normalizer.
    static double path_length_norm(std::size_t m);

    std::size_t tree_count() const { return trees_.size(); }
    std::size_t subsample_size() const { return psi_; }

private:
    struct Node {
        int split_dim = -1;     // -1 marks a leaf
        double split_value = 0.0;
        std::int32_t left = -1;
        std::int32_t right = -1;
        std::int32_t leaf_size = 0;
    };
    struct Tree {
        std::vector<Node> nodes;
    };

    double tree_path(const Tree& tree, const Vec& x) const;

    std::vector<Tree> trees_;
    std::size_t psi_ = 0;
};

}  // namespace streamad

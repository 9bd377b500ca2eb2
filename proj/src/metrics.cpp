#include "streamad/metrics.hpp"

#include <algorithm>
#include <cstdlib>

namespace streamad {

Confusion match_point(const std::set<std::size_t>& detected, const std::set<std::size_t>& labels,
                      std::size_t tolerance) {
    Confusion c;
    if (tolerance == 0) {
        for (std::size_t d : detected) {
            if (labels.count(d))
                ++c.tp;
            else
                ++c.fp;
        }
        c.fn = labels.size() - c.tp;
        return c;
    }

    struct Pair {
        std::size_t dist, det, lbl;
    };
    std::vector<Pair> pairs;
    for (std::size_t d : detected) {
        const std::size_t lo = d > tolerance ? d - tolerance : 0;
        for (auto it = labels.lower_bound(lo); it != labels.end() && *it <= d + tolerance; ++it)
            pairs.push_back({d > *it ? d - *it : *it - d, d, *it});
    }
    std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
        if (a.dist != b.dist) return a.dist < b.dist;
        if (a.det != b.det) return a.det < b.det;
        return a.lbl < b.lbl;
    });
    std::set<std::size_t> used_det, used_lbl;
    for (const Pair& p : pairs) {
        if (used_det.count(p.det) || used_lbl.count(p.lbl)) continue;
        used_det.insert(p.det);
        used_lbl.insert(p.lbl);
        ++c.tp;
    }
    c.fp = detected.size() - c.tp;
    c.fn = labels.size() - c.tp;
    return c;
}

Confusion match_pattern(const std::vector<IndexSpan>& spans, const std::set<std::size_t>& labels) {
    for (const IndexSpan& s : spans)
        if (s.first > s.second) throw config_error("match_pattern: malformed span");

    // Merge overlapping detected spans so closely spaced detections of the
    // same event count once.
    std::vector<IndexSpan> merged = spans;
    std::sort(merged.begin(), merged.end());
    std::vector<IndexSpan> out;
    for (const IndexSpan& s : merged) {
        if (!out.empty() && s.first <= out.back().second) {
            out.back().second = std::max(out.back().second, s.second);
        } else {
            out.push_back(s);
        }
    }

    Confusion c;
    std::size_t covered = 0;
    for (const IndexSpan& s : out) {
        auto lo = labels.lower_bound(s.first);
        auto hi = labels.upper_bound(s.second);
        const std::size_t inside = static_cast<std::size_t>(std::distance(lo, hi));
        if (inside == 0)
            ++c.fp;
        else
            covered += inside;
    }
    c.tp = covered;
    c.fn = labels.size() - covered;
    return c;
}

PrfScores precision_recall_fbeta(const Confusion& c, const FBetaConfig& cfg) {
    if (cfg.beta <= 0.0) throw config_error("fbeta: beta must be positive");
    PrfScores s;
    if (c.tp == 0 && c.fp == 0 && c.fn == 0) {
        s.precision = s.recall = s.fbeta = 1.0;  // anomaly-free convention
        return s;
    }
    const double tp = static_cast<double>(c.tp);
    s.precision = c.tp + c.fp > 0 ? tp / static_cast<double>(c.tp + c.fp) : 0.0;
    s.recall = c.tp + c.fn > 0 ? tp / static_cast<double>(c.tp + c.fn) : 0.0;
    const double b2 = cfg.beta * cfg.beta;
    const double denom = b2 * s.precision + s.recall;
    s.fbeta = denom > 0.0 ? (1.0 + b2) * s.precision * s.recall / denom : 0.0;
    return s;
}

PrfScores micro_average(const std::vector<Confusion>& confusions, const FBetaConfig& cfg) {
    Confusion pooled;
    for (const Confusion& c : confusions) pooled += c;
    return precision_recall_fbeta(pooled, cfg);
}

}  // namespace streamad

#pragma once

#include <cstddef>
#include <set>
#include <vector>

#include "streamad/core.hpp"

namespace streamad {

struct Confusion {
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t fn = 0;

    Confusion& operator+=(const Confusion& o) {
        tp += o.tp;
        fp += o.fp;
        fn += o.fn;
        return *this;
    }
};

struct FBetaConfig {
    double beta = 1.0;  // 2 favors recall (health-style workloads)
};

struct PrfScores {
    double precision = 0.0;
    double recall = 0.0;
    double fbeta = 0.0;
};

/// Greedy nearest matching between detected indices and labels within the
/// given tolerance; each detection pairs with at most one label and vice
/// versa. TP + FN always equals |labels|.
Confusion match_point(const std::set<std::size_t>& detected, const std::set<std::size_t>& labels,
                      std::size_t tolerance = 0);

/// Containment matching for pattern spans: a label is a TP when any span
/// covers it (counted once even under overlapping spans); after merging
/// overlapping spans, each merged span covering no label is one FP.
Confusion match_pattern(const std::vector<IndexSpan>& spans, const std::set<std::size_t>& labels);

/// Pr = TP/(TP+FP), Re = TP/(TP+FN), F = (1+b^2) Pr Re / (b^2 Pr + Re).
/// All-zero confusion yields (1,1,1); otherwise a zero denominator yields 0
/// for that metric.
PrfScores precision_recall_fbeta(const Confusion& c, const FBetaConfig& cfg);

/// Pools TP/FP/FN component-wise, then computes the combined scores.
PrfScores micro_average(const std::vector<Confusion>& confusions, const FBetaConfig& cfg);

}  // namespace streamad

#pragma once

#include <cstddef>
#include <deque>
#include <string>
#include <unordered_map>
#include <vector>

#include "streamad/core.hpp"

namespace streamad {

struct SaxConfig {
    std::size_t pattern_length = 0;  // PL
    std::size_t paa_segments = 0;    // w <= PL
    std::size_t alphabet_size = 3;   // in [2,10]
    double noise_threshold = 0.01;   // minimum subsequence variance kept

    void validate() const;
};

struct Subsequence {
    std::size_t start = 0;
    std::vector<double> values;
};

struct DiscordResult {
    std::size_t start = 0;
    double distance = 0.0;  // to the nearest non-self match
};

/// All length-PL subsequences at the given stride, in order. Throws
/// data_error when the series is shorter than PL.
std::vector<Subsequence> extract_subsequences(const std::vector<double>& series,
                                              std::size_t pattern_length, std::size_t stride = 1);

/// Keep iff the sample variance is at least epsilon (applied to the raw
/// values, before any normalization).
bool noise_filter(const std::vector<double>& values, double epsilon);

/// Piecewise aggregate approximation: segment means with fractional chunking
/// when the segment count does not divide the length; total mass preserved.
std::vector<double> paa(const std::vector<double>& values, std::size_t segments);

/// Gaussian equal-probability breakpoints (a-1 of them) for alphabet size a.
std::vector<double> sax_breakpoints(std::size_t alphabet_size);

/// z-normalizes, PAA-reduces, then maps each segment through the Gaussian
/// breakpoints; letters run from 'a' (lowest bin) upward.
std::string sax_word(const std::vector<double>& values, const SaxConfig& cfg);

/// SAX lower-bounding distance between two words from the same config;
/// adjacent letters contribute zero by the cell-distance convention.
double sax_mindist(const std::string& word_a, const std::string& word_b,
                   std::size_t alphabet_size, std::size_t original_length);

/// Top-k discords: subsequences with the largest Euclidean distance to their
/// nearest non-self match (|start difference| >= PL), identical to the
/// exhaustive search; SAX bucket ordering and early abandoning only speed it
/// up. Successive discords must not overlap previously returned ones.
std::vector<DiscordResult> hotsax_discords(const std::vector<double>& series,
                                           const SaxConfig& cfg, std::size_t k);

/// Exact nearest-non-self-match distance of `newest` against a history of
/// subsequences; both sides are mean-adjusted first. Returns +inf when no
/// valid candidate exists.
double discord_score(const std::vector<Subsequence>& history, const Subsequence& newest,
                     std::size_t pattern_length);

/// Streaming discord scorer over the trailing window of subsequences.
/// The newest subsequence is scored against (then appended to) a SAX-bucketed
/// ring of past subsequences; results match a linear scan exactly.
class StreamingDiscord {
public:
    StreamingDiscord(const SaxConfig& cfg, std::size_t history_capacity);

    struct Result {
        bool has_score = false;   // false while history is empty or sub filtered
        bool filtered = false;    // newest subsequence failed the noise filter
        double score = 0.0;
        std::size_t start = 0;    // start index of the newest subsequence
    };

    /// Push the next raw point (indices are implicit and consecutive).
    Result push(double x);

    std::size_t history_size() const { return history_.size(); }

private:
    struct Entry {
        std::size_t start;
        std::vector<double> adjusted;  // mean-adjusted values
        std::string word;
    };

    SaxConfig cfg_;
    std::size_t capacity_;
    std::deque<double> recent_;  // last PL raw values
    std::size_t next_index_ = 0;
    std::deque<Entry> history_;
    std::unordered_map<std::string, std::vector<std::size_t>> buckets_;  // word -> starts
};

}  // namespace streamad

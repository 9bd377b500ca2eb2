#include "streamad/pattern.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/distributions/normal.hpp>

namespace streamad {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

/// Squared Euclidean distance with early abandon: stops once the running sum
/// exceeds the cutoff and returns +inf in that case.
double sqdist_abandon(const std::vector<double>& a, const std::vector<double>& b, double cutoff) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
        if (acc > cutoff) return kInf;
    }
    return acc;
}

}  // namespace

void SaxConfig::validate() const {
    if (pattern_length < 4) throw config_error("sax: pattern_length must be >= 4");
    if (paa_segments == 0 || paa_segments > pattern_length)
        throw config_error("sax: paa_segments must lie in [1, pattern_length]");
    if (alphabet_size < 2 || alphabet_size > 10)
        throw config_error("sax: alphabet_size must lie in [2,10]");
    if (noise_threshold < 0.0) throw config_error("sax: noise_threshold must be >= 0");
}

std::vector<Subsequence> extract_subsequences(const std::vector<double>& series,
                                              std::size_t pattern_length, std::size_t stride) {
    if (pattern_length == 0 || stride == 0)
        throw config_error("extract_subsequences: pattern_length and stride must be positive");
    if (series.size() < pattern_length)
        throw data_error("extract_subsequences: series shorter than pattern length");
    std::vector<Subsequence> out;
    for (std::size_t s = 0; s + pattern_length <= series.size(); s += stride) {
        out.push_back({s, std::vector<double>(series.begin() + static_cast<std::ptrdiff_t>(s),
                                              series.begin() +
                                                  static_cast<std::ptrdiff_t>(s + pattern_length))});
    }
    return out;
}

bool noise_filter(const std::vector<double>& values, double epsilon) {
    return sample_variance(values) >= epsilon;
}

std::vector<double> paa(const std::vector<double>& values, std::size_t segments) {
    const std::size_t n = values.size();
    if (segments == 0 || segments > n)
        throw config_error("paa: segments must lie in [1, length]");
    std::vector<double> out(segments, 0.0);
    if (n % segments == 0) {
        const std::size_t block = n / segments;
        for (std::size_t b = 0; b < segments; ++b) {
            double acc = 0.0;
            for (std::size_t i = 0; i < block; ++i) acc += values[b * block + i];
            out[b] = acc / static_cast<double>(block);
        }
        return out;
    }
    // Fractional chunking: each input cell [i, i+1) contributes its overlap
    // with the segment interval, so total mass is preserved.
    const double width = static_cast<double>(n) / static_cast<double>(segments);
    for (std::size_t b = 0; b < segments; ++b) {
        const double lo = width * static_cast<double>(b);
        const double hi = lo + width;
        double acc = 0.0;
        for (std::size_t i = static_cast<std::size_t>(lo); i < n && static_cast<double>(i) < hi;
             ++i) {
            const double overlap =
                std::min(hi, static_cast<double>(i + 1)) - std::max(lo, static_cast<double>(i));
            if (overlap > 0.0) acc += values[i] * overlap;
        }
        out[b] = acc / width;
    }
    return out;
}

std::vector<double> sax_breakpoints(std::size_t alphabet_size) {
    if (alphabet_size < 2 || alphabet_size > 10)
        throw config_error("sax_breakpoints: alphabet_size must lie in [2,10]");
    boost::math::normal_distribution<double> normal;
    std::vector<double> bp(alphabet_size - 1);
    for (std::size_t i = 1; i < alphabet_size; ++i)
        bp[i - 1] = boost::math::quantile(
            normal, static_cast<double>(i) / static_cast<double>(alphabet_size));
    return bp;
}

std::string sax_word(const std::vector<double>& values, const SaxConfig& cfg) {
    cfg.validate();
    const std::vector<double> z = studentize(values);
    const std::vector<double> reduced = paa(z, cfg.paa_segments);
    const std::vector<double> bp = sax_breakpoints(cfg.alphabet_size);
    std::string word(reduced.size(), 'a');
    for (std::size_t i = 0; i < reduced.size(); ++i) {
        std::size_t bin = 0;
        while (bin < bp.size() && reduced[i] >= bp[bin]) ++bin;
        word[i] = static_cast<char>('a' + bin);
    }
    return word;
}

double sax_mindist(const std::string& word_a, const std::string& word_b,
                   std::size_t alphabet_size, std::size_t original_length) {
    if (word_a.size() != word_b.size())
        throw config_error("sax_mindist: words must have equal length");
    const std::vector<double> bp = sax_breakpoints(alphabet_size);
    double acc = 0.0;
    for (std::size_t i = 0; i < word_a.size(); ++i) {
        const int r = word_a[i] - 'a';
        const int c = word_b[i] - 'a';
        if (std::abs(r - c) <= 1) continue;
        const double cell = bp[static_cast<std::size_t>(std::max(r, c)) - 1] -
                            bp[static_cast<std::size_t>(std::min(r, c))];
        acc += cell * cell;
    }
    return std::sqrt(static_cast<double>(original_length) /
                     static_cast<double>(word_a.size())) *
           std::sqrt(acc);
}

std::vector<DiscordResult> hotsax_discords(const std::vector<double>& series,
                                           const SaxConfig& cfg, std::size_t k) {
    cfg.validate();
    const std::size_t pl = cfg.pattern_length;
    const std::vector<Subsequence> subs = extract_subsequences(series, pl, 1);

    // Candidates that survive the noise filter, with their SAX words.
    std::vector<std::size_t> cands;
    std::vector<std::string> words(subs.size());
    std::unordered_map<std::string, std::vector<std::size_t>> buckets;
    for (std::size_t i = 0; i < subs.size(); ++i) {
        if (!noise_filter(subs[i].values, cfg.noise_threshold)) continue;
        cands.push_back(i);
        words[i] = sax_word(subs[i].values, cfg);
        buckets[words[i]].push_back(i);
    }

    std::vector<DiscordResult> found;
    if (cands.size() < 2) return found;

    // Rare words first: their subsequences are the most promising discord
    // candidates, which tightens best-so-far early.
    std::vector<std::size_t> outer = cands;
    std::sort(outer.begin(), outer.end(), [&](std::size_t a, std::size_t b) {
        const std::size_t ba = buckets[words[a]].size(), bb = buckets[words[b]].size();
        return ba != bb ? ba < bb : a < b;
    });

    auto overlaps_found = [&](std::size_t start) {
        for (const DiscordResult& d : found) {
            const std::size_t lo = std::min(start, d.start), hi = std::max(start, d.start);
            if (hi - lo < pl) return true;
        }
        return false;
    };

    for (std::size_t round = 0; round < k; ++round) {
        double best_d2 = -1.0;
        std::size_t best_start = 0;
        bool have_best = false;

        for (std::size_t i : outer) {
            const std::size_t si = subs[i].start;
            if (overlaps_found(si)) continue;

            double min_d2 = kInf;
            bool hopeless = false;
            auto visit = [&](std::size_t j) {
                if (hopeless || j == i) return;
                const std::size_t sj = subs[j].start;
                if ((si > sj ? si - sj : sj - si) < pl) return;  // self match
                const double d2 = sqdist_abandon(subs[i].values, subs[j].values, min_d2);
                if (d2 < min_d2) min_d2 = d2;
                // Once this candidate's nearest neighbour is provably closer
                // than the best discord so far it cannot win; abandon it.
                if (have_best && min_d2 < best_d2) hopeless = true;
                if (have_best && min_d2 == best_d2 && si >= best_start) hopeless = true;
            };
            for (std::size_t j : buckets[words[i]]) visit(j);
            if (!hopeless)
                for (std::size_t j : cands) visit(j);

            if (hopeless || min_d2 == kInf) continue;
            if (!have_best || min_d2 > best_d2 ||
                (min_d2 == best_d2 && si < best_start)) {
                best_d2 = min_d2;
                best_start = si;
                have_best = true;
            }
        }

        if (!have_best) break;
        found.push_back({best_start, std::sqrt(best_d2)});
    }
    return found;
}

double discord_score(const std::vector<Subsequence>& history, const Subsequence& newest,
                     std::size_t pattern_length) {
    const std::vector<double> target = mean_adjust(newest.values);
    double min_d2 = kInf;
    for (const Subsequence& h : history) {
        const std::size_t lo = std::min(h.start, newest.start);
        const std::size_t hi = std::max(h.start, newest.start);
        if (hi - lo < pattern_length) continue;
        const double d2 = sqdist_abandon(target, mean_adjust(h.values), min_d2);
        if (d2 < min_d2) min_d2 = d2;
    }
    return min_d2 == kInf ? kInf : std::sqrt(min_d2);
}

StreamingDiscord::StreamingDiscord(const SaxConfig& cfg, std::size_t history_capacity)
    : cfg_(cfg), capacity_(history_capacity) {
    cfg_.validate();
    if (capacity_ == 0) throw config_error("streaming discord: history capacity must be positive");
}

StreamingDiscord::Result StreamingDiscord::push(double x) {
    Result res;
    recent_.push_back(x);
    if (recent_.size() > cfg_.pattern_length) recent_.pop_front();
    const std::size_t idx = next_index_++;
    if (recent_.size() < cfg_.pattern_length) return res;

    const std::size_t start = idx + 1 - cfg_.pattern_length;
    res.start = start;
    std::vector<double> raw(recent_.begin(), recent_.end());
    if (!noise_filter(raw, cfg_.noise_threshold)) {
        res.filtered = true;
        return res;
    }

    Entry entry{start, mean_adjust(raw), sax_word(raw, cfg_)};

    // Nearest non-self match over the retained history; the same-word bucket
    // goes first so early abandoning bites sooner. The result is exactly the
    // linear-scan minimum.
    const std::size_t oldest = history_.empty() ? start : history_.front().start;
    double min_d2 = kInf;
    auto consider = [&](const Entry& h) {
        if (start - h.start < cfg_.pattern_length) return;
        const double d2 = sqdist_abandon(entry.adjusted, h.adjusted, min_d2);
        if (d2 < min_d2) min_d2 = d2;
    };
    auto bit = buckets_.find(entry.word);
    if (bit != buckets_.end()) {
        for (std::size_t s : bit->second) {
            if (s < oldest) continue;  // evicted, lazily skipped
            auto hit = std::lower_bound(history_.begin(), history_.end(), s,
                                        [](const Entry& e, std::size_t v) { return e.start < v; });
            if (hit != history_.end() && hit->start == s) consider(*hit);
        }
    }
    for (const Entry& h : history_) consider(h);

    if (min_d2 != kInf) {
        res.has_score = true;
        res.score = std::sqrt(min_d2);
    }

    history_.push_back(std::move(entry));
    buckets_[history_.back().word].push_back(start);
    if (history_.size() > capacity_) {
        history_.pop_front();
        // Bucket entries for evicted starts are skipped lazily; prune the
        // maps occasionally to keep them bounded.
        if (idx % (capacity_ * 4) == 0) {
            const std::size_t floor_start = history_.front().start;
            for (auto it = buckets_.begin(); it != buckets_.end();) {
                auto& vec = it->second;
                vec.erase(std::remove_if(vec.begin(), vec.end(),
                                         [&](std::size_t s) { return s < floor_start; }),
                          vec.end());
                it = vec.empty() ? buckets_.erase(it) : ++it;
            }
        }
    }
    return res;
}

}  // namespace streamad

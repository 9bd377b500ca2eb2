#include "streamad/registry.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <optional>

#include "streamad/clustering.hpp"
#include "streamad/iforest.hpp"
#include "streamad/pattern.hpp"
#include "streamad/seasonal.hpp"
#include "streamad/stats.hpp"
#include "streamad/ts_models.hpp"

namespace streamad {

namespace {

template <class Derived>
class CloneableDetector : public Detector {
public:
    std::unique_ptr<Detector> clone() const override {
        return std::make_unique<Derived>(static_cast<const Derived&>(*this));
    }
};

/// Median over a bounded trail of recent scores; several detectors flag
/// against 3x this value as their robust score scale.
class RollingMedian {
public:
    explicit RollingMedian(std::size_t cap) : cap_(std::max<std::size_t>(1, cap)) {}
    void push(double v) {
        buf_.push_back(v);
        if (buf_.size() > cap_) buf_.pop_front();
    }
    std::size_t size() const { return buf_.size(); }
    double median() const {
        std::vector<double> tmp(buf_.begin(), buf_.end());
        return median_inplace(tmp);
    }

private:
    std::deque<double> buf_;
    std::size_t cap_;
};

// --- windowed statistical detectors -------------------------------------------

class MuSigmaDetector final : public CloneableDetector<MuSigmaDetector> {
public:
    MuSigmaDetector(std::size_t window, double threshold)
        : win_(window), threshold_(threshold) {}

    DetectorVerdict observe(const TimePoint& pt) override {
        DetectorVerdict v;
        const std::size_t n = win_.size();
        if (n >= 2) {
            const double nd = static_cast<double>(n);
            const double mean = sum_ / nd;
            const double var = std::max(0.0, (sumsq_ - sum_ * sum_ / nd) / (nd - 1.0));
            v.score = deviation_score(pt.value, mean, std::sqrt(var));
            v.is_anomaly = v.score > threshold_;
        }
        if (auto evicted = win_.push(pt.value)) {
            sum_ -= *evicted;
            sumsq_ -= *evicted * *evicted;
        }
        sum_ += pt.value;
        sumsq_ += pt.value * pt.value;
        if (++pushes_ % 8192 == 0) resync();  // bound floating-point drift
        return v;
    }
    std::string name() const override { return "mu-sigma"; }

private:
    void resync() {
        sum_ = sumsq_ = 0.0;
        for (std::size_t i = 0; i < win_.size(); ++i) {
            sum_ += win_[i];
            sumsq_ += win_[i] * win_[i];
        }
    }

    SlidingWindow win_;
    double threshold_;
    double sum_ = 0.0, sumsq_ = 0.0;
    std::size_t pushes_ = 0;
};

class MedMadDetector final : public CloneableDetector<MedMadDetector> {
public:
    MedMadDetector(std::size_t window, double threshold)
        : win_(window), threshold_(threshold) {}

    DetectorVerdict observe(const TimePoint& pt) override {
        DetectorVerdict v;
        if (win_.size() >= 2) {
            v.score = med_mad_score(win_.values(), pt.value);
            v.is_anomaly = v.score > threshold_;
        }
        win_.push(pt.value);
        return v;
    }
    std::string name() const override { return "med-mad"; }

private:
    SlidingWindow win_;
    double threshold_;
};

class HuberDetector final : public CloneableDetector<HuberDetector> {
public:
    HuberDetector(std::size_t window, double threshold, double c, double tol)
        : win_(window), threshold_(threshold), c_(c), tol_(tol) {}

    DetectorVerdict observe(const TimePoint& pt) override {
        DetectorVerdict v;
        if (win_.size() >= 2) {
            const HuberResult res = huber_location(win_.values(), c_, tol_);
            v.score = deviation_score(pt.value, res.estimate.location, res.estimate.scale);
            v.is_anomaly = v.score > threshold_;
        }
        win_.push(pt.value);
        return v;
    }
    std::string name() const override { return "huber"; }

private:
    SlidingWindow win_;
    double threshold_, c_, tol_;
};

class GesdDetector final : public CloneableDetector<GesdDetector> {
public:
    GesdDetector(std::size_t window, GesdConfig cfg) : win_(window), cfg_(cfg) {}

    DetectorVerdict observe(const TimePoint& pt) override {
        DetectorVerdict v;
        if (win_.size() + 1 >= 15) {
            std::vector<double> values = win_.values();
            values.push_back(pt.value);
            const std::size_t self = values.size() - 1;
            const std::vector<std::size_t> out = gesd(values, cfg_);
            v.is_anomaly = std::binary_search(out.begin(), out.end(), self);

            // Score: the studentized deviate of x against the cleaned sample,
            // relative to the final critical value (flagging threshold 1).
            double sum = 0.0, sumsq = 0.0;
            std::size_t m = 0;
            std::size_t oi = 0;
            for (std::size_t i = 0; i < values.size(); ++i) {
                if (oi < out.size() && out[oi] == i) {
                    ++oi;
                    continue;
                }
                sum += values[i];
                sumsq += values[i] * values[i];
                ++m;
            }
            const double md = static_cast<double>(m);
            const double mean = sum / md;
            const double sd =
                std::sqrt(std::max(0.0, (sumsq - sum * sum / md) / std::max(1.0, md - 1.0)));
            const std::size_t k = static_cast<std::size_t>(
                std::ceil(cfg_.max_anomaly_fraction * static_cast<double>(values.size())));
            const double lambda = gesd_critical_value(values.size(), k, cfg_.significance);
            v.score = deviation_score(pt.value, mean, sd * lambda);
        }
        win_.push(pt.value);
        return v;
    }
    std::string name() const override { return "gesd"; }

private:
    SlidingWindow win_;
    GesdConfig cfg_;
};

class TDigestDetector final : public CloneableDetector<TDigestDetector> {
public:
    TDigestDetector(double delta, double quantile, std::uint64_t seed)
        : digest_(delta, seed), q_(quantile) {}

    DetectorVerdict observe(const TimePoint& pt) override {
        DetectorVerdict v;
        if (digest_.total_count() >= 10.0) {
            const double hi = digest_.quantile(q_);
            const double med = digest_.quantile(0.5);
            const double denom = hi - med;
            if (pt.value > med)
                v.score = denom > 0.0 ? (pt.value - med) / denom
                                      : (pt.value > hi ? kInfScore : 0.0);
            v.is_anomaly = pt.value > hi;  // one-sided upper-percentile rule
        }
        digest_.insert(pt.value);
        return v;
    }
    std::string name() const override { return "t-digest"; }

private:
    TDigest digest_;
    double q_;
};

class AdjBoxplotDetector final : public CloneableDetector<AdjBoxplotDetector> {
public:
    explicit AdjBoxplotDetector(std::size_t window) : win_(window) {}

    DetectorVerdict observe(const TimePoint& pt) override {
        DetectorVerdict v;
        if (win_.size() >= 4) {
            const std::vector<double> values = win_.values();
            const auto [lo, hi] = adjusted_fences(values);
            std::vector<double> tmp = values;
            const double q1 = quantile_type7_inplace(tmp, 0.25);
            const double q3 = quantile_type7_inplace(tmp, 0.75);
            const double iqr = q3 - q1;
            const double viol = std::max({0.0, lo - pt.value, pt.value - hi});
            if (viol > 0.0) v.score = iqr > 0.0 ? viol / iqr : kInfScore;
            v.is_anomaly = viol > 0.0;
        }
        win_.push(pt.value);
        return v;
    }
    std::string name() const override { return "adjusted-boxplot"; }

private:
    SlidingWindow win_;
};

// --- model-based detectors -----------------------------------------------------

class SdarDetector final : public CloneableDetector<SdarDetector> {
public:
    SdarDetector(std::size_t order, double rate, double threshold)
        : model_(order, rate), threshold_(threshold) {}

    DetectorVerdict observe(const TimePoint& pt) override {
        const Sdar::Step st = model_.step(pt.value);
        DetectorVerdict v;
        v.score = st.ready ? st.score : 0.0;
        v.is_anomaly = st.ready && v.score > threshold_;
        return v;
    }
    std::string name() const override { return "sdar"; }

private:
    Sdar model_;
    double threshold_;
};

class KalmanDetector final : public CloneableDetector<KalmanDetector> {
public:
    KalmanDetector(const KalmanConfig& cfg, double threshold, std::string name)
        : filter_(cfg), threshold_(threshold), name_(std::move(name)) {}

    DetectorVerdict observe(const TimePoint& pt) override {
        const KalmanFilter::Step st = filter_.step(pt.value);
        DetectorVerdict v;
        v.score = st.score;
        v.is_anomaly = ++seen_ > 2 && v.score > threshold_;
        return v;
    }
    std::string name() const override { return name_; }

private:
    KalmanFilter filter_;
    double threshold_;
    std::string name_;
    std::size_t seen_ = 0;
};

class ArmaDetector final : public CloneableDetector<ArmaDetector> {
public:
    ArmaDetector(std::size_t window, std::size_t retrain, std::size_t p, std::size_t q,
                 double threshold)
        : win_(window), retrain_(retrain), p_(p), q_(q), threshold_(threshold) {}

    DetectorVerdict observe(const TimePoint& pt) override {
        DetectorVerdict v;
        if (forecaster_) {
            const auto st = forecaster_->step(pt.value);
            v.score = st.score;
            v.is_anomaly = v.score > threshold_;
        }
        win_.push(pt.value);
        ++since_fit_;
        const std::size_t need = std::max<std::size_t>(10 * (p_ + q_), 30);
        if (win_.size() >= need && (!forecaster_ || since_fit_ >= retrain_)) refit();
        return v;
    }
    std::string name() const override { return "arma"; }

private:
    void refit() {
        const std::vector<double> values = win_.values();
        ArmaModel model = arma_fit(values, p_, q_);
        forecaster_.emplace(std::move(model));
        for (double x : values) forecaster_->step(x);  // rebuild the lag state
        since_fit_ = 0;
    }

    SlidingWindow win_;
    std::size_t retrain_;
    std::size_t p_, q_;
    double threshold_;
    std::optional<ArmaForecaster> forecaster_;
    std::size_t since_fit_ = 0;
};

// --- STL pipeline ---------------------------------------------------------------

class StlPipelineDetector final : public Detector {
public:
    StlPipelineDetector(std::string name, std::unique_ptr<Detector> inner_proto,
                        std::size_t window_cap, std::size_t retrain,
                        std::optional<std::size_t> period, StlConfig stl_cfg)
        : name_(std::move(name)),
          proto_(std::move(inner_proto)),
          inner_(proto_->clone()),
          ring_(window_cap),
          retrain_(retrain),
          period_(period),
          stl_cfg_(stl_cfg) {}

    StlPipelineDetector(const StlPipelineDetector& o)
        : name_(o.name_),
          proto_(o.proto_->clone()),
          inner_(o.inner_->clone()),
          ring_(o.ring_),
          retrain_(o.retrain_),
          period_(o.period_),
          stl_cfg_(o.stl_cfg_),
          fitted_(o.fitted_),
          attempted_(o.attempted_),
          since_fit_(o.since_fit_),
          seasonal_by_phase_(o.seasonal_by_phase_),
          trend_last_(o.trend_last_),
          trend_slope_(o.trend_slope_),
          base_index_(o.base_index_) {}

    std::unique_ptr<Detector> clone() const override {
        return std::make_unique<StlPipelineDetector>(*this);
    }

    DetectorVerdict observe(const TimePoint& pt) override {
        DetectorVerdict v;
        if (fitted_) {
            const std::size_t p = seasonal_by_phase_.size();
            const double expected =
                seasonal_by_phase_[pt.index % p] +
                trend_last_ +
                trend_slope_ * static_cast<double>(static_cast<std::ptrdiff_t>(pt.index) -
                                                   static_cast<std::ptrdiff_t>(base_index_));
            TimePoint residual{pt.index, pt.timestamp_ms, pt.value - expected};
            v = inner_->observe(residual);
        } else {
            // Cold start (or no detectable period): the inner detector sees
            // the raw values.
            v = inner_->observe(pt);
        }
        ring_.push(pt.value);
        ++since_fit_;
        maybe_refit(pt.index);
        return v;
    }
    std::string name() const override { return name_; }

private:
    std::size_t first_attempt_length() const {
        if (period_) return std::min(ring_.capacity(), 2 * *period_);
        return std::min<std::size_t>(ring_.capacity(), 128);
    }

    void maybe_refit(std::size_t idx) {
        const bool due = (fitted_ || attempted_) ? since_fit_ >= retrain_
                                                 : ring_.size() >= first_attempt_length();
        if (!due) return;

        const std::vector<double> values = ring_.values();
        std::optional<std::size_t> p = period_;
        if (!p) p = estimate_period(values);
        attempted_ = true;
        since_fit_ = 0;
        if (!p || *p < 2 || values.size() < 2 * *p) return;  // stay in passthrough mode

        StlConfig cfg = stl_cfg_;
        cfg.period = *p;
        const Decomposition d = stl(values, cfg);
        const std::size_t n = values.size();
        const std::size_t a0 = idx + 1 - n;  // absolute index of ring[0]

        seasonal_by_phase_.assign(*p, 0.0);
        for (std::size_t i = n >= *p ? n - *p : 0; i < n; ++i)
            seasonal_by_phase_[(a0 + i) % *p] = d.seasonal[i];
        trend_last_ = d.trend[n - 1];
        trend_slope_ =
            n > *p ? (d.trend[n - 1] - d.trend[n - 1 - *p]) / static_cast<double>(*p) : 0.0;
        base_index_ = idx;

        // Retrain the inner detector on the decomposed remainder history.
        inner_ = proto_->clone();
        for (std::size_t i = 0; i < n; ++i)
            inner_->observe({a0 + i, std::nullopt, d.remainder[i]});
        fitted_ = true;
    }

    std::string name_;
    std::unique_ptr<Detector> proto_;
    std::unique_ptr<Detector> inner_;
    SlidingWindow ring_;
    std::size_t retrain_;
    std::optional<std::size_t> period_;
    StlConfig stl_cfg_;
    bool fitted_ = false;
    bool attempted_ = false;
    std::size_t since_fit_ = 0;
    std::vector<double> seasonal_by_phase_;
    double trend_last_ = 0.0;
    double trend_slope_ = 0.0;
    std::size_t base_index_ = 0;
};

// --- pattern detectors ------------------------------------------------------------

class HotsaxStreamDetector final : public CloneableDetector<HotsaxStreamDetector> {
public:
    HotsaxStreamDetector(const SaxConfig& cfg, std::size_t history)
        : scorer_(cfg, history), pattern_length_(cfg.pattern_length), recent_scores_(512) {}

    DetectorVerdict observe(const TimePoint& pt) override {
        DetectorVerdict v;
        const auto res = scorer_.push(pt.value);
        if (!res.has_score) return v;
        v.score = res.score;
        v.span = IndexSpan{res.start, res.start + pattern_length_ - 1};
        if (recent_scores_.size() >= 30) {
            const double med = recent_scores_.median();
            v.is_anomaly = med > 0.0 && v.score > 3.0 * med;
        }
        recent_scores_.push(v.score);
        return v;
    }
    std::string name() const override { return "hotsax"; }

private:
    StreamingDiscord scorer_;
    std::size_t pattern_length_;
    RollingMedian recent_scores_;
};

/// Builds detector inputs: scalars in point mode, mean-adjusted PL-length
/// subsequences (noise-filtered) in pattern mode.
class VectorFeed {
public:
    VectorFeed(bool pattern_mode, std::size_t pattern_length, double noise_epsilon)
        : pattern_(pattern_mode), pl_(pattern_length), eps_(noise_epsilon) {}

    /// Returns the vector for this point, or nullopt when the subsequence is
    /// not ready or was rejected by the noise filter.
    std::optional<Vec> push(double x) {
        if (!pattern_) return Vec{x};
        recent_.push_back(x);
        if (recent_.size() > pl_) recent_.pop_front();
        if (recent_.size() < pl_) return std::nullopt;
        std::vector<double> raw(recent_.begin(), recent_.end());
        if (!noise_filter(raw, eps_)) return std::nullopt;
        return mean_adjust(raw);
    }

    bool pattern_mode() const { return pattern_; }
    std::size_t pattern_length() const { return pl_; }

private:
    bool pattern_;
    std::size_t pl_;
    double eps_;
    std::deque<double> recent_;
};

class DenStreamDetector final : public CloneableDetector<DenStreamDetector> {
public:
    DenStreamDetector(const DenStreamConfig& cfg, VectorFeed feed)
        : model_(cfg), feed_(std::move(feed)), flag_outliers_(cfg.flag_outlier_mcs) {}

    DetectorVerdict observe(const TimePoint& pt) override {
        DetectorVerdict v;
        auto vec = feed_.push(pt.value);
        if (!vec) return v;
        const auto obs = model_.observe(*vec, pt.index);
        if (obs.initializing) return v;
        v.score = obs.score;
        if (flag_outliers_)
            v.is_anomaly = obs.absorbed_by_outlier_mc;
        else
            v.is_anomaly = v.score > 3.0 * model_.median_potential_radius();
        if (feed_.pattern_mode() && v.is_anomaly)
            v.span = IndexSpan{pt.index + 1 - feed_.pattern_length(), pt.index};
        return v;
    }
    std::string name() const override { return "denstream"; }

private:
    DenStream model_;
    VectorFeed feed_;
    bool flag_outliers_;
};

class DBStreamDetector final : public CloneableDetector<DBStreamDetector> {
public:
    DBStreamDetector(const DBStreamConfig& cfg, VectorFeed feed)
        : model_(cfg), feed_(std::move(feed)) {}

    DetectorVerdict observe(const TimePoint& pt) override {
        DetectorVerdict v;
        auto vec = feed_.push(pt.value);
        if (!vec) return v;
        const auto obs = model_.observe(*vec, pt.index);
        if (obs.initializing) return v;
        v.score = obs.score;
        v.is_anomaly = v.score > 3.0 * model_.median_radius();
        if (feed_.pattern_mode() && v.is_anomaly)
            v.span = IndexSpan{pt.index + 1 - feed_.pattern_length(), pt.index};
        return v;
    }
    std::string name() const override { return "dbstream"; }

private:
    DBStream model_;
    VectorFeed feed_;
};

class MbkDetector final : public CloneableDetector<MbkDetector> {
public:
    MbkDetector(const MbkConfig& cfg, VectorFeed feed)
        : model_(cfg), feed_(std::move(feed)), batch_cap_(cfg.batch_size), recent_scores_(512) {}

    DetectorVerdict observe(const TimePoint& pt) override {
        DetectorVerdict v;
        auto vec = feed_.push(pt.value);
        if (!vec) return v;
        if (!model_.ready()) {
            model_.seed(*vec);
            return v;
        }
        v.score = model_.score(*vec);
        if (recent_scores_.size() >= 30) {
            const double med = recent_scores_.median();
            v.is_anomaly = med > 0.0 && v.score > 3.0 * med;
        }
        recent_scores_.push(v.score);
        if (feed_.pattern_mode() && v.is_anomaly)
            v.span = IndexSpan{pt.index + 1 - feed_.pattern_length(), pt.index};

        batch_.push_back(std::move(*vec));
        if (batch_.size() >= batch_cap_) {
            model_.update(batch_);
            batch_.clear();
        }
        return v;
    }
    std::string name() const override { return "mbkmeans"; }

private:
    MiniBatchKMeans model_;
    VectorFeed feed_;
    std::size_t batch_cap_;
    std::vector<Vec> batch_;
    RollingMedian recent_scores_;
};

class IForestDetector final : public CloneableDetector<IForestDetector> {
public:
    IForestDetector(std::size_t window, std::size_t retrain, std::size_t trees,
                    std::size_t subsample, double threshold, std::uint64_t seed, VectorFeed feed)
        : window_(window),
          retrain_(retrain),
          trees_(trees),
          subsample_(subsample),
          threshold_(threshold),
          seed_(seed),
          feed_(std::move(feed)) {}

    DetectorVerdict observe(const TimePoint& pt) override {
        DetectorVerdict v;
        auto vec = feed_.push(pt.value);
        if (!vec) return v;
        if (forest_) {
            v.score = forest_->score(*vec);
            v.is_anomaly = v.score > threshold_;
            if (feed_.pattern_mode() && v.is_anomaly)
                v.span = IndexSpan{pt.index + 1 - feed_.pattern_length(), pt.index};
        }
        ring_.push_back(std::move(*vec));
        if (ring_.size() > window_) ring_.pop_front();
        ++since_fit_;
        if ((forest_ && since_fit_ >= retrain_) || (!forest_ && ring_.size() >= 32)) refit();
        return v;
    }
    std::string name() const override { return "iforest"; }

private:
    void refit() {
        std::vector<Vec> points(ring_.begin(), ring_.end());
        forest_ = IsoForest::fit(points, trees_, subsample_, seed_ + fits_);
        ++fits_;
        since_fit_ = 0;
    }

    std::size_t window_, retrain_, trees_, subsample_;
    double threshold_;
    std::uint64_t seed_;
    VectorFeed feed_;
    std::deque<Vec> ring_;
    std::optional<IsoForest> forest_;
    std::size_t since_fit_ = 0;
    std::size_t fits_ = 0;
};

// --- factory -----------------------------------------------------------------------

struct BuildContext {
    const DetectorSpec& spec;
    const LabeledSeries& series;
    std::size_t window;
    std::size_t retrain;

    double param(const std::string& key, double fallback) const {
        return spec.param(key, fallback);
    }
    std::size_t iparam(const std::string& key, std::size_t fallback) const {
        const double v = spec.param(key, static_cast<double>(fallback));
        if (v < 0.0) throw config_error(spec.technique + ": parameter '" + key +
                                        "' must be non-negative");
        return static_cast<std::size_t>(v);
    }
};

VectorFeed make_feed(const BuildContext& ctx) {
    const bool series_has_pl = ctx.series.pattern_length.has_value();
    const bool pattern = ctx.param("mode", series_has_pl ? 1.0 : 0.0) != 0.0;
    std::size_t pl = ctx.iparam("pl", ctx.series.pattern_length.value_or(0));
    if (pattern && pl < 4)
        throw config_error(ctx.spec.technique +
                           ": pattern mode requires a pattern length >= 4 (set pl=...)");
    return VectorFeed(pattern, pl, ctx.param("epsilon", 0.01));
}

std::unique_ptr<Detector> build(const BuildContext& ctx);

std::unique_ptr<Detector> build_stl_pipeline(const BuildContext& ctx, const std::string& inner_name,
                                             int default_robust_iters) {
    DetectorSpec inner_spec = ctx.spec;
    inner_spec.technique = inner_name;
    BuildContext inner_ctx{inner_spec, ctx.series, ctx.window, ctx.retrain};
    std::unique_ptr<Detector> inner = build(inner_ctx);

    StlConfig cfg;
    cfg.s_window = static_cast<int>(ctx.param("s_window", 21));
    cfg.robust_iterations =
        static_cast<int>(ctx.param("robust_iterations", default_robust_iters));
    cfg.t_window = static_cast<int>(ctx.param("t_window", 0));
    cfg.l_window = static_cast<int>(ctx.param("l_window", 0));

    std::optional<std::size_t> period;
    const std::size_t p = ctx.iparam("period", ctx.series.seasonal_period_hint.value_or(0));
    if (p >= 2) period = p;

    return std::make_unique<StlPipelineDetector>(ctx.spec.technique, std::move(inner), ctx.window,
                                                 ctx.retrain, period, cfg);
}

std::unique_ptr<Detector> build(const BuildContext& ctx) {
    const std::string& t = ctx.spec.technique;
    const double threshold = ctx.param("threshold", 3.0);

    if (t == "mu-sigma") return std::make_unique<MuSigmaDetector>(ctx.window, threshold);
    if (t == "med-mad") return std::make_unique<MedMadDetector>(ctx.window, threshold);
    if (t == "huber")
        return std::make_unique<HuberDetector>(ctx.window, threshold, ctx.param("c", 1.345),
                                               ctx.param("tol", 1e-8));
    if (t == "gesd") {
        GesdConfig cfg;
        cfg.max_anomaly_fraction = ctx.param("fraction", 0.02);
        cfg.significance = ctx.param("alpha", 0.05);
        return std::make_unique<GesdDetector>(ctx.window, cfg);
    }
    if (t == "t-digest")
        return std::make_unique<TDigestDetector>(
            ctx.param("delta", 0.01), ctx.param("quantile", 0.9973),
            static_cast<std::uint64_t>(ctx.param("seed", 0)));
    if (t == "adjusted-boxplot")
        return std::make_unique<AdjBoxplotDetector>(
            std::min(ctx.window, ctx.iparam("max_window", 512)));
    if (t == "sdar")
        return std::make_unique<SdarDetector>(ctx.iparam("order", 5), ctx.param("rate", 0.0001),
                                              threshold);
    if (t == "kalman" || t == "robust-kf") {
        KalmanConfig cfg;
        cfg.model = ctx.param("model", 0) != 0.0 ? KalmanModel::kLocalLinear
                                                 : KalmanModel::kLocalLevel;
        cfg.process_noise = ctx.param("q", 0.01);
        cfg.observation_noise = ctx.param("r", 1.0);
        cfg.robust = t == "robust-kf";
        cfg.alpha = ctx.param("alpha", 1.0);
        cfg.beta = ctx.param("beta", 1.0);
        return std::make_unique<KalmanDetector>(cfg, threshold, t);
    }
    if (t == "arma")
        return std::make_unique<ArmaDetector>(ctx.window, ctx.retrain, ctx.iparam("p", 2),
                                              ctx.iparam("q", 1), threshold);

    if (t == "stl" || t == "stl-mu-sigma") return build_stl_pipeline(ctx, "mu-sigma", 0);
    if (t == "stl-med-mad") return build_stl_pipeline(ctx, "med-mad", 0);
    if (t == "stl-sdar") return build_stl_pipeline(ctx, "sdar", 0);
    if (t == "stl-robust-kf") return build_stl_pipeline(ctx, "robust-kf", 0);
    if (t == "stl-arma") return build_stl_pipeline(ctx, "arma", 0);
    if (t == "robust-stl") return build_stl_pipeline(ctx, "mu-sigma", 4);

    if (t == "hotsax") {
        SaxConfig cfg;
        cfg.pattern_length = ctx.iparam("pl", ctx.series.pattern_length.value_or(0));
        if (cfg.pattern_length < 4)
            throw config_error("hotsax: requires a pattern length >= 4 (set pl=...)");
        cfg.paa_segments =
            ctx.iparam("w", std::max<std::size_t>(1, cfg.pattern_length / 4));
        cfg.alphabet_size = ctx.iparam("a", 3);
        cfg.noise_threshold = ctx.param("epsilon", 0.01);
        return std::make_unique<HotsaxStreamDetector>(cfg, ctx.window);
    }
    if (t == "denstream") {
        DenStreamConfig cfg;
        cfg.lambda = ctx.param("lambda", 0.001);
        cfg.beta = ctx.param("beta", 0.5);
        cfg.t_alpha = ctx.param("t_alpha", 0.0);
        cfg.epsilon = ctx.param("eps", 0.0);
        cfg.init_points = ctx.iparam("init", 100);
        cfg.flag_outlier_mcs = ctx.param("flag_outlier_mcs", 0) != 0.0;
        return std::make_unique<DenStreamDetector>(cfg, make_feed(ctx));
    }
    if (t == "dbstream") {
        DBStreamConfig cfg;
        cfg.lambda = ctx.param("lambda", 0.001);
        cfg.epsilon = ctx.param("eps", 0.0);
        cfg.alpha = ctx.param("alpha", 0.3);
        cfg.w_min = ctx.param("w_min", 3.0);
        cfg.init_points = ctx.iparam("init", 100);
        return std::make_unique<DBStreamDetector>(cfg, make_feed(ctx));
    }
    if (t == "mbkmeans") {
        MbkConfig cfg;
        cfg.k = std::max<std::size_t>(1, ctx.iparam("k", 4));
        cfg.batch_size = std::max<std::size_t>(1, ctx.iparam("batch", 32));
        return std::make_unique<MbkDetector>(cfg, make_feed(ctx));
    }
    if (t == "iforest")
        return std::make_unique<IForestDetector>(
            ctx.window, ctx.retrain, std::max<std::size_t>(1, ctx.iparam("trees", 100)),
            ctx.iparam("psi", 256), ctx.param("threshold", 0.6),
            static_cast<std::uint64_t>(ctx.param("seed", 0)), make_feed(ctx));

    std::string known;
    for (const DetectorInfo& info : detector_catalog()) {
        if (!known.empty()) known += ", ";
        known += info.name;
    }
    throw config_error("unknown detector '" + t + "' (known: " + known + ")");
}

}  // namespace

const std::vector<DetectorInfo>& detector_catalog() {
    static const std::vector<DetectorInfo> catalog = {
        {"mu-sigma", "point", "mean/stddev z-score over the window", {{"threshold", 3}}},
        {"med-mad", "point", "median/MAD robust z-score", {{"threshold", 3}}},
        {"huber", "point", "Huber M-location with MAD scale", {{"threshold", 3}, {"c", 1.345}, {"tol", 1e-8}}},
        {"gesd", "point", "generalized ESD outlier test (CFAR)", {{"fraction", 0.02}, {"alpha", 0.05}}},
        {"t-digest", "point", "streaming quantile sketch, upper-percentile rule", {{"delta", 0.01}, {"quantile", 0.9973}, {"seed", 0}}},
        {"adjusted-boxplot", "point", "medcouple skew-adjusted boxplot fences", {{"max_window", 512}}},
        {"sdar", "point", "sequentially discounting AR", {{"order", 5}, {"rate", 0.0001}, {"threshold", 3}}},
        {"kalman", "point", "Kalman filter, standardized innovation", {{"q", 0.01}, {"r", 1}, {"model", 0}, {"threshold", 3}}},
        {"robust-kf", "point", "outlier-weighted Kalman filter", {{"q", 0.01}, {"r", 1}, {"alpha", 1}, {"beta", 1}, {"threshold", 3}}},
        {"arma", "point", "windowed ARMA, standardized one-step residual", {{"p", 2}, {"q", 1}, {"threshold", 3}}},
        {"stl", "point", "alias of stl-mu-sigma", {{"s_window", 21}}},
        {"stl-mu-sigma", "point", "STL remainder -> mu-sigma", {{"s_window", 21}}},
        {"stl-med-mad", "point", "STL remainder -> med-mad", {{"s_window", 21}}},
        {"stl-sdar", "point", "STL remainder -> SDAR", {{"s_window", 21}, {"order", 5}, {"rate", 0.0001}}},
        {"stl-robust-kf", "point", "STL remainder -> robust Kalman", {{"s_window", 21}}},
        {"stl-arma", "point", "STL remainder -> ARMA", {{"s_window", 21}, {"p", 2}, {"q", 1}}},
        {"robust-stl", "point", "robust STL (4 outer iterations) -> mu-sigma", {{"s_window", 21}, {"robust_iterations", 4}}},
        {"hotsax", "pattern", "streaming discord score over SAX-indexed history", {{"a", 3}, {"epsilon", 0.01}}},
        {"denstream", "pattern", "potential/outlier micro-clusters, distance to nearest p-MC", {{"lambda", 0.001}, {"beta", 0.5}, {"init", 100}}},
        {"dbstream", "pattern", "shared-density micro-clusters with per-point reclustering", {{"lambda", 0.001}, {"alpha", 0.3}, {"w_min", 3}, {"init", 100}}},
        {"mbkmeans", "pattern", "mini-batch k-means distance-to-centroid", {{"k", 4}, {"batch", 32}}},
        {"iforest", "pattern", "isolation forest with periodic retraining", {{"trees", 100}, {"psi", 256}, {"threshold", 0.6}, {"seed", 0}}},
    };
    return catalog;
}

bool is_pattern_family(const std::string& technique) {
    for (const DetectorInfo& info : detector_catalog())
        if (info.name == technique) return info.family == "pattern";
    return false;
}

std::unique_ptr<Detector> make_detector(const DetectorSpec& spec, const LabeledSeries& series) {
    const std::size_t window = series.window_cap;
    std::size_t retrain = spec.retrain_period == 0 ? window : spec.retrain_period;
    if (retrain > window)
        throw config_error(spec.technique + ": retrain_period (" + std::to_string(retrain) +
                           ") must not exceed the window cap (" + std::to_string(window) + ")");
    try {
        BuildContext ctx{spec, series, window, retrain};
        return build(ctx);
    } catch (const config_error&) {
        throw;
    } catch (const std::exception& e) {
        throw config_error(spec.technique + ": construction failed: " + e.what());
    }
}

}  // namespace streamad

#include "streamad/data_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

namespace streamad {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur += ch;
        }
    }
    out.push_back(cur);
    return out;
}

double parse_double(const std::string& s, const std::string& path, std::size_t line_no) {
    try {
        std::size_t pos = 0;
        double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw data_error(path + ":" + std::to_string(line_no) + ": malformed numeric field '" +
                         s + "'");
    }
}

std::int64_t parse_int(const std::string& s, const std::string& path, std::size_t line_no) {
    try {
        std::size_t pos = 0;
        long long v = std::stoll(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw data_error(path + ":" + std::to_string(line_no) + ": malformed integer field '" +
                         s + "'");
    }
}

std::ifstream open_or_throw(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw data_error("cannot open file: " + path);
    return in;
}

/// Deterministic standard normal sampler (Box-Muller over a seeded engine;
/// avoids the implementation-defined std::normal_distribution).
class NormalSampler {
public:
    explicit NormalSampler(std::uint64_t seed) : rng_(seed) {}
    double operator()() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = 0.0;
        do {
            u1 = uniform();
        } while (u1 <= 0.0);
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * 3.14159265358979323846 * u2;
        spare_ = r * std::sin(theta);
        have_spare_ = true;
        return r * std::cos(theta);
    }
    double uniform() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }
    std::uint64_t raw() { return rng_(); }

private:
    std::mt19937_64 rng_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace

CsvSchema parse_schema(const std::string& name) {
    if (name == "yahoo") return CsvSchema::kYahoo;
    if (name == "nab") return CsvSchema::kNab;
    if (name == "generic") return CsvSchema::kGeneric;
    throw config_error("unknown csv schema '" + name + "' (expected yahoo, nab or generic)");
}

LabeledSeries load_csv(const std::string& path, CsvSchema schema, const std::string& label_path) {
    std::ifstream in = open_or_throw(path);
    LabeledSeries series;
    series.name = std::filesystem::path(path).stem().string();

    std::string line;
    std::size_t line_no = 0;
    bool header_checked = false;
    std::map<std::int64_t, std::size_t> ts_to_index;

    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || (line.size() == 1 && line[0] == '\r')) continue;
        const std::vector<std::string> fields = split_csv_line(line);
        if (!header_checked) {
            header_checked = true;
            // A header row is required for yahoo/nab, optional for generic.
            const std::string first = fields.empty() ? "" : fields[0];
            const bool looks_header = !first.empty() && !std::isdigit(static_cast<unsigned char>(first[0])) &&
                                      first[0] != '-' && first[0] != '+';
            if (looks_header) continue;
        }

        switch (schema) {
            case CsvSchema::kYahoo: {
                if (fields.size() != 3)
                    throw data_error(path + ":" + std::to_string(line_no) +
                                     ": expected 3 fields (timestamp,value,is_anomaly)");
                TimePoint pt;
                pt.index = series.points.size();
                pt.timestamp_ms = parse_int(fields[0], path, line_no);
                pt.value = parse_double(fields[1], path, line_no);
                const std::int64_t lbl = parse_int(fields[2], path, line_no);
                if (lbl != 0 && lbl != 1)
                    throw data_error(path + ":" + std::to_string(line_no) +
                                     ": is_anomaly must be 0 or 1");
                if (!series.points.empty() && *series.points.back().timestamp_ms >= *pt.timestamp_ms)
                    throw data_error(path + ":" + std::to_string(line_no) +
                                     ": timestamps not strictly increasing");
                if (lbl == 1) series.labels.insert(pt.index);
                series.points.push_back(pt);
                break;
            }
            case CsvSchema::kNab: {
                if (fields.size() != 2)
                    throw data_error(path + ":" + std::to_string(line_no) +
                                     ": expected 2 fields (timestamp,value)");
                TimePoint pt;
                pt.index = series.points.size();
                pt.timestamp_ms = parse_int(fields[0], path, line_no);
                pt.value = parse_double(fields[1], path, line_no);
                if (!series.points.empty() && *series.points.back().timestamp_ms >= *pt.timestamp_ms)
                    throw data_error(path + ":" + std::to_string(line_no) +
                                     ": timestamps not strictly increasing");
                ts_to_index[*pt.timestamp_ms] = pt.index;
                series.points.push_back(pt);
                break;
            }
            case CsvSchema::kGeneric: {
                if (fields.size() != 2 && fields.size() != 3)
                    throw data_error(path + ":" + std::to_string(line_no) +
                                     ": expected 2 or 3 fields (index,value[,label])");
                TimePoint pt;
                const std::int64_t idx = parse_int(fields[0], path, line_no);
                if (idx < 0)
                    throw data_error(path + ":" + std::to_string(line_no) + ": negative index");
                pt.index = static_cast<std::size_t>(idx);
                pt.value = parse_double(fields[1], path, line_no);
                if (!series.points.empty() && series.points.back().index >= pt.index)
                    throw data_error(path + ":" + std::to_string(line_no) +
                                     ": indices not strictly increasing");
                if (fields.size() == 3) {
                    const std::int64_t lbl = parse_int(fields[2], path, line_no);
                    if (lbl != 0 && lbl != 1)
                        throw data_error(path + ":" + std::to_string(line_no) +
                                         ": label must be 0 or 1");
                    if (lbl == 1) series.labels.insert(pt.index);
                }
                series.points.push_back(pt);
                break;
            }
        }
    }
    if (series.points.empty()) throw data_error(path + ": no data rows");

    if (schema == CsvSchema::kNab) {
        if (label_path.empty()) throw config_error("nab schema requires a label file");
        std::ifstream lin = open_or_throw(label_path);
        std::string lline;
        std::size_t lno = 0;
        while (std::getline(lin, lline)) {
            ++lno;
            if (lline.empty() || lline[0] == '#' || (lline.size() == 1 && lline[0] == '\r'))
                continue;
            if (!lline.empty() && lline.back() == '\r') lline.pop_back();
            const std::int64_t ts = parse_int(lline, label_path, lno);
            auto it = ts_to_index.find(ts);
            if (it == ts_to_index.end())
                throw data_error(label_path + ":" + std::to_string(lno) +
                                 ": label timestamp " + std::to_string(ts) +
                                 " not present in the series");
            series.labels.insert(it->second);
        }
    }

    if (series.points.size() >= 2 && series.points[0].timestamp_ms)
        series.granularity_ms = *series.points[1].timestamp_ms - *series.points[0].timestamp_ms;
    series.window_cap = std::max<std::size_t>(2, std::min<std::size_t>(series.points.size(), 1000));
    series.validate();
    return series;
}

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_series_csv(const LabeledSeries& series, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw data_error("cannot write file: " + path);
    out << "index,value,label\n";
    for (const TimePoint& pt : series.points)
        out << pt.index << ',' << format_double(pt.value) << ','
            << (series.labels.count(pt.index) ? 1 : 0) << '\n';
    if (!out) throw data_error("write failed: " + path);

    std::ofstream lout(path + ".labels", std::ios::binary);
    if (!lout) throw data_error("cannot write file: " + path + ".labels");
    for (std::size_t lbl : series.labels) lout << lbl << '\n';
    if (!lout) throw data_error("write failed: " + path + ".labels");
}

LabeledSeries synth_generate(const SynthSpec& spec) {
    if (spec.length == 0) throw config_error("synth: length must be positive");
    if (spec.period == 1) throw config_error("synth: period must be >= 2 when seasonal");
    for (const SynthEvent& e : spec.events)
        if (e.at >= spec.length && (e.kind == SynthEvent::Kind::kLevelShift ||
                                    e.kind == SynthEvent::Kind::kVarianceChange ||
                                    e.kind == SynthEvent::Kind::kSeasonalLevelShift))
            throw config_error("synth: event index out of range");
    for (const SynthAnomaly& a : spec.anomalies)
        if (a.index >= spec.length) throw config_error("synth: anomaly index out of range");

    NormalSampler noise(spec.seed ^ 0x5eedf00dULL);

    double jitter = 0.0;
    double drift_rate = 0.0;
    for (const SynthEvent& e : spec.events) {
        if (e.kind == SynthEvent::Kind::kSeasonalJitter) jitter = std::abs(e.magnitude);
        if (e.kind == SynthEvent::Kind::kSeasonalLevelDrift) drift_rate = e.magnitude;
    }

    LabeledSeries series;
    series.name = spec.name;
    series.granularity_ms = spec.granularity_ms;
    if (spec.period >= 2) series.seasonal_period_hint = spec.period;
    if (spec.pattern_length >= 4) series.pattern_length = spec.pattern_length;
    series.window_cap =
        spec.window_cap >= 2
            ? spec.window_cap
            : std::max<std::size_t>(
                  2, std::min(spec.length, spec.period >= 2 ? 10 * spec.period : std::size_t{1000}));

    // Seasonal phase walks cycle by cycle; jitter perturbs each cycle's
    // length so consecutive peak spacings stay within +-jitter of the period.
    std::size_t cycle_start = 0;
    double cycle_len = static_cast<double>(spec.period);
    auto next_cycle_len = [&]() {
        if (spec.period < 2) return;
        double j = 0.0;
        if (jitter > 0.0) {
            const auto span = static_cast<std::int64_t>(jitter);
            const std::int64_t u =
                static_cast<std::int64_t>(noise.raw() % static_cast<std::uint64_t>(2 * span + 1)) -
                span;
            j = static_cast<double>(u);
        }
        cycle_len = std::max(2.0, static_cast<double>(spec.period) + j);
    };
    next_cycle_len();

    series.points.reserve(spec.length);
    for (std::size_t t = 0; t < spec.length; ++t) {
        if (spec.period >= 2 &&
            static_cast<double>(t - cycle_start) >= cycle_len) {
            cycle_start = t;
            next_cycle_len();
        }

        double level = spec.trend_slope * static_cast<double>(t);
        double amp = spec.amplitude * (1.0 + drift_rate * static_cast<double>(t));
        double sigma = spec.noise_sigma;
        for (const SynthEvent& e : spec.events) {
            if (t < e.at) continue;
            switch (e.kind) {
                case SynthEvent::Kind::kLevelShift: level += e.magnitude; break;
                case SynthEvent::Kind::kVarianceChange: sigma *= e.magnitude; break;
                case SynthEvent::Kind::kSeasonalLevelShift: amp *= e.magnitude; break;
                default: break;
            }
        }

        double seasonal = 0.0;
        if (spec.period >= 2) {
            const double phase = static_cast<double>(t - cycle_start) / cycle_len;
            seasonal = amp * std::sin(2.0 * 3.14159265358979323846 * phase);
        }

        TimePoint pt;
        pt.index = t;
        pt.timestamp_ms = static_cast<std::int64_t>(t) * spec.granularity_ms;
        pt.value = level + seasonal + sigma * noise();
        series.points.push_back(pt);
    }

    const double unit = spec.noise_sigma > 0.0 ? spec.noise_sigma : 1.0;
    for (const SynthAnomaly& a : spec.anomalies) {
        series.points[a.index].value += a.magnitude_sigma * unit;
        series.labels.insert(a.index);
    }
    if (spec.label_changes) {
        for (const SynthEvent& e : spec.events) {
            if (e.kind == SynthEvent::Kind::kLevelShift ||
                e.kind == SynthEvent::Kind::kVarianceChange ||
                e.kind == SynthEvent::Kind::kSeasonalLevelShift)
                series.labels.insert(e.at);
        }
    }
    series.validate();
    return series;
}

namespace {

std::string sanitize_flags(std::string flags) {
    std::replace(flags.begin(), flags.end(), ',', ';');
    return flags;
}

}  // namespace

void persist_results(const std::vector<ResultRow>& rows, const std::string& path) {
    std::vector<ResultRow> sorted = rows;
    std::stable_sort(sorted.begin(), sorted.end(), [](const ResultRow& a, const ResultRow& b) {
        if (a.group != b.group) return a.group < b.group;
        if (a.detector != b.detector) return a.detector < b.detector;
        return a.series < b.series;
    });

    std::ofstream out(path, std::ios::binary);
    if (!out) throw data_error("cannot write file: " + path);
    out << "detector,group,series,window,runtime_ms,precision,recall,fbeta,beta,flags\n";
    for (const ResultRow& r : sorted) {
        out << r.detector << ',' << r.group << ',' << r.series << ',' << r.window << ','
            << format_double(r.runtime_ms) << ',' << format_double(r.precision) << ','
            << format_double(r.recall) << ',' << format_double(r.fbeta) << ','
            << format_double(r.beta) << ',' << sanitize_flags(r.flags) << '\n';
    }
    if (!out) throw data_error("write failed: " + path);

    // Plot-ready companion: per (detector, group) geometric-mean runtime and
    // micro-averaged F-beta.
    struct Agg {
        std::vector<double> runtimes;
        Confusion pooled;
        double beta = 1.0;
    };
    std::map<std::pair<std::string, std::string>, Agg> aggs;
    for (const ResultRow& r : sorted) {
        Agg& a = aggs[{r.group, r.detector}];
        if (r.runtime_ms > 0.0) a.runtimes.push_back(r.runtime_ms);
        a.pooled += r.confusion;
        a.beta = r.beta;
    }
    std::vector<MapRow> map_rows;
    for (const auto& [key, agg] : aggs) {
        MapRow m;
        m.group = key.first;
        m.detector = key.second;
        if (!agg.runtimes.empty()) {
            double log_acc = 0.0;
            for (double v : agg.runtimes) log_acc += std::log(v);
            m.runtime_ms = std::exp(log_acc / static_cast<double>(agg.runtimes.size()));
        }
        m.fbeta = precision_recall_fbeta(agg.pooled, {agg.beta}).fbeta;
        map_rows.push_back(std::move(m));
    }
    const std::filesystem::path dir = std::filesystem::path(path).parent_path();
    write_accuracy_map(map_rows, (dir / "accuracy_runtime_map.csv").string());
}

std::vector<ResultRow> load_results(const std::string& path) {
    std::ifstream in = open_or_throw(path);
    std::vector<ResultRow> rows;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || (line.size() == 1 && line[0] == '\r')) continue;
        if (line_no == 1) continue;  // header
        const std::vector<std::string> f = split_csv_line(line);
        if (f.size() != 10)
            throw data_error(path + ":" + std::to_string(line_no) + ": expected 10 fields");
        ResultRow r;
        r.detector = f[0];
        r.group = f[1];
        r.series = f[2];
        r.window = static_cast<std::size_t>(parse_int(f[3], path, line_no));
        r.runtime_ms = parse_double(f[4], path, line_no);
        r.precision = parse_double(f[5], path, line_no);
        r.recall = parse_double(f[6], path, line_no);
        r.fbeta = parse_double(f[7], path, line_no);
        r.beta = parse_double(f[8], path, line_no);
        r.flags = f[9];
        rows.push_back(std::move(r));
    }
    return rows;
}

void write_accuracy_map(const std::vector<MapRow>& rows, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw data_error("cannot write file: " + path);
    out << "detector,group,runtime_ms,fbeta\n";
    for (const MapRow& r : rows)
        out << r.detector << ',' << r.group << ',' << format_double(r.runtime_ms) << ','
            << format_double(r.fbeta) << '\n';
    if (!out) throw data_error("write failed: " + path);
}

std::vector<MapRow> load_accuracy_map(const std::string& path) {
    std::ifstream in = open_or_throw(path);
    std::vector<MapRow> rows;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || (line.size() == 1 && line[0] == '\r')) continue;
        if (line_no == 1) continue;
        const std::vector<std::string> f = split_csv_line(line);
        if (f.size() != 4)
            throw data_error(path + ":" + std::to_string(line_no) + ": expected 4 fields");
        rows.push_back({f[0], f[1], parse_double(f[2], path, line_no),
                        parse_double(f[3], path, line_no)});
    }
    return rows;
}

}  // namespace streamad

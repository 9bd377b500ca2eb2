// Command-line front end: detect / bench / eval / synth / report.
// Exit codes: 0 success, 2 data error, 3 configuration error.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "streamad/bench.hpp"
#include "streamad/core.hpp"
#include "streamad/data_io.hpp"
#include "streamad/metrics.hpp"
#include "streamad/registry.hpp"

namespace {

using namespace streamad;

constexpr int kExitOk = 0;
constexpr int kExitData = 2;
constexpr int kExitConfig = 3;

// --- flat key-value config with section headers ---------------------------------

struct ConfigEntry {
    std::string section;
    std::string key;
    std::string value;
};

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

std::vector<ConfigEntry> parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw data_error("cannot open config file: " + path);
    std::vector<ConfigEntry> entries;
    std::string line, section;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        if (t.front() == '[') {
            if (t.back() != ']')
                throw config_error(path + ":" + std::to_string(line_no) + ": unterminated section");
            section = trim(t.substr(1, t.size() - 2));
            entries.push_back({section, "", ""});  // section marker
            continue;
        }
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw config_error(path + ":" + std::to_string(line_no) + ": expected key = value");
        entries.push_back({section, trim(t.substr(0, eq)), trim(t.substr(eq + 1))});
    }
    return entries;
}

double to_double(const std::string& v, const std::string& what) {
    try {
        std::size_t pos = 0;
        const double d = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw config_error("bad numeric value for " + what + ": '" + v + "'");
    }
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : s) {
        if (ch == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += ch;
        }
    }
    out.push_back(cur);
    return out;
}

// --- synth spec interpretation ----------------------------------------------------

SynthEvent parse_event(const std::string& value) {
    const auto parts = split(value, ':');
    if (parts.size() < 2) throw config_error("bad event '" + value + "' (kind:magnitude[:at])");
    SynthEvent e;
    const std::string kind = parts[0];
    if (kind == "ls")
        e.kind = SynthEvent::Kind::kLevelShift;
    else if (kind == "vc")
        e.kind = SynthEvent::Kind::kVarianceChange;
    else if (kind == "sls")
        e.kind = SynthEvent::Kind::kSeasonalLevelShift;
    else if (kind == "sld")
        e.kind = SynthEvent::Kind::kSeasonalLevelDrift;
    else if (kind == "sj")
        e.kind = SynthEvent::Kind::kSeasonalJitter;
    else
        throw config_error("unknown event kind '" + kind + "' (ls, vc, sls, sld, sj)");
    e.magnitude = to_double(parts[1], "event magnitude");
    if (parts.size() >= 3)
        e.at = static_cast<std::size_t>(to_double(parts[2], "event position"));
    return e;
}

void apply_synth_key(SynthSpec& spec, const std::string& key, const std::string& value) {
    if (key == "name")
        spec.name = value;
    else if (key == "length")
        spec.length = static_cast<std::size_t>(to_double(value, key));
    else if (key == "period")
        spec.period = static_cast<std::size_t>(to_double(value, key));
    else if (key == "amplitude")
        spec.amplitude = to_double(value, key);
    else if (key == "trend")
        spec.trend_slope = to_double(value, key);
    else if (key == "noise")
        spec.noise_sigma = to_double(value, key);
    else if (key == "seed")
        spec.seed = static_cast<std::uint64_t>(to_double(value, key));
    else if (key == "granularity_ms")
        spec.granularity_ms = static_cast<std::int64_t>(to_double(value, key));
    else if (key == "window")
        spec.window_cap = static_cast<std::size_t>(to_double(value, key));
    else if (key == "pattern_length")
        spec.pattern_length = static_cast<std::size_t>(to_double(value, key));
    else if (key == "label_changes")
        spec.label_changes = to_double(value, key) != 0.0;
    else if (key == "event")
        spec.events.push_back(parse_event(value));
    else if (key == "anomaly") {
        const auto parts = split(value, ':');
        if (parts.size() != 2) throw config_error("bad anomaly '" + value + "' (index:sigma)");
        spec.anomalies.push_back({static_cast<std::size_t>(to_double(parts[0], "anomaly index")),
                                  to_double(parts[1], "anomaly magnitude")});
    } else if (key == "anomalies") {
        // Count form: placed deterministically over the back 3/4 of the series.
        const std::size_t count = static_cast<std::size_t>(to_double(value, key));
        spec.anomalies.resize(count);  // indices resolved once length is known
        for (std::size_t i = 0; i < count; ++i) spec.anomalies[i] = {0, 8.0};
    } else if (key == "magnitude") {
        for (auto& a : spec.anomalies) a.magnitude_sigma = to_double(value, key);
    } else {
        throw config_error("unknown synth key '" + key + "'");
    }
}

void finalize_anomaly_positions(SynthSpec& spec) {
    bool placed = false;
    for (const auto& a : spec.anomalies) placed = placed || a.index != 0;
    if (spec.anomalies.empty() || placed) return;
    const std::size_t lo = spec.length / 4;
    const std::size_t span = spec.length - lo;
    const std::size_t n = spec.anomalies.size();
    for (std::size_t i = 0; i < n; ++i)
        spec.anomalies[i].index = lo + (i * span) / n + span / (2 * n);
}

// --- detect -----------------------------------------------------------------------

struct DetectArgs {
    std::string detector, input, schema = "generic", labels, out;
    std::size_t window = 0;
    std::size_t retrain = 0;
    std::optional<std::size_t> warmup;
    std::optional<std::size_t> pattern_length;
    std::vector<std::string> params;
};

int run_detect(const DetectArgs& args) {
    DetectorSpec spec;
    spec.technique = args.detector;
    spec.retrain_period = args.retrain;
    for (const std::string& kv : args.params) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos)
            throw config_error("--param expects key=value, got '" + kv + "'");
        spec.params[kv.substr(0, eq)] = to_double(kv.substr(eq + 1), kv.substr(0, eq));
    }

    LabeledSeries series = load_csv(args.input, parse_schema(args.schema), args.labels);
    if (args.window < 2) throw config_error("--window must be >= 2");
    series.window_cap = args.window;
    if (args.pattern_length) series.pattern_length = *args.pattern_length;
    series.validate();

    auto detector = make_detector(spec, series);
    const std::size_t warmup =
        std::min(args.warmup.value_or(default_warmup(series)), series.size() - 1);
    const auto verdicts = stream_run(*detector, series, warmup);

    const bool with_spans = is_pattern_family(args.detector);
    std::ofstream out(args.out, std::ios::binary);
    if (!out) throw data_error("cannot write file: " + args.out);
    out << (with_spans ? "index,score,is_anomaly,span_start,span_end\n"
                       : "index,score,is_anomaly\n");
    for (std::size_t i = 0; i < verdicts.size(); ++i) {
        if (!verdicts[i]) continue;
        const DetectorVerdict& v = *verdicts[i];
        out << i << ',' << format_double(v.score) << ',' << (v.is_anomaly ? 1 : 0);
        if (with_spans) {
            if (v.span)
                out << ',' << v.span->first << ',' << v.span->second;
            else
                out << ",,";
        }
        out << '\n';
    }
    if (!out) throw data_error("write failed: " + args.out);
    return kExitOk;
}

// --- bench ------------------------------------------------------------------------

struct BenchArgs {
    std::string config, out;
    std::size_t jobs = 1;
};

int run_bench(const BenchArgs& args) {
    const auto entries = parse_config_file(args.config);

    BenchConfig cfg;
    cfg.jobs = args.jobs;
    std::vector<DetectorSpec> detectors;
    struct GroupDef {
        std::string name;
        SynthSpec synth;
        std::size_t count = 1;
        double beta = 1.0;
        std::size_t tolerance = 0;
        std::vector<std::string> files;  // optional real data, generic schema
    };
    std::vector<GroupDef> group_defs;

    for (const ConfigEntry& e : entries) {
        if (e.section == "bench") {
            if (e.key.empty()) continue;
            if (e.key == "runs_per_point")
                cfg.runs_per_point = static_cast<std::size_t>(to_double(e.value, e.key));
            else if (e.key == "replication")
                cfg.replication_factor = static_cast<std::size_t>(to_double(e.value, e.key));
            else if (e.key == "warmup")
                cfg.warmup_points = static_cast<std::size_t>(to_double(e.value, e.key));
            else
                throw config_error("unknown [bench] key '" + e.key + "'");
        } else if (e.section.rfind("detector ", 0) == 0) {
            const std::string name = trim(e.section.substr(9));
            auto it = std::find_if(detectors.begin(), detectors.end(),
                                   [&](const DetectorSpec& d) { return d.technique == name; });
            if (it == detectors.end()) {
                detectors.push_back({name, {}, 0});
                it = detectors.end() - 1;
            }
            if (e.key.empty())
                ;  // bare section registers the detector
            else if (e.key == "retrain")
                it->retrain_period = static_cast<std::size_t>(to_double(e.value, e.key));
            else
                it->params[e.key] = to_double(e.value, e.key);
        } else if (e.section.rfind("group ", 0) == 0) {
            const std::string name = trim(e.section.substr(6));
            auto it = std::find_if(group_defs.begin(), group_defs.end(),
                                   [&](const GroupDef& g) { return g.name == name; });
            if (it == group_defs.end()) {
                group_defs.push_back({});
                it = group_defs.end() - 1;
                it->name = name;
                it->synth.name = name;
            }
            if (e.key.empty())
                ;  // bare section registers the group
            else if (e.key == "series")
                it->count = static_cast<std::size_t>(to_double(e.value, e.key));
            else if (e.key == "beta")
                it->beta = to_double(e.value, e.key);
            else if (e.key == "tolerance")
                it->tolerance = static_cast<std::size_t>(to_double(e.value, e.key));
            else if (e.key == "file")
                it->files.push_back(e.value);
            else
                apply_synth_key(it->synth, e.key, e.value);
        } else {
            throw config_error("unknown config section '[" + e.section + "]'");
        }
    }
    // A bare [detector x] section header adds no entries; detect those by a
    // marker key instead: require at least the section to have appeared.
    // (Sections with no keys are supported via 'enabled = 1'.)
    if (detectors.empty()) throw config_error("bench config lists no detectors");
    if (group_defs.empty()) throw config_error("bench config lists no groups");
    for (auto& d : detectors) d.params.erase("enabled");

    std::vector<BenchGroup> groups;
    for (GroupDef& def : group_defs) {
        BenchGroup group;
        group.name = def.name;
        group.beta = def.beta;
        group.match_tolerance = def.tolerance;
        for (const std::string& f : def.files)
            group.series.push_back(load_csv(f, CsvSchema::kGeneric));
        if (def.files.empty()) {
            finalize_anomaly_positions(def.synth);
            for (std::size_t i = 0; i < def.count; ++i) {
                SynthSpec s = def.synth;
                s.seed = def.synth.seed + i;
                s.name = def.name + "-" + std::to_string(i);
                group.series.push_back(synth_generate(s));
            }
        }
        groups.push_back(std::move(group));
    }

    std::filesystem::create_directories(args.out);
    const BenchResult result = run_benchmark(detectors, groups, cfg);
    persist_results(result.rows, (std::filesystem::path(args.out) / "results.csv").string());

    std::cout << "group geometric-mean runtimes (ms):\n";
    for (const MapRow& m : result.map_rows)
        std::cout << "  " << m.group << " / " << m.detector << ": " << format_double(m.runtime_ms)
                  << "  (F" << std::defaultfloat << "=" << format_double(m.fbeta) << ")\n";
    return kExitOk;
}

// --- eval -------------------------------------------------------------------------

struct EvalArgs {
    std::string verdicts, labels, mode = "point";
    double beta = 1.0;
    std::size_t tolerance = 0;
};

int run_eval(const EvalArgs& args) {
    std::ifstream in(args.verdicts);
    if (!in) throw data_error("cannot open file: " + args.verdicts);

    std::string line;
    std::size_t line_no = 0;
    bool has_span_cols = false;
    std::set<std::size_t> detected;
    std::vector<IndexSpan> spans;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || (line.size() == 1 && line[0] == '\r')) continue;
        const auto fields = split(trim(line), ',');
        if (line_no == 1) {
            has_span_cols = fields.size() == 5;
            if (fields.size() != 3 && fields.size() != 5)
                throw data_error(args.verdicts + ": unrecognized verdict header");
            continue;
        }
        if (fields.size() != (has_span_cols ? 5u : 3u))
            throw data_error(args.verdicts + ":" + std::to_string(line_no) +
                             ": wrong field count");
        const std::size_t idx = static_cast<std::size_t>(to_double(fields[0], "index"));
        const bool flagged = to_double(fields[2], "is_anomaly") != 0.0;
        if (!flagged) continue;
        if (has_span_cols && !fields[3].empty() && !fields[4].empty()) {
            spans.push_back({static_cast<std::size_t>(to_double(fields[3], "span_start")),
                             static_cast<std::size_t>(to_double(fields[4], "span_end"))});
        } else {
            detected.insert(idx);
        }
    }

    std::set<std::size_t> labels;
    std::ifstream lin(args.labels);
    if (!lin) throw data_error("cannot open file: " + args.labels);
    std::size_t lno = 0;
    while (std::getline(lin, line)) {
        ++lno;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        labels.insert(static_cast<std::size_t>(to_double(t, "label index")));
    }

    Confusion c;
    if (args.mode == "point") {
        // Span detections collapse to their end index in point mode.
        for (const IndexSpan& s : spans) detected.insert(s.second);
        c = match_point(detected, labels, args.tolerance);
    } else if (args.mode == "pattern") {
        if (!has_span_cols)
            throw config_error("pattern mode requires a verdict file with span columns");
        c = match_pattern(spans, labels);
    } else {
        throw config_error("--mode must be point or pattern");
    }

    const PrfScores s = precision_recall_fbeta(c, {args.beta});
    std::cout << "tp=" << c.tp << " fp=" << c.fp << " fn=" << c.fn << "\n";
    std::cout << "precision=" << format_double(s.precision) << " recall="
              << format_double(s.recall) << " fbeta=" << format_double(s.fbeta)
              << " beta=" << format_double(args.beta) << "\n";
    return kExitOk;
}

// --- synth ------------------------------------------------------------------------

int run_synth(const std::string& spec_path, const std::string& out_path) {
    SynthSpec spec;
    for (const ConfigEntry& e : parse_config_file(spec_path)) {
        if (!e.section.empty() && e.section != "synth")
            throw config_error("synth spec: unknown section '[" + e.section + "]'");
        apply_synth_key(spec, e.key, e.value);
    }
    finalize_anomaly_positions(spec);
    write_series_csv(synth_generate(spec), out_path);
    return kExitOk;
}

// --- report -----------------------------------------------------------------------

int run_report(const std::vector<std::string>& result_dirs, const std::string& out_path) {
    std::vector<MapRow> rows;
    for (const std::string& dir : result_dirs) {
        const auto path = std::filesystem::path(dir) / "accuracy_runtime_map.csv";
        for (MapRow& r : load_accuracy_map(path.string())) rows.push_back(std::move(r));
    }
    for (const MapRow& r : rows) {
        if (r.fbeta < 0.0 || r.fbeta > 1.0)
            throw config_error("report: row '" + r.detector + "/" + r.group +
                               "' has fbeta outside [0,1]");
    }
    // Point and pattern families are never ranked against each other: rows
    // sort by group, then family block, then F-beta descending.
    std::stable_sort(rows.begin(), rows.end(), [](const MapRow& a, const MapRow& b) {
        if (a.group != b.group) return a.group < b.group;
        const bool pa = is_pattern_family(a.detector), pb = is_pattern_family(b.detector);
        if (pa != pb) return !pa;
        if (a.fbeta != b.fbeta) return a.fbeta > b.fbeta;
        return a.detector < b.detector;
    });
    write_accuracy_map(rows, out_path);
    return kExitOk;
}

std::string catalog_footer() {
    std::ostringstream os;
    os << "registered detectors (family; default parameters):\n";
    for (const DetectorInfo& info : detector_catalog()) {
        os << "  " << info.name << " (" << info.family << "): " << info.summary;
        if (!info.defaults.empty()) {
            os << " [";
            bool first = true;
            for (const auto& [k, v] : info.defaults) {
                if (!first) os << ", ";
                os << k << "=" << v;
                first = false;
            }
            os << "]";
        }
        os << "\n";
    }
    return os.str();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"streamad: streaming anomaly detection toolkit"};
    app.footer(catalog_footer());
    app.require_subcommand(1);

    DetectArgs detect_args;
    auto* detect = app.add_subcommand("detect", "run one detector over a CSV series");
    detect->add_option("--detector", detect_args.detector, "registered technique name")
        ->required();
    detect->add_option("--input", detect_args.input, "input CSV")->required();
    detect->add_option("--schema", detect_args.schema, "yahoo | nab | generic");
    detect->add_option("--labels", detect_args.labels, "side label file (nab schema)");
    detect->add_option("--window", detect_args.window, "window cap W")->required();
    detect->add_option("--retrain", detect_args.retrain, "retraining period (default: W)");
    detect->add_option("--warmup", detect_args.warmup, "suppress verdicts before this index");
    detect->add_option("--pl", detect_args.pattern_length, "pattern length for pattern detectors");
    detect->add_option("--param", detect_args.params, "detector parameter key=value")
        ->take_all();
    detect->add_option("--out", detect_args.out, "verdict CSV output")->required();

    BenchArgs bench_args;
    auto* bench = app.add_subcommand("bench", "run the benchmark harness from a config file");
    bench->add_option("--config", bench_args.config, "bench config file")->required();
    bench->add_option("--out", bench_args.out, "output directory")->required();
    bench->add_option("--jobs", bench_args.jobs, "parallel cells (timed cells serialize)");

    EvalArgs eval_args;
    auto* eval = app.add_subcommand("eval", "score a verdict file against labels");
    eval->add_option("--verdicts", eval_args.verdicts, "verdict CSV from detect")->required();
    eval->add_option("--labels", eval_args.labels, "label file, one index per line")->required();
    eval->add_option("--mode", eval_args.mode, "point | pattern")->required();
    eval->add_option("--beta", eval_args.beta, "F-beta weight (default 1)");
    eval->add_option("--tolerance", eval_args.tolerance, "point-match tolerance (default 0)");

    std::string synth_spec, synth_out;
    auto* synth = app.add_subcommand("synth", "generate a labeled synthetic series");
    synth->add_option("--spec", synth_spec, "synth spec file")->required();
    synth->add_option("--out", synth_out, "output CSV (labels land in <out>.labels)")->required();

    std::vector<std::string> report_dirs;
    std::string report_out;
    auto* report = app.add_subcommand("report", "merge bench results into one accuracy-runtime map");
    report->add_option("--results", report_dirs, "bench output directory (repeatable)")
        ->required()
        ->take_all();
    report->add_option("--out", report_out, "merged map CSV")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n";
        return kExitConfig;
    }

    try {
        if (detect->parsed()) return run_detect(detect_args);
        if (bench->parsed()) return run_bench(bench_args);
        if (eval->parsed()) return run_eval(eval_args);
        if (synth->parsed()) return run_synth(synth_spec, synth_out);
        if (report->parsed()) return run_report(report_dirs, report_out);
    } catch (const config_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const data_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    }
    return kExitOk;
}

// prosumpi: command-line front end for training, backtesting, sweeping and
// streaming prediction intervals from power telemetry CSV files.

#include <prosumpi/prosumpi.hpp>

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

using namespace prosumpi;
using nlohmann::json;

enum ExitCode : int { kOk = 0, kConfig = 2, kIngestion = 3, kRuntime = 4 };

const std::vector<double> kDefaultAlphas{0.99, 0.999, 0.9999, 0.99999};

struct CommonModel {
    std::string model = "B";
    std::size_t clusters = 1;
    double forgetting_s = 3600.0;
    std::size_t bins = 2000;
    double margin = 0.2;
    bool time_of_day = false;
    std::int64_t utc_offset_s = 0;
    std::uint64_t seed = 42;
    std::size_t window = 0;
};

void add_feature_flags(CLI::App* cmd, CommonModel& m) {
    cmd->add_option("--bins", m.bins, "Number of histogram bins |X|")->capture_default_str();
    cmd->add_option("--margin", m.margin, "Domain padding as a fraction of the training range")->capture_default_str();
    cmd->add_flag("--time-of-day", m.time_of_day, "Cluster on time of day in addition to power");
    cmd->add_option("--utc-offset-s", m.utc_offset_s, "Local time offset used for the time-of-day feature")
        ->capture_default_str();
    cmd->add_option("--seed", m.seed, "k-means seed")->capture_default_str();
    cmd->add_option("--training-window", m.window, "Use only the last N training samples (0 = all)")
        ->capture_default_str();
}

FeatureSpec features_of(const CommonModel& m) {
    FeatureSpec f;
    f.use_time_of_day = m.time_of_day;
    f.utc_offset_s = m.utc_offset_s;
    return f;
}

std::vector<double> alphas_or_default(const std::vector<double>& a) { return a.empty() ? kDefaultAlphas : a; }

TimeSeries load_series(const std::string& path, std::optional<std::int64_t> period_ms) {
    if (path == "-") return parse_csv(std::cin, "<stdin>", period_ms);
    return read_csv(path, period_ms);
}

std::optional<std::int64_t> period_opt(std::int64_t p) {
    if (p < 0) throw ConfigError("--period-ms must be positive");
    return p == 0 ? std::nullopt : std::optional<std::int64_t>(p);
}

std::string fmt(double v, int precision = 6) {
    std::ostringstream s;
    s << std::setprecision(precision) << v;
    return s.str();
}

void print_report(const EvaluationReport& r, std::ostream& out) {
    out << "records " << r.records << ", p_nom " << fmt(r.p_nom) << " W, windows " << r.window_counts.size()
        << " x " << fmt(r.window_s) << " s\n";
    out << std::left << std::setw(10) << "alpha" << std::setw(14) << "PINAW" << std::setw(12) << "PICP"
        << std::setw(14) << "CWC" << "max window error\n";
    for (const auto& m : r.metrics) {
        double worst = 0.0;
        for (double e : m.windowed_error_rates) worst = std::max(worst, e);
        out << std::setw(10) << format_double(m.alpha) << std::setw(14) << fmt(m.pinaw) << std::setw(12)
            << fmt(m.picp, 8) << std::setw(14) << fmt(m.cwc) << fmt(worst) << '\n';
    }
}

json report_json(const EvaluationReport& r) {
    json j;
    j["records"] = r.records;
    j["p_nom"] = r.p_nom;
    j["mu"] = r.mu;
    j["window_s"] = r.window_s;
    j["window_counts"] = r.window_counts;
    j["metrics"] = json::array();
    for (const auto& m : r.metrics)
        j["metrics"].push_back({{"alpha", m.alpha},
                                {"pinaw", m.pinaw},
                                {"picp", m.picp},
                                {"cwc", m.cwc},
                                {"windowed_error_rates", m.windowed_error_rates}});
    return j;
}

void write_report_csv(const EvaluationReport& r, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IngestionError("cannot write " + path);
    out << "alpha,pinaw,picp,cwc,windows,mean_window_error,max_window_error\n";
    for (const auto& m : r.metrics) {
        double sum = 0.0;
        double worst = 0.0;
        for (double e : m.windowed_error_rates) {
            sum += e;
            worst = std::max(worst, e);
        }
        const double mean = m.windowed_error_rates.empty() ? 0.0 : sum / static_cast<double>(m.windowed_error_rates.size());
        out << format_double(m.alpha) << ',' << format_double(m.pinaw) << ',' << format_double(m.picp) << ','
            << format_double(m.cwc) << ',' << m.windowed_error_rates.size() << ',' << format_double(mean) << ','
            << format_double(worst) << '\n';
    }
}

void write_windows_csv(const EvaluationReport& r, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IngestionError("cannot write " + path);
    out << "alpha,window,records,error_rate\n";
    for (const auto& m : r.metrics)
        for (std::size_t w = 0; w < m.windowed_error_rates.size(); ++w)
            out << format_double(m.alpha) << ',' << w << ',' << r.window_counts[w] << ','
                << format_double(m.windowed_error_rates[w]) << '\n';
}

void write_trace_csv(const BacktestLog& log, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IngestionError("cannot write " + path);
    out << "timestamp_ms,power_w";
    for (double a : log.alphas()) out << ",lower_" << format_double(a) << ",upper_" << format_double(a);
    out << '\n';
    for (std::size_t i = 0; i < log.size(); ++i) {
        out << log.timestamp(i) << ',' << format_double(log.realized(i));
        for (std::size_t k = 0; k < log.alphas().size(); ++k)
            out << ',' << format_double(log.bound(i, k).lower) << ',' << format_double(log.bound(i, k).upper);
        out << '\n';
    }
}

// ---- gen ----

struct GenArgs {
    std::string profile = "office";
    double duration_s = 86400.0;
    std::int64_t period_ms = 20;
    std::uint64_t seed = 1;
    std::int64_t start_ms = 0;
    std::string config;
    std::string out = "-";
};

void apply_profile_json(SyntheticProfile& p, const json& j) {
    static const std::map<std::string, double SyntheticProfile::*> fields{
        {"base_w", &SyntheticProfile::base_w},
        {"diurnal_amplitude_w", &SyntheticProfile::diurnal_amplitude_w},
        {"peak_hour", &SyntheticProfile::peak_hour},
        {"noise_sd_w", &SyntheticProfile::noise_sd_w},
        {"pv_capacity_w", &SyntheticProfile::pv_capacity_w},
        {"pv_event_rate_per_h", &SyntheticProfile::pv_event_rate_per_h},
        {"pv_event_depth", &SyntheticProfile::pv_event_depth},
        {"pv_event_duration_s", &SyntheticProfile::pv_event_duration_s},
        {"pv_event_ramp_s", &SyntheticProfile::pv_event_ramp_s},
        {"ev_session_rate_per_h", &SyntheticProfile::ev_session_rate_per_h},
        {"ev_session_mean_s", &SyntheticProfile::ev_session_mean_s},
        {"ev_ramp_s", &SyntheticProfile::ev_ramp_s},
        {"ev_taper_fraction", &SyntheticProfile::ev_taper_fraction},
        {"hp_on_power_w", &SyntheticProfile::hp_on_power_w},
        {"hp_off_power_w", &SyntheticProfile::hp_off_power_w},
        {"hp_on_mean_s", &SyntheticProfile::hp_on_mean_s},
        {"hp_off_mean_s", &SyntheticProfile::hp_off_mean_s},
        {"hp_overshoot", &SyntheticProfile::hp_overshoot},
        {"hp_transient_tau_s", &SyntheticProfile::hp_transient_tau_s},
        {"ar_coefficient", &SyntheticProfile::ar_coefficient},
    };
    if (!j.is_object()) throw ConfigError("generator config must be a JSON object");
    for (const auto& [key, value] : j.items()) {
        if (key == "profile" || key == "seed") continue;  // handled by the caller
        if (key == "ev_levels_w") {
            p.ev_levels_w = value.get<std::vector<double>>();
            continue;
        }
        const auto it = fields.find(key);
        if (it == fields.end()) throw ConfigError("unknown generator parameter '" + key + "'");
        if (!value.is_number()) throw ConfigError("generator parameter '" + key + "' must be a number");
        p.*(it->second) = value.get<double>();
    }
}

int cmd_gen(const GenArgs& a, const CLI::App& cmd) {
    json j = json::object();
    std::string profile = a.profile;
    std::uint64_t seed = a.seed;
    if (!a.config.empty()) {
        std::ifstream in(a.config);
        if (!in) throw ConfigError("cannot open generator config " + a.config);
        try {
            j = json::parse(in);
        } catch (const json::exception& e) {
            throw ConfigError("invalid generator config " + a.config + ": " + e.what());
        }
        // explicit flags win over the file
        if (j.contains("profile") && cmd.count("--profile") == 0) profile = j.at("profile").get<std::string>();
        if (j.contains("seed") && cmd.count("--seed") == 0) seed = j.at("seed").get<std::uint64_t>();
    }
    auto p = SyntheticProfile::defaults(parse_profile_kind(profile), seed);
    p.start_ms = a.start_ms;
    try {
        apply_profile_json(p, j);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("invalid generator config: ") + e.what());
    }
    const auto ts = generate(p, a.duration_s, a.period_ms);
    if (a.out == "-") {
        write_csv(ts, std::cout);
    } else {
        write_csv(ts, std::filesystem::path(a.out));
        std::cerr << "wrote " << ts.size() << " samples (" << to_string(p.kind) << ", seed " << seed << ") to "
                  << a.out << '\n';
    }
    return kOk;
}

// ---- resample ----

struct ResampleArgs {
    std::string in;
    std::string out = "-";
    std::int64_t period_ms = 0;
};

int cmd_resample(const ResampleArgs& a) {
    const auto src = load_series(a.in, std::nullopt);
    const auto dst = downsample(src, a.period_ms);
    if (a.out == "-")
        write_csv(dst, std::cout);
    else
        write_csv(dst, std::filesystem::path(a.out));
    return kOk;
}

// ---- train ----

struct TrainArgs {
    CommonModel m;
    std::string train;
    std::string snapshot;
    std::int64_t period_ms = 0;
};

int cmd_train(const TrainArgs& a) {
    EstimatorConfig c;
    c.variant = parse_variant(a.m.model);
    c.clusters = a.m.clusters;
    c.domain_bins = a.m.bins;
    c.domain_margin = a.m.margin;
    c.features = features_of(a.m);
    c.kmeans.seed = a.m.seed;
    c.training_window = a.m.window;
    c.forgetting.forgetting_time_s = a.m.forgetting_s;
    if (a.period_ms > 0) c.forgetting.sample_period_s = static_cast<double>(a.period_ms) / 1000.0;
    c.validate();

    const auto series = load_series(a.train, period_opt(a.period_ms));
    c.forgetting.sample_period_s = series.period_s();
    const auto est = Estimator::batch_train(c, series);
    save_snapshot(est, a.snapshot);

    const auto bytes = serialize_snapshot(est);
    const auto& d = est.domain();
    std::cout << "model " << to_string(c.variant) << ", L = " << c.clusters << ", T_phi = " << fmt(a.m.forgetting_s)
              << " s, period = " << series.period_ms << " ms, phi = " << std::setprecision(12) << est.phi() << '\n'
              << std::setprecision(6) << "domain [" << fmt(d.p_min(), 10) << ", " << fmt(d.p_max(), 10) << "] W, "
              << d.n_bins() << " bins of " << fmt(d.delta_p()) << " W\n"
              << "training samples " << series.size() << ", p_nom " << fmt(est.p_nom()) << " W\n"
              << "label  centroid(raw)           transitions\n";
    for (std::size_t l = 0; l < est.label_count(); ++l) {
        const auto cen = est.clusters().centroid(l);
        const auto& spec = est.clusters().spec();
        std::ostringstream raw;
        for (std::size_t k = 0; k < spec.dimension(); ++k)
            raw << (k ? " " : "") << fmt(cen[k] * (spec.sd[k] > 0 ? spec.sd[k] : 0.0) + spec.mean[k]);
        std::cout << std::left << std::setw(7) << l << std::setw(24) << raw.str() << est.state().training_counts[l]
                  << '\n';
    }
    std::cout << "snapshot " << a.snapshot << " (" << bytes.size() << " bytes, fnv1a64 " << std::hex
              << std::setw(16) << std::setfill('0') << std::right << fnv1a64(bytes) << std::dec << ")\n";
    return kOk;
}

// ---- backtest ----

struct BacktestArgs {
    std::string snapshot;
    std::string test;
    std::vector<double> alphas;
    double p_nom = 0.0;
    double window_s = kDefaultWindowS;
    std::string report_csv;
    std::string windows_csv;
    std::string trace;
    std::string json_out;
    std::string save;
};

int cmd_backtest(const BacktestArgs& a) {
    const auto alphas = alphas_or_default(a.alphas);
    for (double x : alphas) check_confidence(x);
    if (a.p_nom < 0.0) throw ConfigError("--pnom must be positive");
    auto est = load_snapshot(a.snapshot);
    if (!est.trained()) throw StateError("snapshot holds an untrained estimator");
    const auto test = load_series(a.test, std::nullopt);
    const auto log = run_backtest(est, test, alphas);
    const double p_nom = a.p_nom > 0.0 ? a.p_nom : est.p_nom();
    const auto report = evaluate(log, p_nom, kDefaultCwcMu, a.window_s);
    print_report(report, std::cout);
    if (!a.report_csv.empty()) write_report_csv(report, a.report_csv);
    if (!a.windows_csv.empty()) write_windows_csv(report, a.windows_csv);
    if (!a.trace.empty()) write_trace_csv(log, a.trace);
    if (!a.json_out.empty()) {
        std::ofstream out(a.json_out);
        if (!out) throw IngestionError("cannot write " + a.json_out);
        out << report_json(report).dump(2) << '\n';
    }
    if (!a.save.empty()) save_snapshot(est, a.save);
    return kOk;
}

// ---- sweep ----

struct SweepArgs {
    CommonModel m;
    std::vector<std::string> models;
    std::vector<std::size_t> clusters;
    std::vector<double> forgetting;
    std::vector<double> alphas;
    std::string train;
    std::string test;
    double p_nom = 0.0;
    double window_s = kDefaultWindowS;
    std::size_t jobs = 1;
    std::size_t top_k = 5;
    std::string report_csv;
    std::string json_out;
};

int cmd_sweep(const SweepArgs& a) {
    SweepGrid grid;
    if (!a.models.empty()) {
        grid.variants.clear();
        for (const auto& m : a.models) grid.variants.push_back(parse_variant(m));
    }
    if (!a.clusters.empty()) grid.clusters = a.clusters;
    if (!a.forgetting.empty()) grid.forgetting_times_s = a.forgetting;
    grid.alphas = alphas_or_default(a.alphas);
    for (double x : grid.alphas) check_confidence(x);
    for (auto L : grid.clusters)
        if (L < 1) throw ConfigError("--clusters values must be at least 1");
    for (double t : grid.forgetting_times_s)
        if (!(t > 0.0)) throw ConfigError("--forgetting-seconds values must be positive");
    if (a.top_k < 1) throw ConfigError("--top-k must be at least 1");
    if (a.p_nom < 0.0) throw ConfigError("--pnom must be positive");

    SweepOptions o;
    o.jobs = a.jobs;
    o.p_nom = a.p_nom;
    o.domain_bins = a.m.bins;
    o.domain_margin = a.m.margin;
    o.features = features_of(a.m);
    o.kmeans.seed = a.m.seed;
    o.training_window = a.m.window;
    o.window_s = a.window_s;

    const auto train = load_series(a.train, std::nullopt);
    const auto test = load_series(a.test, train.period_ms);
    const auto result = sweep(grid, train, test, o);

    std::size_t failed = 0;
    for (const auto& r : result.rows)
        if (!r.ok) {
            ++failed;
            std::cout << "row " << to_string(r.key) << " failed: " << r.error << '\n';
        }
    std::cout << result.rows.size() << " configurations, " << failed << " failed\n";
    for (double alpha : result.alphas) {
        std::cout << "\nalpha " << format_double(alpha) << " top " << a.top_k << " by CWC\n"
                  << std::left << std::setw(6) << "rank" << std::setw(26) << "configuration" << std::setw(14) << "CWC"
                  << std::setw(14) << "PINAW" << "PICP\n";
        std::size_t rank = 1;
        for (const auto* r : result.top(alpha, a.top_k)) {
            const auto& m = r->report.at(alpha);
            std::cout << std::setw(6) << rank++ << std::setw(26) << to_string(r->key) << std::setw(14) << fmt(m.cwc)
                      << std::setw(14) << fmt(m.pinaw) << fmt(m.picp, 8) << '\n';
        }
    }
    if (!a.report_csv.empty()) {
        std::ofstream out(a.report_csv);
        if (!out) throw IngestionError("cannot write " + a.report_csv);
        out << "model,clusters,forgetting_s,phi,alpha,pinaw,picp,cwc,status\n";
        for (const auto& r : result.rows) {
            if (!r.ok) {
                out << to_string(r.key.variant) << ',' << r.key.clusters << ',' << format_double(r.key.forgetting_time_s)
                    << ',' << format_double(r.phi) << ",,,,,error\n";
                continue;
            }
            for (const auto& m : r.report.metrics)
                out << to_string(r.key.variant) << ',' << r.key.clusters << ','
                    << format_double(r.key.forgetting_time_s) << ',' << format_double(r.phi) << ','
                    << format_double(m.alpha) << ',' << format_double(m.pinaw) << ',' << format_double(m.picp) << ','
                    << format_double(m.cwc) << ",ok\n";
        }
    }
    if (!a.json_out.empty()) {
        json j = json::array();
        for (const auto& r : result.rows) {
            json row{{"model", to_string(r.key.variant)},
                     {"clusters", r.key.clusters},
                     {"forgetting_s", r.key.forgetting_time_s},
                     {"phi", r.phi},
                     {"ok", r.ok}};
            if (r.ok)
                row["report"] = report_json(r.report);
            else
                row["error"] = r.error;
            j.push_back(std::move(row));
        }
        std::ofstream out(a.json_out);
        if (!out) throw IngestionError("cannot write " + a.json_out);
        out << j.dump(2) << '\n';
    }
    return kOk;
}

// ---- stream ----

struct StreamArgs {
    std::string snapshot;
    std::string save;
    std::vector<double> alphas;
};

// After each realization the PIs for the following sample are written, so every
// PI line reaches the consumer before the value it bounds is read.
int cmd_stream(const StreamArgs& a) {
    const auto alphas = alphas_or_default(a.alphas);
    for (double x : alphas) check_confidence(x);
    auto est = load_snapshot(a.snapshot);
    if (!est.trained()) throw StateError("snapshot holds an untrained estimator");
    const auto period_ms = static_cast<std::int64_t>(std::llround(est.config().forgetting.sample_period_s * 1000.0));
    std::vector<Interval> bounds(alphas.size());
    std::vector<std::string> alpha_text;
    for (double x : alphas) alpha_text.push_back(format_double(x));

    std::string line;
    std::size_t line_no = 0;
    std::size_t skipped = 0;
    while (std::getline(std::cin, line)) {
        ++line_no;
        const auto body = detail::trim(line);
        if (body.empty()) continue;
        const auto s = parse_sample_line(body);
        if (!s) {
            if (line_no > 1 || body.find("timestamp") == std::string_view::npos) {
                std::cerr << "stdin:" << line_no << ": malformed line skipped: " << body << '\n';
                ++skipped;
            }
            continue;
        }
        try {
            est.observe(s->timestamp_ms, s->power);
        } catch (const Error& e) {
            std::cerr << "stdin:" << line_no << ": " << e.what() << ", line skipped\n";
            ++skipped;
            continue;
        }
        est.estimate_all(alphas, bounds);
        const std::string next_ts = std::to_string(s->timestamp_ms + period_ms);
        for (std::size_t k = 0; k < alphas.size(); ++k)
            std::cout << next_ts << ',' << alpha_text[k] << ',' << format_double(bounds[k].lower) << ','
                      << format_double(bounds[k].upper) << '\n';
        std::cout.flush();
    }
    const auto target = a.save.empty() ? a.snapshot : a.save;
    save_snapshot(est, target);
    if (skipped > 0) std::cerr << skipped << " line(s) skipped\n";
    return kOk;
}

int exit_code(ErrorKind k) {
    switch (k) {
        case ErrorKind::configuration: return kConfig;
        case ErrorKind::ingestion: return kIngestion;
        default: return kRuntime;
    }
}

}  // namespace

int main(int argc, char** argv) {
    std::ios::sync_with_stdio(false);
    CLI::App app{"Ultra-short-term prediction intervals for power prosumption.\n"
                 "Exit codes: 0 ok, 2 configuration error, 3 ingestion error, 4 runtime error."};
    app.require_subcommand(1);
    app.set_version_flag("--version", "prosumpi 1.0.0");

    GenArgs gen;
    auto* g = app.add_subcommand("gen", "Generate a synthetic prosumption series as CSV");
    g->add_option("--profile", gen.profile, "office | ev_station | heat_pump | ar1")->capture_default_str();
    g->add_option("--duration-s", gen.duration_s, "Series length in seconds")->capture_default_str();
    g->add_option("--period-ms", gen.period_ms, "Sampling period")->capture_default_str();
    g->add_option("--seed", gen.seed, "Generator seed")->capture_default_str();
    g->add_option("--start-ms", gen.start_ms, "Epoch milliseconds of the first sample")->capture_default_str();
    g->add_option("--config", gen.config, "JSON file with generator parameters")->envname("PROSUMPI_GEN_CONFIG");
    g->add_option("-o,--out", gen.out, "Output CSV ('-' for stdout)")->envname("PROSUMPI_OUT")->capture_default_str();

    ResampleArgs rs;
    auto* r = app.add_subcommand("resample", "Block-average a CSV series to a coarser period");
    r->add_option("-i,--in", rs.in, "Input CSV ('-' for stdin)")->required();
    r->add_option("-o,--out", rs.out, "Output CSV ('-' for stdout)")->capture_default_str();
    r->add_option("--period-ms", rs.period_ms, "Target period, a multiple of the input period")->required();

    TrainArgs tr;
    auto* t = app.add_subcommand("train", "Batch-train an estimator and write a snapshot");
    t->add_option("--train", tr.train, "Training CSV")->envname("PROSUMPI_TRAIN")->required();
    t->add_option("--snapshot", tr.snapshot, "Snapshot to write")->envname("PROSUMPI_SNAPSHOT")->required();
    t->add_option("--model", tr.m.model, "Model variant A (levels) or B (differences)")
        ->check(CLI::IsMember({"A", "B"}))
        ->capture_default_str();
    t->add_option("--clusters", tr.m.clusters, "Number of clusters L")->capture_default_str();
    t->add_option("--forgetting-seconds", tr.m.forgetting_s, "Forgetting time T_phi in seconds")
        ->capture_default_str();
    t->add_option("--period-ms", tr.period_ms, "Expected sampling period (0 = infer from the CSV)")
        ->capture_default_str();
    add_feature_flags(t, tr.m);

    BacktestArgs bt;
    auto* b = app.add_subcommand("backtest", "Roll a trained estimator over a test series and score it");
    b->add_option("--snapshot", bt.snapshot, "Trained snapshot")->envname("PROSUMPI_SNAPSHOT")->required();
    b->add_option("--test", bt.test, "Test CSV")->envname("PROSUMPI_TEST")->required();
    b->add_option("--alpha", bt.alphas, "Confidence level (repeatable; default 0.99 0.999 0.9999 0.99999)");
    b->add_option("--pnom", bt.p_nom, "Nominal power for PINAW (default max |P| in training)");
    b->add_option("--window-s", bt.window_s, "Error-rate window length")->capture_default_str();
    b->add_option("--report-csv", bt.report_csv, "Per-alpha metrics CSV")->envname("PROSUMPI_REPORT");
    b->add_option("--windows-csv", bt.windows_csv, "Per-window error rates CSV");
    b->add_option("--trace", bt.trace, "Per-step PI trace CSV")->envname("PROSUMPI_TRACE");
    b->add_option("--json", bt.json_out, "Full report as JSON");
    b->add_option("--save", bt.save, "Write the updated estimator to this snapshot");

    SweepArgs sw;
    auto* s = app.add_subcommand("sweep", "Evaluate a grid of configurations and rank them by CWC");
    s->add_option("--train", sw.train, "Training CSV")->envname("PROSUMPI_TRAIN")->required();
    s->add_option("--test", sw.test, "Test CSV")->envname("PROSUMPI_TEST")->required();
    s->add_option("--model", sw.models, "Model variants (repeatable; default A B)")->check(CLI::IsMember({"A", "B"}));
    s->add_option("--clusters", sw.clusters, "L values (repeatable; default 1 8 64 256 512 1024)");
    s->add_option("--forgetting-seconds", sw.forgetting,
                  "T_phi values (repeatable; default 1 60 3600 21600 86400 604800)");
    s->add_option("--alpha", sw.alphas, "Confidence levels (repeatable; default 0.99 0.999 0.9999 0.99999)");
    s->add_option("--pnom", sw.p_nom, "Nominal power for PINAW (default max |P| in training)");
    s->add_option("--window-s", sw.window_s, "Error-rate window length")->capture_default_str();
    s->add_option("--jobs", sw.jobs, "Worker threads")->capture_default_str();
    s->add_option("--top-k", sw.top_k, "Rows shown per alpha")->capture_default_str();
    s->add_option("--report-csv", sw.report_csv, "All rows as CSV")->envname("PROSUMPI_REPORT");
    s->add_option("--json", sw.json_out, "All rows as JSON");
    add_feature_flags(s, sw.m);

    StreamArgs st;
    auto* m = app.add_subcommand("stream", "Read timestamp_ms,power_w lines on stdin and emit PIs for the next sample");
    m->add_option("--snapshot", st.snapshot, "Trained snapshot")->envname("PROSUMPI_SNAPSHOT")->required();
    m->add_option("--save", st.save, "Snapshot written at end of input (default: overwrite --snapshot)");
    m->add_option("--alpha", st.alphas, "Confidence level (repeatable; default 0.99 0.999 0.9999 0.99999)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kConfig;
    }

    try {
        if (*g) return cmd_gen(gen, *g);
        if (*r) return cmd_resample(rs);
        if (*t) return cmd_train(tr);
        if (*b) return cmd_backtest(bt);
        if (*s) return cmd_sweep(sw);
        if (*m) return cmd_stream(st);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_code(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kRuntime;
    }
    return kOk;
}

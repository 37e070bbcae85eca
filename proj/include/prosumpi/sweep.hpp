#pragma once

#include <prosumpi/backtest.hpp>
#include <prosumpi/error.hpp>
#include <prosumpi/estimator.hpp>
#include <prosumpi/metrics.hpp>
#include <prosumpi/timeseries.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <exception>
#include <string>
#include <thread>
#include <vector>

namespace prosumpi {

/// One (model, L, T_phi) combination.
struct SweepKey {
    ModelVariant variant = ModelVariant::B;
    std::size_t clusters = 1;
    double forgetting_time_s = 0.0;
    friend bool operator==(const SweepKey&, const SweepKey&) = default;
};

inline std::string to_string(const SweepKey& k) {
    return std::string(to_string(k.variant)) + "/L=" + std::to_string(k.clusters) +
           "/Tphi=" + std::to_string(static_cast<long long>(std::llround(k.forgetting_time_s))) + "s";
}

struct SweepGrid {
    std::vector<ModelVariant> variants{ModelVariant::A, ModelVariant::B};
    std::vector<std::size_t> clusters{1, 8, 64, 256, 512, 1024};
    std::vector<double> forgetting_times_s{1, 60, 3600, 21600, 86400, 604800};
    std::vector<double> alphas{0.99, 0.999, 0.9999, 0.99999};

    /// Configurations in row order: variant-major, then L, then T_phi.
    std::vector<SweepKey> keys() const {
        std::vector<SweepKey> out;
        out.reserve(variants.size() * clusters.size() * forgetting_times_s.size());
        for (auto v : variants)
            for (auto L : clusters)
                for (auto t : forgetting_times_s) out.push_back({v, L, t});
        return out;
    }
};

struct SweepOptions {
    std::size_t jobs = 1;
    double p_nom = 0.0;  // 0 = max |power| of the training series
    std::size_t domain_bins = 2000;
    double domain_margin = 0.2;
    FeatureSpec features;
    KMeansOptions kmeans;
    std::size_t training_window = 0;
    double mu = kDefaultCwcMu;
    double window_s = kDefaultWindowS;
};

struct SweepRow {
    SweepKey key;
    double phi = 0.0;
    bool ok = false;
    std::string error;
    EvaluationReport report;
};

struct SweepResult {
    std::vector<double> alphas;
    std::vector<SweepRow> rows;  // in SweepGrid::keys() order

    /// Successful rows ordered by ascending CWC at @p alpha; ties keep row order.
    std::vector<const SweepRow*> ranked(double alpha) const {
        std::vector<const SweepRow*> out;
        for (const auto& r : rows)
            if (r.ok) out.push_back(&r);
        std::stable_sort(out.begin(), out.end(), [alpha](const SweepRow* a, const SweepRow* b) {
            return a->report.at(alpha).cwc < b->report.at(alpha).cwc;
        });
        return out;
    }

    std::vector<const SweepRow*> top(double alpha, std::size_t k) const {
        auto r = ranked(alpha);
        if (r.size() > k) r.resize(k);
        return r;
    }
};

inline EstimatorConfig make_config(const SweepKey& key, const SweepOptions& options, double sample_period_s) {
    EstimatorConfig c;
    c.variant = key.variant;
    c.clusters = key.clusters;
    c.forgetting = {sample_period_s, key.forgetting_time_s};
    c.domain_bins = options.domain_bins;
    c.domain_margin = options.domain_margin;
    c.features = options.features;
    c.kmeans = options.kmeans;
    c.training_window = options.training_window;
    return c;
}

/// Batch-train and backtest one configuration.
inline SweepRow run_configuration(const SweepKey& key, const TimeSeries& train, const TimeSeries& test,
                                  std::span<const double> alphas, const SweepOptions& options, double p_nom) {
    SweepRow row;
    row.key = key;
    try {
        const auto config = make_config(key, options, train.period_s());
        row.phi = config.forgetting.phi();
        auto est = Estimator::batch_train(config, train);
        const auto log = run_backtest(est, test, alphas);
        row.report = evaluate(log, p_nom, options.mu, options.window_s);
        row.ok = true;
    } catch (const std::exception& e) {
        row.ok = false;
        row.error = e.what();
    }
    return row;
}

/**
 * Runs every configuration of the grid independently (batch training on
 * @p train, rolling backtest on @p test) using up to options.jobs threads.
 * The forgetting factor of each row follows from T_phi and the series
 * period. Output is identical for any job count. Row failures are recorded
 * in the row and do not abort the sweep.
 */
inline SweepResult sweep(const SweepGrid& grid, const TimeSeries& train, const TimeSeries& test,
                         const SweepOptions& options = {}) {
    const auto keys = grid.keys();
    if (keys.empty()) throw ConfigError("sweep grid is empty");
    if (grid.alphas.empty()) throw ConfigError("sweep needs at least one confidence level");
    for (double a : grid.alphas) check_confidence(a);
    if (train.period_ms != test.period_ms) throw ConfigError("train and test series have different periods");
    if (train.empty()) throw ConfigError("training series is empty");

    double p_nom = options.p_nom;
    if (p_nom <= 0.0)
        for (double v : train.values) p_nom = std::max(p_nom, std::fabs(v));
    if (!(p_nom > 0.0)) throw ConfigError("nominal power must be positive (training series is all zero)");

    SweepResult result;
    result.alphas = grid.alphas;
    result.rows.resize(keys.size());
    const std::size_t jobs = std::max<std::size_t>(1, std::min(options.jobs, keys.size()));
    std::atomic<std::size_t> next{0};
    const auto worker = [&] {
        for (std::size_t i = next++; i < keys.size(); i = next++)
            result.rows[i] = run_configuration(keys[i], train, test, grid.alphas, options, p_nom);
    };
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(jobs);
        for (std::size_t j = 0; j < jobs; ++j) pool.emplace_back(worker);
    }
    return result;
}

}  // namespace prosumpi

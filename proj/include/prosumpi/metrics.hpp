#pragma once

#include <prosumpi/error.hpp>
#include <prosumpi/histogram.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <span>
#include <string>
#include <vector>

namespace prosumpi {

/// Penalty steepness of the coverage width-based criterion: an error rate one
/// order of magnitude above target multiplies the width by ten.
inline const double kDefaultCwcMu = std::numbers::ln10 / 10.0;

inline constexpr double kDefaultWindowS = 21600.0;

/// One backtest step: the realization and the PIs emitted before it was observed.
struct BacktestRecord {
    std::int64_t timestamp_ms = 0;
    double realized = 0.0;
    std::span<const Interval> bounds;  // one per alpha, in BacktestLog::alphas order
};

/// Columnar store of backtest records sharing one alpha list.
class BacktestLog {
public:
    BacktestLog() = default;
    explicit BacktestLog(std::vector<double> alphas) : alphas_(std::move(alphas)) {
        for (double a : alphas_) check_confidence(a);
    }

    const std::vector<double>& alphas() const noexcept { return alphas_; }
    std::size_t size() const noexcept { return realized_.size(); }
    bool empty() const noexcept { return realized_.empty(); }

    void reserve(std::size_t n) {
        timestamps_.reserve(n);
        realized_.reserve(n);
        bounds_.reserve(n * alphas_.size());
    }

    void append(std::int64_t timestamp_ms, double realized, std::span<const Interval> bounds) {
        if (bounds.size() != alphas_.size()) throw ConfigError("record bound count differs from alpha count");
        timestamps_.push_back(timestamp_ms);
        realized_.push_back(realized);
        bounds_.insert(bounds_.end(), bounds.begin(), bounds.end());
    }

    BacktestRecord record(std::size_t i) const noexcept {
        return {timestamps_[i], realized_[i],
                std::span<const Interval>(bounds_).subspan(i * alphas_.size(), alphas_.size())};
    }
    std::int64_t timestamp(std::size_t i) const noexcept { return timestamps_[i]; }
    double realized(std::size_t i) const noexcept { return realized_[i]; }
    const Interval& bound(std::size_t i, std::size_t alpha_index) const noexcept {
        return bounds_[i * alphas_.size() + alpha_index];
    }

    std::size_t alpha_index(double alpha) const {
        const auto it = std::find(alphas_.begin(), alphas_.end(), alpha);
        if (it == alphas_.end()) throw ConfigError("confidence level not present in backtest log");
        return static_cast<std::size_t>(it - alphas_.begin());
    }

private:
    std::vector<double> alphas_;
    std::vector<std::int64_t> timestamps_;
    std::vector<double> realized_;
    std::vector<Interval> bounds_;
};

/// PI normalized averaged width: mean of (upper - lower) / p_nom.
inline double pinaw(const BacktestLog& log, double alpha, double p_nom) {
    if (!(p_nom > 0.0) || !std::isfinite(p_nom)) throw ConfigError("nominal power must be positive");
    if (log.empty()) throw ConfigError("PINAW needs at least one record");
    const std::size_t a = log.alpha_index(alpha);
    double sum = 0.0;
    for (std::size_t i = 0; i < log.size(); ++i) sum += log.bound(i, a).width() / p_nom;
    return sum / static_cast<double>(log.size());
}

/// PI coverage probability over closed intervals.
inline double picp(const BacktestLog& log, double alpha) {
    if (log.empty()) throw ConfigError("PICP needs at least one record");
    const std::size_t a = log.alpha_index(alpha);
    std::size_t hits = 0;
    for (std::size_t i = 0; i < log.size(); ++i) hits += log.bound(i, a).contains(log.realized(i)) ? 1 : 0;
    return static_cast<double>(hits) / static_cast<double>(log.size());
}

/// Coverage width-based criterion: PINAW * max(1, exp(-mu (PICP - alpha) / (1 - alpha))).
inline double cwc(double pinaw_value, double picp_value, double alpha, double mu = kDefaultCwcMu) {
    check_confidence(alpha);
    const double penalty = std::exp(-mu * (picp_value - alpha) / (1.0 - alpha));
    return pinaw_value * std::max(1.0, penalty);
}

/// Record counts of consecutive windows of @p window_s seconds measured from
/// the first record. Windows holding no record are omitted.
inline std::vector<std::size_t> window_counts(const BacktestLog& log, double window_s = kDefaultWindowS) {
    if (!(window_s > 0.0)) throw ConfigError("window length must be positive");
    std::vector<std::size_t> counts;
    if (log.empty()) return counts;
    const auto window_ms = static_cast<std::int64_t>(std::llround(window_s * 1000.0));
    if (window_ms <= 0) throw ConfigError("window length must be at least one millisecond");
    const std::int64_t origin = log.timestamp(0);
    std::int64_t current = -1;
    for (std::size_t i = 0; i < log.size(); ++i) {
        const std::int64_t w = (log.timestamp(i) - origin) / window_ms;
        if (w < current) throw IngestionError("backtest records are not chronological");
        if (w != current) {
            counts.push_back(0);
            current = w;
        }
        ++counts.back();
    }
    return counts;
}

/// Per-window error rate 1 - PICP; a trailing partial window is kept.
inline std::vector<double> windowed_error_rates(const BacktestLog& log, double alpha,
                                                double window_s = kDefaultWindowS) {
    const std::size_t a = log.alpha_index(alpha);
    const auto counts = window_counts(log, window_s);
    std::vector<double> rates;
    rates.reserve(counts.size());
    std::size_t i = 0;
    for (std::size_t n : counts) {
        std::size_t misses = 0;
        for (std::size_t end = i + n; i < end; ++i) misses += log.bound(i, a).contains(log.realized(i)) ? 0 : 1;
        rates.push_back(static_cast<double>(misses) / static_cast<double>(n));
    }
    return rates;
}

struct AlphaMetrics {
    double alpha = 0.0;
    double pinaw = 0.0;
    double picp = 0.0;
    double cwc = 0.0;
    std::vector<double> windowed_error_rates;
};

struct EvaluationReport {
    double p_nom = 0.0;
    double mu = kDefaultCwcMu;
    double window_s = kDefaultWindowS;
    std::size_t records = 0;
    std::vector<std::size_t> window_counts;
    std::vector<AlphaMetrics> metrics;  // one per alpha, in log order

    const AlphaMetrics& at(double alpha) const {
        for (const auto& m : metrics)
            if (m.alpha == alpha) return m;
        throw ConfigError("confidence level not present in report");
    }
};

inline EvaluationReport evaluate(const BacktestLog& log, double p_nom, double mu = kDefaultCwcMu,
                                 double window_s = kDefaultWindowS) {
    EvaluationReport r;
    r.p_nom = p_nom;
    r.mu = mu;
    r.window_s = window_s;
    r.records = log.size();
    r.window_counts = window_counts(log, window_s);
    for (double alpha : log.alphas()) {
        AlphaMetrics m;
        m.alpha = alpha;
        m.pinaw = pinaw(log, alpha, p_nom);
        m.picp = picp(log, alpha);
        m.cwc = cwc(m.pinaw, m.picp, alpha, mu);
        m.windowed_error_rates = windowed_error_rates(log, alpha, window_s);
        r.metrics.push_back(std::move(m));
    }
    return r;
}

}  // namespace prosumpi

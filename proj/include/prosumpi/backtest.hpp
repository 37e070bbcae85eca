#pragma once

#include <prosumpi/error.hpp>
#include <prosumpi/estimator.hpp>
#include <prosumpi/metrics.hpp>
#include <prosumpi/timeseries.hpp>

#include <cmath>
#include <span>
#include <string>
#include <vector>

namespace prosumpi {

/**
 * Rolling one-step-ahead backtest with on-line training: for every test
 * sample the PIs are computed first, then the sample is observed.
 *
 * A test series that starts at or before the estimator's last timestamp
 * (e.g. replaying the training data) is treated as a continuation: the
 * ordering guard is rewound to one period before the first test sample.
 */
inline BacktestLog run_backtest(Estimator& est, const TimeSeries& test, std::span<const double> alphas) {
    if (!est.trained()) throw StateError("estimator has not been trained");
    test.validate();
    const double period_s = est.config().forgetting.sample_period_s;
    if (std::fabs(test.period_s() - period_s) > 1e-9 * std::max(1.0, period_s))
        throw ConfigError("test period " + std::to_string(test.period_ms) +
                          " ms does not match the estimator sample period");
    BacktestLog log(std::vector<double>(alphas.begin(), alphas.end()));
    if (test.empty()) return log;
    if (test.timestamp(0) <= est.last_timestamp_ms()) est.rewind_clock(test.timestamp(0) - test.period_ms);
    log.reserve(test.size());
    std::vector<Interval> bounds(alphas.size());
    for (std::size_t i = 0; i < test.size(); ++i) {
        est.step(test.timestamp(i), test.values[i], alphas, bounds);
        log.append(test.timestamp(i), test.values[i], bounds);
    }
    return log;
}

}  // namespace prosumpi

#pragma once

#include <prosumpi/clustering.hpp>
#include <prosumpi/error.hpp>

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace prosumpi {

/// Uniformly sampled power series; timestamps are implied by start + index * period.
struct TimeSeries {
    std::int64_t start_ms = 0;
    std::int64_t period_ms = 20;
    std::vector<double> values;

    std::size_t size() const noexcept { return values.size(); }
    bool empty() const noexcept { return values.empty(); }
    std::int64_t timestamp(std::size_t i) const noexcept {
        return start_ms + static_cast<std::int64_t>(i) * period_ms;
    }
    double period_s() const noexcept { return static_cast<double>(period_ms) / 1000.0; }
    Sample sample(std::size_t i) const noexcept { return {timestamp(i), values[i]}; }

    std::vector<Sample> samples() const {
        std::vector<Sample> out(values.size());
        for (std::size_t i = 0; i < values.size(); ++i) out[i] = sample(i);
        return out;
    }

    /// Contiguous sub-series [first, first + count).
    TimeSeries slice(std::size_t first, std::size_t count) const {
        if (first > values.size() || count > values.size() - first)
            throw ConfigError("time-series slice out of range");
        TimeSeries out{timestamp(first), period_ms, {}};
        out.values.assign(values.begin() + static_cast<std::ptrdiff_t>(first),
                          values.begin() + static_cast<std::ptrdiff_t>(first + count));
        return out;
    }

    void validate() const {
        if (period_ms <= 0) throw ConfigError("sampling period must be positive");
        for (std::size_t i = 0; i < values.size(); ++i)
            if (!std::isfinite(values[i]))
                throw IngestionError("non-finite power at timestamp " + std::to_string(timestamp(i)));
    }

    /// Builds a series from explicit samples, rejecting unsorted or non-uniform input.
    static TimeSeries from_samples(std::span<const Sample> samples) {
        if (samples.size() < 2) throw IngestionError("need at least two samples to infer the sampling period");
        TimeSeries ts{samples[0].timestamp_ms, samples[1].timestamp_ms - samples[0].timestamp_ms, {}};
        if (ts.period_ms <= 0)
            throw IngestionError("timestamps not strictly increasing at " + std::to_string(samples[1].timestamp_ms));
        ts.values.reserve(samples.size());
        for (std::size_t i = 0; i < samples.size(); ++i) {
            if (samples[i].timestamp_ms != ts.timestamp(i)) {
                if (samples[i].timestamp_ms <= samples[i - 1].timestamp_ms)
                    throw IngestionError("timestamps not strictly increasing at " +
                                         std::to_string(samples[i].timestamp_ms));
                throw IngestionError("non-uniform spacing: sample at " + std::to_string(samples[i].timestamp_ms) +
                                     " expected at " + std::to_string(ts.timestamp(i)));
            }
            ts.values.push_back(samples[i].power);
        }
        ts.validate();
        return ts;
    }
};

}  // namespace prosumpi

#pragma once

#include <prosumpi/error.hpp>
#include <prosumpi/timeseries.hpp>

#include <cstddef>
#include <cstdint>
#include <string>

namespace prosumpi {

/// Non-overlapping block means at a coarser period. The target must be an
/// integer multiple of the source period; a trailing incomplete block is dropped.
inline TimeSeries downsample(const TimeSeries& series, std::int64_t target_period_ms) {
    if (series.period_ms <= 0) throw ConfigError("source period must be positive");
    if (target_period_ms <= 0 || target_period_ms % series.period_ms != 0)
        throw ConfigError("target period " + std::to_string(target_period_ms) +
                          " ms is not an integer multiple of " + std::to_string(series.period_ms) + " ms");
    const auto factor = static_cast<std::size_t>(target_period_ms / series.period_ms);
    TimeSeries out{series.start_ms, target_period_ms, {}};
    const std::size_t blocks = series.size() / factor;
    out.values.reserve(blocks);
    for (std::size_t b = 0; b < blocks; ++b) {
        double sum = 0.0;
        for (std::size_t j = b * factor; j < (b + 1) * factor; ++j) sum += series.values[j];
        out.values.push_back(sum / static_cast<double>(factor));
    }
    return out;
}

}  // namespace prosumpi

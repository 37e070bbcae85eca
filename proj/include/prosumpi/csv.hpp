#pragma once

#include <prosumpi/error.hpp>
#include <prosumpi/timeseries.hpp>

#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <system_error>

namespace prosumpi {

/// Shortest representation that parses back to the same double.
inline std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

template <class T>
bool parse_number(std::string_view s, T& out) {
    s = trim(s);
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    if (s.empty()) return false;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
    return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

}  // namespace detail

/// Parses "timestamp_ms,power_w". Returns nullopt for anything else.
inline std::optional<Sample> parse_sample_line(std::string_view line) {
    const auto comma = line.find(',');
    if (comma == std::string_view::npos) return std::nullopt;
    Sample s;
    if (!detail::parse_number(line.substr(0, comma), s.timestamp_ms)) return std::nullopt;
    if (!detail::parse_number(line.substr(comma + 1), s.power)) return std::nullopt;
    if (!std::isfinite(s.power)) return std::nullopt;
    return s;
}

/**
 * Reads a two-column CSV (epoch milliseconds, watts), header optional.
 * Blank lines are ignored. The sampling period is taken from the first two
 * rows (or @p expected_period_ms) and every row must follow it exactly.
 */
inline TimeSeries parse_csv(std::istream& in, const std::string& source = "<stream>",
                            std::optional<std::int64_t> expected_period_ms = std::nullopt) {
    TimeSeries ts;
    std::string line;
    std::size_t line_no = 0;
    bool first_content = true;
    std::int64_t last_ts = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto body = detail::trim(line);
        if (body.empty()) continue;
        const auto sample = parse_sample_line(body);
        if (!sample) {
            if (first_content) {  // header
                first_content = false;
                continue;
            }
            throw IngestionError(source + ":" + std::to_string(line_no) + ": malformed row '" + std::string(body) + "'");
        }
        first_content = false;
        if (ts.values.empty()) {
            ts.start_ms = sample->timestamp_ms;
            ts.period_ms = expected_period_ms.value_or(0);
        } else {
            if (sample->timestamp_ms <= last_ts)
                throw IngestionError(source + ":" + std::to_string(line_no) + ": timestamp " +
                                     std::to_string(sample->timestamp_ms) + " is not after " + std::to_string(last_ts));
            if (ts.period_ms == 0) ts.period_ms = sample->timestamp_ms - last_ts;
            const std::int64_t expected = ts.timestamp(ts.values.size());
            if (sample->timestamp_ms != expected)
                throw IngestionError(source + ":" + std::to_string(line_no) + ": gap or irregular spacing at timestamp " +
                                     std::to_string(sample->timestamp_ms) + " (expected " + std::to_string(expected) +
                                     " for period " + std::to_string(ts.period_ms) + " ms)");
        }
        last_ts = sample->timestamp_ms;
        ts.values.push_back(sample->power);
    }
    if (ts.values.empty()) throw IngestionError(source + ": no data rows");
    if (ts.period_ms == 0)
        throw IngestionError(source + ": a single row cannot define the sampling period");
    if (ts.period_ms < 0) throw IngestionError(source + ": invalid sampling period");
    return ts;
}

inline TimeSeries read_csv(const std::filesystem::path& path,
                           std::optional<std::int64_t> expected_period_ms = std::nullopt) {
    std::ifstream in(path);
    if (!in) throw IngestionError("cannot open " + path.string());
    return parse_csv(in, path.string(), expected_period_ms);
}

inline void write_csv(const TimeSeries& ts, std::ostream& out) {
    out << "timestamp_ms,power_w\n";
    for (std::size_t i = 0; i < ts.size(); ++i) out << ts.timestamp(i) << ',' << format_double(ts.values[i]) << '\n';
}

inline void write_csv(const TimeSeries& ts, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IngestionError("cannot write " + path.string());
    write_csv(ts, out);
    if (!out) throw IngestionError("write failed for " + path.string());
}

}  // namespace prosumpi

#pragma once

#include <prosumpi/clustering.hpp>
#include <prosumpi/error.hpp>
#include <prosumpi/timeseries.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <vector>

namespace prosumpi {

enum class ProfileKind { office, ev_station, heat_pump, ar1 };

inline const char* to_string(ProfileKind k) noexcept {
    switch (k) {
        case ProfileKind::office: return "office";
        case ProfileKind::ev_station: return "ev_station";
        case ProfileKind::heat_pump: return "heat_pump";
        case ProfileKind::ar1: return "ar1";
    }
    return "?";
}

inline ProfileKind parse_profile_kind(const std::string& s) {
    if (s == "office") return ProfileKind::office;
    if (s == "ev_station" || s == "ev") return ProfileKind::ev_station;
    if (s == "heat_pump") return ProfileKind::heat_pump;
    if (s == "ar1") return ProfileKind::ar1;
    throw ConfigError("unknown profile kind '" + s + "' (office, ev_station, heat_pump, ar1)");
}

/**
 * Parameters of a synthetic prosumption generator. Units are watts and
 * seconds. Positive power is consumption.
 *
 * office:     base + diurnal cosine peaking at peak_hour + noise, plus
 *             cloud events that remove part of the rooftop PV output within
 *             a fraction of a second during daylight.
 * ev_station: office-like background plus charging sessions at discrete
 *             power levels, with linear taper and ramped transitions.
 * heat_pump:  on/off cycling at high power with inrush overshoot on start.
 * ar1:        mean-reverting AR(1) process with Gaussian innovations.
 */
struct SyntheticProfile {
    ProfileKind kind = ProfileKind::office;
    std::uint64_t seed = 1;
    std::int64_t start_ms = 0;

    double base_w = 40'000.0;
    double diurnal_amplitude_w = 25'000.0;
    double peak_hour = 13.0;
    double noise_sd_w = 800.0;

    double pv_capacity_w = 30'000.0;
    double pv_event_rate_per_h = 2.0;
    double pv_event_depth = 0.6;
    double pv_event_duration_s = 120.0;
    double pv_event_ramp_s = 0.5;

    std::vector<double> ev_levels_w{0.0, 50'000.0, 100'000.0, 150'000.0};
    double ev_session_rate_per_h = 1.5;
    double ev_session_mean_s = 1800.0;
    double ev_ramp_s = 2.0;
    double ev_taper_fraction = 0.3;

    double hp_on_power_w = 1'200'000.0;
    double hp_off_power_w = 40'000.0;
    double hp_on_mean_s = 900.0;
    double hp_off_mean_s = 600.0;
    double hp_overshoot = 0.25;
    double hp_transient_tau_s = 5.0;

    double ar_coefficient = 0.5;

    /// Defaults shaped after the three building types of the evaluation data.
    static SyntheticProfile defaults(ProfileKind kind, std::uint64_t seed = 1) {
        SyntheticProfile p;
        p.kind = kind;
        p.seed = seed;
        switch (kind) {
            case ProfileKind::office: break;
            case ProfileKind::ev_station:
                p.base_w = 15'000.0;
                p.diurnal_amplitude_w = 10'000.0;
                p.noise_sd_w = 300.0;
                p.pv_capacity_w = 0.0;
                break;
            case ProfileKind::heat_pump:
                p.base_w = 0.0;
                p.diurnal_amplitude_w = 0.0;
                p.noise_sd_w = 5'000.0;
                p.pv_capacity_w = 0.0;
                break;
            case ProfileKind::ar1:
                p.base_w = 50'000.0;
                p.diurnal_amplitude_w = 0.0;
                p.noise_sd_w = 1'000.0;
                p.pv_capacity_w = 0.0;
                break;
        }
        return p;
    }
};

namespace detail {

// Probability that an exponential dwell with the given mean ends within dt.
inline double switch_probability(double dt, double mean_s) {
    return mean_s > 0.0 ? 1.0 - std::exp(-dt / mean_s) : 1.0;
}

inline double diurnal(const SyntheticProfile& p, std::int64_t ts) {
    if (p.diurnal_amplitude_w == 0.0) return p.base_w;
    const double tod = time_of_day_s(ts);
    return p.base_w + p.diurnal_amplitude_w * std::cos(2.0 * std::numbers::pi * (tod - p.peak_hour * 3600.0) / 86400.0);
}

// Clear-sky PV shape: half sine between 06:00 and 18:00.
inline double daylight(std::int64_t ts) {
    const double tod = time_of_day_s(ts);
    if (tod < 6 * 3600.0 || tod > 18 * 3600.0) return 0.0;
    return std::sin(std::numbers::pi * (tod - 6 * 3600.0) / (12 * 3600.0));
}

// Linear approach of current toward target with a maximum slope per step.
inline double ramp_toward(double current, double target, double max_step) {
    if (max_step <= 0.0) return target;
    if (std::fabs(target - current) <= max_step) return target;
    return current + (target > current ? max_step : -max_step);
}

}  // namespace detail

/// Deterministic synthetic series of duration_s at period_ms for the given profile.
inline TimeSeries generate(const SyntheticProfile& p, double duration_s, std::int64_t period_ms) {
    if (!(duration_s > 0.0) || !std::isfinite(duration_s)) throw ConfigError("duration must be positive");
    if (period_ms <= 0) throw ConfigError("period must be positive");
    const double total_ms = duration_s * 1000.0;
    if (std::fabs(total_ms - std::round(total_ms)) > 1e-6 || std::llround(total_ms) % period_ms != 0)
        throw ConfigError("duration is not a whole number of sampling periods");
    const auto n = static_cast<std::size_t>(std::llround(total_ms) / period_ms);
    const double dt = static_cast<double>(period_ms) / 1000.0;

    TimeSeries ts{p.start_ms, period_ms, {}};
    ts.values.resize(n);
    std::mt19937_64 rng(p.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const auto noise = [&] { return p.noise_sd_w > 0.0 ? p.noise_sd_w * gauss(rng) : 0.0; };

    switch (p.kind) {
        case ProfileKind::office: {
            const double event_p = detail::switch_probability(dt, p.pv_event_rate_per_h > 0 ? 3600.0 / p.pv_event_rate_per_h : 0.0);
            const double ramp_step = p.pv_event_ramp_s > 0 ? dt / p.pv_event_ramp_s : 1.0;
            double shade = 0.0;  // fraction of PV output lost, ramps toward target
            double target = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const auto t = ts.timestamp(i);
                if (p.pv_event_rate_per_h > 0.0 && p.pv_capacity_w > 0.0) {
                    if (target == 0.0) {
                        if (unif(rng) < event_p) target = p.pv_event_depth * (0.5 + 0.5 * unif(rng));
                    } else if (unif(rng) < detail::switch_probability(dt, p.pv_event_duration_s)) {
                        target = 0.0;
                    }
                    shade = detail::ramp_toward(shade, target, ramp_step);
                }
                ts.values[i] = detail::diurnal(p, t) + shade * p.pv_capacity_w * detail::daylight(t) + noise();
            }
            break;
        }
        case ProfileKind::ev_station: {
            std::vector<double> levels;
            for (double l : p.ev_levels_w)
                if (l != 0.0) levels.push_back(l);
            const double start_p = detail::switch_probability(
                dt, p.ev_session_rate_per_h > 0 ? 3600.0 / p.ev_session_rate_per_h : 0.0);
            const double ramp_rate = levels.empty() ? 0.0
                                     : p.ev_ramp_s > 0
                                         ? *std::max_element(levels.begin(), levels.end()) * dt / p.ev_ramp_s
                                         : 0.0;
            double charger = 0.0;
            double level = 0.0;
            double elapsed = 0.0;
            double length = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const auto t = ts.timestamp(i);
                if (level == 0.0) {
                    if (!levels.empty() && p.ev_session_rate_per_h > 0.0 && unif(rng) < start_p) {
                        std::uniform_int_distribution<std::size_t> pick(0, levels.size() - 1);
                        level = levels[pick(rng)];
                        elapsed = 0.0;
                        std::exponential_distribution<double> dwell(1.0 / std::max(p.ev_session_mean_s, dt));
                        length = std::max(dt, dwell(rng));
                    }
                } else {
                    elapsed += dt;
                    if (elapsed >= length) level = 0.0;
                }
                const double target =
                    level == 0.0 ? 0.0 : level * (1.0 - p.ev_taper_fraction * std::min(1.0, elapsed / length));
                charger = detail::ramp_toward(charger, target, ramp_rate);
                ts.values[i] = detail::diurnal(p, t) + charger + noise();
            }
            break;
        }
        case ProfileKind::heat_pump: {
            bool on = false;
            double on_time = 0.0;
            const double on_end = detail::switch_probability(dt, p.hp_on_mean_s);
            const double off_end = detail::switch_probability(dt, p.hp_off_mean_s);
            for (std::size_t i = 0; i < n; ++i) {
                const auto t = ts.timestamp(i);
                if (on) {
                    on_time += dt;
                    if (unif(rng) < on_end) on = false;
                } else if (unif(rng) < off_end) {
                    on = true;
                    on_time = 0.0;
                }
                double v = p.hp_off_power_w;
                if (on) {
                    const double transient =
                        p.hp_transient_tau_s > 0 ? p.hp_overshoot * std::exp(-on_time / p.hp_transient_tau_s) : 0.0;
                    v = p.hp_on_power_w * (1.0 + transient);
                }
                ts.values[i] = detail::diurnal(p, t) + v + noise();
            }
            break;
        }
        case ProfileKind::ar1: {
            if (!(std::fabs(p.ar_coefficient) < 1.0)) throw ConfigError("AR(1) coefficient must lie in (-1, 1)");
            double dev = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                dev = p.ar_coefficient * dev + noise();
                ts.values[i] = detail::diurnal(p, ts.timestamp(i)) + dev;
            }
            break;
        }
    }
    return ts;
}

}  // namespace prosumpi

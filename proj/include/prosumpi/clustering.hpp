#pragma once

#include <prosumpi/error.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <tuple>
#include <utility>
#include <vector>

namespace prosumpi {

/// One measurement: epoch milliseconds and power in watts.
struct Sample {
    std::int64_t timestamp_ms = 0;
    double power = 0.0;
};

inline constexpr std::int64_t kMillisPerDay = 86'400'000;

/// Seconds since local midnight, in [0, 86400).
inline double time_of_day_s(std::int64_t timestamp_ms, std::int64_t utc_offset_s = 0) {
    std::int64_t t = (timestamp_ms + utc_offset_s * 1000) % kMillisPerDay;
    if (t < 0) t += kMillisPerDay;
    return static_cast<double>(t) / 1000.0;
}

inline constexpr std::size_t kMaxFeatures = 2;
using FeatureVector = std::array<double, kMaxFeatures>;

/**
 * Influential variables used to condition the histograms: the power level
 * and/or the time of day (linear, not wrapped at midnight). Each enabled
 * feature is z-scored with constants fitted on training data; a feature
 * with zero spread maps to 0.
 */
struct FeatureSpec {
    bool use_power = true;
    bool use_time_of_day = false;
    std::int64_t utc_offset_s = 0;
    std::vector<double> mean;
    std::vector<double> sd;

    std::size_t dimension() const noexcept {
        return static_cast<std::size_t>(use_power) + static_cast<std::size_t>(use_time_of_day);
    }
    bool fitted() const noexcept { return mean.size() == dimension() && sd.size() == dimension(); }

    FeatureVector raw(double power, std::int64_t timestamp_ms) const noexcept {
        FeatureVector f{};
        std::size_t d = 0;
        if (use_power) f[d++] = power;
        if (use_time_of_day) f[d++] = time_of_day_s(timestamp_ms, utc_offset_s);
        return f;
    }

    FeatureVector normalize(FeatureVector f) const noexcept {
        for (std::size_t d = 0; d < dimension(); ++d) f[d] = sd[d] > 0.0 ? (f[d] - mean[d]) / sd[d] : 0.0;
        return f;
    }

    FeatureVector extract(double power, std::int64_t timestamp_ms) const {
        if (!fitted()) throw StateError("feature normalization has not been fitted");
        return normalize(raw(power, timestamp_ms));
    }

    /// Fits mean and population standard deviation per enabled feature.
    void fit(std::span<const Sample> samples) {
        const std::size_t m = dimension();
        if (m == 0) throw ConfigError("at least one influential variable must be enabled");
        if (samples.empty()) throw ConfigError("cannot fit feature normalization on an empty sample");
        mean.assign(m, 0.0);
        sd.assign(m, 0.0);
        for (const auto& s : samples) {
            const auto f = raw(s.power, s.timestamp_ms);
            for (std::size_t d = 0; d < m; ++d) mean[d] += f[d];
        }
        for (auto& v : mean) v /= static_cast<double>(samples.size());
        for (const auto& s : samples) {
            const auto f = raw(s.power, s.timestamp_ms);
            for (std::size_t d = 0; d < m; ++d) sd[d] += (f[d] - mean[d]) * (f[d] - mean[d]);
        }
        for (auto& v : sd) {
            v = std::sqrt(v / static_cast<double>(samples.size()));
            // Spread below rounding noise of the mean is treated as constant.
            if (!(v > 0.0) || !std::isfinite(v)) v = 0.0;
        }
        for (std::size_t d = 0; d < m; ++d)
            if (sd[d] <= 1e-12 * std::max(1.0, std::fabs(mean[d]))) sd[d] = 0.0;
    }
};

/// Frozen k-means centroids in normalized feature space plus the labeling operator.
class ClusterModel {
public:
    ClusterModel() = default;
    ClusterModel(FeatureSpec spec, std::vector<double> centroids)
        : spec_(std::move(spec)), centroids_(std::move(centroids)) {
        const std::size_t m = spec_.dimension();
        if (m == 0 || !spec_.fitted()) throw ConfigError("cluster model requires a fitted feature spec");
        if (centroids_.empty() || centroids_.size() % m != 0)
            throw ConfigError("centroid array does not match feature dimension");
        for (double c : centroids_)
            if (!std::isfinite(c)) throw ConfigError("centroids must be finite");
    }

    const FeatureSpec& spec() const noexcept { return spec_; }
    std::size_t clusters() const noexcept { return spec_.dimension() == 0 ? 0 : centroids_.size() / spec_.dimension(); }
    std::size_t dimension() const noexcept { return spec_.dimension(); }
    std::span<const double> centroids() const noexcept { return centroids_; }
    std::span<const double> centroid(std::size_t l) const noexcept {
        return std::span<const double>(centroids_).subspan(l * dimension(), dimension());
    }

    /// Nearest centroid by Euclidean distance; ties go to the lowest label.
    std::size_t assign_label(const FeatureVector& f) const noexcept {
        const std::size_t m = dimension();
        const std::size_t L = clusters();
        std::size_t best = 0;
        double best_d = std::numeric_limits<double>::infinity();
        for (std::size_t l = 0; l < L; ++l) {
            const double* c = centroids_.data() + l * m;
            double d = 0.0;
            for (std::size_t k = 0; k < m; ++k) d += (f[k] - c[k]) * (f[k] - c[k]);
            if (d < best_d) {
                best_d = d;
                best = l;
            }
        }
        return best;
    }

    std::size_t assign_label(double power, std::int64_t timestamp_ms) const {
        return assign_label(spec_.extract(power, timestamp_ms));
    }

private:
    FeatureSpec spec_;
    std::vector<double> centroids_;
};

struct KMeansOptions {
    std::uint64_t seed = 42;
    std::size_t max_iterations = 100;
    // Lloyd's iterations run on an evenly strided subsample of at most this
    // many points (0 = all). Normalization always uses the full sample.
    std::size_t max_fit_samples = 20000;
};

struct KMeansTrace {
    std::vector<double> inertia;  // within-cluster sum of squares after each assignment
    std::size_t iterations = 0;
    bool converged = false;
};

namespace detail {

inline double squared_distance(const double* a, const double* b, std::size_t m) noexcept {
    double d = 0.0;
    for (std::size_t k = 0; k < m; ++k) d += (a[k] - b[k]) * (a[k] - b[k]);
    return d;
}

}  // namespace detail

/**
 * k-means++ seeding followed by Lloyd's iterations until no assignment
 * changes or options.max_iterations is reached. Clusters that lose all their
 * points are re-seeded at the point farthest from its own centroid.
 * Deterministic for a fixed (samples, spec, L, options).
 */
inline ClusterModel fit_kmeans(std::span<const Sample> samples, FeatureSpec spec, std::size_t L,
                               const KMeansOptions& options = {}, KMeansTrace* trace = nullptr) {
    if (L == 0) throw ConfigError("number of clusters must be at least 1");
    if (samples.size() < L) throw ConfigError("fewer training samples than clusters");
    spec.fit(samples);
    const std::size_t m = spec.dimension();

    std::size_t n = samples.size();
    if (options.max_fit_samples > 0 && n > std::max(options.max_fit_samples, L)) n = std::max(options.max_fit_samples, L);
    std::vector<double> points(n * m);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t src = n == samples.size() ? i : static_cast<std::size_t>((static_cast<unsigned __int128>(i) * samples.size()) / n);
        const auto f = spec.normalize(spec.raw(samples[src].power, samples[src].timestamp_ms));
        std::copy_n(f.begin(), m, points.begin() + static_cast<std::ptrdiff_t>(i * m));
    }
    const auto point = [&](std::size_t i) { return points.data() + i * m; };

    std::mt19937_64 rng(options.seed);
    std::vector<double> centroids(L * m);
    std::vector<double> nearest(n, std::numeric_limits<double>::infinity());
    {
        std::uniform_int_distribution<std::size_t> pick(0, n - 1);
        std::size_t first = pick(rng);
        std::copy_n(point(first), m, centroids.begin());
        for (std::size_t c = 1; c < L; ++c) {
            const double* prev = centroids.data() + (c - 1) * m;
            double total = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                nearest[i] = std::min(nearest[i], detail::squared_distance(point(i), prev, m));
                total += nearest[i];
            }
            std::size_t chosen = 0;
            if (total > 0.0) {
                std::uniform_real_distribution<double> u(0.0, total);
                const double r = u(rng);
                double acc = 0.0;
                chosen = n - 1;
                for (std::size_t i = 0; i < n; ++i) {
                    acc += nearest[i];
                    if (acc > r && nearest[i] > 0.0) {
                        chosen = i;
                        break;
                    }
                }
            } else {
                chosen = pick(rng);  // fewer distinct points than clusters
            }
            std::copy_n(point(chosen), m, centroids.begin() + static_cast<std::ptrdiff_t>(c * m));
        }
    }

    ClusterModel model(spec, centroids);
    std::vector<std::size_t> labels(n);
    std::vector<double> dist(n);
    const auto assign_all = [&](const ClusterModel& current) {
        std::size_t changed = 0;
        double inertia = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            FeatureVector f{};
            std::copy_n(point(i), m, f.begin());
            const std::size_t l = current.assign_label(f);
            if (l != labels[i]) ++changed;
            labels[i] = l;
            dist[i] = detail::squared_distance(point(i), current.centroid(l).data(), m);
            inertia += dist[i];
        }
        return std::pair{changed, inertia};
    };

    std::fill(labels.begin(), labels.end(), L);  // sentinel: every first assignment counts as a change
    auto [changed, inertia] = assign_all(model);
    if (trace) {
        trace->inertia.assign(1, inertia);
        trace->iterations = 0;
        trace->converged = false;
    }

    std::vector<double> sums(L * m);
    std::vector<std::size_t> counts(L);
    for (std::size_t it = 1; it <= options.max_iterations; ++it) {
        std::fill(sums.begin(), sums.end(), 0.0);
        std::fill(counts.begin(), counts.end(), 0);
        for (std::size_t i = 0; i < n; ++i) {
            ++counts[labels[i]];
            for (std::size_t k = 0; k < m; ++k) sums[labels[i] * m + k] += point(i)[k];
        }
        std::vector<bool> taken(n, false);
        for (std::size_t l = 0; l < L; ++l) {
            if (counts[l] > 0) {
                for (std::size_t k = 0; k < m; ++k)
                    centroids[l * m + k] = sums[l * m + k] / static_cast<double>(counts[l]);
            }
        }
        for (std::size_t l = 0; l < L; ++l) {
            if (counts[l] > 0) continue;
            std::size_t far = n;
            double far_d = -1.0;
            for (std::size_t i = 0; i < n; ++i) {
                if (taken[i]) continue;
                const double d =
                    detail::squared_distance(point(i), centroids.data() + labels[i] * m, m);
                if (d > far_d) {
                    far_d = d;
                    far = i;
                }
            }
            if (far < n) {
                taken[far] = true;
                std::copy_n(point(far), m, centroids.begin() + static_cast<std::ptrdiff_t>(l * m));
            }
        }
        model = ClusterModel(spec, centroids);
        std::tie(changed, inertia) = assign_all(model);
        if (trace) {
            trace->inertia.push_back(inertia);
            trace->iterations = it;
        }
        if (changed == 0) {
            if (trace) trace->converged = true;
            break;
        }
    }
    return model;
}

}  // namespace prosumpi

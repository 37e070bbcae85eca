#pragma once

#include <prosumpi/clustering.hpp>
#include <prosumpi/domain.hpp>
#include <prosumpi/error.hpp>
#include <prosumpi/histogram.hpp>
#include <prosumpi/timeseries.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace prosumpi {

/// A: histograms of the next power value. B: histograms of the next power increment.
enum class ModelVariant : std::uint8_t { A = 0, B = 1 };

inline const char* to_string(ModelVariant v) noexcept { return v == ModelVariant::A ? "A" : "B"; }

inline ModelVariant parse_variant(const std::string& s) {
    if (s == "A" || s == "a") return ModelVariant::A;
    if (s == "B" || s == "b") return ModelVariant::B;
    throw ConfigError("unknown model variant '" + s + "' (expected A or B)");
}

struct EstimatorConfig {
    ModelVariant variant = ModelVariant::B;
    std::size_t clusters = 1;
    ForgettingConfig forgetting;
    std::size_t domain_bins = 2000;
    double domain_margin = 0.2;
    FeatureSpec features;
    std::size_t training_window = 0;  // trailing samples used for batch training, 0 = all
    KMeansOptions kmeans;

    void validate() const {
        if (clusters < 1) throw ConfigError("number of clusters must be at least 1");
        if (domain_bins < 2) throw ConfigError("domain must have at least 2 bins");
        if (!(domain_margin >= 0.0) || !std::isfinite(domain_margin))
            throw ConfigError("domain margin must be a nonnegative fraction");
        if (features.dimension() == 0) throw ConfigError("at least one influential variable must be enabled");
        (void)forgetting.phi();
    }
};

/// Estimate for one confidence level.
struct PiEstimate {
    double alpha = 0.0;
    Interval interval;
    friend bool operator==(const PiEstimate&, const PiEstimate&) = default;
};

/// Complete mutable state of an estimator; what a snapshot persists.
struct EstimatorState {
    EstimatorConfig config;
    bool trained = false;
    ClusterModel clusters;
    QuantizedDomain domain;
    std::vector<ForgettingHistogram> histograms;
    std::vector<std::uint64_t> training_counts;
    double p_nom = 0.0;
    double last_power = 0.0;
    std::int64_t last_timestamp_ms = 0;
    std::size_t last_label = 0;
};

/**
 * Cluster-conditioned prediction-interval estimator.
 *
 * batch_train fits the labeling operator and seeds one histogram per label
 * from consecutive training pairs. Afterwards the rolling loop alternates
 * estimate (PI for the next sample, from the histogram of the current label)
 * and observe (decay-update that histogram with the realization).
 *
 * Cluster centroids are frozen after batch training.
 */
class Estimator {
public:
    Estimator() = default;
    explicit Estimator(EstimatorState state) : state_(std::move(state)) {
        if (state_.trained) check_state();
        if (state_.trained) phi_ = state_.config.forgetting.phi();
    }

    static Estimator batch_train(const EstimatorConfig& config, const TimeSeries& history) {
        history.validate();
        const double period_s = history.period_s();
        if (std::fabs(period_s - config.forgetting.sample_period_s) > 1e-9 * std::max(1.0, period_s))
            throw ConfigError("history period " + std::to_string(history.period_ms) +
                              " ms does not match configured sample period");
        const auto samples = history.samples();
        return batch_train(config, std::span<const Sample>(samples));
    }

    static Estimator batch_train(const EstimatorConfig& config, std::span<const Sample> history) {
        config.validate();
        for (std::size_t i = 1; i < history.size(); ++i)
            if (history[i].timestamp_ms <= history[i - 1].timestamp_ms)
                throw IngestionError("training history not chronologically ordered at " +
                                     std::to_string(history[i].timestamp_ms));
        if (history.size() >= 2) {
            const std::int64_t period = history[1].timestamp_ms - history[0].timestamp_ms;
            for (std::size_t i = 1; i < history.size(); ++i)
                if (history[i].timestamp_ms - history[i - 1].timestamp_ms != period)
                    throw IngestionError("gap in training history at " + std::to_string(history[i].timestamp_ms));
        }
        for (const auto& s : history)
            if (!std::isfinite(s.power)) throw IngestionError("non-finite power in training history");
        if (config.training_window > 0 && history.size() > config.training_window)
            history = history.subspan(history.size() - config.training_window);
        if (history.size() < std::max<std::size_t>(config.clusters, 2))
            throw ConfigError("training history shorter than max(L, 2)");

        EstimatorState st;
        st.config = config;
        st.clusters = fit_kmeans(history, config.features, config.clusters, config.kmeans);
        st.config.features = st.clusters.spec();

        double lo = history[0].power;
        double hi = history[0].power;
        double abs_max = 0.0;
        for (const auto& s : history) {
            lo = std::min(lo, s.power);
            hi = std::max(hi, s.power);
            abs_max = std::max(abs_max, std::fabs(s.power));
        }
        st.p_nom = abs_max;
        const double range = hi - lo;
        const double width = range > 0.0 ? range : std::max(std::fabs(lo), 1.0);
        if (config.variant == ModelVariant::A) {
            double pad = config.domain_margin * width;
            if (range == 0.0 && pad == 0.0) pad = width;
            const double anchor = (lo <= 0.0 && 0.0 <= hi) ? 0.0 : lo;
            st.domain = QuantizedDomain::anchored(anchor, lo - pad, hi + pad, config.domain_bins);
        } else {
            const double reach = width * (1.0 + config.domain_margin);
            st.domain = QuantizedDomain::anchored(0.0, -reach, reach, config.domain_bins);
        }

        const std::size_t L = config.clusters;
        std::vector<std::size_t> labels(history.size());
        for (std::size_t j = 0; j < history.size(); ++j)
            labels[j] = st.clusters.assign_label(history[j].power, history[j].timestamp_ms);
        std::vector<std::vector<double>> pools(L);
        for (std::size_t j = 0; j + 1 < history.size(); ++j) {
            const double next = history[j + 1].power;
            pools[labels[j]].push_back(config.variant == ModelVariant::A ? next : next - history[j].power);
        }
        st.histograms.reserve(L);
        st.training_counts.resize(L);
        for (std::size_t l = 0; l < L; ++l) {
            ForgettingHistogram h(st.domain);
            h.seed_batch(pools[l]);
            st.histograms.push_back(std::move(h));
            st.training_counts[l] = pools[l].size();
        }
        st.last_power = history.back().power;
        st.last_timestamp_ms = history.back().timestamp_ms;
        st.last_label = labels.back();
        st.trained = true;
        return Estimator(std::move(st));
    }

    bool trained() const noexcept { return state_.trained; }
    const EstimatorState& state() const noexcept { return state_; }
    const EstimatorConfig& config() const noexcept { return state_.config; }
    const ClusterModel& clusters() const noexcept { return state_.clusters; }
    const QuantizedDomain& domain() const noexcept { return state_.domain; }
    const ForgettingHistogram& histogram(std::size_t label) const { return state_.histograms.at(label); }
    std::size_t label_count() const noexcept { return state_.histograms.size(); }
    double phi() const noexcept { return phi_; }
    double last_power() const noexcept { return state_.last_power; }
    std::int64_t last_timestamp_ms() const noexcept { return state_.last_timestamp_ms; }
    std::size_t last_label() const noexcept { return state_.last_label; }
    /// Default nominal power: max |power| seen in training.
    double p_nom() const noexcept { return state_.p_nom; }

    /// One-step-ahead PI from the current state. Labels never seen in training
    /// fall back to the union of all label histograms, then to the full domain.
    Interval estimate(double alpha) const {
        check_confidence(alpha);
        if (!state_.trained) throw StateError("estimator has not been trained");
        const double offset = state_.config.variant == ModelVariant::B ? state_.last_power : 0.0;
        const auto& hist = state_.histograms[state_.last_label];
        if (!hist.empty()) return shift(hist.quantile_pair(alpha), offset);
        const auto merged = union_histogram();
        if (!merged.empty()) return shift(merged.quantile_pair(alpha), offset);
        return shift(Interval{state_.domain.p_min(), state_.domain.p_max()}, offset);
    }

    void estimate_all(std::span<const double> alphas, std::span<Interval> out) const {
        for (std::size_t k = 0; k < alphas.size(); ++k) out[k] = estimate(alphas[k]);
    }

    /// Folds the realization into the histogram of the previous label, then relabels.
    void observe(std::int64_t timestamp_ms, double power) {
        check_observation(timestamp_ms, power);
        const double value = state_.config.variant == ModelVariant::A ? power : power - state_.last_power;
        state_.histograms[state_.last_label].decay_update(value, phi_);
        state_.last_power = power;
        state_.last_timestamp_ms = timestamp_ms;
        state_.last_label = state_.clusters.assign_label(power, timestamp_ms);
    }

    /// Moves the ordering guard back so that a series overlapping the training
    /// span can be replayed. Histograms and the last sample are untouched.
    void rewind_clock(std::int64_t timestamp_ms) noexcept { state_.last_timestamp_ms = timestamp_ms; }

    /// PIs for the incoming sample computed before it is observed, then observe.
    std::vector<PiEstimate> step(std::int64_t timestamp_ms, double power, std::span<const double> alphas) {
        std::vector<PiEstimate> out(alphas.size());
        std::vector<Interval> bounds(alphas.size());
        step(timestamp_ms, power, alphas, bounds);
        for (std::size_t k = 0; k < alphas.size(); ++k) out[k] = {alphas[k], bounds[k]};
        return out;
    }

    /// Allocation-free variant writing one interval per alpha into @p out.
    void step(std::int64_t timestamp_ms, double power, std::span<const double> alphas, std::span<Interval> out) {
        check_observation(timestamp_ms, power);
        estimate_all(alphas, out);
        observe(timestamp_ms, power);
    }

private:
    static Interval shift(Interval i, double offset) noexcept {
        if (offset == 0.0) return i;
        return {i.lower + offset, i.upper + offset};
    }

    void check_observation(std::int64_t timestamp_ms, double power) const {
        if (!state_.trained) throw StateError("estimator has not been trained");
        if (!std::isfinite(power)) throw InputError("non-finite power observation");
        if (timestamp_ms <= state_.last_timestamp_ms)
            throw IngestionError("out-of-order timestamp " + std::to_string(timestamp_ms) + " (last " +
                                 std::to_string(state_.last_timestamp_ms) + ")");
    }

    ForgettingHistogram union_histogram() const {
        std::vector<double> mass(state_.domain.n_bins(), 0.0);
        std::size_t contributing = 0;
        for (const auto& h : state_.histograms) {
            if (h.empty()) continue;
            ++contributing;
            for (std::size_t k = 0; k < mass.size(); ++k) mass[k] += h.mass(k);
        }
        if (contributing == 0) return ForgettingHistogram(state_.domain);
        ForgettingHistogram::RawState raw;
        raw.weights = std::move(mass);
        for (auto& w : raw.weights) w /= static_cast<double>(contributing);
        for (double w : raw.weights) raw.raw_sum += w;
        detail::FenwickTree tree;
        tree.rebuild(raw.weights);
        raw.tree = tree.nodes();
        return ForgettingHistogram::from_raw_state(state_.domain, std::move(raw));
    }

    void check_state() const {
        const auto& st = state_;
        st.config.validate();
        if (st.histograms.size() != st.config.clusters || st.clusters.clusters() != st.config.clusters)
            throw SnapshotError("estimator state has inconsistent cluster count");
        if (st.training_counts.size() != st.config.clusters)
            throw SnapshotError("estimator state has inconsistent training counts");
        if (st.last_label >= st.config.clusters) throw SnapshotError("estimator state has invalid last label");
        for (const auto& h : st.histograms)
            if (!(h.domain() == st.domain)) throw SnapshotError("histogram domain differs from estimator domain");
    }

    EstimatorState state_;
    double phi_ = 0.0;
};

}  // namespace prosumpi

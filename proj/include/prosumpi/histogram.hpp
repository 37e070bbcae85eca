#pragma once

#include <prosumpi/domain.hpp>
#include <prosumpi/error.hpp>

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace prosumpi {

/// Forgetting time constant and sample period; phi is derived from both.
struct ForgettingConfig {
    double sample_period_s = 0.02;
    double forgetting_time_s = 86400.0;

    /// Each new sample weighs as much as all samples of the past forgetting_time_s.
    double phi() const {
        if (!(sample_period_s > 0) || !(forgetting_time_s > 0) || !std::isfinite(sample_period_s) ||
            !std::isfinite(forgetting_time_s))
            throw ConfigError("forgetting time and sample period must be positive");
        const double ratio = forgetting_time_s / sample_period_s;
        return ratio / (ratio + 1.0);
    }
};

/// A prediction interval, lower <= upper.
struct Interval {
    double lower = 0.0;
    double upper = 0.0;

    bool contains(double x) const noexcept { return lower <= x && x <= upper; }
    double width() const noexcept { return upper - lower; }
    friend bool operator==(const Interval&, const Interval&) = default;
};

struct BinInterval {
    std::size_t lower = 0;
    std::size_t upper = 0;
    friend bool operator==(const BinInterval&, const BinInterval&) = default;
};

/// CDF comparisons treat values within this distance of a threshold as equal to it.
/// Masses of batch-seeded histograms are ratios k/N that can hit (1 +- alpha)/2
/// exactly; without the slack the answer would depend on summation order.
inline constexpr double kCdfTolerance = 1e-12;

inline void check_confidence(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("confidence level must lie in (0, 1)");
}

namespace detail {

// Fenwick tree over raw bin weights: O(log n) point update, prefix sum and
// threshold search. All weights are nonnegative, which the searches rely on.
class FenwickTree {
public:
    FenwickTree() = default;
    explicit FenwickTree(std::size_t n) : tree_(n + 1, 0.0) {}

    std::size_t size() const noexcept { return tree_.empty() ? 0 : tree_.size() - 1; }

    void add(std::size_t index, double delta) noexcept {
        for (std::size_t i = index + 1; i < tree_.size(); i += i & (~i + 1)) tree_[i] += delta;
    }

    double prefix(std::size_t index) const noexcept {
        double s = 0.0;
        for (std::size_t i = index + 1; i > 0; i -= i & (~i + 1)) s += tree_[i];
        return s;
    }

    void rebuild(std::span<const double> weights) {
        tree_.assign(weights.size() + 1, 0.0);
        for (std::size_t i = 1; i <= weights.size(); ++i) {
            tree_[i] += weights[i - 1];
            const std::size_t parent = i + (i & (~i + 1));
            if (parent <= weights.size()) tree_[parent] += tree_[i];
        }
    }

    /// Smallest index whose prefix sum is >= target (size() if none).
    std::size_t first_at_least(double target) const noexcept { return search(target, false); }

    /// Smallest index whose prefix sum is > target (size() if none).
    std::size_t first_above(double target) const noexcept { return search(target, true); }

    const std::vector<double>& nodes() const noexcept { return tree_; }
    std::vector<double>& nodes() noexcept { return tree_; }

private:
    std::size_t search(double target, bool strict) const noexcept {
        const std::size_t n = size();
        std::size_t step = 1;
        while (step * 2 <= n) step *= 2;
        std::size_t pos = 0;
        double acc = 0.0;
        for (; step > 0; step >>= 1) {
            const std::size_t next = pos + step;
            if (next > n) continue;
            const double candidate = acc + tree_[next];
            if (strict ? candidate <= target : candidate < target) {
                pos = next;
                acc = candidate;
            }
        }
        return pos;
    }

    std::vector<double> tree_;
};

}  // namespace detail

/**
 * Normalized histogram over a QuantizedDomain with exponential forgetting.
 *
 * Each decay update scales the existing distribution by phi and places
 * (1 - phi) at the quantized sample. Scaling is applied lazily: raw weights
 * are stored against a global multiplier, so an update touches one bin of
 * the Fenwick tree and only a renormalization (when the multiplier
 * underflows) walks every bin.
 *
 * Single writer; concurrent const access is safe.
 */
class ForgettingHistogram {
public:
    static constexpr double kRenormalizeBelow = 1e-300;

    struct RawState {
        std::vector<double> weights;
        std::vector<double> tree;
        double raw_sum = 0.0;
        double scale = 1.0;
        std::uint64_t update_count = 0;
    };

    ForgettingHistogram() = default;
    explicit ForgettingHistogram(QuantizedDomain domain)
        : domain_(domain), weights_(domain.n_bins(), 0.0), tree_(domain.n_bins()) {}

    const QuantizedDomain& domain() const noexcept { return domain_; }
    bool empty() const noexcept { return !(raw_sum_ > 0.0); }
    std::uint64_t update_count() const noexcept { return update_count_; }
    double scale() const noexcept { return scale_; }
    std::span<const double> weights() const noexcept { return weights_; }

    /// Sum of weights times scale; 1 after seeding or any update, 0 when empty.
    double total_weight() const noexcept { return raw_sum_ * scale_; }

    /// Normalized probability mass of bin k.
    double mass(std::size_t k) const noexcept { return empty() ? 0.0 : weights_[k] / raw_sum_; }

    /// Discrete CDF at bin k.
    double cdf(std::size_t k) const noexcept { return empty() ? 0.0 : tree_.prefix(k) / raw_sum_; }

    void clear() {
        weights_.assign(domain_.n_bins(), 0.0);
        tree_ = detail::FenwickTree(domain_.n_bins());
        raw_sum_ = 0.0;
        scale_ = 1.0;
        update_count_ = 0;
    }

    /// Replaces the contents with the empirical distribution of @p values,
    /// each contributing 1/|values|. An empty span leaves the histogram empty.
    void seed_batch(std::span<const double> values) {
        clear();
        if (values.empty()) return;
        std::vector<std::size_t> bins;
        bins.reserve(values.size());
        for (double v : values) bins.push_back(domain_.quantize(v));
        std::vector<double> counts(domain_.n_bins(), 0.0);
        for (std::size_t b : bins) counts[b] += 1.0;
        const double n = static_cast<double>(values.size());
        double sum = 0.0;
        for (std::size_t k = 0; k < counts.size(); ++k) {
            weights_[k] = counts[k] / n;
            sum += weights_[k];
        }
        raw_sum_ = sum;
        tree_.rebuild(weights_);
    }

    /// mass <- phi * mass + (1 - phi) * delta(quantize(value)).
    /// On an empty histogram the value receives the full unit mass.
    void decay_update(double value, double phi) {
        if (!(phi > 0.0 && phi < 1.0)) throw ConfigError("forgetting factor must lie in (0, 1)");
        const std::size_t k = domain_.quantize(value);
        ++update_count_;
        if (empty()) {
            scale_ = 1.0;
            weights_[k] = 1.0;
            raw_sum_ = 1.0;
            tree_.add(k, 1.0);
            return;
        }
        scale_ *= phi;
        const double increment = (1.0 - phi) / scale_;
        weights_[k] += increment;
        raw_sum_ += increment;
        tree_.add(k, increment);
        if (scale_ < kRenormalizeBelow) renormalize();
    }

    /// Bin indices of the lower and upper quantiles at confidence @p alpha:
    /// lower = first bin with F >= (1 - alpha)/2, upper = last bin with
    /// F <= (1 + alpha)/2, raised to lower when that set is empty or below it.
    BinInterval quantile_bins(double alpha) const {
        check_confidence(alpha);
        if (empty()) throw StateError("no data for label: histogram is empty");
        const std::size_t n = domain_.n_bins();
        const double lower_target = ((1.0 - alpha) / 2.0 - kCdfTolerance) * raw_sum_;
        const double upper_target = ((1.0 + alpha) / 2.0 + kCdfTolerance) * raw_sum_;
        std::size_t lower = tree_.first_at_least(lower_target);
        if (lower >= n) lower = n - 1;
        const std::size_t above = tree_.first_above(upper_target);
        std::size_t upper = above == 0 ? lower : above - 1;
        if (upper < lower) upper = lower;
        return {lower, upper};
    }

    Interval quantile_pair(double alpha) const {
        const auto bins = quantile_bins(alpha);
        return {domain_.bin_value(bins.lower), domain_.bin_value(bins.upper)};
    }

    RawState raw_state() const { return {weights_, tree_.nodes(), raw_sum_, scale_, update_count_}; }

    static ForgettingHistogram from_raw_state(QuantizedDomain domain, RawState state) {
        if (state.weights.size() != domain.n_bins() || state.tree.size() != domain.n_bins() + 1)
            throw SnapshotError("histogram state does not match its domain");
        if (!(state.scale > 0.0) || !std::isfinite(state.raw_sum) || state.raw_sum < 0.0)
            throw SnapshotError("invalid histogram scale or mass");
        for (double w : state.weights)
            if (!std::isfinite(w) || w < 0.0) throw SnapshotError("invalid histogram weight");
        ForgettingHistogram h(domain);
        h.weights_ = std::move(state.weights);
        h.tree_.nodes() = std::move(state.tree);
        h.raw_sum_ = state.raw_sum;
        h.scale_ = state.scale;
        h.update_count_ = state.update_count;
        return h;
    }

private:
    void renormalize() {
        double sum = 0.0;
        for (double& w : weights_) {
            w *= scale_;
            sum += w;
        }
        raw_sum_ = sum;
        scale_ = 1.0;
        tree_.rebuild(weights_);
    }

    QuantizedDomain domain_;
    std::vector<double> weights_;
    detail::FenwickTree tree_;
    double raw_sum_ = 0.0;
    double scale_ = 1.0;
    std::uint64_t update_count_ = 0;
};

inline Interval quantile_pair(const ForgettingHistogram& hist, double alpha) { return hist.quantile_pair(alpha); }

}  // namespace prosumpi

#pragma once

#include <prosumpi/error.hpp>

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>

namespace prosumpi {

/**
 * Finite, uniformly spaced amplitude grid over which all histograms live.
 *
 * The grid is fixed by two reference bins whose values are stored exactly:
 * the end points for the (p_min, p_max, n_bins) constructor, or an anchor
 * level (zero for power increments, a constant training level) plus one end
 * point for anchored(). Other bin values are interpolated between them in
 * extended precision and rounded once.
 *
 * Quantization rounds to the nearest bin; exact half-way values go to the
 * higher index. Out-of-range values clamp to the boundary bins.
 */
class QuantizedDomain {
public:
    QuantizedDomain() = default;

    QuantizedDomain(double p_min, double p_max, std::size_t n_bins)
        : QuantizedDomain(checked(p_min, p_max, n_bins), 0, p_min, n_bins - 1, p_max) {}

    /// Grid of @p n_bins covering roughly [lo, hi] such that @p anchor is exactly a bin value.
    static QuantizedDomain anchored(double anchor, double lo, double hi, std::size_t n_bins) {
        checked(lo, hi, n_bins);
        if (!std::isfinite(anchor) || anchor < lo || anchor > hi)
            throw ConfigError("domain anchor must lie within [lo, hi]");
        const double delta = (hi - lo) / static_cast<double>(n_bins - 1);
        double idx = std::floor((anchor - lo) / delta + 0.5);
        if (idx < 0) idx = 0;
        if (idx > static_cast<double>(n_bins - 1)) idx = static_cast<double>(n_bins - 1);
        const auto a = static_cast<std::size_t>(idx);
        const std::size_t ref = a == n_bins - 1 ? 0 : n_bins - 1;
        const double ref_value = anchor + (static_cast<double>(ref) - static_cast<double>(a)) * delta;
        return QuantizedDomain(n_bins, a, anchor, ref, ref_value);
    }

    double p_min() const noexcept { return p_min_; }
    double p_max() const noexcept { return p_max_; }
    std::size_t n_bins() const noexcept { return n_bins_; }
    double delta_p() const noexcept { return delta_; }
    std::size_t anchor_index() const noexcept { return anchor_index_; }
    double anchor_value() const noexcept { return anchor_value_; }
    std::size_t reference_index() const noexcept { return ref_index_; }
    double reference_value() const noexcept { return ref_value_; }

    double bin_value(std::size_t k) const noexcept {
        if (k == anchor_index_) return anchor_value_;
        if (k == ref_index_) return ref_value_;
        using ext = long double;
        const ext steps = static_cast<ext>(k) - static_cast<ext>(anchor_index_);
        const ext span = static_cast<ext>(ref_value_) - static_cast<ext>(anchor_value_);
        const ext width = static_cast<ext>(ref_index_) - static_cast<ext>(anchor_index_);
        return static_cast<double>(static_cast<ext>(anchor_value_) + steps * span / width);
    }

    std::size_t quantize(double value) const {
        if (!std::isfinite(value)) throw InputError("cannot quantize non-finite value");
        const double pos = static_cast<double>(anchor_index_) + (value - anchor_value_) / delta_;
        const double r = std::floor(pos + 0.5);
        if (r <= 0.0) return 0;
        if (r >= static_cast<double>(n_bins_ - 1)) return n_bins_ - 1;
        return static_cast<std::size_t>(r);
    }

    friend bool operator==(const QuantizedDomain& a, const QuantizedDomain& b) noexcept {
        return a.n_bins_ == b.n_bins_ && a.anchor_index_ == b.anchor_index_ &&
               a.anchor_value_ == b.anchor_value_ && a.ref_index_ == b.ref_index_ && a.ref_value_ == b.ref_value_;
    }

    // Raw constructor used by snapshot restore.
    static QuantizedDomain from_parts(std::size_t n_bins, std::size_t anchor_index, double anchor_value,
                                      std::size_t ref_index, double ref_value) {
        if (n_bins < 2 || anchor_index >= n_bins || ref_index >= n_bins || !std::isfinite(anchor_value) ||
            !std::isfinite(ref_value) || anchor_index == ref_index ||
            (ref_index > anchor_index) != (ref_value > anchor_value) || ref_value == anchor_value)
            throw SnapshotError("invalid quantized domain parameters");
        return QuantizedDomain(n_bins, anchor_index, anchor_value, ref_index, ref_value);
    }

private:
    static std::size_t checked(double lo, double hi, std::size_t n_bins) {
        if (!std::isfinite(lo) || !std::isfinite(hi) || !(lo < hi))
            throw ConfigError("quantized domain requires finite p_min < p_max");
        if (n_bins < 2) throw ConfigError("quantized domain requires at least 2 bins");
        return n_bins;
    }

    QuantizedDomain(std::size_t n_bins, std::size_t anchor_index, double anchor_value, std::size_t ref_index,
                    double ref_value)
        : n_bins_(n_bins),
          anchor_index_(anchor_index),
          anchor_value_(anchor_value),
          ref_index_(ref_index),
          ref_value_(ref_value) {
        delta_ = (ref_value - anchor_value) / (static_cast<double>(ref_index) - static_cast<double>(anchor_index));
        if (!std::isfinite(delta_) || !(delta_ > 0)) throw ConfigError("quantized domain requires a positive bin width");
        p_min_ = bin_value(0);
        p_max_ = bin_value(n_bins - 1);
    }

    std::size_t n_bins_ = 0;
    std::size_t anchor_index_ = 0;
    double anchor_value_ = 0.0;
    std::size_t ref_index_ = 1;
    double ref_value_ = 1.0;
    double delta_ = 1.0;
    double p_min_ = 0.0;
    double p_max_ = 1.0;
};

}  // namespace prosumpi

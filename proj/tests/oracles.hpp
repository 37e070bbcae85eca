#pragma once

// Brute-force reference implementations used only by tests. They take plain
// vectors and never call into the code paths they check.

#include <cmath>
#include <cstddef>
#include <limits>
#include <utility>
#include <vector>

namespace oracle {

/// Nearest grid point by linear scan over all bin values; ties go to the higher index.
inline std::size_t nearest_bin(const std::vector<double>& grid, double value) {
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const double d = std::fabs(grid[k] - value);
        if (d <= best_d) {
            best_d = d;
            best = k;
        }
    }
    return best;
}

/// Linear-scan quantile pair over a mass vector: lower = inf{k : F(k) >= (1-a)/2},
/// upper = sup{k : F(k) <= (1+a)/2}, upper clamped up to lower. F is the running
/// sum of normalized masses. @p slack widens both thresholds like the implementation.
inline std::pair<std::size_t, std::size_t> quantile_scan(const std::vector<double>& mass, double alpha,
                                                         double slack) {
    double total = 0.0;
    for (double m : mass) total += m;
    const double lo_q = (1.0 - alpha) / 2.0 - slack;
    const double hi_q = (1.0 + alpha) / 2.0 + slack;
    std::vector<double> cdf(mass.size());
    double run = 0.0;
    for (std::size_t k = 0; k < mass.size(); ++k) {
        run += mass[k] / total;
        cdf[k] = run;
    }
    std::size_t lower = mass.size() - 1;
    for (std::size_t k = 0; k < mass.size(); ++k)
        if (cdf[k] >= lo_q) {
            lower = k;
            break;
        }
    bool found = false;
    std::size_t upper = 0;
    for (std::size_t k = 0; k < mass.size(); ++k)
        if (cdf[k] <= hi_q) {
            upper = k;
            found = true;
        }
    if (!found || upper < lower) upper = lower;
    return {lower, upper};
}

inline std::size_t argmin_distance(const std::vector<std::vector<double>>& centroids, const std::vector<double>& x) {
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t l = 0; l < centroids.size(); ++l) {
        double d = 0.0;
        for (std::size_t k = 0; k < x.size(); ++k) d += (x[k] - centroids[l][k]) * (x[k] - centroids[l][k]);
        d = std::sqrt(d);
        if (d < best_d) {
            best_d = d;
            best = l;
        }
    }
    return best;
}

}  // namespace oracle

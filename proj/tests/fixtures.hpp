#pragma once

// Shared test inputs: the worked quantile example and a histogram builder.

#include <prosumpi/domain.hpp>
#include <prosumpi/histogram.hpp>

#include <vector>

namespace prosumpi::fixture {

// Histogram with the given normalized masses, built through decay updates so
// that the same code path as streaming use is exercised.
inline ForgettingHistogram from_masses(const QuantizedDomain& d, const std::vector<double>& target) {
    ForgettingHistogram h(d);
    double cumulative = 0.0;
    for (std::size_t k = 0; k < target.size(); ++k) {
        if (target[k] <= 0.0) continue;
        cumulative += target[k];
        if (h.empty()) {
            h.decay_update(d.bin_value(k), 0.5);
        } else {
            // new mass share target[k] / cumulative keeps earlier bins proportional
            h.decay_update(d.bin_value(k), 1.0 - target[k] / cumulative);
        }
    }
    return h;
}

// Discrete CDF of the worked quantile example: 54 points from -4 to 3.95.
inline const std::vector<double> kWorkedCdf{
    5.1e-05,  9.7e-05,  0.000162, 0.000258, 0.000447, 0.000748, 0.001237, 0.002007, 0.003203, 0.005036, 0.007726,
    0.011577, 0.016824, 0.024127, 0.033967, 0.046941, 0.063761, 0.084915, 0.110629, 0.141937, 0.17813,  0.219784,
    0.266515, 0.318033, 0.3735,   0.431087, 0.490521, 0.550297, 0.608788, 0.664944, 0.717817, 0.766403, 0.809381,
    0.847385, 0.87984,  0.907301, 0.929822, 0.947923, 0.96199,  0.972757, 0.980903, 0.986871, 0.991198, 0.994202,
    0.99628,  0.997648, 0.99853,  0.99909,  0.999464, 0.999717, 0.999837, 0.999909, 0.999948, 1.0};

}  // namespace prosumpi::fixture

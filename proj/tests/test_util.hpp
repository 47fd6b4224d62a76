#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "varcalc/varcalc.hpp"

namespace test_util {

inline std::mt19937_64 rng(std::uint64_t seed = 12345) { return std::mt19937_64(seed); }

/// Least-squares slope of log(err) against log(scale).
inline double order_of(const std::vector<double>& scales, const std::vector<double>& errors) {
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < scales.size(); ++i) {
        if (errors[i] > 1e-14) {
            xs.push_back(std::log(scales[i]));
            ys.push_back(std::log(errors[i]));
        }
    }
    return varcalc::detail::fit_slope(xs, ys);
}

inline varcalc::GridFunction sin_function(varcalc::PeriodicGrid g, int q = 1) {
    return varcalc::GridFunction::sample(g, [&](double x) { return std::sin(q * x); });
}

inline varcalc::GridFunction cos_function(varcalc::PeriodicGrid g, int q = 1) {
    return varcalc::GridFunction::sample(g, [&](double x) { return std::cos(q * x); });
}

} // namespace test_util

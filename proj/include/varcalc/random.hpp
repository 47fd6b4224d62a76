#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "varcalc/grid.hpp"

namespace varcalc {

/// Uniform double in [0, 1) from the raw engine bits. Used instead of
/// std::uniform_real_distribution so streams are identical across standard
/// library implementations (the CLI determinism contract).
inline double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
    return lo + (hi - lo) * uniform01(rng);
}

inline int uniform_int(std::mt19937_64& rng, int lo, int hi) {
    return lo + static_cast<int>(rng() % static_cast<std::uint64_t>(hi - lo + 1));
}

/// Random element of E: a trigonometric polynomial with frequencies up to
/// max_freq and coefficients decaying like 1/(1+q). Smooth by construction,
/// so p_k stays moderate for every k.
inline GridFunction random_smooth_function(PeriodicGrid g, std::mt19937_64& rng,
                                           int max_freq = 4, double amplitude = 1.0) {
    GridFunction u(g);
    for (int c = 0; c < g.dim; ++c) {
        const int qmax = (g.nodes == 1) ? 0 : std::min(max_freq, g.nodes / 4);
        for (int q = 0; q <= qmax; ++q) {
            double a = amplitude * uniform(rng, -1.0, 1.0) / (1.0 + q);
            double b = amplitude * uniform(rng, -1.0, 1.0) / (1.0 + q);
            for (int i = 0; i < g.nodes; ++i) {
                double x = g.node(i);
                u.at(i, c) += a * std::cos(q * x) + b * std::sin(q * x);
            }
        }
    }
    return u;
}

/// Random nodewise values in [-amplitude, amplitude] (no smoothness).
inline GridFunction random_function(PeriodicGrid g, std::mt19937_64& rng, double amplitude = 1.0) {
    GridFunction u(g);
    for (int i = 0; i < g.nodes; ++i)
        for (int c = 0; c < g.dim; ++c) u.at(i, c) = uniform(rng, -amplitude, amplitude);
    return u;
}

inline DualDensity random_density(PeriodicGrid g, std::mt19937_64& rng, int max_freq = 4,
                                  double amplitude = 1.0) {
    return DualDensity(random_smooth_function(g, rng, max_freq, amplitude));
}

} // namespace varcalc

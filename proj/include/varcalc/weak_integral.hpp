#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "varcalc/error.hpp"
#include "varcalc/grid.hpp"
#include "varcalc/random.hpp"
#include "varcalc/time_grid.hpp"

namespace varcalc {

namespace detail {

template <class V>
void check_curve_samples(const TimeGrid& tg, const std::vector<V>& samples) {
    if (static_cast<int>(samples.size()) != tg.samples())
        throw config_error("sampled curve: sample count does not match time grid");
}

} // namespace detail

/// Continuous curve [a, b] -> E* sampled on a uniform time grid; all samples
/// live on one PeriodicGrid.
struct DualCurve {
    TimeGrid tg;
    std::vector<DualDensity> samples;

    DualCurve(TimeGrid time, std::vector<DualDensity> values)
        : tg(time), samples(std::move(values)) {
        detail::check_curve_samples(tg, samples);
        for (const DualDensity& s : samples)
            if (!(s.grid() == samples.front().grid()))
                throw grid_mismatch_error("DualCurve: samples live on different grids");
    }

    template <class F>
    static DualCurve from_function(TimeGrid time, F&& f) {
        std::vector<DualDensity> values;
        values.reserve(static_cast<std::size_t>(time.samples()));
        for (int j = 0; j < time.samples(); ++j) values.push_back(f(time.node(j)));
        return DualCurve(time, std::move(values));
    }

    const PeriodicGrid& grid() const { return samples.front().grid(); }
};

/// Curve [a, b] -> E, same layout.
struct PrimalCurve {
    TimeGrid tg;
    std::vector<GridFunction> samples;

    PrimalCurve(TimeGrid time, std::vector<GridFunction> values)
        : tg(time), samples(std::move(values)) {
        detail::check_curve_samples(tg, samples);
        for (const GridFunction& s : samples)
            if (!(s.grid() == samples.front().grid()))
                throw grid_mismatch_error("PrimalCurve: samples live on different grids");
    }

    template <class F>
    static PrimalCurve from_function(TimeGrid time, F&& f) {
        std::vector<GridFunction> values;
        values.reserve(static_cast<std::size_t>(time.samples()));
        for (int j = 0; j < time.samples(); ++j) values.push_back(f(time.node(j)));
        return PrimalCurve(time, std::move(values));
    }

    const PeriodicGrid& grid() const { return samples.front().grid(); }
};

/// The weak vector-valued integral of a dual curve: the functional v with
/// pair(v, e) = quadrature of t -> pair(F(t), e) for every e. In the
/// discretized model v is the weighted sum of the sample densities, so the
/// defining property holds by reassociation of a finite sum.
inline DualDensity integrate_dual_curve(const DualCurve& F, const Quadrature& Q = {}) {
    return Q.integrate(F.tg, F.samples);
}

/// Same construction for curves valued in E itself.
inline GridFunction integrate_primal_curve(const PrimalCurve& G, const Quadrature& Q = {}) {
    return Q.integrate(G.tg, G.samples);
}

namespace detail {

/// Running integral of node samples: C_0 = 0, C_1 by the 3-point rule
/// (dt/12)(5 f_0 + 8 f_1 - f_2), then C_{j+1} = C_{j-1} + Simpson over
/// [t_{j-1}, t_{j+1}]. On an even step count the chain through the even nodes
/// telescopes to composite Simpson exactly.
template <class V>
std::vector<V> cumulative_samples(const TimeGrid& tg, const std::vector<V>& f) {
    check_curve_samples(tg, f);
    if (tg.steps < 2) throw config_error("cumulative integral: need at least 2 steps");
    const double dt = tg.dt();
    std::vector<V> c;
    c.reserve(f.size());
    V zero = f[0];
    zero *= 0.0;
    c.push_back(zero);

    V first = f[0];
    first *= 5.0 * dt / 12.0;
    first.axpy(8.0 * dt / 12.0, f[1]);
    first.axpy(-dt / 12.0, f[2]);
    c.push_back(std::move(first));

    for (int j = 1; j + 1 <= tg.steps; ++j) {
        V next = c[static_cast<std::size_t>(j - 1)];
        next.axpy(dt / 3.0, f[static_cast<std::size_t>(j - 1)]);
        next.axpy(4.0 * dt / 3.0, f[static_cast<std::size_t>(j)]);
        next.axpy(dt / 3.0, f[static_cast<std::size_t>(j + 1)]);
        c.push_back(std::move(next));
    }
    return c;
}

} // namespace detail

/// t_j |-> integral of F over [a, t_j]; the first sample is the zero
/// functional.
inline DualCurve cumulative_integral(const DualCurve& F) {
    return DualCurve(F.tg, detail::cumulative_samples(F.tg, F.samples));
}

inline std::vector<double> cumulative_integral(const TimeGrid& tg, const std::vector<double>& f) {
    detail::check_curve_samples(tg, f);
    if (tg.steps < 2) throw config_error("cumulative integral: need at least 2 steps");
    const double dt = tg.dt();
    std::vector<double> c(f.size(), 0.0);
    c[1] = dt / 12.0 * (5.0 * f[0] + 8.0 * f[1] - f[2]);
    for (int j = 1; j + 1 <= tg.steps; ++j)
        c[static_cast<std::size_t>(j + 1)] = c[static_cast<std::size_t>(j - 1)]
            + dt / 3.0 * (f[static_cast<std::size_t>(j - 1)] + 4.0 * f[static_cast<std::size_t>(j)]
                          + f[static_cast<std::size_t>(j + 1)]);
    return c;
}

struct WeakPropertyReport {
    double max_rel_discrepancy = 0.0;
    double max_abs_discrepancy = 0.0;
    int probes = 0;
};

/// Checks the defining property of the weak integral against randomized
/// probes e: |pair(v, e) - quadrature(t -> pair(F(t), e))|, reported both
/// absolutely and relative to max(1, |pair(v, e)|). For v produced by
/// integrate_dual_curve with the same rule the two sides are the same finite
/// sum reassociated, so the discrepancy is pure roundoff (<= 1e-12).
inline WeakPropertyReport verify_weak_property(const DualCurve& F, const DualDensity& v,
                                               int probes, const Quadrature& Q,
                                               std::mt19937_64& rng) {
    if (!(v.grid() == F.grid()))
        throw grid_mismatch_error("verify_weak_property: integral lives on a different grid");
    WeakPropertyReport report;
    report.probes = probes;
    auto w = Q.node_weights(F.tg);
    for (int p = 0; p < probes; ++p) {
        GridFunction e = random_smooth_function(F.grid(), rng);
        double lhs = pair(v, e);
        double rhs = 0.0;
        for (int j = 0; j < F.tg.samples(); ++j)
            rhs += w[static_cast<std::size_t>(j)] * pair(F.samples[static_cast<std::size_t>(j)], e);
        double diff = std::abs(lhs - rhs);
        report.max_abs_discrepancy = std::max(report.max_abs_discrepancy, diff);
        report.max_rel_discrepancy =
            std::max(report.max_rel_discrepancy, diff / std::max(1.0, std::abs(lhs)));
    }
    return report;
}

} // namespace varcalc

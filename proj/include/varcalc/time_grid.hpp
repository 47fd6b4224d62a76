#pragma once

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "varcalc/error.hpp"

namespace varcalc {

/// Uniform time grid t_0 < ... < t_M on [a, b]; `steps` is the cell count M.
struct TimeGrid {
    double t_begin = 0.0;
    double t_end = 1.0;
    int steps = 8;

    TimeGrid() = default;
    TimeGrid(double a, double b, int m) : t_begin(a), t_end(b), steps(m) {
        if (!(std::isfinite(a) && std::isfinite(b)) || !(b > a))
            throw config_error("TimeGrid: need finite a < b");
        if (m < 1) throw config_error("TimeGrid: need at least one step");
    }

    double dt() const { return (t_end - t_begin) / steps; }
    double length() const { return t_end - t_begin; }
    int samples() const { return steps + 1; }
    double node(int j) const { return t_begin + (t_end - t_begin) * static_cast<double>(j) / steps; }

    friend bool operator==(const TimeGrid&, const TimeGrid&) = default;
};

namespace detail {

/// 4th-order five-point first-derivative rows on a uniform non-periodic grid.
/// Interior nodes use the centered stencil; the two nodes at each end use
/// one-sided closures of the same order. Coefficients are in units of 1/(12 dt).
struct TimeStencilRow {
    int first;                    // index of the first sample the row touches
    std::array<double, 5> coeff;  // multiplied by 1/(12 dt)
};

inline TimeStencilRow time_stencil_row(int j, int last) {
    if (j >= 2 && j <= last - 2) return {j - 2, {1.0, -8.0, 0.0, 8.0, -1.0}};
    if (j == 0) return {0, {-25.0, 48.0, -36.0, 16.0, -3.0}};
    if (j == 1) return {0, {-3.0, -10.0, 18.0, -6.0, 1.0}};
    if (j == last - 1) return {last - 4, {-1.0, 6.0, -18.0, 10.0, 3.0}};
    return {last - 4, {3.0, -16.0, 36.0, -48.0, 25.0}};  // j == last
}

} // namespace detail

/// 4th-order time differentiation of a sampled curve. V must support
/// copy, v *= s and v.axpy(s, other) (GridFunction, DualDensity) or be a
/// plain arithmetic type handled by the scalar overload below.
template <class V>
std::vector<V> time_derivative(const TimeGrid& tg, const std::vector<V>& samples) {
    const int last = tg.steps;
    if (static_cast<int>(samples.size()) != last + 1)
        throw config_error("time_derivative: sample count does not match time grid");
    if (last < 4)
        throw config_error("time_derivative: need at least 4 steps for the 4th-order stencil");
    const double scale = 1.0 / (12.0 * tg.dt());
    std::vector<V> out;
    out.reserve(samples.size());
    for (int j = 0; j <= last; ++j) {
        auto row = detail::time_stencil_row(j, last);
        V acc = samples[static_cast<std::size_t>(row.first)];
        acc *= row.coeff[0] * scale;
        for (int k = 1; k < 5; ++k)
            acc.axpy(row.coeff[static_cast<std::size_t>(k)] * scale,
                     samples[static_cast<std::size_t>(row.first + k)]);
        out.push_back(std::move(acc));
    }
    return out;
}

inline std::vector<double> time_derivative(const TimeGrid& tg, const std::vector<double>& samples) {
    const int last = tg.steps;
    if (static_cast<int>(samples.size()) != last + 1)
        throw config_error("time_derivative: sample count does not match time grid");
    if (last < 4)
        throw config_error("time_derivative: need at least 4 steps for the 4th-order stencil");
    const double scale = 1.0 / (12.0 * tg.dt());
    std::vector<double> out(samples.size(), 0.0);
    for (int j = 0; j <= last; ++j) {
        auto row = detail::time_stencil_row(j, last);
        double acc = 0.0;
        for (int k = 0; k < 5; ++k)
            acc += row.coeff[static_cast<std::size_t>(k)] * samples[static_cast<std::size_t>(row.first + k)];
        out[static_cast<std::size_t>(j)] = acc * scale;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Quadrature over [a, b] with values known at the time-grid nodes
// ---------------------------------------------------------------------------

/// Node-weight quadrature rules. Composite Simpson requires an even step
/// count. The per-cell Gauss-Legendre rule evaluates each cell integral on a
/// 4-point cubic reconstruction of the samples, so it also reduces to node
/// weights and is exact for cubics.
struct Quadrature {
    enum class Rule { CompositeSimpson, GaussLegendreCell };

    Rule rule = Rule::CompositeSimpson;
    int gauss_points = 3;

    static Quadrature simpson() { return {Rule::CompositeSimpson, 0}; }
    static Quadrature gauss(int q) { return {Rule::GaussLegendreCell, q}; }

    std::vector<double> node_weights(const TimeGrid& tg) const {
        const int m = tg.steps;
        const double dt = tg.dt();
        std::vector<double> w(static_cast<std::size_t>(m) + 1, 0.0);
        if (rule == Rule::CompositeSimpson) {
            if (m % 2 != 0)
                throw config_error("quadrature: composite Simpson requires an even number of steps, got "
                                   + std::to_string(m));
            if (m < 2) throw config_error("quadrature: composite Simpson requires at least 2 steps");
            for (int j = 0; j <= m; ++j) {
                double c = (j == 0 || j == m) ? 1.0 : (j % 2 == 1 ? 4.0 : 2.0);
                w[static_cast<std::size_t>(j)] = c * dt / 3.0;
            }
        } else {
            if (gauss_points < 1 || gauss_points > 5)
                throw config_error("quadrature: gauss point count must be in [1, 5]");
            if (m < 3) throw config_error("quadrature: per-cell Gauss rule requires at least 3 steps");
            auto [pts, wts] = gauss_rule(gauss_points);
            for (int cell = 0; cell < m; ++cell) {
                int base = std::min(std::max(cell - 1, 0), m - 3);
                for (int gp = 0; gp < gauss_points; ++gp) {
                    // Position of the Gauss point in units of dt from node `base`.
                    double xi = (cell - base) + 0.5 * (pts[static_cast<std::size_t>(gp)] + 1.0);
                    double gw = 0.5 * dt * wts[static_cast<std::size_t>(gp)];
                    for (int k = 0; k < 4; ++k) {
                        double lk = 1.0;
                        for (int l = 0; l < 4; ++l)
                            if (l != k) lk *= (xi - l) / (k - l);
                        w[static_cast<std::size_t>(base + k)] += gw * lk;
                    }
                }
            }
        }
        return w;
    }

    double integrate(const TimeGrid& tg, const std::vector<double>& samples) const {
        auto w = node_weights(tg);
        if (w.size() != samples.size())
            throw config_error("quadrature: sample count does not match time grid");
        double s = 0.0;
        for (std::size_t j = 0; j < w.size(); ++j) s += w[j] * samples[j];
        return s;
    }

    /// Weighted sum of vector-valued samples (GridFunction, DualDensity).
    template <class V>
    V integrate(const TimeGrid& tg, const std::vector<V>& samples) const {
        auto w = node_weights(tg);
        if (w.size() != samples.size())
            throw config_error("quadrature: sample count does not match time grid");
        V acc = samples[0];
        acc *= w[0];
        for (std::size_t j = 1; j < w.size(); ++j) acc.axpy(w[j], samples[j]);
        return acc;
    }

private:
    static std::pair<std::vector<double>, std::vector<double>> gauss_rule(int q) {
        switch (q) {
        case 1: return {{0.0}, {2.0}};
        case 2: {
            double p = 1.0 / std::sqrt(3.0);
            return {{-p, p}, {1.0, 1.0}};
        }
        case 3: {
            double p = std::sqrt(3.0 / 5.0);
            return {{-p, 0.0, p}, {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0}};
        }
        case 4: {
            double a = std::sqrt(3.0 / 7.0 - 2.0 / 7.0 * std::sqrt(6.0 / 5.0));
            double b = std::sqrt(3.0 / 7.0 + 2.0 / 7.0 * std::sqrt(6.0 / 5.0));
            double wa = (18.0 + std::sqrt(30.0)) / 36.0;
            double wb = (18.0 - std::sqrt(30.0)) / 36.0;
            return {{-b, -a, a, b}, {wb, wa, wa, wb}};
        }
        default: {
            double a = std::sqrt(5.0 - 2.0 * std::sqrt(10.0 / 7.0)) / 3.0;
            double b = std::sqrt(5.0 + 2.0 * std::sqrt(10.0 / 7.0)) / 3.0;
            double wa = (322.0 + 13.0 * std::sqrt(70.0)) / 900.0;
            double wb = (322.0 - 13.0 * std::sqrt(70.0)) / 900.0;
            return {{-b, -a, 0.0, a, b}, {wb, wa, 128.0 / 225.0, wa, wb}};
        }
        }
    }
};

} // namespace varcalc

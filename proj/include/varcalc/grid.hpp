#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "varcalc/error.hpp"

namespace varcalc {

inline constexpr double two_pi = 2.0 * std::numbers::pi_v<double>;

namespace detail {

inline bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

/// Shortest-round-trip decimal formatting; "%.17g" reproduces every double
/// bit-exactly on read-back, which the serialization contract relies on.
inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace detail

/// Uniform periodic grid on S^1 = [0, 2pi) carrying m-vector values.
///
/// N = 1 is the degenerate classical-mechanics reduction (E ~ R^m): spatial
/// stencils are disabled and the single pairing weight is the full measure
/// 2pi. Otherwise N must be a power of two >= 8 so refinement is node-nested.
struct PeriodicGrid {
    int nodes = 8;
    int dim = 1;

    PeriodicGrid() = default;
    PeriodicGrid(int n, int m) : nodes(n), dim(m) {
        if (m < 1)
            throw config_error("PeriodicGrid: fiber dimension m must be >= 1, got " + std::to_string(m));
        if (n != 1 && (n < 8 || !detail::is_power_of_two(n)))
            throw config_error("PeriodicGrid: N must be 1 or a power of two >= 8, got " + std::to_string(n));
    }

    double spacing() const { return two_pi / nodes; }
    double node(int i) const { return two_pi * static_cast<double>(i) / nodes; }
    /// Quadrature weight of the discrete L^2(S^1) pairing.
    double weight() const { return two_pi / nodes; }

    friend bool operator==(const PeriodicGrid&, const PeriodicGrid&) = default;
};

/// Discretized element of E = C^inf(S^1, R^m): m-vector values on the nodes
/// of a PeriodicGrid. Immutable value type in spirit; arithmetic returns new
/// objects and nothing here mutates shared state.
class GridFunction {
public:
    explicit GridFunction(PeriodicGrid g)
        : grid_(g), values_(static_cast<std::size_t>(g.nodes) * g.dim, 0.0) {}

    GridFunction(PeriodicGrid g, std::vector<double> values)
        : grid_(g), values_(std::move(values)) {
        if (values_.size() != static_cast<std::size_t>(grid_.nodes) * grid_.dim)
            throw config_error("GridFunction: value count does not match N*m");
        for (double v : values_)
            if (!std::isfinite(v))
                throw evaluation_error("GridFunction: non-finite entry in construction");
    }

    static GridFunction zero(PeriodicGrid g) { return GridFunction(g); }

    static GridFunction constant(PeriodicGrid g, double c) {
        GridFunction u(g);
        std::fill(u.values_.begin(), u.values_.end(), c);
        if (!std::isfinite(c)) throw evaluation_error("GridFunction::constant: non-finite value");
        return u;
    }

    /// Sample a scalar field x -> f(x); requires m == 1.
    template <class F>
    static GridFunction sample(PeriodicGrid g, F&& f) {
        if (g.dim != 1)
            throw config_error("GridFunction::sample: scalar sampling requires m == 1");
        GridFunction u(g);
        for (int i = 0; i < g.nodes; ++i) u.values_[static_cast<std::size_t>(i)] = f(g.node(i));
        return u;
    }

    /// Sample a vector field (x, c) -> f(x, c).
    template <class F>
    static GridFunction sample_vector(PeriodicGrid g, F&& f) {
        GridFunction u(g);
        for (int i = 0; i < g.nodes; ++i)
            for (int c = 0; c < g.dim; ++c) u.at(i, c) = f(g.node(i), c);
        return u;
    }

    const PeriodicGrid& grid() const { return grid_; }
    int nodes() const { return grid_.nodes; }
    int dim() const { return grid_.dim; }

    double at(int i, int c) const { return values_[static_cast<std::size_t>(i) * grid_.dim + c]; }
    double& at(int i, int c) { return values_[static_cast<std::size_t>(i) * grid_.dim + c]; }
    /// Periodic node access: i may be any integer.
    double at_wrapped(int i, int c) const {
        int n = grid_.nodes;
        int k = ((i % n) + n) % n;
        return at(k, c);
    }

    const std::vector<double>& raw() const { return values_; }
    std::vector<double>& raw() { return values_; }

    GridFunction& operator+=(const GridFunction& o) {
        check_same_grid(o);
        for (std::size_t k = 0; k < values_.size(); ++k) values_[k] += o.values_[k];
        return *this;
    }
    GridFunction& operator-=(const GridFunction& o) {
        check_same_grid(o);
        for (std::size_t k = 0; k < values_.size(); ++k) values_[k] -= o.values_[k];
        return *this;
    }
    GridFunction& operator*=(double s) {
        for (double& v : values_) v *= s;
        return *this;
    }
    /// *this += s * o
    GridFunction& axpy(double s, const GridFunction& o) {
        check_same_grid(o);
        for (std::size_t k = 0; k < values_.size(); ++k) values_[k] += s * o.values_[k];
        return *this;
    }

    friend GridFunction operator+(GridFunction a, const GridFunction& b) { return a += b; }
    friend GridFunction operator-(GridFunction a, const GridFunction& b) { return a -= b; }
    friend GridFunction operator*(double s, GridFunction a) { return a *= s; }
    friend GridFunction operator*(GridFunction a, double s) { return a *= s; }
    friend GridFunction operator-(GridFunction a) { return a *= -1.0; }

    /// Pointwise sup norm over nodes and components (the p_0 seminorm).
    double max_abs() const {
        double m = 0.0;
        for (double v : values_) m = std::max(m, std::abs(v));
        return m;
    }

    bool all_finite() const {
        for (double v : values_)
            if (!std::isfinite(v)) return false;
        return true;
    }

    friend bool operator==(const GridFunction& a, const GridFunction& b) {
        return a.grid_ == b.grid_ && a.values_ == b.values_;
    }

private:
    void check_same_grid(const GridFunction& o) const {
        if (!(grid_ == o.grid_))
            throw grid_mismatch_error("GridFunction: operands live on different grids");
    }

    PeriodicGrid grid_;
    std::vector<double> values_;
};

/// Full contraction sum_{i,c} u_i . v_i (no pairing weight).
inline double dot(const GridFunction& a, const GridFunction& b) {
    if (!(a.grid() == b.grid()))
        throw grid_mismatch_error("dot: operands live on different grids");
    double s = 0.0;
    for (std::size_t k = 0; k < a.raw().size(); ++k) s += a.raw()[k] * b.raw()[k];
    return s;
}

// ---------------------------------------------------------------------------
// Periodic finite differences
// ---------------------------------------------------------------------------

/// One application of the centered periodic first-derivative stencil.
/// order 4: (-u_{i+2} + 8 u_{i+1} - 8 u_{i-1} + u_{i-2}) / (12 h)
/// order 2: (u_{i+1} - u_{i-1}) / (2 h)
/// Exact on constants; on an N = 1 grid the derivative is identically zero.
inline GridFunction discrete_derivative_once(const GridFunction& u, int fd_order = 4) {
    const PeriodicGrid& g = u.grid();
    if (g.nodes == 1) return GridFunction::zero(g);
    if (fd_order != 2 && fd_order != 4)
        throw config_error("discrete_derivative: stencil order must be 2 or 4");
    const int width = (fd_order == 4) ? 5 : 3;
    if (g.nodes < width)
        throw config_error("discrete_derivative: stencil wider than grid");
    GridFunction d(g);
    const double h = g.spacing();
    for (int i = 0; i < g.nodes; ++i) {
        for (int c = 0; c < g.dim; ++c) {
            double v;
            if (fd_order == 4) {
                v = (-u.at_wrapped(i + 2, c) + 8.0 * u.at_wrapped(i + 1, c)
                     - 8.0 * u.at_wrapped(i - 1, c) + u.at_wrapped(i - 2, c)) / (12.0 * h);
            } else {
                v = (u.at_wrapped(i + 1, c) - u.at_wrapped(i - 1, c)) / (2.0 * h);
            }
            d.at(i, c) = v;
        }
    }
    return d;
}

/// j-fold application of the first-derivative stencil.
inline GridFunction discrete_derivative(const GridFunction& u, int j, int fd_order = 4) {
    if (j < 0) throw config_error("discrete_derivative: order must be >= 0");
    GridFunction d = u;
    for (int k = 0; k < j; ++k) d = discrete_derivative_once(d, fd_order);
    return d;
}

// ---------------------------------------------------------------------------
// Seminorm family
// ---------------------------------------------------------------------------

/// The generating seminorms of the discrete C^inf topology:
/// p_k(u) = max_{j <= k} max_i |D^j u(x_i)|  (max over vector components).
struct SeminormFamily {
    int max_order = 8;
    int fd_order = 4;

    double operator()(const GridFunction& u, int k) const {
        if (k < 0 || k > max_order)
            throw unsupported_error("seminorm: order " + std::to_string(k)
                                    + " outside supported range [0, " + std::to_string(max_order) + "]");
        double p = u.max_abs();
        GridFunction d = u;
        for (int j = 1; j <= k; ++j) {
            d = discrete_derivative_once(d, fd_order);
            p = std::max(p, d.max_abs());
        }
        return p;
    }
};

/// p_k with the default family.
inline double seminorm(const GridFunction& u, int k) { return SeminormFamily{}(u, k); }

// ---------------------------------------------------------------------------
// Dual densities
// ---------------------------------------------------------------------------

/// Element of E* represented by an L^2 density: l(u) = (2pi/N) sum_i rho_i . u_i.
class DualDensity {
public:
    explicit DualDensity(GridFunction rho) : density_(std::move(rho)) {}
    static DualDensity zero(PeriodicGrid g) { return DualDensity(GridFunction::zero(g)); }

    const GridFunction& density() const { return density_; }
    const PeriodicGrid& grid() const { return density_.grid(); }

    DualDensity& operator+=(const DualDensity& o) { density_ += o.density_; return *this; }
    DualDensity& operator-=(const DualDensity& o) { density_ -= o.density_; return *this; }
    DualDensity& operator*=(double s) { density_ *= s; return *this; }
    DualDensity& axpy(double s, const DualDensity& o) { density_.axpy(s, o.density_); return *this; }

    friend DualDensity operator+(DualDensity a, const DualDensity& b) { return a += b; }
    friend DualDensity operator-(DualDensity a, const DualDensity& b) { return a -= b; }
    friend DualDensity operator*(double s, DualDensity a) { return a *= s; }
    friend DualDensity operator*(DualDensity a, double s) { return a *= s; }

private:
    GridFunction density_;
};

/// The discrete L^2(S^1) pairing l(u).
inline double pair(const DualDensity& l, const GridFunction& u) {
    if (!(l.grid() == u.grid()))
        throw grid_mismatch_error("pair: density and function live on different grids");
    return u.grid().weight() * dot(l.density(), u);
}

/// Coordinate-evaluation functional: pair(., u) = u(i, c). These densities
/// separate points of the discretized E.
inline DualDensity coordinate_density(PeriodicGrid g, int i, int c) {
    if (i < 0 || i >= g.nodes || c < 0 || c >= g.dim)
        throw config_error("coordinate_density: node or component out of range");
    GridFunction rho(g);
    rho.at(i, c) = 1.0 / g.weight();
    return DualDensity(std::move(rho));
}

// ---------------------------------------------------------------------------
// Refinement
// ---------------------------------------------------------------------------

/// Refine to 2N nodes. Even nodes copy the original values exactly; odd nodes
/// are filled by 4-point centered cubic interpolation, which preserves
/// constants exactly.
inline GridFunction refine(const GridFunction& u) {
    const PeriodicGrid& g = u.grid();
    if (g.nodes == 1)
        throw unsupported_error("refine: not defined on the N = 1 classical grid");
    PeriodicGrid fine(2 * g.nodes, g.dim);
    GridFunction r(fine);
    for (int i = 0; i < g.nodes; ++i) {
        for (int c = 0; c < g.dim; ++c) {
            r.at(2 * i, c) = u.at(i, c);
            r.at(2 * i + 1, c) = (-u.at_wrapped(i - 1, c) + 9.0 * u.at(i, c)
                                  + 9.0 * u.at_wrapped(i + 1, c) - u.at_wrapped(i + 2, c)) / 16.0;
        }
    }
    return r;
}

/// Restriction to even nodes; exact left inverse of refine.
inline GridFunction restrict_to_even(const GridFunction& u) {
    const PeriodicGrid& g = u.grid();
    if (g.nodes < 16 || g.nodes % 2 != 0)
        throw config_error("restrict_to_even: coarse grid would be invalid");
    PeriodicGrid coarse(g.nodes / 2, g.dim);
    GridFunction r(coarse);
    for (int i = 0; i < coarse.nodes; ++i)
        for (int c = 0; c < g.dim; ++c) r.at(i, c) = u.at(2 * i, c);
    return r;
}

// ---------------------------------------------------------------------------
// Serialization (plain-text columnar format, see docs/formats.md)
// ---------------------------------------------------------------------------

inline void write_grid_function(std::ostream& os, const GridFunction& u) {
    os << "# " << u.nodes() << ' ' << u.dim() << ' ' << detail::format_double(two_pi) << '\n';
    for (int i = 0; i < u.nodes(); ++i) {
        for (int c = 0; c < u.dim(); ++c) {
            if (c) os << ' ';
            os << detail::format_double(u.at(i, c));
        }
        os << '\n';
    }
}

inline GridFunction read_grid_function(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw io_error("grid function: missing header line");
    std::istringstream hs(line);
    char hash = 0;
    int n = 0, m = 0;
    double period = 0.0;
    hs >> hash >> n >> m >> period;
    if (hash != '#' || !hs)
        throw io_error("grid function: malformed header, expected '# N m period'");
    if (std::abs(period - two_pi) > 1e-12)
        throw io_error("grid function: period must be 2*pi");
    PeriodicGrid g(n, m);
    std::vector<double> values;
    values.reserve(static_cast<std::size_t>(n) * m);
    for (int i = 0; i < n; ++i) {
        if (!std::getline(is, line)) throw io_error("grid function: truncated data");
        std::istringstream ls(line);
        for (int c = 0; c < m; ++c) {
            double v;
            if (!(ls >> v)) throw io_error("grid function: row " + std::to_string(i) + " is short");
            values.push_back(v);
        }
    }
    return GridFunction(g, std::move(values));
}

} // namespace varcalc

#pragma once

#include <cmath>
#include <string>

#include "varcalc/error.hpp"
#include "varcalc/grid.hpp"
#include "varcalc/lagrangian.hpp"

namespace varcalc {

/// How Gateaux derivatives are evaluated. The finite-difference step
/// discretizes the limit xi -> 0: it is taken relative to the p_0 seminorm of
/// the base point of the perturbed slot, with an absolute floor for
/// degenerate base points.
struct DiffConfig {
    enum class Backend { Analytic, FiniteDifference };

    Backend backend = Backend::Analytic;
    double fd_step = 1e-5;
    double fd_floor = 1e-7;
    int fd_order = 4;  // 2 or 4

    double step_for(double base_scale) const {
        return std::max(fd_step * base_scale, fd_floor);
    }

    static DiffConfig analytic() { return {}; }
    static DiffConfig finite_difference() { return {Backend::FiniteDifference, 1e-5, 1e-7, 4}; }
};

/// Slot-wise Gateaux derivative
///   D_1 L(u,e)(f) = lim_{xi->0} (L(u + xi f, e) - L(u, e)) / xi
/// and symmetrically for slot 2.
inline double partial_derivative(const LagrangianSpec& L, const GridFunction& u,
                                 const GridFunction& e, const GridFunction& f, int slot,
                                 const DiffConfig& cfg = {}) {
    if (slot != 1 && slot != 2) throw config_error("partial_derivative: slot must be 1 or 2");
    if (!(u.grid() == e.grid()) || !(u.grid() == f.grid()))
        throw grid_mismatch_error("partial_derivative: arguments live on different grids");

    if (cfg.backend == DiffConfig::Backend::Analytic) {
        if (!L.has_analytic_densities())
            throw unsupported_error("partial_derivative: analytic backend requires a builtin Lagrangian");
        return u.grid().weight() * dot(L.analytic_density(slot, u, e), f);
    }

    if (cfg.fd_order != 2 && cfg.fd_order != 4)
        throw config_error("partial_derivative: fd_order must be 2 or 4");
    const GridFunction& base = (slot == 1) ? u : e;
    const double xi = cfg.step_for(base.max_abs());
    auto probe = [&](double s) {
        GridFunction p = base;
        p.axpy(s, f);
        return (slot == 1) ? L.value(p, e) : L.value(u, p);
    };
    if (cfg.fd_order == 2) return (probe(xi) - probe(-xi)) / (2.0 * xi);
    return (-probe(2.0 * xi) + 8.0 * probe(xi) - 8.0 * probe(-xi) + probe(-2.0 * xi)) / (12.0 * xi);
}

/// Density representative of f |-> D_slot L(u,e)(f): the closed form when the
/// Lagrangian supplies one (and the backend allows it), otherwise assembled by
/// probing the N*m coordinate basis, each probe scaled by N/(2pi) to invert
/// the pairing weight.
inline DualDensity gradient_density(const LagrangianSpec& L, const GridFunction& u,
                                    const GridFunction& e, int slot, const DiffConfig& cfg = {}) {
    if (slot != 1 && slot != 2) throw config_error("gradient_density: slot must be 1 or 2");
    if (!(u.grid() == e.grid()))
        throw grid_mismatch_error("gradient_density: u and e live on different grids");

    const bool probe = (cfg.backend == DiffConfig::Backend::FiniteDifference)
                       || !L.has_analytic_densities();
    if (!probe) return DualDensity(L.analytic_density(slot, u, e));

    DiffConfig fd = cfg;
    fd.backend = DiffConfig::Backend::FiniteDifference;
    const PeriodicGrid& g = u.grid();
    GridFunction rho(g);
    const double invw = 1.0 / g.weight();
    for (int i = 0; i < g.nodes; ++i) {
        for (int c = 0; c < g.dim; ++c) {
            GridFunction basis(g);
            basis.at(i, c) = 1.0;
            rho.at(i, c) = invw * partial_derivative(L, u, e, basis, slot, fd);
        }
    }
    return DualDensity(std::move(rho));
}

/// Total derivative dL(u,e)(f,g) = D_1 L(u,e)(f) + D_2 L(u,e)(g).
inline double total_derivative(const LagrangianSpec& L, const GridFunction& u,
                               const GridFunction& e, const GridFunction& f,
                               const GridFunction& g, const DiffConfig& cfg = {}) {
    return partial_derivative(L, u, e, f, 1, cfg) + partial_derivative(L, u, e, g, 2, cfg);
}

} // namespace varcalc

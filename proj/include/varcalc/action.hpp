#pragma once

#include <cmath>
#include <vector>

#include "varcalc/calculus.hpp"
#include "varcalc/dubois_reymond.hpp"
#include "varcalc/error.hpp"
#include "varcalc/lagrangian.hpp"
#include "varcalc/time_grid.hpp"

namespace varcalc {

/// The action functional over [a, b]: quadrature of t -> L(u(t), u'(t)) along
/// the canonical lift of the curve.
inline double action(const LagrangianSpec& L, const Curve& c, const Quadrature& Q = {}) {
    std::vector<double> integrand(static_cast<std::size_t>(c.time_grid().samples()));
    for (int j = 0; j < c.time_grid().samples(); ++j)
        integrand[static_cast<std::size_t>(j)] = L.value(c.sample(j), c.velocity(j));
    return Q.integrate(c.time_grid(), integrand);
}

/// The deformed curve t -> u(t) + s A(t). Its recomputed lift equals
/// u'(t) + s A'(t) exactly because the time stencil is linear.
inline Curve perturb(const Curve& c, const VariationField& A, double s) {
    if (!(c.time_grid() == A.time_grid()))
        throw grid_mismatch_error("perturb: curve and variation use different time grids");
    if (!(c.grid() == A.grid()))
        throw grid_mismatch_error("perturb: curve and variation use different spatial grids");
    std::vector<GridFunction> samples;
    samples.reserve(static_cast<std::size_t>(c.time_grid().samples()));
    for (int j = 0; j < c.time_grid().samples(); ++j) {
        GridFunction v = c.sample(j);
        v.axpy(s, A.sample(j));
        samples.push_back(std::move(v));
    }
    return Curve(c.time_grid(), std::move(samples));
}

/// The two equivalent forms of the first variation of the action.
///   Direct:             d/ds at s = 0 of action(c + s A)
///   PartialDerivatives: quadrature of D1 L(u,u')(A) + D2 L(u,u')(A')
/// Their agreement within finite-difference plus quadrature tolerance is the
/// checkable content of the chain-rule step that turns criticality into the
/// weak Euler-Lagrange form.
enum class FirstVariationMode { Direct, PartialDerivatives };

inline double first_variation(const LagrangianSpec& L, const Curve& c, const VariationField& A,
                              FirstVariationMode mode, const DiffConfig& cfg = {},
                              const Quadrature& Q = {}) {
    if (!(c.time_grid() == A.time_grid()))
        throw grid_mismatch_error("first_variation: curve and variation use different time grids");
    if (!(c.grid() == A.grid()))
        throw grid_mismatch_error("first_variation: curve and variation use different spatial grids");

    if (mode == FirstVariationMode::Direct) {
        const double xi = cfg.step_for(c.max_p0());
        auto at = [&](double s) { return action(L, perturb(c, A, s), Q); };
        if (cfg.fd_order == 2) return (at(xi) - at(-xi)) / (2.0 * xi);
        return (-at(2.0 * xi) + 8.0 * at(xi) - 8.0 * at(-xi) + at(-2.0 * xi)) / (12.0 * xi);
    }

    std::vector<double> integrand(static_cast<std::size_t>(c.time_grid().samples()));
    for (int j = 0; j < c.time_grid().samples(); ++j) {
        integrand[static_cast<std::size_t>(j)] =
            partial_derivative(L, c.sample(j), c.velocity(j), A.sample(j), 1, cfg)
            + partial_derivative(L, c.sample(j), c.velocity(j), A.derivative(j), 2, cfg);
    }
    return Q.integrate(c.time_grid(), integrand);
}

} // namespace varcalc

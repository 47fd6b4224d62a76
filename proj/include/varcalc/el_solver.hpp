#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "varcalc/action.hpp"
#include "varcalc/calculus.hpp"
#include "varcalc/dubois_reymond.hpp"
#include "varcalc/error.hpp"
#include "varcalc/grid.hpp"
#include "varcalc/lagrangian.hpp"
#include "varcalc/time_grid.hpp"

namespace varcalc {

namespace detail {

/// Least-squares slope of y against x.
inline double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    double denom = n * sxx - sx * sx;
    return (n * sxy - sx * sy) / denom;
}

} // namespace detail

// ---------------------------------------------------------------------------
// Euler-Lagrange residual
// ---------------------------------------------------------------------------

/// Nodewise residual R(t_j) = rho_1(t_j) - (d/dt rho_2)(t_j) of the
/// Euler-Lagrange equations along a lifted curve, where rho_i is the density
/// of D_i L(u, u'). The residual lives on the interior nodes j in [4, M-4]:
/// the centered time stencil needs two nodes of clearance, and two more keep
/// the lift's one-sided closure rows out of the outer stencil (they carry a
/// different truncation constant and would cap the max-norm order at 3).
struct ELResidual {
    TimeGrid tg;
    int first_node = 4;
    std::vector<DualDensity> values;  // index k corresponds to node first_node + k
    double max_p0 = 0.0;
    double l2_time = 0.0;
};

inline ELResidual el_residual(const LagrangianSpec& L, const Curve& c, const DiffConfig& cfg = {}) {
    const TimeGrid& tg = c.time_grid();
    if (tg.steps < 8) throw config_error("el_residual: need at least 8 time steps");

    std::vector<DualDensity> rho1, rho2;
    rho1.reserve(static_cast<std::size_t>(tg.samples()));
    rho2.reserve(static_cast<std::size_t>(tg.samples()));
    for (int j = 0; j < tg.samples(); ++j) {
        rho1.push_back(gradient_density(L, c.sample(j), c.velocity(j), 1, cfg));
        rho2.push_back(gradient_density(L, c.sample(j), c.velocity(j), 2, cfg));
    }

    ELResidual res;
    res.tg = tg;
    res.first_node = 4;
    const double dt = tg.dt();
    double sum_sq = 0.0;
    for (int j = 4; j <= tg.steps - 4; ++j) {
        DualDensity drho2 = rho2[static_cast<std::size_t>(j - 2)];
        drho2 *= 1.0 / (12.0 * dt);
        drho2.axpy(-8.0 / (12.0 * dt), rho2[static_cast<std::size_t>(j - 1)]);
        drho2.axpy(8.0 / (12.0 * dt), rho2[static_cast<std::size_t>(j + 1)]);
        drho2.axpy(-1.0 / (12.0 * dt), rho2[static_cast<std::size_t>(j + 2)]);
        DualDensity r = rho1[static_cast<std::size_t>(j)] - drho2;
        res.max_p0 = std::max(res.max_p0, r.density().max_abs());
        sum_sq += c.grid().weight() * dot(r.density(), r.density());
        res.values.push_back(std::move(r));
    }
    res.l2_time = std::sqrt(dt * sum_sq);
    return res;
}

// ---------------------------------------------------------------------------
// Criticality verification
// ---------------------------------------------------------------------------

struct CriticalityReport {
    double max_normalized = 0.0;
    double tol = 0.0;
    int variations = 0;
    bool pass = false;
    std::vector<double> values;  // per-variation normalized first variations
};

namespace detail {

/// Deterministic direction modes: the first few coordinate evaluations
/// followed by low-frequency trigonometric fields, cycling over components.
inline std::vector<GridFunction> direction_modes(PeriodicGrid g, int count) {
    std::vector<GridFunction> dirs;
    for (int k = 0; static_cast<int>(dirs.size()) < count; ++k) {
        int c = k % g.dim;
        int mode = (k / g.dim) % (g.nodes == 1 ? 1 : 6);
        GridFunction y(g);
        switch (mode) {
        case 0:
            for (int i = 0; i < g.nodes; ++i) y.at(i, c) = 1.0;
            break;
        case 1: {
            int node = ((k / g.dim) / 6) % g.nodes;
            y.at(node, c) = 1.0;
            break;
        }
        case 2:
            for (int i = 0; i < g.nodes; ++i) y.at(i, c) = std::sin(g.node(i));
            break;
        case 3:
            for (int i = 0; i < g.nodes; ++i) y.at(i, c) = std::cos(g.node(i));
            break;
        case 4:
            for (int i = 0; i < g.nodes; ++i) y.at(i, c) = std::sin(2.0 * g.node(i));
            break;
        default:
            for (int i = 0; i < g.nodes; ++i) y.at(i, c) = std::cos(2.0 * g.node(i));
            break;
        }
        dirs.push_back(std::move(y));
    }
    return dirs;
}

} // namespace detail

/// Evaluates the direct first variation over a deterministic family of
/// compactly supported variations (bump centers crossed with direction modes)
/// and reports the maximum |T_c F(A)| normalized by p0(A) + p0(A').
inline CriticalityReport verify_critical(const LagrangianSpec& L, const Curve& c, int family_size,
                                         double tol, const DiffConfig& cfg = {},
                                         const Quadrature& Q = {}) {
    if (family_size < 1) throw config_error("verify_critical: family size must be positive");
    const TimeGrid& tg = c.time_grid();
    auto dirs = detail::direction_modes(c.grid(), family_size);

    CriticalityReport report;
    report.tol = tol;
    report.variations = family_size;
    const double len = tg.length();
    const double margin = VariationField::margin_cells * tg.dt();
    for (int k = 0; k < family_size; ++k) {
        double width = ((k % 2 == 0) ? 0.5 : 0.3) * len;
        double lo = tg.t_begin + margin + 0.5 * width;
        double hi = tg.t_end - margin - 0.5 * width;
        if (hi < lo) throw config_error("verify_critical: interval too short for bump supports");
        double frac = (family_size == 1) ? 0.5 : static_cast<double>(k) / (family_size - 1);
        double center = lo + frac * (hi - lo);
        // Smooth bumps only: a C^2 profile carries enough odd-even content to
        // floor the normalized first variation near 2e-6 on any curve.
        BumpProfile phi = BumpProfile::smooth_bump(center, width);
        VariationField A = make_test_variation(dirs[static_cast<std::size_t>(k)], phi, tg);
        double denom = A.max_p0() + A.max_p0_derivative();
        if (denom == 0.0) continue;
        double fv = first_variation(L, c, A, FirstVariationMode::Direct, cfg, Q);
        double normalized = std::abs(fv) / denom;
        report.values.push_back(normalized);
        report.max_normalized = std::max(report.max_normalized, normalized);
    }
    report.pass = report.max_normalized <= tol;
    return report;
}

// ---------------------------------------------------------------------------
// Solvers
// ---------------------------------------------------------------------------

struct SolveReport {
    explicit SolveReport(Curve c) : curve(std::move(c)) {}

    Curve curve;
    bool converged = true;
    int iterations = 0;
    double final_gradient_norm = 0.0;  // boundary-value solver, density units
    double residual_max_p0 = 0.0;
    double residual_l2 = 0.0;
    std::vector<double> energy;  // per node, time-stepping runs
};

namespace detail {

inline GridFunction force_density(const LagrangianSpec& L, const GridFunction& u,
                                  const GridFunction& zero_e, const DiffConfig& cfg) {
    if (L.has_analytic_densities()) return L.analytic_density(1, u, zero_e);
    DiffConfig fd = cfg;
    fd.backend = DiffConfig::Backend::FiniteDifference;
    return gradient_density(L, u, zero_e, 1, fd).density();
}

} // namespace detail

/// Stoermer-Verlet (velocity form) time stepping for Lagrangians with
/// separable kinetic form L(u,e) = 1/2 <e,e> + V-part. The Euler-Lagrange
/// equation then reads u'' = force(u) with force the slot-1 gradient density.
inline SolveReport solve_ivp(const LagrangianSpec& L, const GridFunction& u0,
                             const GridFunction& v0, const TimeGrid& tg,
                             const DiffConfig& cfg = {}) {
    if (!(u0.grid() == v0.grid()))
        throw grid_mismatch_error("solve_ivp: initial data live on different grids");
    if (tg.steps < 8) throw config_error("solve_ivp: need at least 8 time steps");
    if (!L.separable_kinetic())
        throw unsupported_error("solve_ivp: Lagrangian does not have the separable kinetic form "
                                "1/2 <e,e> + V(u)");

    const double dt = tg.dt();
    const GridFunction zero_e = GridFunction::zero(u0.grid());
    const double guard = 1e8 * (1.0 + u0.max_abs() + v0.max_abs() * tg.length());

    std::vector<GridFunction> samples;
    std::vector<double> energy;
    samples.reserve(static_cast<std::size_t>(tg.samples()));
    energy.reserve(static_cast<std::size_t>(tg.samples()));

    GridFunction u = u0;
    GridFunction v = v0;
    GridFunction a = detail::force_density(L, u, zero_e, cfg);
    samples.push_back(u);
    energy.push_back(0.5 * u.grid().weight() * dot(v, v) - L.value(u, zero_e));

    for (int step = 1; step <= tg.steps; ++step) {
        GridFunction v_half = v;
        v_half.axpy(0.5 * dt, a);
        u.axpy(dt, v_half);
        if (!u.all_finite() || u.max_abs() > guard)
            throw divergence_error("solve_ivp: solution exceeded the overflow guard at step "
                                       + std::to_string(step),
                                   step);
        a = detail::force_density(L, u, zero_e, cfg);
        v = v_half;
        v.axpy(0.5 * dt, a);
        samples.push_back(u);
        energy.push_back(0.5 * u.grid().weight() * dot(v, v) - L.value(u, zero_e));
    }

    SolveReport report(Curve(tg, std::move(samples)));
    report.iterations = tg.steps;
    report.energy = std::move(energy);
    ELResidual res = el_residual(L, report.curve, cfg);
    report.residual_max_p0 = res.max_p0;
    report.residual_l2 = res.l2_time;
    return report;
}

struct BvpOptions {
    int max_iterations = 50000;
    double gradient_tol = 1e-8;  // max-abs of the gradient in density units
    double armijo_slope = 1e-4;
    int max_backtracks = 60;
    // Give up when the best gradient norm has not improved for this many
    // iterations; reported as non-convergence with the final norm.
    int stagnation_window = 2000;
};

/// Direct method for the boundary-value problem: minimizes the action
/// discretized on cells,
///   S(u) = sum_j dt L((u_j + u_{j+1})/2, (u_{j+1} - u_j)/dt),
/// over the interior node values by gradient descent with Barzilai-Borwein
/// step proposals and Armijo backtracking. The exact gradient of S at node k
/// is, in density units, the midpoint discretization of
/// rho_1 - d/dt rho_2, so stationarity is the discrete Euler-Lagrange
/// equation. The cell-based difference quotient penalizes every mode
/// including the odd-even one, which node-based quadratures with wide
/// centered lift stencils leave uncontrolled.
///
/// Non-convergence is reported, not thrown. Like every direct method this
/// requires the endpoints to be closer than the first conjugate point; on
/// longer intervals the action is unbounded below and the iteration reports
/// failure.
inline SolveReport solve_bvp(const LagrangianSpec& L, const GridFunction& u_a,
                             const GridFunction& u_b, const TimeGrid& tg,
                             const BvpOptions& opt = {}, const DiffConfig& cfg = {}) {
    if (!(u_a.grid() == u_b.grid()))
        throw grid_mismatch_error("solve_bvp: endpoint data live on different grids");
    if (tg.steps < 8) throw config_error("solve_bvp: need at least 8 time steps");

    const int m_steps = tg.steps;
    const double dt = tg.dt();
    const PeriodicGrid& g = u_a.grid();
    const double wspace = g.weight();

    // Interior unknowns u_1 .. u_{M-1}; endpoints held fixed.
    std::vector<GridFunction> u(static_cast<std::size_t>(tg.samples()), GridFunction::zero(g));
    u.front() = u_a;
    u.back() = u_b;
    for (int j = 1; j < m_steps; ++j) {
        double s = static_cast<double>(j) / m_steps;
        GridFunction v = (1.0 - s) * u_a;
        v.axpy(s, u_b);
        u[static_cast<std::size_t>(j)] = std::move(v);
    }

    auto cell_densities = [&](const std::vector<GridFunction>& q, int cell) {
        GridFunction mid = q[static_cast<std::size_t>(cell)];
        mid += q[static_cast<std::size_t>(cell + 1)];
        mid *= 0.5;
        GridFunction diff = q[static_cast<std::size_t>(cell + 1)];
        diff -= q[static_cast<std::size_t>(cell)];
        diff *= 1.0 / dt;
        DiffConfig dcfg = cfg;
        if (!L.has_analytic_densities()) dcfg.backend = DiffConfig::Backend::FiniteDifference;
        GridFunction r1 = L.has_analytic_densities()
                              ? L.analytic_density(1, mid, diff)
                              : gradient_density(L, mid, diff, 1, dcfg).density();
        GridFunction r2 = L.has_analytic_densities()
                              ? L.analytic_density(2, mid, diff)
                              : gradient_density(L, mid, diff, 2, dcfg).density();
        return std::pair<GridFunction, GridFunction>(std::move(r1), std::move(r2));
    };

    auto objective = [&](const std::vector<GridFunction>& q) {
        double s = 0.0;
        for (int cell = 0; cell < m_steps; ++cell) {
            GridFunction mid = q[static_cast<std::size_t>(cell)];
            mid += q[static_cast<std::size_t>(cell + 1)];
            mid *= 0.5;
            GridFunction diff = q[static_cast<std::size_t>(cell + 1)];
            diff -= q[static_cast<std::size_t>(cell)];
            diff *= 1.0 / dt;
            s += dt * L.value(mid, diff);
        }
        return s;
    };

    // Gradient w.r.t. the interior nodes; entry k-1 corresponds to node k.
    auto gradient = [&](const std::vector<GridFunction>& q) {
        std::vector<GridFunction> grad(static_cast<std::size_t>(m_steps - 1), GridFunction::zero(g));
        auto prev = cell_densities(q, 0);
        for (int k = 1; k < m_steps; ++k) {
            auto next = cell_densities(q, k);
            GridFunction gk = prev.first;
            gk += next.first;
            gk *= 0.5 * dt;
            gk += prev.second;
            gk -= next.second;
            gk *= wspace;
            grad[static_cast<std::size_t>(k - 1)] = std::move(gk);
            prev = std::move(next);
        }
        return grad;
    };

    auto inner = [&](const std::vector<GridFunction>& a, const std::vector<GridFunction>& b) {
        double s = 0.0;
        for (std::size_t k = 0; k < a.size(); ++k) s += dot(a[k], b[k]);
        return s;
    };
    // Gradient entries scale like (2pi/N) dt (rho_1 - d/dt rho_2); report in
    // density units so tolerances read like residual tolerances.
    auto density_norm = [&](const std::vector<GridFunction>& grad) {
        double m = 0.0;
        for (const GridFunction& v : grad) m = std::max(m, v.max_abs());
        return m / (wspace * dt);
    };

    double value = objective(u);
    std::vector<GridFunction> grad = gradient(u);
    double step = dt * dt / (8.0 * wspace);  // ~ 1/lambda_max of the kinetic block
    std::vector<GridFunction> prev_u, prev_grad;

    // Nonmonotone (windowed) Armijo reference values; a strictly monotone
    // test stalls once |dS| reaches the roundoff floor of the objective.
    std::vector<double> recent_values{value};
    constexpr std::size_t nonmonotone_window = 10;

    int iter = 0;
    double best_gnorm = std::numeric_limits<double>::infinity();
    int since_improvement = 0;
    for (; iter < opt.max_iterations; ++iter) {
        double gnorm = density_norm(grad);
        if (gnorm <= opt.gradient_tol) break;
        if (gnorm < 0.7 * best_gnorm) {
            best_gnorm = gnorm;
            since_improvement = 0;
        } else if (++since_improvement > opt.stagnation_window) {
            break;
        }

        if (!prev_u.empty()) {
            // Barzilai-Borwein step from the last displacement pair.
            double sy = 0.0, yy = 0.0;
            for (std::size_t k = 0; k < grad.size(); ++k) {
                GridFunction s_k = u[k + 1] - prev_u[k];
                GridFunction y_k = grad[k] - prev_grad[k];
                sy += dot(s_k, y_k);
                yy += dot(y_k, y_k);
            }
            if (sy > 0.0 && yy > 0.0) step = sy / yy;
        }

        prev_u.assign(u.begin() + 1, u.end() - 1);
        prev_grad = grad;

        double g2 = inner(grad, grad);
        double reference = *std::max_element(recent_values.begin(), recent_values.end());
        double alpha = step;
        bool accepted = false;
        for (int bt = 0; bt < opt.max_backtracks; ++bt) {
            std::vector<GridFunction> trial = u;
            for (int k = 1; k < m_steps; ++k)
                trial[static_cast<std::size_t>(k)].axpy(-alpha, grad[static_cast<std::size_t>(k - 1)]);
            double trial_value = objective(trial);
            if (trial_value <= reference - opt.armijo_slope * alpha * g2) {
                u = std::move(trial);
                value = trial_value;
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if (!accepted) break;  // line search exhausted at roundoff scale
        recent_values.push_back(value);
        if (recent_values.size() > nonmonotone_window)
            recent_values.erase(recent_values.begin());
        grad = gradient(u);
    }

    SolveReport report(Curve(tg, u));
    report.iterations = iter;
    report.final_gradient_norm = density_norm(grad);
    report.converged = report.final_gradient_norm <= opt.gradient_tol;
    ELResidual res = el_residual(L, report.curve, cfg);
    report.residual_max_p0 = res.max_p0;
    report.residual_l2 = res.l2_time;
    return report;
}

// ---------------------------------------------------------------------------
// Convergence studies
// ---------------------------------------------------------------------------

/// Analytic reference solution, evaluable on any grid and at any time.
struct ExactCurveDescriptor {
    std::function<GridFunction(const PeriodicGrid&, double)> position;
    std::function<GridFunction(const PeriodicGrid&, double)> velocity;  // initial-value studies
};

struct ConvergenceRow {
    int nodes = 0;
    int steps = 0;
    double h = 0.0;
    double dt = 0.0;
    double error = 0.0;
};

struct ConvergenceTable {
    std::vector<ConvergenceRow> rows;
    double fitted_order = 0.0;
    bool at_floor = false;
};

enum class StudyKind { Residual, InitialValue };

/// Runs el_residual (on exact-sampled curves) or solve_ivp across a
/// refinement ladder and fits the log-log slope of error against dt. Rows at
/// the 1e-12 floor are discarded from the fit; if fewer than two rows remain
/// the table is flagged as at_floor.
inline ConvergenceTable convergence_study(const LagrangianSpec& L, const ExactCurveDescriptor& exact,
                                          std::vector<int> space_nodes, std::vector<int> time_steps,
                                          double t_begin, double t_end, StudyKind kind,
                                          const DiffConfig& cfg = {}) {
    if (space_nodes.empty() || time_steps.empty())
        throw insufficient_data_error("convergence_study: empty ladder");
    if (space_nodes.size() == 1)
        space_nodes.assign(time_steps.size(), space_nodes.front());
    if (space_nodes.size() != time_steps.size())
        throw config_error("convergence_study: N list and M list lengths differ");
    if (time_steps.size() < 3)
        throw insufficient_data_error("convergence_study: need at least 3 ladder points");

    ConvergenceTable table;
    for (std::size_t i = 0; i < time_steps.size(); ++i) {
        PeriodicGrid g(space_nodes[i], 1);
        TimeGrid tg(t_begin, t_end, time_steps[i]);
        double err = 0.0;
        if (kind == StudyKind::Residual) {
            Curve c = Curve::from_function(tg, [&](double t) { return exact.position(g, t); });
            err = el_residual(L, c, cfg).max_p0;
        } else {
            if (!exact.velocity)
                throw config_error("convergence_study: initial-value study needs a velocity field");
            SolveReport rep = solve_ivp(L, exact.position(g, t_begin), exact.velocity(g, t_begin), tg, cfg);
            for (int j = 0; j < tg.samples(); ++j) {
                GridFunction diff = rep.curve.sample(j) - exact.position(g, tg.node(j));
                err = std::max(err, diff.max_abs());
            }
        }
        table.rows.push_back({g.nodes, tg.steps, g.spacing(), tg.dt(), err});
    }

    std::vector<double> xs, ys;
    for (const ConvergenceRow& r : table.rows) {
        if (r.error > 1e-12) {
            xs.push_back(std::log(r.dt));
            ys.push_back(std::log(r.error));
        }
    }
    if (xs.size() < 2) {
        table.at_floor = true;
        table.fitted_order = 0.0;
    } else {
        table.fitted_order = detail::fit_slope(xs, ys);
    }
    return table;
}

} // namespace varcalc

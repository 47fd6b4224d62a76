// Acceptance suite for the variational-calculus engine.
//
// Each criterion prints exactly one PASS/FAIL line with the measured numbers
// it was judged on; the process exits with the number of failed criteria.
// Tolerances, budgets and measured constants are pinned in the code below.

#include <array>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "varcalc/varcalc.hpp"

namespace fs = std::filesystem;
using namespace varcalc;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3g", v);
    return buf;
}

GridFunction sin_field(PeriodicGrid g) {
    return GridFunction::sample(g, [](double x) { return std::sin(x); });
}

VariationField smooth_variation(const GridFunction& y, const TimeGrid& tg, double center_frac,
                                double width_frac) {
    double center = tg.t_begin + center_frac * tg.length();
    return make_test_variation(y, BumpProfile::smooth_bump(center, width_frac * tg.length()), tg);
}

// ---------------------------------------------------------------------------
// 1. Theorem forward direction: solve_bvp output is critical and its residual
//    sits inside the ladder-measured discretization budget C1 dt^2 + C2 h^4.
// ---------------------------------------------------------------------------
Outcome criterion_forward() {
    struct Case {
        const char* name;
        LagrangianSpec L;
        PeriodicGrid grid;
        std::function<double(double)> ua, ub;
        TimeGrid tg;
        double gradient_tol;
        double c1, c2;  // measured on the M in {128, 256} ladder, 3x headroom
    };
    const std::vector<Case> cases = {
        {"free", LagrangianSpec::free_particle(), PeriodicGrid(16, 1),
         [](double x) { return std::sin(x); }, [](double x) { return std::cos(x); },
         TimeGrid(0.0, 1.0, 64), 1e-9, 0.0, 0.0},
        {"harmonic", LagrangianSpec::harmonic_field(1.0), PeriodicGrid(8, 1),
         [](double x) { return std::sin(x); }, [](double x) { return std::cos(1.0) * std::sin(x); },
         TimeGrid(0.0, 1.0, 256), 2.5e-7, 0.6, 0.0},
        {"wave", LagrangianSpec::wave(1.0), PeriodicGrid(16, 1),
         [](double x) { return std::sin(x); }, [](double x) { return std::sin(x - 0.5); },
         TimeGrid(0.0, 0.5, 256), 2.5e-7, 0.6, 1e-4},
        {"sine_gordon", LagrangianSpec::sine_gordon(1.0, 0.5), PeriodicGrid(16, 1),
         [](double x) { return 0.3 * std::sin(x); }, [](double x) { return 0.2 * std::sin(x); },
         TimeGrid(0.0, 0.5, 256), 2.5e-7, 0.6, 1e-4},
    };

    std::string detail;
    bool pass = true;
    for (const Case& c : cases) {
        BvpOptions opt;
        opt.gradient_tol = c.gradient_tol;
        GridFunction ua = GridFunction::sample(c.grid, c.ua);
        GridFunction ub = GridFunction::sample(c.grid, c.ub);
        SolveReport rep = solve_bvp(c.L, ua, ub, c.tg, opt);
        CriticalityReport cr = verify_critical(c.L, rep.curve, 50, 1e-6);
        double budget = std::max(c.c1 * c.tg.dt() * c.tg.dt()
                                     + c.c2 * std::pow(c.grid.spacing(), 4),
                                 1e-9);
        bool ok = rep.converged && cr.pass && rep.residual_max_p0 <= budget;
        pass = pass && ok;
        detail += std::string(c.name) + ": vc=" + fmt(cr.max_normalized)
                  + " res=" + fmt(rep.residual_max_p0) + "<=" + fmt(budget)
                  + (ok ? " ok; " : " FAIL; ");
    }
    return {pass, detail};
}

// ---------------------------------------------------------------------------
// 2. Theorem reverse direction: residual delta controls the normalized first
//    variation linearly (log-log slope 1.0 +/- 0.15 across three decades).
// ---------------------------------------------------------------------------
Outcome criterion_reverse() {
    PeriodicGrid g(8, 1);
    GridFunction y = sin_field(g);
    TimeGrid tg(0.0, 2.0, 256);
    auto L = LagrangianSpec::harmonic_field(1.0);

    Curve exact = Curve::from_function(tg, [&](double t) { return std::cos(t) * y; });
    // compactly supported perturbation direction
    std::vector<GridFunction> psi;
    BumpProfile bump = BumpProfile::smooth_bump(1.0, 1.2);
    for (int j = 0; j <= tg.steps; ++j) psi.push_back(bump.value(tg.node(j)) * y);

    auto perturbed = [&](double eps) {
        std::vector<GridFunction> s;
        for (int j = 0; j <= tg.steps; ++j) {
            GridFunction u = exact.sample(j);
            u.axpy(eps, psi[static_cast<std::size_t>(j)]);
            s.push_back(std::move(u));
        }
        return Curve(tg, std::move(s));
    };

    double r1 = el_residual(L, perturbed(1.0)).max_p0;
    std::vector<double> deltas, fvs;
    for (double target : {1e-2, 1e-3, 1e-4}) {
        Curve c = perturbed(target / r1);
        double delta = el_residual(L, c).max_p0;
        double fv = 0.0;
        for (int k = 0; k < 20; ++k) {
            VariationField A = smooth_variation(y, tg, 0.3 + 0.4 * k / 19.0, 0.45);
            double v = std::abs(first_variation(L, c, A, FirstVariationMode::Direct))
                       / (A.max_p0() + A.max_p0_derivative());
            fv = std::max(fv, v);
        }
        deltas.push_back(delta);
        fvs.push_back(fv);
    }
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < deltas.size(); ++i) {
        lx.push_back(std::log(deltas[i]));
        ly.push_back(std::log(fvs[i]));
    }
    double slope = detail::fit_slope(lx, ly);
    double cmin = fvs[0] / deltas[0], cmax = cmin;
    for (std::size_t i = 0; i < deltas.size(); ++i) {
        cmin = std::min(cmin, fvs[i] / deltas[i]);
        cmax = std::max(cmax, fvs[i] / deltas[i]);
    }
    bool pass = std::abs(slope - 1.0) <= 0.15;
    return {pass, "slope=" + fmt(slope) + " C'=[" + fmt(cmin) + "," + fmt(cmax) + "]"};
}

// ---------------------------------------------------------------------------
// 3. DuBois-Reymond equivalence on 100 randomized (f, g) pairs.
// ---------------------------------------------------------------------------
Outcome criterion_dbr() {
    std::mt19937_64 rng(2026);
    PeriodicGrid g(8, 1);
    TimeGrid tg(0.0, 2.0, 64);
    Quadrature quad;

    int constant_ok = 0, analytic_ok = 0;
    double worst_constant_defect = 0.0, worst_ratio_low = 10.0, worst_ratio_high = 0.0;
    bool consistency = true;

    for (int trial = 0; trial < 100; ++trial) {
        if (trial % 2 == 0) {
            // exact constant-h family: quadratic profile and its running integral
            double c0 = uniform(rng, -1.0, 1.0), c1 = uniform(rng, -1.0, 1.0),
                   c2 = uniform(rng, -1.0, 1.0);
            DualDensity l1 = random_density(g, rng);
            DualDensity l2 = random_density(g, rng);
            DualCurve f = DualCurve::from_function(
                tg, [&](double t) { return (c0 + c1 * t + c2 * t * t) * l1; });
            DualCurve gg = DualCurve::from_function(tg, [&](double t) {
                double a = tg.t_begin;
                DualDensity d = (c0 * (t - a) + 0.5 * c1 * (t * t - a * a)
                                 + c2 * (t * t * t - a * a * a) / 3.0) * l1;
                d += l2;
                return d;
            });
            double defect = dbr_defect(f, gg);
            worst_constant_defect = std::max(worst_constant_defect, defect);
            if (defect <= 1e-10) ++constant_ok;

            if (trial < 10) {
                // small defect forces small residuals for every variation
                GridFunction y = random_smooth_function(g, rng);
                VariationField mu = smooth_variation(y, tg, uniform(rng, 0.45, 0.55),
                                                     uniform(rng, 0.35, 0.5));
                double scale = mu.max_p0() + mu.max_p0_derivative();
                double residual = std::abs(weak_form_residual(f, gg, mu, quad));
                // discretization floor measured at 2.8e-4 * scale on this grid
                if (residual > 1e-3 * scale) consistency = false;
            }
        } else {
            // h(t) = amp (sin t + const) l, defect known in closed form
            double amp = uniform(rng, 0.5, 2.0);
            DualDensity l1 = random_density(g, rng);
            DualCurve f = DualCurve::from_function(
                tg, [&](double t) { return (amp * std::cos(t)) * l1; });
            DualCurve gg = DualCurve::from_function(
                tg, [&](double t) { return (2.0 * amp * std::sin(t)) * l1; });
            double mean = 0.0;
            for (int j = 0; j <= tg.steps; ++j) mean += std::sin(tg.node(j));
            mean /= tg.samples();
            double oracle = 0.0;
            for (int j = 0; j <= tg.steps; ++j)
                oracle = std::max(oracle, std::abs(std::sin(tg.node(j)) - mean));
            oracle *= amp * l1.density().max_abs();
            double defect = dbr_defect(f, gg);
            double ratio = defect / oracle;
            worst_ratio_low = std::min(worst_ratio_low, ratio);
            worst_ratio_high = std::max(worst_ratio_high, ratio);
            if (ratio >= 0.9 && ratio <= 1.1) ++analytic_ok;

            if (trial < 10) {
                // positive defect admits a variation with a matching residual
                DualCurve cum = cumulative_integral(f);
                std::vector<DualDensity> h;
                DualDensity hbar = DualDensity::zero(g);
                for (int j = 0; j <= tg.steps; ++j) {
                    h.push_back(gg.samples[static_cast<std::size_t>(j)]
                                - cum.samples[static_cast<std::size_t>(j)]);
                    hbar += h.back();
                }
                hbar *= 1.0 / tg.samples();
                int worst = 0;
                double worst_p0 = -1.0;
                for (int j = 0; j <= tg.steps; ++j) {
                    double p = (h[static_cast<std::size_t>(j)] - hbar).density().max_abs();
                    if (p > worst_p0) {
                        worst_p0 = p;
                        worst = j;
                    }
                }
                GridFunction y = (h[static_cast<std::size_t>(worst)] - hbar).density();
                y *= 1.0 / y.max_abs();
                DualCurve hcurve(tg, h);
                VariationField mu = make_test_variation(y, cumulative_profile(hcurve, y, 0.8), tg);
                double residual = std::abs(weak_form_residual(f, gg, mu, quad));
                if (residual < 0.01 * defect * defect / (1.0 + defect)) consistency = false;
            }
        }
    }
    bool pass = constant_ok == 50 && analytic_ok == 50 && consistency;
    return {pass, "constant-h defects<=" + fmt(worst_constant_defect) + " (50/50), ratio=["
                      + fmt(worst_ratio_low) + "," + fmt(worst_ratio_high) + "] (50/50), "
                      + (consistency ? "residuals consistent" : "residual consistency FAIL")};
}

// ---------------------------------------------------------------------------
// 4. Weak-integral contract and 4th-order convergence.
// ---------------------------------------------------------------------------
Outcome criterion_weak_integral() {
    std::mt19937_64 rng(51);
    Quadrature quad;
    double worst = 0.0;
    for (int k = 0; k < 10; ++k) {
        PeriodicGrid g(k % 2 == 0 ? 8 : 16, k % 3 == 0 ? 2 : 1);
        TimeGrid tg(0.0, 1.0 + 0.25 * k, 32);
        DualDensity l = random_density(g, rng);
        int mode = k % 5;
        DualCurve F = DualCurve::from_function(tg, [&](double t) {
            switch (mode) {
            case 0: return l;
            case 1: return t * l;
            case 2: return (t * t * t - t) * l;
            case 3: return std::sin(3.0 * t) * l;
            default: return std::exp(-t) * l;
            }
        });
        DualDensity v = integrate_dual_curve(F, quad);
        WeakPropertyReport rep = verify_weak_property(F, v, 20, quad, rng);
        worst = std::max(worst, rep.max_rel_discrepancy);
    }

    // convergence against analytic antiderivatives
    PeriodicGrid g(8, 1);
    DualDensity l(sin_field(g));
    auto ladder = [&](auto profile, double exact_integral) {
        std::vector<double> dts, errs;
        for (int m : {16, 32, 64, 128}) {
            TimeGrid tg(0.0, std::numbers::pi, m);
            DualCurve F = DualCurve::from_function(tg, [&](double t) { return profile(t) * l; });
            DualDensity v = integrate_dual_curve(F, quad);
            dts.push_back(tg.dt());
            errs.push_back((v - exact_integral * l).density().max_abs());
        }
        bool at_floor = true;
        for (double e : errs) at_floor = at_floor && e <= 1e-13;
        if (at_floor) return std::numeric_limits<double>::infinity();
        std::vector<double> lx, ly;
        for (std::size_t i = 0; i < errs.size(); ++i)
            if (errs[i] > 1e-14) {
                lx.push_back(std::log(dts[i]));
                ly.push_back(std::log(errs[i]));
            }
        return detail::fit_slope(lx, ly);
    };
    double s_sin = ladder([](double t) { return std::sin(t); }, 2.0);
    double s_cos = ladder([](double t) { return std::cos(t); }, 0.0);
    double pi = std::numbers::pi;
    double s_poly = ladder([](double t) { return t * t * t - 2.0 * t; },
                           0.25 * pi * pi * pi * pi - pi * pi);

    bool pass = worst <= 1e-12 && s_sin >= 3.8 && s_cos >= 3.8
                && (s_poly >= 3.8 || std::isinf(s_poly));
    return {pass, "discrepancy<=" + fmt(worst) + ", slopes sin=" + fmt(s_sin) + " cos="
                      + fmt(s_cos) + " poly=" + (std::isinf(s_poly) ? "floor" : fmt(s_poly))};
}

// ---------------------------------------------------------------------------
// 5. First-variation mode agreement on 100 randomized cases per builtin.
// ---------------------------------------------------------------------------
Outcome criterion_mode_agreement() {
    std::mt19937_64 rng(77);
    PeriodicGrid g(16, 1);
    TimeGrid tg(0.0, 1.0, 32);
    const LagrangianSpec builtins[] = {LagrangianSpec::free_particle(),
                                       LagrangianSpec::harmonic_field(1.2),
                                       LagrangianSpec::wave(0.9),
                                       LagrangianSpec::sine_gordon(1.0, 0.5)};
    double worst = 0.0;
    int failures = 0;
    for (const LagrangianSpec& L : builtins) {
        for (int trial = 0; trial < 100; ++trial) {
            GridFunction y1 = random_smooth_function(g, rng);
            GridFunction y2 = random_smooth_function(g, rng);
            double w1 = uniform(rng, 0.5, 2.0);
            Curve c = Curve::from_function(tg, [&](double t) {
                GridFunction u = std::cos(w1 * t) * y1;
                u.axpy(std::sin(t), y2);
                return u;
            });
            VariationField A = smooth_variation(random_smooth_function(g, rng), tg,
                                                uniform(rng, 0.45, 0.55), uniform(rng, 0.3, 0.45));
            double direct = first_variation(L, c, A, FirstVariationMode::Direct);
            double partial = first_variation(L, c, A, FirstVariationMode::PartialDerivatives);
            double rel = std::abs(direct - partial) / (1.0 + std::abs(direct));
            worst = std::max(worst, rel);
            if (rel > 1e-6) ++failures;
        }
    }
    return {failures == 0, "400 cases, worst |direct - partial|/(1+|direct|) = " + fmt(worst)};
}

// ---------------------------------------------------------------------------
// 6. Exact-solution residual ladders and leapfrog order.
// ---------------------------------------------------------------------------
Outcome criterion_orders() {
    std::string detail;
    bool pass = true;

    {  // straight line: floor
        PeriodicGrid g(16, 1);
        TimeGrid tg(0.0, 1.0, 32);
        GridFunction a = sin_field(g);
        GridFunction b = GridFunction::sample(g, [](double x) { return std::cos(x); });
        Curve line = Curve::from_function(tg, [&](double t) {
            GridFunction u = a;
            u.axpy(t, b);
            return u;
        });
        double res = el_residual(LagrangianSpec::free_particle(), line).max_p0;
        pass = pass && res <= 1e-10;
        detail += "line res=" + fmt(res) + "; ";
    }

    {  // harmonic residual ladder
        ExactCurveDescriptor cosine{
            [](const PeriodicGrid& grid, double t) {
                return std::cos(t) * GridFunction::sample(grid, [](double x) { return std::sin(x); });
            },
            [](const PeriodicGrid& grid, double t) {
                return -std::sin(t) * GridFunction::sample(grid, [](double x) { return std::sin(x); });
            }};
        ConvergenceTable t = convergence_study(LagrangianSpec::harmonic_field(1.0), cosine, {8},
                                               {16, 32, 64, 128}, 0.0, 2.0, StudyKind::Residual);
        pass = pass && t.fitted_order >= 3.8;
        detail += "cos slope=" + fmt(t.fitted_order) + "; ";
    }

    {  // traveling-wave joint ladder
        ExactCurveDescriptor wave{
            [](const PeriodicGrid& grid, double t) {
                return GridFunction::sample(grid, [&](double x) { return std::sin(x - t); });
            },
            [](const PeriodicGrid& grid, double t) {
                return GridFunction::sample(grid, [&](double x) { return -std::cos(x - t); });
            }};
        ConvergenceTable t = convergence_study(LagrangianSpec::wave(1.0), wave, {32, 64, 128},
                                               {32, 64, 128}, 0.0, 1.0, StudyKind::Residual);
        pass = pass && t.fitted_order >= 3.8;
        detail += "wave slope=" + fmt(t.fitted_order) + "; ";
    }

    {  // leapfrog order
        ExactCurveDescriptor cosine{
            [](const PeriodicGrid& grid, double t) {
                return std::cos(t) * GridFunction::sample(grid, [](double x) { return std::sin(x); });
            },
            [](const PeriodicGrid& grid, double t) {
                return -std::sin(t) * GridFunction::sample(grid, [](double x) { return std::sin(x); });
            }};
        ConvergenceTable t = convergence_study(LagrangianSpec::harmonic_field(1.0), cosine, {8},
                                               {100, 200, 400}, 0.0, 5.0, StudyKind::InitialValue);
        pass = pass && std::abs(t.fitted_order - 2.0) <= 0.2;
        detail += "leapfrog slope=" + fmt(t.fitted_order);
    }
    return {pass, detail};
}

// ---------------------------------------------------------------------------
// 7. Classical reduction at N = 1 against a hand-coded residual.
// ---------------------------------------------------------------------------
Outcome criterion_classical() {
    std::mt19937_64 rng(31);
    PeriodicGrid g(1, 3);
    TimeGrid tg(0.0, 1.0, 16);
    const double dt = tg.dt();

    auto lift = [&](const std::vector<std::array<double, 3>>& q, int j, int comp) {
        auto at = [&](int k) { return q[static_cast<std::size_t>(k)][static_cast<std::size_t>(comp)]; };
        if (j >= 2 && j <= tg.steps - 2)
            return (at(j - 2) - 8 * at(j - 1) + 8 * at(j + 1) - at(j + 2)) / (12 * dt);
        if (j == 0)
            return (-25 * at(0) + 48 * at(1) - 36 * at(2) + 16 * at(3) - 3 * at(4)) / (12 * dt);
        if (j == 1) return (-3 * at(0) - 10 * at(1) + 18 * at(2) - 6 * at(3) + at(4)) / (12 * dt);
        if (j == tg.steps - 1)
            return (-at(j - 3) + 6 * at(j - 2) - 18 * at(j - 1) + 10 * at(j) + 3 * at(j + 1))
                   / (12 * dt);
        return (3 * at(j - 4) - 16 * at(j - 3) + 36 * at(j - 2) - 48 * at(j - 1) + 25 * at(j))
               / (12 * dt);
    };

    double worst = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        std::array<std::array<double, 4>, 3> coeff{};
        for (auto& comp : coeff)
            for (double& c : comp) c = uniform(rng, -1.0, 1.0);
        auto poly = [&](double t) {
            GridFunction q(g);
            for (int c = 0; c < 3; ++c)
                q.at(0, c) = coeff[static_cast<std::size_t>(c)][0]
                             + coeff[static_cast<std::size_t>(c)][1] * t
                             + coeff[static_cast<std::size_t>(c)][2] * t * t
                             + coeff[static_cast<std::size_t>(c)][3] * t * t * t;
            return q;
        };
        double omega = uniform(rng, 0.3, 2.0);
        double beta = uniform(rng, 0.0, 1.5);
        LagrangianSpec L = (trial % 3 == 0) ? LagrangianSpec::free_particle()
                           : (trial % 3 == 1) ? LagrangianSpec::harmonic_field(omega)
                                              : LagrangianSpec::sine_gordon(1.0, beta);
        Curve c = Curve::from_function(tg, poly);
        ELResidual engine = el_residual(L, c);

        std::vector<std::array<double, 3>> q(static_cast<std::size_t>(tg.samples()));
        for (int j = 0; j <= tg.steps; ++j) {
            GridFunction s = poly(tg.node(j));
            for (int comp = 0; comp < 3; ++comp)
                q[static_cast<std::size_t>(j)][static_cast<std::size_t>(comp)] = s.at(0, comp);
        }
        std::vector<std::array<double, 3>> v(q.size());
        for (int j = 0; j <= tg.steps; ++j)
            for (int comp = 0; comp < 3; ++comp)
                v[static_cast<std::size_t>(j)][static_cast<std::size_t>(comp)] = lift(q, j, comp);

        auto dldq = [&](double qv) {
            switch (L.kind()) {
            case LagrangianKind::HarmonicField: return -omega * omega * qv;
            case LagrangianKind::SineGordon: return -beta * std::sin(qv);
            default: return 0.0;
            }
        };
        for (int j = 4; j <= tg.steps - 4; ++j)
            for (int comp = 0; comp < 3; ++comp) {
                double hand =
                    dldq(q[static_cast<std::size_t>(j)][static_cast<std::size_t>(comp)])
                    - lift(v, j, comp);
                double eng =
                    engine.values[static_cast<std::size_t>(j - 4)].density().at(0, comp);
                worst = std::max(worst, std::abs(hand - eng) / (1.0 + engine.max_p0));
            }
    }
    return {worst <= 1e-12, "50 curves, worst relative mismatch = " + fmt(worst)};
}

// ---------------------------------------------------------------------------
// 8. Leapfrog energy behavior over 10^4 steps.
// ---------------------------------------------------------------------------
Outcome criterion_energy() {
    std::string detail;
    bool pass = true;

    auto analyze = [&](const char* name, const SolveReport& rep, const TimeGrid& tg,
                       double amp_budget) {
        double e0 = rep.energy.front();
        double amplitude = 0.0;
        for (double e : rep.energy) amplitude = std::max(amplitude, std::abs(e - e0));
        std::vector<double> ts(rep.energy.size());
        for (int j = 0; j <= tg.steps; ++j) ts[static_cast<std::size_t>(j)] = tg.node(j);
        double drift = std::abs(detail::fit_slope(ts, rep.energy));
        bool ok = amplitude <= amp_budget && drift <= 1e-3 * amplitude;
        pass = pass && ok;
        detail += std::string(name) + ": amp=" + fmt(amplitude) + "<=" + fmt(amp_budget)
                  + " drift=" + fmt(drift) + (ok ? " ok; " : " FAIL; ");
    };

    {
        PeriodicGrid g(1, 1);
        TimeGrid tg(0.0, 100.0, 10000);
        auto L = LagrangianSpec::harmonic_field(1.0);
        SolveReport rep = solve_ivp(L, GridFunction::constant(g, 1.0), GridFunction::zero(g), tg);
        // measured amplitude ~ |E0| (omega dt)^2 / 8 with E0 = pi
        analyze("harmonic", rep, tg, 2.0 * std::numbers::pi * tg.dt() * tg.dt());
    }
    {
        PeriodicGrid g(32, 1);
        TimeGrid tg(0.0, 200.0, 10000);
        auto L = LagrangianSpec::sine_gordon(1.0, 1.0);
        GridFunction u0 = GridFunction::sample(g, [](double x) { return 0.5 * std::sin(x); });
        SolveReport rep = solve_ivp(L, u0, GridFunction::zero(g), tg);
        // max mode frequency ~ sqrt((1.372/h)^2 + beta) ~ 7.1, dt = 0.02
        analyze("sine_gordon", rep, tg, 50.0 * tg.dt() * tg.dt());
    }
    return {pass, detail};
}

// ---------------------------------------------------------------------------
// 9. CLI determinism and the exit-code matrix.
// ---------------------------------------------------------------------------
struct CliRun {
    int code;
    std::string out;
};

CliRun run_cli(const std::string& cli, const fs::path& dir, const std::string& args) {
    fs::path out = dir / "stdout.txt";
    std::string cmd = cli + " " + args + " >" + out.string() + " 2>" + (dir / "stderr.txt").string();
    int status = std::system(cmd.c_str());
    std::ifstream is(out);
    std::ostringstream os;
    os << is.rdbuf();
    return {WEXITSTATUS(status), os.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p);
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

fs::path write_cfg(const fs::path& dir, const std::string& name, const std::string& text) {
    fs::path p = dir / name;
    std::ofstream os(p);
    os << text;
    return p;
}

Outcome criterion_cli() {
    const char* cli_env = std::getenv("VARCALC_CLI");
    if (!cli_env) return {false, "VARCALC_CLI not set"};
    std::string cli = cli_env;
    fs::path dir = fs::temp_directory_path() / "varcalc_acceptance_cli";
    fs::remove_all(dir);
    fs::create_directories(dir);

    const std::string common =
        "[grid]\nn = 16\nm = 1\n[time]\na = 0\nb = 1\nsteps = 32\n[run]\nseed = 5\n";
    const std::string line_curve = "[curve]\nkind = line\nf = sin(x)\ng = cos(x)\n";

    struct MatrixCase {
        const char* sub;
        std::string valid;
        std::string invalid;
        int valid_code;
    };
    const std::vector<MatrixCase> matrix = {
        {"residual", common + line_curve, common + "[curve]\nkind = warp\n", 0},
        {"solve-ivp",
         "[lagrangian]\nkind = harmonic\nomega = 1\n" + common + "[ivp]\nu0 = sin(x)\nv0 = 0*x\n",
         common + "[ivp]\nu0 = sin(x\nv0 = 0\n", 0},
        {"solve-bvp", common + "[bvp]\nua = sin(x)\nub = cos(x)\n",
         "[grid]\nn = 16\n[time]\nsteps = 33\n[bvp]\nua = sin(x)\nub = cos(x)\n", 0},
        {"verify-critical", common + line_curve + "[critical]\nvariations = 10\ntol = 1e-7\n",
         common + line_curve + "[critical]\nvariations = ten\n", 0},
        {"weak-integral-check", common + "[weak]\nprobes = 5\nrho = sin(x)\n",
         common + "[weak]\nprobes = 5\nrho = sin(u)\n", 0},
        {"dbr-check", "[grid]\nn = 8\n[time]\na = 0\nb = 2\nsteps = 64\n[dbr]\ntrials = 6\n"
                      "[run]\nseed = 9\n",
         common + "[dbr]\ntrials = 0\n", 0},
        {"converge",
         "[lagrangian]\nkind = harmonic\nomega = 1\n[grid]\nn = 8\n[time]\na = 0\nb = 2\n"
         "[curve]\nkind = cosine\nf = sin(x)\n[converge]\nstudy = residual\nm_list = 16,32,64\n",
         "[curve]\nkind = cosine\n[converge]\nstudy = residual\nm_list = 16,32\n", 0},
    };

    std::string detail;
    bool pass = true;
    for (const MatrixCase& c : matrix) {
        fs::path good = write_cfg(dir, std::string(c.sub) + "_good.cfg", c.valid);
        fs::path bad = write_cfg(dir, std::string(c.sub) + "_bad.cfg", c.invalid);
        int gc = run_cli(cli, dir, std::string(c.sub) + " --config " + good.string() + " --out "
                                       + (dir / c.sub).string())
                     .code;
        int bc = run_cli(cli, dir, std::string(c.sub) + " --config " + bad.string() + " --out "
                                       + (dir / c.sub).string())
                     .code;
        bool ok = gc == c.valid_code && bc == 2;
        pass = pass && ok;
        if (!ok) detail += std::string(c.sub) + "(" + std::to_string(gc) + "," + std::to_string(bc) + ") ";
    }

    // domain failures exit 1
    fs::path noncrit = write_cfg(dir, "noncrit.cfg",
                                 "[lagrangian]\nkind = harmonic\nomega = 1\n" + common
                                     + "[curve]\nkind = line\nf = sin(x)\ng = sin(x)\n"
                                       "[critical]\nvariations = 10\ntol = 1e-6\n");
    int nc = run_cli(cli, dir, "verify-critical --config " + noncrit.string() + " --out "
                                   + (dir / "noncrit").string())
                 .code;
    fs::path capped = write_cfg(dir, "capped.cfg",
                                "[lagrangian]\nkind = harmonic\nomega = 1\n" + common
                                    + "[bvp]\nua = sin(x)\nub = 0.5*sin(x)\nmax_iterations = 1\n");
    int cc = run_cli(cli, dir, "solve-bvp --config " + capped.string() + " --out "
                                   + (dir / "capped").string())
                 .code;
    int uc = run_cli(cli, dir, "frobnicate --config " + noncrit.string()).code;
    bool domain_ok = nc == 1 && cc == 1 && uc == 2;
    pass = pass && domain_ok;
    if (!domain_ok)
        detail += "domain(" + std::to_string(nc) + "," + std::to_string(cc) + ","
                  + std::to_string(uc) + ") ";

    // determinism: byte-identical reruns under a fixed seed
    std::string dbr_cfg = "[grid]\nn = 8\n[time]\na = 0\nb = 2\nsteps = 64\n[dbr]\ntrials = 8\n";
    fs::path d1 = dir / "det1", d2 = dir / "det2";
    fs::create_directories(d1);
    fs::create_directories(d2);
    fs::path cfg = write_cfg(dir, "det.cfg", dbr_cfg);
    CliRun r1 = run_cli(cli, dir, "dbr-check --config " + cfg.string() + " --seed 42 --out " + d1.string());
    CliRun r2 = run_cli(cli, dir, "dbr-check --config " + cfg.string() + " --seed 42 --out " + d2.string());
    bool det = r1.code == 0 && r2.code == 0 && r1.out == r2.out
               && slurp(d1 / "dbr.csv") == slurp(d2 / "dbr.csv")
               && !slurp(d1 / "dbr.csv").empty();
    CliRun r3 = run_cli(cli, dir, "dbr-check --config " + cfg.string() + " --seed 43 --out " + d1.string());
    det = det && r3.code == 0 && r3.out != r1.out;
    pass = pass && det;
    if (!det) detail += "determinism FAIL ";

    if (detail.empty()) detail = "7 subcommands x {valid,invalid}, domain exits, seeded reruns byte-identical";
    return {pass, detail};
}

} // namespace

int main() {
    struct Entry {
        int id;
        const char* name;
        Outcome (*fn)();
    };
    const std::vector<Entry> entries = {
        {1, "theorem forward: solve_bvp output is critical within budget", criterion_forward},
        {2, "theorem reverse: first variation scales linearly with residual", criterion_reverse},
        {3, "DuBois-Reymond equivalence on randomized pairs", criterion_dbr},
        {4, "weak-integral contract and 4th-order convergence", criterion_weak_integral},
        {5, "first-variation mode agreement", criterion_mode_agreement},
        {6, "exact-solution residual and leapfrog orders", criterion_orders},
        {7, "classical N=1 reduction matches hand-coded residual", criterion_classical},
        {8, "leapfrog energy bounded without secular drift", criterion_energy},
        {9, "CLI determinism and exit-code matrix", criterion_cli},
    };

    int failures = 0;
    for (const Entry& e : entries) {
        Outcome o = e.fn();
        std::printf("%s  %d. %s  [%s]\n", o.pass ? "PASS" : "FAIL", e.id, e.name, o.detail.c_str());
        std::fflush(stdout);
        if (!o.pass) ++failures;
    }
    return failures;
}

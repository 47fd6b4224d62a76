// varcalc: batch front end for the variational-calculus engine.
//
// Usage: varcalc <subcommand> --config <path> [--seed <u64>] [--out <dir>] [--quiet]
//
// Exit codes: 0 success, 1 domain failure (non-convergence, failed
// verification, divergence), 2 usage or configuration error. Diagnostics go
// to stderr; data goes to stdout and to files under --out.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "varcalc/varcalc.hpp"

namespace {

using namespace varcalc;

const char* kUsage =
    "usage: varcalc <subcommand> --config <path> [--seed <u64>] [--out <dir>] [--quiet]\n"
    "\n"
    "subcommands:\n"
    "  residual             Euler-Lagrange residual of a configured curve\n"
    "  solve-ivp            Stoermer-Verlet time stepping from initial data\n"
    "  solve-bvp            direct action minimization between fixed endpoints\n"
    "  verify-critical      first-variation test over a family of variations\n"
    "  weak-integral-check  weak vector-integral contract and convergence\n"
    "  dbr-check            DuBois-Reymond constancy-defect checks\n"
    "  converge             refinement-ladder convergence study\n";

struct CliOptions {
    std::string subcommand;
    std::string config_path;
    std::string out_dir = ".";
    std::optional<std::uint64_t> seed;
    bool quiet = false;
};

std::ostream& info(const CliOptions& opt) {
    static std::ofstream devnull;
    if (opt.quiet) {
        if (!devnull.is_open()) devnull.setstate(std::ios_base::badbit);
        return devnull;
    }
    return std::cerr;
}

std::optional<CliOptions> parse_cli(int argc, char** argv) {
    if (argc < 2) {
        std::cerr << kUsage;
        return std::nullopt;
    }
    CliOptions opt;
    opt.subcommand = argv[1];
    const std::vector<std::string> known = {"residual",        "solve-ivp",
                                            "solve-bvp",       "verify-critical",
                                            "weak-integral-check", "dbr-check",
                                            "converge"};
    if (std::find(known.begin(), known.end(), opt.subcommand) == known.end()) {
        std::cerr << "varcalc: unknown subcommand '" << opt.subcommand << "'\n" << kUsage;
        return std::nullopt;
    }
    for (int i = 2; i < argc; ++i) {
        std::string arg = argv[i];
        auto take_value = [&](const char* flag) -> std::optional<std::string> {
            if (i + 1 >= argc) {
                std::cerr << "varcalc: flag " << flag << " needs a value\n" << kUsage;
                return std::nullopt;
            }
            return std::string(argv[++i]);
        };
        if (arg == "--config") {
            auto v = take_value("--config");
            if (!v) return std::nullopt;
            opt.config_path = *v;
        } else if (arg == "--out") {
            auto v = take_value("--out");
            if (!v) return std::nullopt;
            opt.out_dir = *v;
        } else if (arg == "--seed") {
            auto v = take_value("--seed");
            if (!v) return std::nullopt;
            try {
                opt.seed = std::stoull(*v);
            } catch (const std::exception&) {
                std::cerr << "varcalc: --seed expects an unsigned integer\n";
                return std::nullopt;
            }
        } else if (arg == "--quiet") {
            opt.quiet = true;
        } else {
            std::cerr << "varcalc: unknown flag '" << arg << "'\n" << kUsage;
            return std::nullopt;
        }
    }
    if (opt.config_path.empty()) {
        std::cerr << "varcalc: --config is required\n" << kUsage;
        return std::nullopt;
    }
    return opt;
}

std::string out_path(const CliOptions& opt, const std::string& name) {
    std::filesystem::create_directories(opt.out_dir);
    return (std::filesystem::path(opt.out_dir) / name).string();
}

void reject_unknown_keys(const RunConfig& rc) {
    auto leftover = rc.file.untouched_keys();
    if (!leftover.empty()) {
        std::string msg = "unknown config field(s):";
        for (const std::string& k : leftover) msg += " " + k;
        throw config_error(msg);
    }
}

GridFunction spatial_field(const RunConfig& rc, const std::string& key, const std::string& dflt) {
    std::string text = dflt.empty() ? rc.file.get_string(key) : rc.file.get_string(key, dflt);
    try {
        return sample_expression(parse_spatial(text), rc.grid);
    } catch (const parse_error& e) {
        throw config_error("field " + key + ": " + e.what());
    }
}

// Named analytic curve families used by residual, verify-critical and
// converge; [curve] kind = line | cosine | traveling | file.
struct CurveFamily {
    ExactCurveDescriptor exact;
    std::optional<CurveData> from_file;
};

CurveFamily curve_family(const RunConfig& rc) {
    std::string kind = rc.file.get_string("curve.kind", "line");
    CurveFamily fam;
    if (kind == "file") {
        fam.from_file = read_curve_file(rc.file.get_string("curve.file"));
        return fam;
    }
    if (kind == "line") {
        std::string f_text = rc.file.get_string("curve.f", "sin(x)");
        std::string g_text = rc.file.get_string("curve.g", "cos(x)");
        DensityExpr f_expr, g_expr;
        try {
            f_expr = parse_spatial(f_text);
            g_expr = parse_spatial(g_text);
        } catch (const parse_error& e) {
            throw config_error(std::string("field curve.f/curve.g: ") + e.what());
        }
        fam.exact.position = [f_expr, g_expr](const PeriodicGrid& g, double t) {
            GridFunction u = sample_expression(f_expr, g);
            u.axpy(t, sample_expression(g_expr, g));
            return u;
        };
        fam.exact.velocity = [g_expr](const PeriodicGrid& g, double) {
            return sample_expression(g_expr, g);
        };
        return fam;
    }
    if (kind == "cosine") {
        double omega = rc.file.get_double(
            "curve.omega",
            rc.lagrangian.kind() == LagrangianKind::HarmonicField ? rc.lagrangian.omega() : 1.0);
        std::string f_text = rc.file.get_string("curve.f", "sin(x)");
        DensityExpr f_expr;
        try {
            f_expr = parse_spatial(f_text);
        } catch (const parse_error& e) {
            throw config_error(std::string("field curve.f: ") + e.what());
        }
        fam.exact.position = [f_expr, omega](const PeriodicGrid& g, double t) {
            return std::cos(omega * t) * sample_expression(f_expr, g);
        };
        fam.exact.velocity = [f_expr, omega](const PeriodicGrid& g, double t) {
            return (-omega * std::sin(omega * t)) * sample_expression(f_expr, g);
        };
        return fam;
    }
    if (kind == "traveling") {
        double speed = rc.file.get_double(
            "curve.speed",
            (rc.lagrangian.kind() == LagrangianKind::Wave
             || rc.lagrangian.kind() == LagrangianKind::SineGordon)
                ? rc.lagrangian.speed()
                : 1.0);
        fam.exact.position = [speed](const PeriodicGrid& g, double t) {
            return GridFunction::sample(g, [&](double x) { return std::sin(x - speed * t); });
        };
        fam.exact.velocity = [speed](const PeriodicGrid& g, double t) {
            return GridFunction::sample(g, [&](double x) { return -speed * std::cos(x - speed * t); });
        };
        return fam;
    }
    throw config_error("field curve.kind: unknown kind '" + kind
                       + "' (expected line, cosine, traveling or file)");
}

Curve configured_curve(const RunConfig& rc) {
    CurveFamily fam = curve_family(rc);
    if (fam.from_file) return Curve(fam.from_file->tg, std::move(fam.from_file->samples));
    return Curve::from_function(rc.time,
                                [&](double t) { return fam.exact.position(rc.grid, t); });
}

// ---------------------------------------------------------------------------

int cmd_residual(const RunConfig& rc, const CliOptions& opt) {
    Curve c = configured_curve(rc);
    reject_unknown_keys(rc);
    ELResidual res = el_residual(rc.lagrangian, c, rc.diff);

    CsvTable table({"t", "residual_p0"});
    for (std::size_t k = 0; k < res.values.size(); ++k)
        table.add_row({res.tg.node(res.first_node + static_cast<int>(k)),
                       res.values[k].density().max_abs()});
    table.write_file(out_path(opt, "residual.csv"));
    table.write(std::cout);
    info(opt) << "residual: max_p0 = " << res.max_p0 << ", l2 = " << res.l2_time << "\n";
    return 0;
}

int cmd_solve_ivp(const RunConfig& rc, const CliOptions& opt) {
    GridFunction u0 = spatial_field(rc, "ivp.u0", "");
    GridFunction v0 = spatial_field(rc, "ivp.v0", "");
    reject_unknown_keys(rc);
    SolveReport rep = solve_ivp(rc.lagrangian, u0, v0, rc.time, rc.diff);

    write_curve_file(out_path(opt, "ivp_solution.txt"), rc.time, rep.curve.samples());
    CsvTable table({"t", "energy"});
    for (int j = 0; j < rc.time.samples(); ++j)
        table.add_row({rc.time.node(j), rep.energy[static_cast<std::size_t>(j)]});
    table.write_file(out_path(opt, "ivp_energy.csv"));
    table.write(std::cout);
    info(opt) << "solve-ivp: steps = " << rep.iterations << ", residual_p0 = " << rep.residual_max_p0
              << "\n";
    return 0;
}

int cmd_solve_bvp(const RunConfig& rc, const CliOptions& opt) {
    GridFunction ua = spatial_field(rc, "bvp.ua", "");
    GridFunction ub = spatial_field(rc, "bvp.ub", "");
    BvpOptions bvp;
    bvp.max_iterations = rc.file.get_int("bvp.max_iterations", bvp.max_iterations);
    bvp.gradient_tol = rc.file.get_double("bvp.gradient_tol", bvp.gradient_tol);
    reject_unknown_keys(rc);
    SolveReport rep = solve_bvp(rc.lagrangian, ua, ub, rc.time, bvp, rc.diff);

    write_curve_file(out_path(opt, "bvp_solution.txt"), rc.time, rep.curve.samples());
    CsvTable table({"iterations", "gradient_norm", "residual_p0", "residual_l2", "action"});
    table.add_row({static_cast<double>(rep.iterations), rep.final_gradient_norm,
                   rep.residual_max_p0, rep.residual_l2, action(rc.lagrangian, rep.curve, rc.quadrature)});
    table.write_file(out_path(opt, "bvp_report.csv"));
    table.write(std::cout);
    if (!rep.converged) {
        std::cerr << "solve-bvp: did not converge within " << bvp.max_iterations
                  << " iterations (gradient norm " << rep.final_gradient_norm << ")\n";
        return 1;
    }
    info(opt) << "solve-bvp: converged in " << rep.iterations << " iterations\n";
    return 0;
}

int cmd_verify_critical(const RunConfig& rc, const CliOptions& opt) {
    Curve c = configured_curve(rc);
    int family = rc.file.get_int("critical.variations", 50);
    double tol = rc.file.get_double("critical.tol", 1e-6);
    reject_unknown_keys(rc);
    CriticalityReport rep = verify_critical(rc.lagrangian, c, family, tol, rc.diff, rc.quadrature);

    CsvTable table({"variation", "normalized_first_variation"});
    for (std::size_t k = 0; k < rep.values.size(); ++k)
        table.add_row({static_cast<double>(k), rep.values[k]});
    table.write_file(out_path(opt, "critical.csv"));
    table.write(std::cout);
    info(opt) << "verify-critical: max normalized = " << rep.max_normalized << " against tol = "
              << tol << "\n";
    if (!rep.pass) {
        std::cerr << "verify-critical: FAILED (max normalized first variation " << rep.max_normalized
                  << " > " << tol << ")\n";
        return 1;
    }
    return 0;
}

int cmd_weak_integral_check(const RunConfig& rc, const CliOptions& opt, std::mt19937_64& rng) {
    int probes = rc.file.get_int("weak.probes", 20);
    GridFunction rho = spatial_field(rc, "weak.rho", "sin(x)");
    reject_unknown_keys(rc);
    DualDensity l(rho);
    const TimeGrid& tg = rc.time;

    struct Case {
        const char* name;
        std::function<double(double)> profile;
        std::function<double(double, double)> integral;  // over [a, t]
    };
    const std::vector<Case> cases = {
        {"constant", [](double) { return 1.0; }, [](double a, double t) { return t - a; }},
        {"linear", [](double t) { return t; },
         [](double a, double t) { return 0.5 * (t * t - a * a); }},
        {"cubic", [](double t) { return t * t * t; },
         [](double a, double t) { return 0.25 * (t * t * t * t - a * a * a * a); }},
        {"sine", [](double t) { return std::sin(t); },
         [](double a, double t) { return std::cos(a) - std::cos(t); }},
        {"cosine", [](double t) { return std::cos(t); },
         [](double a, double t) { return std::sin(t) - std::sin(a); }},
    };

    bool ok = true;
    CsvTable table({"case", "weak_discrepancy", "quadrature_error"});
    int case_index = 0;
    for (const Case& cs : cases) {
        DualCurve F = DualCurve::from_function(tg, [&](double t) { return cs.profile(t) * l; });
        DualDensity v = integrate_dual_curve(F, rc.quadrature);
        WeakPropertyReport wp = verify_weak_property(F, v, probes, rc.quadrature, rng);
        DualDensity exact = cs.integral(tg.t_begin, tg.t_end) * l;
        double quad_err = (v - exact).density().max_abs();
        table.add_row({static_cast<double>(case_index++), wp.max_rel_discrepancy, quad_err});
        if (wp.max_rel_discrepancy > 1e-12) ok = false;
    }

    // dt-convergence of the sine case against the analytic antiderivative.
    std::vector<double> xs, ys;
    CsvTable ladder({"steps", "dt", "error"});
    for (int m = tg.steps; m <= 8 * tg.steps; m *= 2) {
        TimeGrid fine(tg.t_begin, tg.t_end, m);
        DualCurve F = DualCurve::from_function(fine, [&](double t) { return std::sin(t) * l; });
        DualDensity v = integrate_dual_curve(F, rc.quadrature);
        DualDensity exact = (std::cos(tg.t_begin) - std::cos(tg.t_end)) * l;
        double err = (v - exact).density().max_abs();
        ladder.add_row({static_cast<double>(m), fine.dt(), err});
        if (err > 1e-12) {
            xs.push_back(std::log(fine.dt()));
            ys.push_back(std::log(err));
        }
    }
    double slope = 0.0;
    if (xs.size() >= 2) {
        slope = detail::fit_slope(xs, ys);
        if (slope < 3.8) ok = false;
    }

    table.write_file(out_path(opt, "weak_cases.csv"));
    ladder.write_file(out_path(opt, "weak_ladder.csv"));
    table.write(std::cout);
    ladder.write(std::cout);
    info(opt) << "weak-integral-check: convergence slope = " << slope << "\n";
    if (!ok) {
        std::cerr << "weak-integral-check: FAILED\n";
        return 1;
    }
    return 0;
}

int cmd_dbr_check(const RunConfig& rc, const CliOptions& opt, std::mt19937_64& rng) {
    int trials = rc.file.get_int("dbr.trials", 20);
    if (trials < 2) throw config_error("field dbr.trials: need at least 2 trials");
    reject_unknown_keys(rc);
    const TimeGrid& tg = rc.time;
    const PeriodicGrid& g = rc.grid;

    bool ok = true;
    CsvTable table({"trial", "family", "defect", "reference", "ratio"});
    for (int trial = 0; trial < trials; ++trial) {
        bool constant_h = (trial % 2 == 0);
        if (constant_h) {
            // f a quadratic-in-t multiple of a fixed density, g its exact
            // running integral plus a constant functional: h is constant and
            // the discrete cumulative rule reproduces it exactly.
            double c0 = uniform(rng, -1.0, 1.0);
            double c1 = uniform(rng, -1.0, 1.0);
            double c2 = uniform(rng, -1.0, 1.0);
            DualDensity l1 = random_density(g, rng);
            DualDensity l2 = random_density(g, rng);
            auto poly = [&](double t) { return c0 + c1 * t + c2 * t * t; };
            auto ipoly = [&](double t) {
                double a = tg.t_begin;
                return c0 * (t - a) + 0.5 * c1 * (t * t - a * a) + c2 * (t * t * t - a * a * a) / 3.0;
            };
            DualCurve f = DualCurve::from_function(tg, [&](double t) { return poly(t) * l1; });
            DualCurve gg = DualCurve::from_function(tg, [&](double t) {
                DualDensity d = ipoly(t) * l1;
                d += l2;
                return d;
            });
            double defect = dbr_defect(f, gg);
            table.add_row({static_cast<double>(trial), 0.0, defect, 0.0, 0.0});
            if (defect > 1e-10) ok = false;
        } else {
            // h(t) = (sin t + shift) * l known in closed form.
            double amp = uniform(rng, 0.5, 2.0);
            DualDensity l1 = random_density(g, rng);
            DualCurve f = DualCurve::from_function(tg, [&](double t) { return amp * std::cos(t) * l1; });
            DualCurve gg = DualCurve::from_function(tg, [&](double t) {
                return (2.0 * amp * std::sin(t)) * l1;
            });
            // discrete-time reference: amp * max_j |s_j - mean(s)| * p0(l1)
            double mean = 0.0;
            for (int j = 0; j < tg.samples(); ++j)
                mean += std::sin(tg.node(j)) - std::sin(tg.t_begin);
            mean /= tg.samples();
            double ref = 0.0;
            for (int j = 0; j < tg.samples(); ++j)
                ref = std::max(ref,
                               std::abs(std::sin(tg.node(j)) - std::sin(tg.t_begin) - mean));
            ref *= amp * l1.density().max_abs();
            double defect = dbr_defect(f, gg);
            double ratio = defect / ref;
            table.add_row({static_cast<double>(trial), 1.0, defect, ref, ratio});
            if (ratio < 0.9 || ratio > 1.1) ok = false;
        }
    }
    table.write_file(out_path(opt, "dbr.csv"));
    table.write(std::cout);
    if (!ok) {
        std::cerr << "dbr-check: FAILED\n";
        return 1;
    }
    return 0;
}

int cmd_converge(const RunConfig& rc, const CliOptions& opt) {
    std::string study = rc.file.get_string("converge.study", "residual");
    std::vector<int> n_list = rc.file.has("converge.n_list")
                                  ? rc.file.get_int_list("converge.n_list")
                                  : std::vector<int>{rc.grid.nodes};
    std::vector<int> m_list = rc.file.get_int_list("converge.m_list");
    CurveFamily fam = curve_family(rc);
    reject_unknown_keys(rc);
    if (fam.from_file) throw config_error("field curve.kind: converge needs an analytic curve family");

    StudyKind kind;
    if (study == "residual")
        kind = StudyKind::Residual;
    else if (study == "ivp")
        kind = StudyKind::InitialValue;
    else
        throw config_error("field converge.study: expected residual or ivp, got '" + study + "'");

    ConvergenceTable table = convergence_study(rc.lagrangian, fam.exact, n_list, m_list,
                                               rc.time.t_begin, rc.time.t_end, kind, rc.diff);

    CsvTable csv({"nodes", "steps", "h", "dt", "error"});
    for (const ConvergenceRow& r : table.rows)
        csv.add_row({static_cast<double>(r.nodes), static_cast<double>(r.steps), r.h, r.dt, r.error});
    csv.write_file(out_path(opt, "converge.csv"));
    csv.write(std::cout);
    if (table.at_floor)
        info(opt) << "converge: errors at the 1e-12 floor, slope reported as floor\n";
    else
        info(opt) << "converge: fitted order = " << table.fitted_order << "\n";
    std::ofstream slope_file(out_path(opt, "converge_order.csv"));
    slope_file << "fitted_order,at_floor\n";
    if (table.at_floor)
        slope_file << "floor,1\n";
    else
        slope_file << detail::format_double(table.fitted_order) << ",0\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    auto opt = parse_cli(argc, argv);
    if (!opt) return 2;

    try {
        RunConfig rc = load_run_config(opt->config_path);
        if (opt->seed) rc.seed = *opt->seed;
        std::mt19937_64 rng(rc.seed);

        if (opt->subcommand == "residual") return cmd_residual(rc, *opt);
        if (opt->subcommand == "solve-ivp") return cmd_solve_ivp(rc, *opt);
        if (opt->subcommand == "solve-bvp") return cmd_solve_bvp(rc, *opt);
        if (opt->subcommand == "verify-critical") return cmd_verify_critical(rc, *opt);
        if (opt->subcommand == "weak-integral-check") return cmd_weak_integral_check(rc, *opt, rng);
        if (opt->subcommand == "dbr-check") return cmd_dbr_check(rc, *opt, rng);
        if (opt->subcommand == "converge") return cmd_converge(rc, *opt);
        std::cerr << kUsage;
        return 2;
    } catch (const config_error& e) {
        std::cerr << "varcalc: " << e.what() << "\n";
        return 2;
    } catch (const io_error& e) {
        std::cerr << "varcalc: " << e.what() << "\n";
        return 2;
    } catch (const parse_error& e) {
        std::cerr << "varcalc: " << e.what() << "\n";
        return 2;
    } catch (const unsupported_error& e) {
        std::cerr << "varcalc: " << e.what() << "\n";
        return 2;
    } catch (const grid_mismatch_error& e) {
        std::cerr << "varcalc: " << e.what() << "\n";
        return 2;
    } catch (const support_error& e) {
        std::cerr << "varcalc: " << e.what() << "\n";
        return 2;
    } catch (const insufficient_data_error& e) {
        std::cerr << "varcalc: " << e.what() << "\n";
        return 2;
    } catch (const varcalc::error& e) {
        std::cerr << "varcalc: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "varcalc: unexpected error: " << e.what() << "\n";
        return 1;
    }
}

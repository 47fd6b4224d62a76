#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "varcalc/error.hpp"
#include "varcalc/expression.hpp"
#include "varcalc/grid.hpp"
#include "varcalc/time_grid.hpp"

namespace varcalc {

enum class LagrangianKind { FreeParticle, HarmonicField, Wave, SineGordon, UserDensity };

/// A Lagrangian L : U x E -> R over the discretized E = C^inf(S^1, R^m).
///
/// Builtins (componentwise for m > 1, <.,.> the discrete L^2(S^1) pairing):
///   FreeParticle      L(u,e) = 1/2 <e,e>
///   HarmonicField(w)  L(u,e) = 1/2 <e,e> - 1/2 w^2 <u,u>
///   Wave(c)           L(u,e) = 1/2 <e,e> - 1/2 c^2 <Dx u, Dx u>
///   SineGordon(c,b)   L(u,e) = 1/2 <e,e> - 1/2 c^2 <Dx u, Dx u> - b Int(1 - cos u)
/// plus user densities l(x, u, ux, e) summed with the pairing weight (m == 1).
///
/// Builtins carry closed-form first-variation densities; user densities are
/// differentiated numerically by the calculus module.
class LagrangianSpec {
public:
    LagrangianSpec() = default;  // FreeParticle

    static LagrangianSpec free_particle() { return LagrangianSpec(); }

    static LagrangianSpec harmonic_field(double omega) {
        LagrangianSpec L;
        L.kind_ = LagrangianKind::HarmonicField;
        L.omega_ = check_param("omega", omega);
        return L;
    }

    static LagrangianSpec wave(double c) {
        LagrangianSpec L;
        L.kind_ = LagrangianKind::Wave;
        L.speed_ = check_param("c", c);
        return L;
    }

    static LagrangianSpec sine_gordon(double c, double beta) {
        LagrangianSpec L;
        L.kind_ = LagrangianKind::SineGordon;
        L.speed_ = check_param("c", c);
        if (!std::isfinite(beta)) throw config_error("LagrangianSpec: beta must be finite");
        L.beta_ = beta;
        return L;
    }

    static LagrangianSpec user_density(DensityExpr expr) {
        if (expr.empty()) throw config_error("LagrangianSpec: empty user density");
        LagrangianSpec L;
        L.kind_ = LagrangianKind::UserDensity;
        L.expr_ = std::move(expr);
        return L;
    }

    static LagrangianSpec user_density(std::string_view text) {
        return user_density(parse_density(text));
    }

    LagrangianKind kind() const { return kind_; }
    double omega() const { return omega_; }
    double speed() const { return speed_; }
    double beta() const { return beta_; }
    const DensityExpr& expr() const { return expr_; }
    int spatial_fd_order() const { return spatial_fd_order_; }

    LagrangianSpec with_spatial_fd_order(int order) const {
        if (order != 2 && order != 4)
            throw config_error("LagrangianSpec: spatial stencil order must be 2 or 4");
        LagrangianSpec L = *this;
        L.spatial_fd_order_ = order;
        return L;
    }

    /// L(u, e). Throws evaluation_error when the density is non-finite.
    double value(const GridFunction& u, const GridFunction& e) const {
        if (!(u.grid() == e.grid()))
            throw grid_mismatch_error("LagrangianSpec: u and e live on different grids");
        const double w = u.grid().weight();
        double kinetic = 0.5 * w * dot(e, e);
        switch (kind_) {
        case LagrangianKind::FreeParticle:
            return finished(kinetic, u, e);
        case LagrangianKind::HarmonicField:
            return finished(kinetic - 0.5 * omega_ * omega_ * w * dot(u, u), u, e);
        case LagrangianKind::Wave: {
            GridFunction du = discrete_derivative_once_or_zero(u);
            return finished(kinetic - 0.5 * speed_ * speed_ * w * dot(du, du), u, e);
        }
        case LagrangianKind::SineGordon: {
            GridFunction du = discrete_derivative_once_or_zero(u);
            double pot = 0.0;
            for (double v : u.raw()) pot += 1.0 - std::cos(v);
            return finished(kinetic - 0.5 * speed_ * speed_ * w * dot(du, du) - beta_ * w * pot, u, e);
        }
        case LagrangianKind::UserDensity: {
            if (u.grid().dim != 1)
                throw unsupported_error("user densities are scalar: m must be 1");
            GridFunction du = discrete_derivative_once_or_zero(u);
            double s = 0.0;
            for (int i = 0; i < u.nodes(); ++i) {
                double x = u.grid().node(i);
                double v = expr_.eval(x, u.at(i, 0), du.at(i, 0), e.at(i, 0));
                if (!std::isfinite(v))
                    throw evaluation_error("user density non-finite at x = " + detail::format_double(x)
                                           + ", u = " + detail::format_double(u.at(i, 0))
                                           + ", ux = " + detail::format_double(du.at(i, 0))
                                           + ", e = " + detail::format_double(e.at(i, 0)));
                s += v;
            }
            return w * s;
        }
        }
        return 0.0;
    }

    bool has_analytic_densities() const { return kind_ != LagrangianKind::UserDensity; }

    /// Closed-form density of the slot-wise Gateaux derivative:
    /// pair(analytic_density(slot, u, e), f) = D_slot L(u, e)(f) for all f.
    /// Spatial terms are moved off the probe direction by discrete
    /// integration by parts, which is exact for the skew-adjoint centered
    /// stencil on a periodic grid.
    GridFunction analytic_density(int slot, const GridFunction& u, const GridFunction& e) const {
        if (!has_analytic_densities())
            throw unsupported_error("analytic densities are only available for builtin Lagrangians");
        if (slot != 1 && slot != 2) throw config_error("analytic_density: slot must be 1 or 2");
        if (!(u.grid() == e.grid()))
            throw grid_mismatch_error("analytic_density: u and e live on different grids");
        if (slot == 2) return e;
        switch (kind_) {
        case LagrangianKind::FreeParticle:
            return GridFunction::zero(u.grid());
        case LagrangianKind::HarmonicField:
            return (-omega_ * omega_) * u;
        case LagrangianKind::Wave:
            return (speed_ * speed_) * second_spatial(u);
        case LagrangianKind::SineGordon: {
            GridFunction rho = (speed_ * speed_) * second_spatial(u);
            for (int i = 0; i < u.nodes(); ++i)
                for (int c = 0; c < u.dim(); ++c) rho.at(i, c) -= beta_ * std::sin(u.at(i, c));
            return rho;
        }
        default:
            break;
        }
        throw unsupported_error("analytic_density: unreachable");
    }

    /// True when L(u, e) = 1/2 <e,e> + (terms independent of e), the form the
    /// initial-value solver requires. Builtins qualify by construction; user
    /// densities are probed numerically at a fixed set of sample points.
    bool separable_kinetic() const {
        if (kind_ != LagrangianKind::UserDensity) return true;
        const double xs[] = {0.3, 2.1, 5.0};
        const double us[] = {-0.7, 0.2, 1.3};
        const double uxs[] = {-0.4, 0.8};
        const double es[] = {-1.1, 0.0, 0.6, 1.7};
        for (double x : xs)
            for (double uv : us)
                for (double uxv : uxs) {
                    double base = expr_.eval(x, uv, uxv, es[0]) - 0.5 * es[0] * es[0];
                    if (!std::isfinite(base)) return false;
                    for (double ev : es) {
                        double rest = expr_.eval(x, uv, uxv, ev) - 0.5 * ev * ev;
                        if (!std::isfinite(rest) || std::abs(rest - base) > 1e-9 * (1.0 + std::abs(base)))
                            return false;
                    }
                }
        return true;
    }

private:
    static double check_param(const char* name, double v) {
        if (!std::isfinite(v) || v < 0.0)
            throw config_error(std::string("LagrangianSpec: parameter ") + name
                               + " must be finite and >= 0");
        return v;
    }

    GridFunction discrete_derivative_once_or_zero(const GridFunction& u) const {
        if (u.grid().nodes == 1) return GridFunction::zero(u.grid());
        return discrete_derivative_once(u, spatial_fd_order_);
    }

    GridFunction second_spatial(const GridFunction& u) const {
        return discrete_derivative_once_or_zero(discrete_derivative_once_or_zero(u));
    }

    double finished(double v, const GridFunction& u, const GridFunction& e) const {
        if (!std::isfinite(v))
            throw evaluation_error("Lagrangian value non-finite (p0(u) = "
                                   + detail::format_double(u.max_abs())
                                   + ", p0(e) = " + detail::format_double(e.max_abs()) + ")");
        return v;
    }

    LagrangianKind kind_ = LagrangianKind::FreeParticle;
    double omega_ = 0.0;
    double speed_ = 0.0;
    double beta_ = 0.0;
    int spatial_fd_order_ = 4;
    DensityExpr expr_;
};

/// A time-sampled path c : [a, b] -> E together with its canonical lift.
/// The velocity samples are always recomputed from the position samples with
/// the 4th-order time stencil, so recomputation is idempotent by construction.
class Curve {
public:
    Curve(TimeGrid tg, std::vector<GridFunction> samples)
        : tg_(tg), u_(std::move(samples)) {
        if (static_cast<int>(u_.size()) != tg_.samples())
            throw config_error("Curve: sample count does not match time grid");
        for (const GridFunction& s : u_)
            if (!(s.grid() == u_.front().grid()))
                throw grid_mismatch_error("Curve: samples live on different grids");
        du_ = time_derivative(tg_, u_);
    }

    template <class F>
    static Curve from_function(TimeGrid tg, F&& f) {
        std::vector<GridFunction> samples;
        samples.reserve(static_cast<std::size_t>(tg.samples()));
        for (int j = 0; j < tg.samples(); ++j) samples.push_back(f(tg.node(j)));
        return Curve(tg, std::move(samples));
    }

    const TimeGrid& time_grid() const { return tg_; }
    const PeriodicGrid& grid() const { return u_.front().grid(); }
    const GridFunction& sample(int j) const { return u_[static_cast<std::size_t>(j)]; }
    const GridFunction& velocity(int j) const { return du_[static_cast<std::size_t>(j)]; }
    const std::vector<GridFunction>& samples() const { return u_; }
    const std::vector<GridFunction>& velocities() const { return du_; }

    double max_p0() const {
        double m = 0.0;
        for (const GridFunction& s : u_) m = std::max(m, s.max_abs());
        return m;
    }

private:
    TimeGrid tg_;
    std::vector<GridFunction> u_;
    std::vector<GridFunction> du_;
};

} // namespace varcalc

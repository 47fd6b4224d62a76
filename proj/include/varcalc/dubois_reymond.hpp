#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "varcalc/error.hpp"
#include "varcalc/grid.hpp"
#include "varcalc/time_grid.hpp"
#include "varcalc/weak_integral.hpp"

namespace varcalc {

/// Scalar C^1 profile phi with support strictly inside a time interval.
/// SmoothBump:  exp(-1 / (1 - s^2)) on |s| < 1, zero outside
/// Polynomial:  (1 - s^2)^3 on |s| < 1, zero outside
/// with s = 2 (t - center) / width. Tabulated profiles carry node values on a
/// fixed time grid (the cumulative construction below produces them) and have
/// no closed-form derivative.
class BumpProfile {
public:
    enum class Shape { SmoothBump, Polynomial, Tabulated };

    static BumpProfile smooth_bump(double center, double width) {
        return BumpProfile(Shape::SmoothBump, center, width);
    }
    static BumpProfile polynomial(double center, double width) {
        return BumpProfile(Shape::Polynomial, center, width);
    }
    static BumpProfile tabulated(TimeGrid tg, std::vector<double> values) {
        if (static_cast<int>(values.size()) != tg.samples())
            throw config_error("BumpProfile::tabulated: value count does not match time grid");
        BumpProfile p(Shape::Tabulated, 0.5 * (tg.t_begin + tg.t_end), tg.length());
        p.tg_ = tg;
        p.values_ = std::move(values);
        return p;
    }

    Shape shape() const { return shape_; }
    double support_begin() const { return center_ - 0.5 * width_; }
    double support_end() const { return center_ + 0.5 * width_; }

    double value(double t) const {
        switch (shape_) {
        case Shape::SmoothBump: {
            double s = local(t);
            if (std::abs(s) >= 1.0) return 0.0;
            return std::exp(-1.0 / (1.0 - s * s));
        }
        case Shape::Polynomial: {
            double s = local(t);
            if (std::abs(s) >= 1.0) return 0.0;
            double w = 1.0 - s * s;
            return w * w * w;
        }
        case Shape::Tabulated: {
            // Defined at the nodes of its own grid only.
            double rel = (t - tg_.t_begin) / tg_.dt();
            int j = static_cast<int>(std::llround(rel));
            if (std::abs(rel - j) > 1e-9 || j < 0 || j > tg_.steps)
                throw config_error("tabulated profile: evaluation off its time grid");
            return values_[static_cast<std::size_t>(j)];
        }
        }
        return 0.0;
    }

    /// Closed-form derivative; not available for tabulated profiles.
    double derivative(double t) const {
        switch (shape_) {
        case Shape::SmoothBump: {
            double s = local(t);
            if (std::abs(s) >= 1.0) return 0.0;
            double w = 1.0 - s * s;
            return std::exp(-1.0 / w) * (-2.0 * s / (w * w)) * (2.0 / width_);
        }
        case Shape::Polynomial: {
            double s = local(t);
            if (std::abs(s) >= 1.0) return 0.0;
            double w = 1.0 - s * s;
            return -6.0 * s * w * w * (2.0 / width_);
        }
        case Shape::Tabulated:
            throw unsupported_error("tabulated profile has no closed-form derivative");
        }
        return 0.0;
    }

private:
    BumpProfile(Shape shape, double center, double width)
        : shape_(shape), center_(center), width_(width) {
        if (!(std::isfinite(center) && std::isfinite(width)) || width <= 0.0)
            throw config_error("BumpProfile: need finite center and positive width");
    }

    double local(double t) const { return 2.0 * (t - center_) / width_; }

    Shape shape_;
    double center_;
    double width_;
    TimeGrid tg_{};
    std::vector<double> values_;
};

/// Compactly supported variation mu : [a, b] -> E. Samples within the margin
/// of 4 dt of each endpoint must vanish exactly; the derivative samples come
/// from the 4th-order time stencil, like every lift in this library.
///
/// The margin is what makes discrete integration by parts exact: the
/// five-point one-sided closures and the irregular quadrature weights at the
/// interval ends reach 4 cells in, so a variation that is zero on the first
/// and last 5 samples produces no boundary terms at all.
class VariationField {
public:
    static constexpr int margin_cells = 5;  // zero samples per end, margin 4 dt

    VariationField(TimeGrid tg, std::vector<GridFunction> samples)
        : tg_(tg), mu_(std::move(samples)) {
        if (static_cast<int>(mu_.size()) != tg_.samples())
            throw config_error("VariationField: sample count does not match time grid");
        if (tg_.steps < 2 * margin_cells + 1)
            throw config_error("VariationField: time grid too short for the support margin");
        for (const GridFunction& s : mu_)
            if (!(s.grid() == mu_.front().grid()))
                throw grid_mismatch_error("VariationField: samples live on different grids");
        for (int j = 0; j < margin_cells; ++j) {
            if (mu_[static_cast<std::size_t>(j)].max_abs() != 0.0
                || mu_[static_cast<std::size_t>(tg_.steps - j)].max_abs() != 0.0)
                throw support_error("VariationField: support touches the endpoint margin of "
                                    + std::to_string(margin_cells - 1) + " dt");
        }
        dmu_ = time_derivative(tg_, mu_);
    }

    const TimeGrid& time_grid() const { return tg_; }
    const PeriodicGrid& grid() const { return mu_.front().grid(); }
    const GridFunction& sample(int j) const { return mu_[static_cast<std::size_t>(j)]; }
    const GridFunction& derivative(int j) const { return dmu_[static_cast<std::size_t>(j)]; }
    const std::vector<GridFunction>& samples() const { return mu_; }
    const std::vector<GridFunction>& derivatives() const { return dmu_; }

    double max_p0() const {
        double m = 0.0;
        for (const GridFunction& s : mu_) m = std::max(m, s.max_abs());
        return m;
    }
    double max_p0_derivative() const {
        double m = 0.0;
        for (const GridFunction& s : dmu_) m = std::max(m, s.max_abs());
        return m;
    }

private:
    TimeGrid tg_;
    std::vector<GridFunction> mu_;
    std::vector<GridFunction> dmu_;
};

/// The separable test variation mu(t) = phi(t) y. A profile whose support
/// reaches into the endpoint margin fails the support check.
inline VariationField make_test_variation(const GridFunction& y, const BumpProfile& phi,
                                          const TimeGrid& tg) {
    std::vector<GridFunction> samples;
    samples.reserve(static_cast<std::size_t>(tg.samples()));
    for (int j = 0; j < tg.samples(); ++j) {
        double v = phi.value(tg.node(j));
        samples.push_back(v * y);
    }
    return VariationField(tg, std::move(samples));
}

/// The constructive profile from the constancy proof: phi(t) is the running
/// integral of t -> (f(t) - lbar)(y) with lbar the interval mean of f, so
/// phi(a) = phi(b) = 0 exactly; a C^1 plateau window with the given interior
/// fraction then forces compact support.
inline BumpProfile cumulative_profile(const DualCurve& f, const GridFunction& y,
                                      double interior_fraction = 0.8) {
    if (!(f.grid() == y.grid()))
        throw grid_mismatch_error("cumulative_profile: direction lives on a different grid");
    if (!(interior_fraction > 0.0 && interior_fraction < 1.0))
        throw config_error("cumulative_profile: interior fraction must be in (0, 1)");
    const TimeGrid& tg = f.tg;
    const double margin = 0.5 * (1.0 - interior_fraction) * tg.length();
    if (margin < VariationField::margin_cells * tg.dt())
        throw config_error("cumulative_profile: window margin narrower than the support margin; "
                           "lower the interior fraction or refine the time grid");

    std::vector<double> s(static_cast<std::size_t>(tg.samples()));
    for (int j = 0; j < tg.samples(); ++j)
        s[static_cast<std::size_t>(j)] = pair(f.samples[static_cast<std::size_t>(j)], y);
    std::vector<double> cum = cumulative_integral(tg, s);
    const double mean = cum.back() / tg.length();

    auto smoothstep = [](double r) {
        if (r <= 0.0) return 0.0;
        if (r >= 1.0) return 1.0;
        return r * r * (3.0 - 2.0 * r);
    };
    std::vector<double> phi(static_cast<std::size_t>(tg.samples()));
    for (int j = 0; j < tg.samples(); ++j) {
        double t = tg.node(j);
        double raw = cum[static_cast<std::size_t>(j)] - mean * (t - tg.t_begin);
        double window = smoothstep((t - tg.t_begin) / margin) * smoothstep((tg.t_end - t) / margin);
        phi[static_cast<std::size_t>(j)] = raw * window;
    }
    for (int j = 0; j < VariationField::margin_cells; ++j) {
        phi[static_cast<std::size_t>(j)] = 0.0;
        phi[static_cast<std::size_t>(tg.steps - j)] = 0.0;
    }
    return BumpProfile::tabulated(tg, std::move(phi));
}

/// Quadrature of t -> f(t)(mu(t)) + g(t)(mu'(t)).
inline double weak_form_residual(const DualCurve& f, const DualCurve& g, const VariationField& mu,
                                 const Quadrature& Q = {}) {
    if (!(f.tg == g.tg) || !(f.tg == mu.time_grid()))
        throw grid_mismatch_error("weak_form_residual: time grids differ");
    if (!(f.grid() == g.grid()) || !(f.grid() == mu.grid()))
        throw grid_mismatch_error("weak_form_residual: spatial grids differ");
    std::vector<double> integrand(static_cast<std::size_t>(f.tg.samples()));
    for (int j = 0; j < f.tg.samples(); ++j)
        integrand[static_cast<std::size_t>(j)] =
            pair(f.samples[static_cast<std::size_t>(j)], mu.sample(j))
            + pair(g.samples[static_cast<std::size_t>(j)], mu.derivative(j));
    return Q.integrate(f.tg, integrand);
}

/// Constancy defect of h(t) = g(t) - integral_a^t f: the maximum p_0 seminorm
/// of the density of h(t_j) - hbar, where hbar is the time average of the
/// samples. Zero exactly when the weak Euler-Lagrange form vanishes for all
/// compactly supported variations.
inline double dbr_defect(const DualCurve& f, const DualCurve& g) {
    if (!(f.tg == g.tg))
        throw grid_mismatch_error("dbr_defect: time grids differ");
    if (!(f.grid() == g.grid()))
        throw grid_mismatch_error("dbr_defect: spatial grids differ");
    DualCurve cum = cumulative_integral(f);
    std::vector<DualDensity> h;
    h.reserve(static_cast<std::size_t>(f.tg.samples()));
    for (int j = 0; j < f.tg.samples(); ++j)
        h.push_back(g.samples[static_cast<std::size_t>(j)] - cum.samples[static_cast<std::size_t>(j)]);

    DualDensity mean = h.front();
    for (int j = 1; j < f.tg.samples(); ++j) mean += h[static_cast<std::size_t>(j)];
    mean *= 1.0 / f.tg.samples();

    double defect = 0.0;
    for (const DualDensity& hj : h)
        defect = std::max(defect, (hj - mean).density().max_abs());
    return defect;
}

} // namespace varcalc

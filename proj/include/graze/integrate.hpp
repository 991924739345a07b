// Flow evaluation: exact closed form for oscillator systems, adaptive
// Dormand-Prince 5(4) stepping for generic fields.
#pragma once

#include <algorithm>
#include <cmath>

#include "graze/config.hpp"
#include "graze/errors.hpp"
#include "graze/model.hpp"

namespace graze {

namespace detail {

/// One embedded RKDP 5(4) step for the planar system
///   x' = y,  y' = F(x, y, z0 + omega*s)
/// parameterised by elapsed time s. Returns the 5th-order solution and an
/// error estimate.
template <class F>
inline void rkdp_step(const F& f, double x, double y, double s, double h, double& x5, double& y5,
                      double& errx, double& erry) {
    // Dormand-Prince coefficients
    constexpr double a21 = 1.0 / 5;
    constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                     a54 = -212.0 / 729;
    constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                     a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                     b6 = 11.0 / 84;
    constexpr double e1 = 35.0 / 384 - 5179.0 / 57600, e3 = 500.0 / 1113 - 7571.0 / 16695,
                     e4 = 125.0 / 192 - 393.0 / 640, e5 = -2187.0 / 6784 + 92097.0 / 339200,
                     e6 = 11.0 / 84 - 187.0 / 2100, e7 = -1.0 / 40;
    constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;

    double k1x = y, k1y = f(x, y, s);
    double x2 = x + h * a21 * k1x, y2 = y + h * a21 * k1y;
    double k2x = y2, k2y = f(x2, y2, s + c2 * h);
    double x3 = x + h * (a31 * k1x + a32 * k2x), y3 = y + h * (a31 * k1y + a32 * k2y);
    double k3x = y3, k3y = f(x3, y3, s + c3 * h);
    double x4 = x + h * (a41 * k1x + a42 * k2x + a43 * k3x),
           y4 = y + h * (a41 * k1y + a42 * k2y + a43 * k3y);
    double k4x = y4, k4y = f(x4, y4, s + c4 * h);
    double x5s = x + h * (a51 * k1x + a52 * k2x + a53 * k3x + a54 * k4x),
           y5s = y + h * (a51 * k1y + a52 * k2y + a53 * k3y + a54 * k4y);
    double k5x = y5s, k5y = f(x5s, y5s, s + c5 * h);
    double x6 = x + h * (a61 * k1x + a62 * k2x + a63 * k3x + a64 * k4x + a65 * k5x),
           y6 = y + h * (a61 * k1y + a62 * k2y + a63 * k3y + a64 * k4y + a65 * k5y);
    double k6x = y6, k6y = f(x6, y6, s + h);

    x5 = x + h * (b1 * k1x + b3 * k3x + b4 * k4x + b5 * k5x + b6 * k6x);
    y5 = y + h * (b1 * k1y + b3 * k3y + b4 * k4y + b5 * k5y + b6 * k6y);
    double k7x = y5, k7y = f(x5, y5, s + h); // FSAL stage, used for the error only
    errx = h * (e1 * k1x + e3 * k3x + e4 * k4x + e5 * k5x + e6 * k6x + e7 * k7x);
    erry = h * (e1 * k1y + e3 * k3y + e4 * k4y + e5 * k5y + e6 * k6y + e7 * k7y);
}

} // namespace detail

/// Evolve the extended (impact-free) flow of `sys` from `s0` over elapsed
/// time `dt` (signed; negative integrates backwards). The phase advances
/// exactly as z0 + omega*dt. Throws ExtensionExceeded when |x| leaves the
/// declared extension half-width.
inline State advance(const HybridSystemDef& sys, const ParamPoint& pp, const State& s0, double dt,
                     const IntegratorConfig& cfg) {
    const double omega = sys.omega_of(pp);
    if (sys.has_closed_form()) {
        const OscParams p = sys.osc(pp);
        const double t0 = s0.z / p.omega;
        auto [x, y] = osc_flow(s0.x, s0.y, t0, t0 + dt, p);
        if (std::abs(x) > sys.extension_halfwidth)
            throw ExtensionExceeded("advance: |x| exceeded extension half-width");
        return {x, y, s0.z + p.omega * dt};
    }

    auto f = [&](double x, double y, double s) {
        return sys.field(x, y, s0.z + omega * s, pp);
    };
    const double dir = (dt >= 0.0) ? 1.0 : -1.0;
    const double total = std::abs(dt);
    double s = 0.0;
    double x = s0.x, y = s0.y;
    double h = std::min({cfg.max_step, total, 1e-2});
    if (h <= 0.0) return s0;
    int steps = 0;
    const int max_steps = 2'000'000;
    while (s < total) {
        if (++steps > max_steps) throw Error("advance: step limit exceeded");
        h = std::min(h, total - s);
        double x5, y5, ex, ey;
        detail::rkdp_step(f, x, y, dir * s, dir * h, x5, y5, ex, ey);
        const double sx = cfg.abs_tol + cfg.rel_tol * std::max(std::abs(x), std::abs(x5));
        const double sy = cfg.abs_tol + cfg.rel_tol * std::max(std::abs(y), std::abs(y5));
        const double err = std::sqrt(0.5 * ((ex / sx) * (ex / sx) + (ey / sy) * (ey / sy)));
        if (err <= 1.0) {
            s += h;
            x = x5;
            y = y5;
            if (std::abs(x) > sys.extension_halfwidth)
                throw ExtensionExceeded("advance: |x| exceeded extension half-width");
        }
        const double fac = (err > 0.0) ? 0.9 * std::pow(err, -0.2) : 5.0;
        h *= std::clamp(fac, 0.2, 5.0);
        h = std::min(h, cfg.max_step);
        if (h < 1e-15 * std::max(1.0, total))
            throw Error("advance: step size underflow (stiff or discontinuous field?)");
    }
    return {x, y, s0.z + omega * dt};
}

/// Acceleration F at a state.
inline double accel(const HybridSystemDef& sys, const ParamPoint& pp, const State& s) {
    return sys.field(s.x, s.y, s.z, pp);
}

} // namespace graze

// Impacting hybrid system abstraction and the harmonically forced linear
// impact oscillator with its exact closed-form flow.
#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <tuple>
#include <utility>

#include "graze/errors.hpp"

namespace graze {

inline constexpr double two_pi = 6.283185307179586476925286766559;

/// Wrap an angle into [0, 2*pi).
inline double wrap_phase(double z) {
    double w = std::fmod(z, two_pi);
    if (w < 0.0) w += two_pi;
    return w;
}

/// Phase-space state (x, y, z): position, velocity, forcing phase.
/// z is the literal forcing angle; externally reported values live in
/// [0, 2*pi), internal computations may hold an unwrapped phase.
struct State {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    [[nodiscard]] State wrapped() const { return {x, y, wrap_phase(z)}; }
};

/// Primary and secondary bifurcation parameters.
struct ParamPoint {
    double mu = 0.0;
    double eta = 0.0;
};

/// Parameters of the forced linear impact oscillator
///   x'' + 2 zeta x' + x + 1 = amp cos(omega t),  restitution epsilon at x=0.
struct OscParams {
    double zeta = 0.02;
    double epsilon = 0.9;
    double amp = 0.0;
    double omega = 1.0;

    /// Damped natural frequency sqrt(1 - zeta^2).
    [[nodiscard]] double omega_damped() const { return std::sqrt(1.0 - zeta * zeta); }

    /// True when impacts conserve energy; several coefficient formulas
    /// degenerate in this case and output is flagged accordingly.
    [[nodiscard]] bool lossless() const { return epsilon == 1.0; }

    void validate() const {
        if (!(zeta > 0.0 && zeta < 1.0))
            throw ConfigError("OscParams: zeta must satisfy 0 < zeta < 1 (under-damped)");
        if (!(epsilon > 0.0 && epsilon <= 1.0))
            throw ConfigError("OscParams: epsilon must satisfy 0 < epsilon <= 1");
        if (!(omega > 0.0)) throw ConfigError("OscParams: omega must be positive");
        if (!(amp >= 0.0)) throw ConfigError("OscParams: amp must be non-negative");
    }
};

/// Right-hand side of the oscillator: returns (dx, dy, dz).
inline std::tuple<double, double, double> osc_field(const State& s, const OscParams& p) {
    return {s.y, -2.0 * p.zeta * s.y - s.x - 1.0 + p.amp * std::cos(s.z), p.omega};
}

/// Forcing amplitude at which the non-impacting periodic solution grazes x=0.
inline double grazing_amplitude(double omega, double zeta) {
    const double a = 1.0 - omega * omega;
    return std::sqrt(a * a + 4.0 * zeta * zeta * omega * omega);
}

/// Forcing phase of the grazing point, in [0, 2*pi); satisfies
/// sin z = 2 zeta omega / A_graz and cos z = (1 - omega^2) / A_graz.
inline double grazing_phase(double omega, double zeta) {
    return wrap_phase(std::atan2(2.0 * zeta * omega, 1.0 - omega * omega));
}

namespace detail {

/// Particular (steady-state) solution of the forced oscillator and its
/// time derivatives, evaluated at time t.
struct Particular {
    double c1, c2, omega; // phi_p(t) = -1 + c1 cos(omega t) + c2 sin(omega t)

    Particular(const OscParams& p) : omega(p.omega) {
        const double den = grazing_amplitude(p.omega, p.zeta);
        const double d2 = den * den;
        c1 = p.amp * (1.0 - p.omega * p.omega) / d2;
        c2 = p.amp * 2.0 * p.zeta * p.omega / d2;
    }
    [[nodiscard]] double value(double t) const {
        return -1.0 + c1 * std::cos(omega * t) + c2 * std::sin(omega * t);
    }
    [[nodiscard]] double deriv(double t) const {
        return omega * (-c1 * std::sin(omega * t) + c2 * std::cos(omega * t));
    }
};

} // namespace detail

/// Exact solution of the linear oscillator: position and velocity at time t
/// given (x0, y0) at time t0. Valid for all t (smooth global extension).
inline std::pair<double, double> osc_flow(double x0, double y0, double t0, double t,
                                          const OscParams& p) {
    const detail::Particular ph(p);
    const double om1 = p.omega_damped();
    const double s = t - t0;
    const double a = x0 - ph.value(t0);
    const double b = y0 - ph.deriv(t0);
    const double e = std::exp(-p.zeta * s);
    const double c = std::cos(om1 * s);
    const double sn = std::sin(om1 * s);
    const double x = e * ((c + p.zeta / om1 * sn) * a + sn / om1 * b) + ph.value(t);
    const double y = e * (-sn / om1 * a + (c - p.zeta / om1 * sn) * b) + ph.deriv(t);
    return {x, y};
}

/// General impacting hybrid system: smooth vector field for x <= 0 (with a
/// declared smooth extension into x > 0), reset factors Phi/Psi, and the
/// (mu, eta) parameterization of the forcing frequency.
struct HybridSystemDef {
    /// Acceleration F(x, y, z; mu, eta). Must be evaluable for
    /// |x| <= extension_halfwidth.
    std::function<double(double x, double y, double z, const ParamPoint&)> field;
    /// Restitution factor Phi(y, z; mu, eta); strictly positive.
    std::function<double(double y, double z, const ParamPoint&)> phi;
    /// Phase-shift factor Psi(y, z; mu, eta).
    std::function<double(double y, double z, const ParamPoint&)> psi;
    /// Forcing frequency omega(mu, eta).
    std::function<double(const ParamPoint&)> omega_of;
    /// Largest |x| for which the smooth extension is declared valid.
    double extension_halfwidth = std::numeric_limits<double>::infinity();
    /// Closed-form fast path: when set, flow evaluation bypasses the
    /// numerical integrator entirely. Set for oscillator instances.
    std::function<OscParams(const ParamPoint&)> osc;

    [[nodiscard]] bool has_closed_form() const { return static_cast<bool>(osc); }
};

/// Reset law applied on the impacting surface x = 0:
///   (y, z) -> (-y Phi(y,z), z + y Psi(y,z)),
/// with the phase left unwrapped (callers near grazing rely on this).
inline std::pair<double, double> reset_unwrapped(double y, double z, const HybridSystemDef& sys,
                                                 const ParamPoint& pp) {
    return {-y * sys.phi(y, z, pp), z + y * sys.psi(y, z, pp)};
}

/// Reset law with the externally visible wrapped phase.
inline std::pair<double, double> reset(double y, double z, const HybridSystemDef& sys,
                                       const ParamPoint& pp) {
    auto [yr, zr] = reset_unwrapped(y, z, sys, pp);
    return {yr, wrap_phase(zr)};
}

/// Oscillator as a hybrid system in the canonical unfolding parameterization:
/// omega = omega_ref + eta and amp = A_graz(omega) + mu, so grazing sits at
/// mu = 0 for every eta.
inline HybridSystemDef make_oscillator_system(double zeta, double epsilon, double omega_ref) {
    OscParams probe{zeta, epsilon, 1.0, omega_ref};
    probe.validate();
    HybridSystemDef sys;
    auto params_of = [zeta, epsilon, omega_ref](const ParamPoint& pp) {
        const double om = omega_ref + pp.eta;
        return OscParams{zeta, epsilon, grazing_amplitude(om, zeta) + pp.mu, om};
    };
    sys.osc = params_of;
    sys.field = [params_of](double x, double y, double z, const ParamPoint& pp) {
        const OscParams p = params_of(pp);
        return -2.0 * p.zeta * y - x - 1.0 + p.amp * std::cos(z);
    };
    sys.phi = [epsilon](double, double, const ParamPoint&) { return epsilon; };
    sys.psi = [](double, double, const ParamPoint&) { return 0.0; };
    sys.omega_of = [omega_ref](const ParamPoint& pp) { return omega_ref + pp.eta; };
    sys.extension_halfwidth = std::numeric_limits<double>::infinity();
    return sys;
}

/// Oscillator with raw parameterization mu = amp, eta = omega. Used to treat
/// the oscillator as a black-box system for the generic code paths.
inline HybridSystemDef make_oscillator_raw(double zeta, double epsilon) {
    HybridSystemDef sys;
    sys.field = [zeta](double x, double y, double z, const ParamPoint& pp) {
        return -2.0 * zeta * y - x - 1.0 + pp.mu * std::cos(z);
    };
    sys.phi = [epsilon](double, double, const ParamPoint&) { return epsilon; };
    sys.psi = [](double, double, const ParamPoint&) { return 0.0; };
    sys.omega_of = [](const ParamPoint& pp) { return pp.eta; };
    sys.extension_halfwidth = std::numeric_limits<double>::infinity();
    return sys;
}

} // namespace graze

// Event-driven flow integration and the Poincare-type maps: the global
// return map and its iterates, the virtual map Sigma -> Pi, the
// discontinuity map, the VIVID function, and finite-difference derivatives.
#pragma once

#include <array>
#include <cmath>
#include <utility>
#include <vector>

#include "graze/config.hpp"
#include "graze/errors.hpp"
#include "graze/integrate.hpp"
#include "graze/model.hpp"

namespace graze {

/// Point on the Poincare section Pi = {y = 0, F < 0} (local maxima of x).
/// The phase may be unwrapped; wrap only at API boundaries.
struct SectionPoint {
    double x = 0.0;
    double z = 0.0;
};

/// Point on the impacting surface Sigma (x = 0 implicitly). Admissible
/// impacts have y_imp > 0; virtual-extension computations may use any sign.
struct ImpactPoint {
    double y_imp = 0.0;
    double z_imp = 0.0;
};

enum class Direction { forward, backward };

/// 2x2 Jacobian of the global map at grazing plus its mu-derivative.
struct MapDerivs {
    std::array<std::array<double, 2>, 2> a_mat{{{0, 0}, {0, 0}}};
    std::array<double, 2> b_vec{0, 0};
    bool orientation_preserving = true; ///< det(a_mat) > 0

    [[nodiscard]] double a(int i, int j) const { return a_mat[i][j]; }
    [[nodiscard]] double trace() const { return a_mat[0][0] + a_mat[1][1]; }
    [[nodiscard]] double det() const {
        return a_mat[0][0] * a_mat[1][1] - a_mat[0][1] * a_mat[1][0];
    }
};

/// Second derivatives of the first component of the p-th global-map iterate.
struct SecondDerivs {
    int p = 1;
    double xi_p = 0.0; ///< d2 / dz2
    double d_p = 0.0;  ///< d2 / dz dx
    double e_p = 0.0;  ///< d2 / dz dmu
    double f_p = 0.0;  ///< d2 / dz deta
};

namespace detail {

/// Threshold below which the acceleration at a located section crossing is
/// considered tangential (degenerate maximum) and the crossing is rejected.
inline constexpr double tangent_accel_tol = 1e-7;

struct EventHit {
    State state;    ///< state at the event (z unwrapped from the start state)
    double elapsed; ///< elapsed time along the march direction (>= 0)
};

/// First crossing of {y = 0, F < 0} strictly after `s0` in the given time
/// direction. Crossings with F > 0 (minima) are skipped; |F| below the
/// tangential threshold is an error. The first march interval is included:
/// when y0 == 0 the starting sign is that of y immediately after departure.
inline EventHit next_section_crossing(const HybridSystemDef& sys, const ParamPoint& pp,
                                      const State& s0, Direction direction,
                                      const IntegratorConfig& cfg) {
    const double omega = sys.omega_of(pp);
    const double period = two_pi / omega;
    const double d = (direction == Direction::forward) ? 1.0 : -1.0;
    const double dt = std::min(cfg.max_step, period / 128.0);
    const double horizon = cfg.max_period_multiples * period;

    auto eval = [&](const State& anchor, double tau) { return advance(sys, pp, anchor, d * tau, cfg); };

    double sign_prev;
    if (s0.y != 0.0) {
        sign_prev = (s0.y > 0.0) ? 1.0 : -1.0;
    } else {
        const double f0 = accel(sys, pp, s0);
        if (f0 == 0.0) throw TangentialCrossing("next_section_crossing: start has y = 0, F = 0");
        sign_prev = (d * f0 > 0.0) ? 1.0 : -1.0;
    }

    State anchor = s0;
    double t_base = 0.0;
    while (t_base < horizon) {
        const State s1 = eval(anchor, dt);
        const double sign_new = (s1.y > 0.0) ? 1.0 : ((s1.y < 0.0) ? -1.0 : 0.0);
        if (sign_new != 0.0 && sign_new != sign_prev) {
            // bracketed: bisect on the sign of y within [0, dt] from anchor
            double lo = 0.0, hi = dt;
            for (int it = 0; it < 64 && (hi - lo) > cfg.event_tol * 1e-3; ++it) {
                const double mid = 0.5 * (lo + hi);
                const State sm = eval(anchor, mid);
                const double sgn = (sm.y > 0.0) ? 1.0 : ((sm.y < 0.0) ? -1.0 : 0.0);
                if (sgn == sign_prev)
                    lo = mid;
                else
                    hi = mid;
            }
            // Newton polish on y(t) using y' = F
            double tau = 0.5 * (lo + hi);
            State se = eval(anchor, tau);
            for (int it = 0; it < 4; ++it) {
                const double f = accel(sys, pp, se);
                if (f == 0.0) break;
                const double step = -se.y / (d * f);
                if (!std::isfinite(step)) break;
                const double tn = std::clamp(tau + step, 0.0, dt);
                if (tn == tau) break;
                tau = tn;
                se = eval(anchor, tau);
            }
            const double f_cross = accel(sys, pp, se);
            if (std::abs(f_cross) < tangent_accel_tol)
                throw TangentialCrossing("next_section_crossing: |F| below tangential threshold at crossing");
            if (f_cross < 0.0) {
                se.y = 0.0; // on the section by construction
                return {se, t_base + tau};
            }
            // minimum of x: skip and continue from just past the crossing
        }
        if (sign_new != 0.0) sign_prev = sign_new;
        anchor = s1;
        t_base += dt;
    }
    throw NoSectionCrossing("next_section_crossing: no {y=0, F<0} crossing within " +
                            std::to_string(cfg.max_period_multiples) + " periods");
}

/// First crossing of x = 0 strictly after `s0` in the given time direction.
inline EventHit next_wall_crossing(const HybridSystemDef& sys, const ParamPoint& pp,
                                   const State& s0, Direction direction,
                                   const IntegratorConfig& cfg) {
    const double omega = sys.omega_of(pp);
    const double period = two_pi / omega;
    const double d = (direction == Direction::forward) ? 1.0 : -1.0;
    const double dt = std::min(cfg.max_step, period / 128.0);
    const double horizon = cfg.max_period_multiples * period;

    auto eval = [&](const State& anchor, double tau) { return advance(sys, pp, anchor, d * tau, cfg); };

    double sign_prev;
    if (s0.x != 0.0) {
        sign_prev = (s0.x > 0.0) ? 1.0 : -1.0;
    } else {
        if (s0.y == 0.0) throw Error("next_wall_crossing: start at x = 0 with y = 0");
        sign_prev = (d * s0.y > 0.0) ? 1.0 : -1.0;
    }

    State anchor = s0;
    double t_base = 0.0;
    while (t_base < horizon) {
        const State s1 = eval(anchor, dt);
        const double sign_new = (s1.x > 0.0) ? 1.0 : ((s1.x < 0.0) ? -1.0 : 0.0);
        if (sign_new != 0.0 && sign_new != sign_prev) {
            double lo = 0.0, hi = dt;
            for (int it = 0; it < 64 && (hi - lo) > cfg.event_tol * 1e-3; ++it) {
                const double mid = 0.5 * (lo + hi);
                const State sm = eval(anchor, mid);
                const double sgn = (sm.x > 0.0) ? 1.0 : ((sm.x < 0.0) ? -1.0 : 0.0);
                if (sgn == sign_prev)
                    lo = mid;
                else
                    hi = mid;
            }
            double tau = 0.5 * (lo + hi);
            State se = eval(anchor, tau);
            for (int it = 0; it < 4; ++it) {
                if (se.y == 0.0) break;
                const double step = -se.x / (d * se.y);
                if (!std::isfinite(step)) break;
                const double tn = std::clamp(tau + step, 0.0, dt);
                if (tn == tau) break;
                tau = tn;
                se = eval(anchor, tau);
            }
            se.x = 0.0;
            return {se, t_base + tau};
        }
        if (sign_new != 0.0) sign_prev = sign_new;
        anchor = s1;
        t_base += dt;
    }
    throw NoSectionCrossing("next_wall_crossing: no x = 0 crossing within horizon");
}

} // namespace detail

/// Validated construction of a section point: requires F(x, 0, z) < 0.
inline SectionPoint section_point(double x, double z, const HybridSystemDef& sys,
                                  const ParamPoint& pp) {
    if (!(sys.field(x, 0.0, z, pp) < 0.0))
        throw NotGrazing("section_point: F >= 0 at (x, 0, z); not a local maximum of x");
    return {x, z};
}

/// First subsequent crossing of Pi in the given time direction, with
/// impacts ignored (extended flow). Returns the crossing and elapsed time.
inline std::pair<SectionPoint, double> flow_to_section(const State& s, const HybridSystemDef& sys,
                                                       const ParamPoint& pp,
                                                       const IntegratorConfig& cfg,
                                                       Direction direction = Direction::forward) {
    const auto hit = detail::next_section_crossing(sys, pp, s, direction, cfg);
    return {SectionPoint{hit.state.x, hit.state.z}, hit.elapsed};
}

/// One-period return map to Pi under the extended flow. The returned phase
/// is re-anchored to the chart of the input phase (offset by the nearest
/// multiple of 2*pi), keeping iterated phases unwrapped and smooth.
inline SectionPoint global_map(const SectionPoint& sp, const HybridSystemDef& sys,
                               const ParamPoint& pp, const IntegratorConfig& cfg) {
    if (!(sys.field(sp.x, 0.0, sp.z, pp) < 0.0))
        throw NotGrazing("global_map: input is not a valid section point (F >= 0)");
    const auto hit =
        detail::next_section_crossing(sys, pp, State{sp.x, 0.0, sp.z}, Direction::forward, cfg);
    const double zu = hit.state.z;
    const double z_anchored = zu - two_pi * std::round((zu - sp.z) / two_pi);
    return {hit.state.x, z_anchored};
}

/// p-fold composition of the global map; `intermediates` holds the p-1
/// interior crossings (needed for admissibility checks).
inline SectionPoint global_map_iter(int p, const SectionPoint& sp, const HybridSystemDef& sys,
                                    const ParamPoint& pp, const IntegratorConfig& cfg,
                                    std::vector<SectionPoint>* intermediates = nullptr) {
    if (p < 1) throw Error("global_map_iter: p must be >= 1");
    if (intermediates) intermediates->clear();
    SectionPoint cur = sp;
    for (int j = 0; j < p; ++j) {
        cur = global_map(cur, sys, pp, cfg);
        if (intermediates && j + 1 < p) intermediates->push_back(cur);
    }
    return cur;
}

/// Virtual map Sigma -> Pi along the extended flow: forwards in time for
/// y_imp > 0, backwards for y_imp < 0, identity (0, z) for y_imp = 0.
inline SectionPoint virtual_map(const ImpactPoint& ip, const HybridSystemDef& sys,
                                const ParamPoint& pp, const IntegratorConfig& cfg) {
    if (ip.y_imp == 0.0) return {0.0, ip.z_imp};
    const Direction dir = (ip.y_imp > 0.0) ? Direction::forward : Direction::backward;
    const auto hit =
        detail::next_section_crossing(sys, pp, State{0.0, ip.y_imp, ip.z_imp}, dir, cfg);
    return {hit.state.x, hit.state.z};
}

/// Incoming-branch inverse of the virtual map for a section point with
/// x > 0: the backward orbit from Pi meets Sigma first at the incoming
/// point (y > 0), which is returned.
inline ImpactPoint virtual_map_inverse(const SectionPoint& sp, const HybridSystemDef& sys,
                                       const ParamPoint& pp, const IntegratorConfig& cfg) {
    if (!(sp.x > 0.0))
        throw InverseNotFound("virtual_map_inverse: requires x > 0 (virtual penetration)");
    detail::EventHit hit;
    try {
        hit = detail::next_wall_crossing(sys, pp, State{sp.x, 0.0, sp.z}, Direction::backward, cfg);
    } catch (const NoSectionCrossing&) {
        throw InverseNotFound("virtual_map_inverse: backward orbit does not reach Sigma");
    }
    if (!(hit.state.y > 0.0))
        throw InverseNotFound("virtual_map_inverse: preimage not on the incoming branch");
    return {hit.state.y, hit.state.z};
}

/// Discontinuity map P_virt o R o P_virt^{-1} on section points with x > 0;
/// identity on x = 0. Carries the square-root singularity of grazing.
inline SectionPoint discontinuity_map(const SectionPoint& sp, const HybridSystemDef& sys,
                                      const ParamPoint& pp, const IntegratorConfig& cfg) {
    if (sp.x == 0.0) return sp;
    const ImpactPoint in = virtual_map_inverse(sp, sys, pp, cfg);
    auto [yr, zr] = reset_unwrapped(in.y_imp, in.z_imp, sys, pp);
    return virtual_map(ImpactPoint{yr, zr}, sys, pp, cfg);
}

/// VIVID function V = P_global^p(P_virt(R(y,z))) - P_virt(y,z), evaluated
/// componentwise with unwrapped phases: smooth where the discontinuity map
/// is not, so its zeros (p-loop MPSs) are Newton-findable.
struct VividValue {
    double v1 = 0.0; ///< x-difference
    double v2 = 0.0; ///< z-difference (unwrapped)
};

inline VividValue vivid(const ImpactPoint& ip, int p, const HybridSystemDef& sys,
                        const ParamPoint& pp, const IntegratorConfig& cfg,
                        std::vector<SectionPoint>* crossings = nullptr) {
    if (p < 1) throw Error("vivid: p must be >= 1");
    auto [yr, zr] = reset_unwrapped(ip.y_imp, ip.z_imp, sys, pp);
    SectionPoint cur = virtual_map(ImpactPoint{yr, zr}, sys, pp, cfg);
    if (crossings) {
        crossings->clear();
        crossings->push_back(cur);
    }
    for (int j = 0; j < p; ++j) {
        cur = global_map(cur, sys, pp, cfg);
        if (crossings) crossings->push_back(cur);
    }
    const SectionPoint hat = virtual_map(ip, sys, pp, cfg);
    return {cur.x - hat.x, cur.z - hat.z};
}

namespace detail {

inline constexpr double fd_step_first = 1e-6;  // central differences, first derivatives
inline constexpr double fd_step_second = 1e-4; // symmetric stencils, second derivatives

} // namespace detail

/// Central finite differences of the global map in (x, z, mu) at the grazing
/// point of `sys` (mu = 0 in the supplied ParamPoint, which carries eta).
inline MapDerivs numeric_first_derivs(const HybridSystemDef& sys, const ParamPoint& pp,
                                      const SectionPoint& graz, const IntegratorConfig& cfg,
                                      double h = detail::fd_step_first) {
    auto pg = [&](double x, double z, double mu) {
        ParamPoint q = pp;
        q.mu = mu;
        return global_map(SectionPoint{x, z}, sys, q, cfg);
    };
    MapDerivs d;
    const auto fx_p = pg(graz.x + h, graz.z, pp.mu), fx_m = pg(graz.x - h, graz.z, pp.mu);
    const auto fz_p = pg(graz.x, graz.z + h, pp.mu), fz_m = pg(graz.x, graz.z - h, pp.mu);
    const auto fm_p = pg(graz.x, graz.z, pp.mu + h), fm_m = pg(graz.x, graz.z, pp.mu - h);
    d.a_mat[0][0] = (fx_p.x - fx_m.x) / (2 * h);
    d.a_mat[1][0] = (fx_p.z - fx_m.z) / (2 * h);
    d.a_mat[0][1] = (fz_p.x - fz_m.x) / (2 * h);
    d.a_mat[1][1] = (fz_p.z - fz_m.z) / (2 * h);
    d.b_vec[0] = (fm_p.x - fm_m.x) / (2 * h);
    d.b_vec[1] = (fm_p.z - fm_m.z) / (2 * h);
    d.orientation_preserving = d.det() > 0.0;
    return d;
}

/// Symmetric second-difference stencils for xi_p, d_p, e_p, f_p on the first
/// component of the p-th iterate, at the grazing point. The eta-stencil for
/// f_p is anchored at the eta-dependent grazing phase (the phase coordinate
/// of the unfolding is z - z_graz(eta)); `graz_z_of_eta` supplies it, with
/// the oscillator closed form as the default.
inline SecondDerivs numeric_second_derivs(int p, const HybridSystemDef& sys, const ParamPoint& pp,
                                          const SectionPoint& graz, const IntegratorConfig& cfg,
                                          double h = detail::fd_step_second,
                                          const std::function<double(double)>& graz_z_of_eta = {}) {
    auto p1 = [&](double x, double z, double mu, double eta) {
        ParamPoint q{mu, eta};
        return global_map_iter(p, SectionPoint{x, z}, sys, q, cfg).x;
    };
    std::function<double(double)> zg = graz_z_of_eta;
    if (!zg) {
        if (sys.has_closed_form()) {
            zg = [&sys, &pp](double eta) {
                const OscParams op = sys.osc(ParamPoint{0.0, pp.eta + eta});
                return grazing_phase(op.omega, op.zeta);
            };
        } else {
            const double z_fixed = graz.z;
            zg = [z_fixed](double) { return z_fixed; };
        }
    }
    const double x0 = graz.x, z0 = graz.z, mu0 = pp.mu, et0 = pp.eta;
    SecondDerivs sd;
    sd.p = p;
    const double f0 = p1(x0, z0, mu0, et0);
    sd.xi_p = (p1(x0, z0 + h, mu0, et0) - 2.0 * f0 + p1(x0, z0 - h, mu0, et0)) / (h * h);
    sd.d_p = (p1(x0 + h, z0 + h, mu0, et0) - p1(x0 + h, z0 - h, mu0, et0) -
              p1(x0 - h, z0 + h, mu0, et0) + p1(x0 - h, z0 - h, mu0, et0)) /
             (4.0 * h * h);
    sd.e_p = (p1(x0, z0 + h, mu0 + h, et0) - p1(x0, z0 - h, mu0 + h, et0) -
              p1(x0, z0 + h, mu0 - h, et0) + p1(x0, z0 - h, mu0 - h, et0)) /
             (4.0 * h * h);
    const double zp = zg(+h) - zg(0.0) + z0, zm = zg(-h) - zg(0.0) + z0;
    sd.f_p = (p1(x0, zp + h, mu0, et0 + h) - p1(x0, zp - h, mu0, et0 + h) -
              p1(x0, zm + h, mu0, et0 - h) + p1(x0, zm - h, mu0, et0 - h)) /
             (4.0 * h * h);
    return sd;
}

/// Grazing section point of an oscillator system (closed form).
inline SectionPoint oscillator_grazing_point(const HybridSystemDef& sys, const ParamPoint& pp) {
    if (!sys.has_closed_form()) throw Error("oscillator_grazing_point: system has no closed form");
    const OscParams p = sys.osc(ParamPoint{0.0, pp.eta});
    return {0.0, grazing_phase(p.omega, p.zeta)};
}

} // namespace graze

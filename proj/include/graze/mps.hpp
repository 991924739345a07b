// p-loop maximal periodic solutions: Newton search on the VIVID function,
// stability multipliers via singularity-free matrix products, and
// admissibility verdicts.
#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <vector>

#include "graze/config.hpp"
#include "graze/errors.hpp"
#include "graze/maps.hpp"
#include "graze/model.hpp"

namespace graze {

/// Trace/determinant/multipliers of the p-period return map about an MPS,
/// with the saddle-node and period-doubling test functions.
struct StabilityInfo {
    double trace_T = 0.0;
    double det_D = 0.0;
    std::complex<double> multipliers[2];
    double test_sn = 0.0; ///< 1 - T + D, zero at a +1 multiplier
    double test_pd = 0.0; ///< 1 + T + D, zero at a -1 multiplier

    [[nodiscard]] bool stable() const {
        return std::abs(multipliers[0]) < 1.0 && std::abs(multipliers[1]) < 1.0;
    }
};

/// Admissibility verdict: positive impact velocity and all interior section
/// crossings at x < 0.
struct Admissibility {
    bool admissible = false;
    bool velocity_ok = false;
    std::vector<int> violations; ///< indices j in 1..p-1 with x^(j) >= -band
};

/// A converged p-loop maximal periodic solution.
struct MpsSolution {
    int p = 1;
    ImpactPoint impact;
    ParamPoint params;
    std::vector<SectionPoint> crossings; ///< x^(0) .. x^(p); ends virtual (x > 0)
    double residual = 0.0;               ///< scaled max-norm of V at the solution
    StabilityInfo stability;
    Admissibility admissible;
};

namespace detail {

/// Scaled residual norm: the phase component is divided by omega so both
/// components share magnitude (a radian is omega seconds).
inline double vivid_norm(const VividValue& v, double omega) {
    return std::max(std::abs(v.v1), std::abs(v.v2) / omega);
}

using Mat2 = std::array<std::array<double, 2>, 2>;

inline Mat2 mat_mul(const Mat2& a, const Mat2& b) {
    Mat2 c{};
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) c[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
    return c;
}

inline Mat2 mat_inv(const Mat2& a, const char* what) {
    const double det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    if (det == 0.0 || !std::isfinite(1.0 / det))
        throw SingularJacobian(std::string("mat_inv: singular matrix in ") + what);
    return {{{a[1][1] / det, -a[0][1] / det}, {-a[1][0] / det, a[0][0] / det}}};
}

} // namespace detail

/// Impact-velocity floor below which the stability product is numerically
/// singular; callers must use theory-side asymptotics instead.
inline constexpr double stability_y_floor = 1e-8;

/// Stability data of the p-period return map at an arbitrary impact point
/// (not necessarily a solution): eigenvalues of
///   U = D(P_global^p) . D(P_virt o R) . (D P_virt)^{-1},
/// all factors finite-differenced in (y_imp, z_imp) coordinates so no
/// stencil crosses the square-root singularity.
inline StabilityInfo stability_at(const ImpactPoint& ip, int p, const HybridSystemDef& sys,
                                  const ParamPoint& pp, const IntegratorConfig& cfg) {
    if (!(ip.y_imp > stability_y_floor))
        throw TooCloseToGrazing("stability_at: y_imp below the stability floor");
    // The virtual map is smooth across y = 0, so the stencil may straddle
    // it. 1e-5 balances truncation against the event-location noise floor,
    // which the (D P_virt)^{-1} factor amplifies by 1/y_imp.
    const double hy = 1e-5;
    const double hz = 1e-5;

    auto fd2 = [](auto&& f, double u, double v, double hu, double hv) {
        const SectionPoint pu = f(u + hu, v), mu_ = f(u - hu, v);
        const SectionPoint pv = f(u, v + hv), mv = f(u, v - hv);
        return detail::Mat2{{{(pu.x - mu_.x) / (2 * hu), (pv.x - mv.x) / (2 * hv)},
                             {(pu.z - mu_.z) / (2 * hu), (pv.z - mv.z) / (2 * hv)}}};
    };

    auto virt = [&](double y, double z) { return virtual_map(ImpactPoint{y, z}, sys, pp, cfg); };
    auto virt_reset = [&](double y, double z) {
        auto [yr, zr] = reset_unwrapped(y, z, sys, pp);
        return virtual_map(ImpactPoint{yr, zr}, sys, pp, cfg);
    };

    const detail::Mat2 d_virt = fd2(virt, ip.y_imp, ip.z_imp, hy, hz);
    const detail::Mat2 d_virt_reset = fd2(virt_reset, ip.y_imp, ip.z_imp, hy, hz);
    const SectionPoint x0 = virt_reset(ip.y_imp, ip.z_imp);
    auto glob = [&](double x, double z) {
        return global_map_iter(p, SectionPoint{x, z}, sys, pp, cfg);
    };
    const detail::Mat2 d_glob = fd2(glob, x0.x, x0.z, 1e-5, 1e-5);

    const detail::Mat2 u =
        detail::mat_mul(d_glob, detail::mat_mul(d_virt_reset, detail::mat_inv(d_virt, "D P_virt")));

    StabilityInfo st;
    st.trace_T = u[0][0] + u[1][1];
    st.det_D = u[0][0] * u[1][1] - u[0][1] * u[1][0];
    const std::complex<double> disc =
        std::sqrt(std::complex<double>(st.trace_T * st.trace_T - 4.0 * st.det_D, 0.0));
    st.multipliers[0] = 0.5 * (st.trace_T + disc);
    st.multipliers[1] = 0.5 * (st.trace_T - disc);
    st.test_sn = 1.0 - st.trace_T + st.det_D;
    st.test_pd = 1.0 + st.trace_T + st.det_D;
    return st;
}

/// Admissibility check on populated crossings: y_imp > 0 and interior
/// crossings x < 0, with a conservative zero-tolerance band.
inline Admissibility admissibility(const MpsSolution& sol, double band = 1e-12) {
    Admissibility a;
    a.velocity_ok = sol.impact.y_imp > band;
    for (int j = 1; j + 1 <= static_cast<int>(sol.crossings.size()) - 1; ++j) {
        if (!(sol.crossings[j].x < -band)) a.violations.push_back(j);
    }
    a.admissible = a.velocity_ok && a.violations.empty();
    return a;
}

namespace detail {

inline constexpr int newton_iter_cap = 30;
inline constexpr double newton_cond_cap = 1e12;

} // namespace detail

/// Damped Newton on the VIVID function from `guess`, at fixed parameters.
/// Converged solutions carry residual < tol in the scaled norm, stability
/// (when the impact velocity allows it), and the admissibility verdict.
inline MpsSolution solve_mps(int p, const ParamPoint& pp, const ImpactPoint& guess,
                             const HybridSystemDef& sys, const IntegratorConfig& cfg,
                             double tol = 1e-10, bool want_stability = true) {
    const double omega = sys.omega_of(pp);
    double y = guess.y_imp, z = guess.z_imp;
    VividValue v = vivid(ImpactPoint{y, z}, p, sys, pp, cfg);
    double rnorm = detail::vivid_norm(v, omega);

    for (int it = 0; it < detail::newton_iter_cap && rnorm >= tol; ++it) {
        const double h = 1e-7;
        const VividValue vyp = vivid(ImpactPoint{y + h, z}, p, sys, pp, cfg);
        const VividValue vym = vivid(ImpactPoint{y - h, z}, p, sys, pp, cfg);
        const VividValue vzp = vivid(ImpactPoint{y, z + h}, p, sys, pp, cfg);
        const VividValue vzm = vivid(ImpactPoint{y, z - h}, p, sys, pp, cfg);
        const double j11 = (vyp.v1 - vym.v1) / (2 * h), j12 = (vzp.v1 - vzm.v1) / (2 * h);
        const double j21 = (vyp.v2 - vym.v2) / (2 * h), j22 = (vzp.v2 - vzm.v2) / (2 * h);
        const double det = j11 * j22 - j12 * j21;
        const double norm1 = std::max(std::abs(j11) + std::abs(j12), std::abs(j21) + std::abs(j22));
        if (det == 0.0 || norm1 * norm1 / std::abs(det) > detail::newton_cond_cap)
            throw SingularJacobian("solve_mps: VIVID Jacobian numerically singular "
                                   "(expected exactly at resonance)");
        double dy = (-v.v1 * j22 + v.v2 * j12) / det;
        double dz = (-j11 * v.v2 + j21 * v.v1) / det;
        // halving line search on the scaled residual norm
        double lambda = 1.0;
        bool accepted = false;
        for (int ls = 0; ls < 8; ++ls) {
            const double yn = y + lambda * dy, zn = z + lambda * dz;
            VividValue vn;
            try {
                vn = vivid(ImpactPoint{yn, zn}, p, sys, pp, cfg);
            } catch (const Error&) {
                lambda *= 0.5;
                continue;
            }
            const double rn = detail::vivid_norm(vn, omega);
            if (rn < rnorm || (ls == 0 && rn < tol)) {
                y = yn;
                z = zn;
                v = vn;
                rnorm = rn;
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        if (!accepted) throw NoConvergence("solve_mps: line search stalled at |V| = " +
                                           std::to_string(rnorm));
    }
    if (rnorm >= tol)
        throw NoConvergence("solve_mps: iteration cap reached at |V| = " + std::to_string(rnorm));

    MpsSolution sol;
    sol.p = p;
    sol.impact = {y, z};
    sol.params = pp;
    std::vector<SectionPoint> crossings;
    vivid(sol.impact, p, sys, pp, cfg, &crossings);
    sol.crossings = std::move(crossings);
    sol.residual = rnorm;
    sol.admissible = admissibility(sol);
    if (want_stability && y > stability_y_floor)
        sol.stability = stability_at(sol.impact, p, sys, pp, cfg);
    return sol;
}

/// Stability of a converged solution.
inline StabilityInfo stability(const MpsSolution& sol, const HybridSystemDef& sys,
                               const IntegratorConfig& cfg) {
    return stability_at(sol.impact, sol.p, sys, sol.params, cfg);
}

} // namespace graze

// One-parameter continuation of MPS branches with SN/PD/GZ detection, and
// two-parameter pseudo-arclength continuation of saddle-node,
// period-doubling, and grazing curves.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "graze/config.hpp"
#include "graze/errors.hpp"
#include "graze/maps.hpp"
#include "graze/model.hpp"
#include "graze/mps.hpp"
#include "graze/theory.hpp"

namespace graze {

enum class BifKind { SN, PD, GZ };

inline const char* to_string(BifKind k) {
    switch (k) {
        case BifKind::SN: return "SN";
        case BifKind::PD: return "PD";
        default: return "GZ";
    }
}

/// What fired a bifurcation record: a stability test function, the impact
/// velocity reaching zero, or an interior section crossing reaching x = 0
/// (loss of admissibility; the solution is destroyed by grazing).
enum class BifTrigger { test_function, impact_velocity, interior_crossing };

struct BifurcationRecord {
    BifKind kind = BifKind::SN;
    BifTrigger trigger = BifTrigger::test_function;
    int p = 1;
    ParamPoint params;
    ImpactPoint impact;
    double refinement_residual = 0.0;
};

/// One accepted continuation sample along an MPS branch.
struct BranchSample {
    MpsSolution sol;
    double arclength = 0.0;
    bool has_tests = false; ///< stability evaluated (impact velocity allows)
};

struct BranchResult {
    std::vector<BranchSample> samples;
    std::vector<BifurcationRecord> events;
    std::string termination; ///< why each direction stopped
};

/// One sample of a two-parameter bifurcation curve.
struct CurvePoint {
    double mu = 0, eta = 0, y_imp = 0, z_imp = 0;
    double amp = 0, omega = 0; ///< oscillator coordinates when available
    double residual = 0;
};

struct CurveSample {
    BifKind kind = BifKind::SN;
    int p = 1;
    std::vector<CurvePoint> points;
    double fitted_c = 0.0;        ///< least-squares coefficient of mu = c eta^2
    double fitted_c_stderr = 0.0;
    int n_fit = 0;
    std::string termination;      ///< why each continuation direction stopped
};

namespace detail {

template <int N>
using Vec = std::array<double, N>;
template <int N>
using Mat = std::array<std::array<double, N>, N>;

/// Gaussian elimination with partial pivoting.
template <int N>
inline Vec<N> linsolve(Mat<N> a, Vec<N> b, const char* what) {
    for (int c = 0; c < N; ++c) {
        int piv = c;
        for (int r = c + 1; r < N; ++r)
            if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
        if (a[piv][c] == 0.0) throw SingularJacobian(std::string("linsolve: singular in ") + what);
        std::swap(a[c], a[piv]);
        std::swap(b[c], b[piv]);
        for (int r = c + 1; r < N; ++r) {
            const double f = a[r][c] / a[c][c];
            for (int k = c; k < N; ++k) a[r][k] -= f * a[c][k];
            b[r] -= f * b[c];
        }
    }
    Vec<N> x{};
    for (int r = N - 1; r >= 0; --r) {
        double s = b[r];
        for (int k = r + 1; k < N; ++k) s -= a[r][k] * x[k];
        x[r] = s / a[r][r];
    }
    return x;
}

/// VIVID residual as a function of (y, z, mu) at fixed eta.
struct BranchSystem {
    int p;
    double eta;
    const HybridSystemDef* sys;
    const IntegratorConfig* cfg;

    VividValue operator()(const Vec<3>& w) const {
        return vivid(ImpactPoint{w[0], w[1]}, p, *sys, ParamPoint{w[2], eta}, *cfg);
    }
    double omega() const { return sys->omega_of(ParamPoint{0.0, eta}); }

    std::array<Vec<3>, 2> jacobian(const Vec<3>& w, double h = 1e-7) const {
        std::array<Vec<3>, 2> j{};
        for (int i = 0; i < 3; ++i) {
            Vec<3> wp = w, wm = w;
            wp[i] += h;
            wm[i] -= h;
            const VividValue vp = (*this)(wp), vm = (*this)(wm);
            j[0][i] = (vp.v1 - vm.v1) / (2 * h);
            j[1][i] = (vp.v2 - vm.v2) / (2 * h);
        }
        return j;
    }

    /// Null vector of the 2x3 Jacobian (cross product of its rows).
    Vec<3> tangent(const Vec<3>& w, const Vec<3>* prev) const {
        const auto j = jacobian(w);
        Vec<3> t{j[0][1] * j[1][2] - j[0][2] * j[1][1], j[0][2] * j[1][0] - j[0][0] * j[1][2],
                 j[0][0] * j[1][1] - j[0][1] * j[1][0]};
        const double n = std::sqrt(t[0] * t[0] + t[1] * t[1] + t[2] * t[2]);
        if (n == 0.0 || !std::isfinite(n)) throw TangentDegenerate("branch tangent degenerate");
        for (auto& c : t) c /= n;
        if (prev) {
            const double dot = t[0] * (*prev)[0] + t[1] * (*prev)[1] + t[2] * (*prev)[2];
            if (dot < 0.0)
                for (auto& c : t) c = -c;
        }
        return t;
    }

    /// Newton correction of `w` subject to the linear constraint
    /// row.(w - w_ref) = 0. Returns false on non-convergence.
    bool correct(Vec<3>& w, const Vec<3>& row, const Vec<3>& w_ref, double tol = 1e-11,
                 int iters = 14) const {
        for (int it = 0; it < iters; ++it) {
            VividValue v;
            try {
                v = (*this)(w);
            } catch (const Error&) {
                return false;
            }
            const double cres = row[0] * (w[0] - w_ref[0]) + row[1] * (w[1] - w_ref[1]) +
                                row[2] * (w[2] - w_ref[2]);
            if (vivid_norm(v, omega()) < tol && std::abs(cres) < tol) return true;
            std::array<Vec<3>, 2> j;
            try {
                j = jacobian(w);
            } catch (const Error&) {
                return false;
            }
            Mat<3> a{};
            a[0] = j[0];
            a[1] = j[1];
            a[2] = row;
            Vec<3> rhs{-v.v1, -v.v2, -cres};
            Vec<3> dw;
            try {
                dw = linsolve<3>(a, rhs, "branch corrector");
            } catch (const SingularJacobian&) {
                return false;
            }
            const double dn = std::abs(dw[0]) + std::abs(dw[1]) + std::abs(dw[2]);
            if (!std::isfinite(dn) || dn > 1.0) return false;
            for (int i = 0; i < 3; ++i) w[i] += dw[i];
        }
        return false;
    }
};

/// Build a full MpsSolution record (crossings, admissibility, stability when
/// available) from converged branch coordinates.
inline MpsSolution branch_solution(const BranchSystem& bs, const Vec<3>& w, bool want_stability) {
    MpsSolution sol;
    sol.p = bs.p;
    sol.impact = {w[0], w[1]};
    sol.params = {w[2], bs.eta};
    std::vector<SectionPoint> crossings;
    const VividValue v = vivid(sol.impact, bs.p, *bs.sys, sol.params, *bs.cfg, &crossings);
    sol.crossings = std::move(crossings);
    sol.residual = vivid_norm(v, bs.omega());
    sol.admissible = admissibility(sol);
    if (want_stability && sol.impact.y_imp > 10.0 * stability_y_floor)
        sol.stability = stability_at(sol.impact, bs.p, *bs.sys, sol.params, *bs.cfg);
    return sol;
}

inline double interior_max_x(const MpsSolution& sol) {
    double m = -std::numeric_limits<double>::infinity();
    for (int j = 1; j + 1 < static_cast<int>(sol.crossings.size()); ++j)
        m = std::max(m, sol.crossings[j].x);
    return m;
}

} // namespace detail

/// Options for continue_branch. The neighbourhood box bounds the impact
/// velocity and the phase drift from the start sample.
struct BranchOptions {
    double ds_init = 1e-3;
    double ds_max = 0.05;
    double ds_min = 1e-9;
    double y_max = 2.5;       ///< LeftNeighbourhood beyond this impact velocity
    double z_drift_max = 3.0; ///< LeftNeighbourhood beyond this phase drift
    int max_samples = 4000;
    double event_tol = 1e-8;   ///< refinement tolerance on test functions
    double gz_trigger = 1e-4;  ///< refine GZ once y_imp falls below this
    double natural_mu_threshold = 0.1; ///< |t_mu| above which mu is the local parameter
};

/// Natural-parameter/pseudo-arclength continuation of a p-loop MPS branch
/// at fixed eta, with SN/PD/GZ event detection and refinement. Continues in
/// both directions from `start`.
inline BranchResult continue_branch(int p, double eta, std::pair<double, double> mu_range,
                                    const MpsSolution& start, const HybridSystemDef& sys,
                                    const IntegratorConfig& cfg, const BranchOptions& opt = {}) {
    detail::BranchSystem bs{p, eta, &sys, &cfg};
    BranchResult out;

    const detail::Vec<3> w0{start.impact.y_imp, start.impact.z_imp, start.params.mu};
    {
        // re-verify the start sample
        const VividValue v0 = bs(w0);
        if (detail::vivid_norm(v0, bs.omega()) > 1e-8)
            throw BranchLost("continue_branch: start sample does not satisfy V = 0");
    }

    auto refine_gz_emanation = [&](detail::Vec<3> w) -> std::optional<BifurcationRecord> {
        // y -> 0 endpoint: solve V(0, z; mu) = 0 for (z, mu) by Newton.
        double z = w[1], mu = w[2];
        for (int it = 0; it < 20; ++it) {
            const VividValue v = bs({0.0, z, mu});
            if (detail::vivid_norm(v, bs.omega()) < 1e-11) {
                BifurcationRecord rec;
                rec.kind = BifKind::GZ;
                rec.trigger = BifTrigger::impact_velocity;
                rec.p = p;
                rec.params = {mu, eta};
                rec.impact = {0.0, z};
                rec.refinement_residual = 0.0;
                return rec;
            }
            const double h = 1e-7;
            const VividValue vzp = bs({0.0, z + h, mu}), vzm = bs({0.0, z - h, mu});
            const VividValue vmp = bs({0.0, z, mu + h}), vmm = bs({0.0, z, mu - h});
            detail::Mat<2> a{{{(vzp.v1 - vzm.v1) / (2 * h), (vmp.v1 - vmm.v1) / (2 * h)},
                              {(vzp.v2 - vzm.v2) / (2 * h), (vmp.v2 - vmm.v2) / (2 * h)}}};
            const VividValue v0 = bs({0.0, z, mu});
            detail::Vec<2> rhs{-v0.v1, -v0.v2};
            detail::Vec<2> d;
            try {
                d = detail::linsolve<2>(a, rhs, "gz refinement");
            } catch (const SingularJacobian&) {
                return std::nullopt;
            }
            z += d[0];
            mu += d[1];
        }
        return std::nullopt;
    };

    // Bisection refinement of a scalar monitor g along the secant between
    // two converged branch points; returns the refined point.
    auto refine_between = [&](detail::Vec<3> wa, detail::Vec<3> wb,
                              const std::function<double(const MpsSolution&)>& monitor,
                              double tol) -> std::optional<std::pair<detail::Vec<3>, MpsSolution>> {
        MpsSolution sa = detail::branch_solution(bs, wa, true);
        double ga = monitor(sa);
        for (int it = 0; it < 60; ++it) {
            detail::Vec<3> wm;
            for (int i = 0; i < 3; ++i) wm[i] = 0.5 * (wa[i] + wb[i]);
            detail::Vec<3> dir;
            double n = 0;
            for (int i = 0; i < 3; ++i) {
                dir[i] = wb[i] - wa[i];
                n += dir[i] * dir[i];
            }
            n = std::sqrt(n);
            if (n == 0.0) break;
            for (auto& c : dir) c /= n;
            detail::Vec<3> wc = wm;
            if (!bs.correct(wc, dir, wm)) return std::nullopt;
            MpsSolution sm = detail::branch_solution(bs, wc, true);
            const double gm = monitor(sm);
            if (std::abs(gm) < tol) return std::make_pair(wc, sm);
            if (ga * gm <= 0.0) {
                wb = wc;
            } else {
                wa = wc;
                ga = gm;
            }
        }
        return std::nullopt;
    };

    for (const double dir_sign : {+1.0, -1.0}) {
        detail::Vec<3> w = w0;
        detail::Vec<3> t;
        try {
            t = bs.tangent(w, nullptr);
        } catch (const TangentDegenerate&) {
            out.termination += "tangent degenerate at start; ";
            break;
        }
        for (auto& c : t) c *= dir_sign;
        double ds = opt.ds_init;
        std::optional<BranchSample> prev;
        int fails = 0, streak = 0;
        std::string reason;

        for (int k = 0; k < opt.max_samples; ++k) {
            detail::Vec<3> wp;
            for (int i = 0; i < 3; ++i) wp[i] = w[i] + ds * t[i];
            // natural-parameter constraint when mu varies briskly, arclength
            // constraint to round folds
            detail::Vec<3> row =
                (std::abs(t[2]) >= opt.natural_mu_threshold) ? detail::Vec<3>{0, 0, 1} : t;
            detail::Vec<3> wc = wp;
            const bool ok = bs.correct(wc, row, wp);
            if (!ok) {
                ds *= 0.5;
                streak = 0;
                if (++fails > 3 || ds < opt.ds_min) {
                    reason = "BranchLost after step halvings";
                    break;
                }
                continue;
            }
            fails = 0;
            if (++streak >= 4) {
                ds = std::min(2.0 * ds, opt.ds_max);
                streak = 0;
            }

            // box / window checks
            if (wc[2] < mu_range.first || wc[2] > mu_range.second) {
                reason = "mu left the requested range";
                break;
            }
            if (std::abs(wc[0]) > opt.y_max || std::abs(wc[1] - w0[1]) > opt.z_drift_max) {
                reason = "LeftNeighbourhood";
                break;
            }

            MpsSolution sol = detail::branch_solution(bs, wc, true);
            BranchSample sample;
            sample.sol = sol;
            sample.has_tests = sol.impact.y_imp > 10.0 * stability_y_floor;
            sample.arclength = (prev ? prev->arclength : 0.0) + dir_sign * ds;

            if (prev && prev->has_tests && sample.has_tests) {
                const auto& a = prev->sol;
                const auto& b = sol;
                const detail::Vec<3> wa{a.impact.y_imp, a.impact.z_imp, a.params.mu};
                const detail::Vec<3> wb{b.impact.y_imp, b.impact.z_imp, b.params.mu};
                if (a.stability.test_sn * b.stability.test_sn < 0.0) {
                    if (auto r = refine_between(wa, wb,
                                                [](const MpsSolution& s) { return s.stability.test_sn; },
                                                opt.event_tol)) {
                        BifurcationRecord rec;
                        rec.kind = BifKind::SN;
                        rec.p = p;
                        rec.params = r->second.params;
                        rec.impact = r->second.impact;
                        rec.refinement_residual = std::abs(r->second.stability.test_sn);
                        out.events.push_back(rec);
                    }
                }
                if (a.stability.test_pd * b.stability.test_pd < 0.0) {
                    if (auto r = refine_between(wa, wb,
                                                [](const MpsSolution& s) { return s.stability.test_pd; },
                                                opt.event_tol)) {
                        BifurcationRecord rec;
                        rec.kind = BifKind::PD;
                        rec.p = p;
                        rec.params = r->second.params;
                        rec.impact = r->second.impact;
                        rec.refinement_residual = std::abs(r->second.stability.test_pd);
                        out.events.push_back(rec);
                    }
                }
                const double ia = detail::interior_max_x(a), ib = detail::interior_max_x(b);
                if (p >= 2 && ia * ib < 0.0) {
                    if (auto r = refine_between(wa, wb,
                                                [](const MpsSolution& s) {
                                                    return detail::interior_max_x(s);
                                                },
                                                1e-10)) {
                        BifurcationRecord rec;
                        rec.kind = BifKind::GZ;
                        rec.trigger = BifTrigger::interior_crossing;
                        rec.p = p;
                        rec.params = r->second.params;
                        rec.impact = r->second.impact;
                        rec.refinement_residual = std::abs(detail::interior_max_x(r->second));
                        out.events.push_back(rec);
                    }
                }
            }

            out.samples.push_back(sample);

            // grazing endpoint of the branch: impact velocity through zero
            if (wc[0] < opt.gz_trigger) {
                if (auto rec = refine_gz_emanation(wc)) {
                    out.events.push_back(*rec);
                    reason = "GZ endpoint (impact velocity -> 0)";
                    break;
                }
                if (wc[0] <= 0.0) {
                    reason = "impact velocity crossed zero (GZ refinement failed)";
                    break;
                }
            }

            try {
                t = bs.tangent(wc, &t);
            } catch (const TangentDegenerate&) {
                reason = "tangent degenerate";
                break;
            }
            prev = sample;
            w = wc;
        }
        if (reason.empty()) reason = "sample budget exhausted";
        out.termination += (dir_sign > 0 ? "dir+: " : "dir-: ") + reason + "; ";
    }

    // order samples by arclength (negative direction first, reversed)
    std::stable_sort(out.samples.begin(), out.samples.end(),
                     [](const BranchSample& a, const BranchSample& b) {
                         return a.arclength < b.arclength;
                     });
    return out;
}

/// Options for two-parameter curve continuation.
struct CurveOptions {
    double ds_init = 1e-4;
    double ds_max = 1e-2;
    double ds_min = 1e-9;
    double eta_max = 3e-3;  ///< parameter window half-width around the resonance
    double y_floor = 1e-6;  ///< stop when the impact velocity drops below this
    int max_samples = 400;
    double eta_fit = 2e-3;  ///< fit window: |eta| <= eta_fit
    double eta_fit_min = 1e-4;
    double psi_tol = 1e-9;  ///< corrector tolerance on the test function
};

namespace detail {

/// Augmented system for two-parameter curves: V = 0 plus a stability test
/// function, in unknowns w = (y, z, mu, eta).
struct CurveSystem {
    int p;
    BifKind kind;
    const HybridSystemDef* sys;
    const IntegratorConfig* cfg;

    Vec<3> residual(const Vec<4>& w) const {
        const ParamPoint pp{w[2], w[3]};
        const VividValue v = vivid(ImpactPoint{w[0], w[1]}, p, *sys, pp, *cfg);
        const StabilityInfo st = stability_at(ImpactPoint{w[0], w[1]}, p, *sys, pp, *cfg);
        const double psi = (kind == BifKind::SN) ? st.test_sn : st.test_pd;
        return {v.v1, v.v2, psi};
    }

    std::array<Vec<4>, 3> jacobian(const Vec<4>& w) const {
        std::array<Vec<4>, 3> j{};
        // V rows: tight step; test-function row: wider step (it is itself a
        // finite-difference quantity with a noise floor)
        for (int i = 0; i < 4; ++i) {
            const double hv = 1e-7;
            Vec<4> wp = w, wm = w;
            wp[i] += hv;
            wm[i] -= hv;
            const ParamPoint pap{wp[2], wp[3]}, pam{wm[2], wm[3]};
            const VividValue vp = vivid(ImpactPoint{wp[0], wp[1]}, p, *sys, pap, *cfg);
            const VividValue vm = vivid(ImpactPoint{wm[0], wm[1]}, p, *sys, pam, *cfg);
            j[0][i] = (vp.v1 - vm.v1) / (2 * hv);
            j[1][i] = (vp.v2 - vm.v2) / (2 * hv);
            const double hp = 1e-5;
            Vec<4> qp = w, qm = w;
            qp[i] += hp;
            qm[i] -= hp;
            const StabilityInfo sp =
                stability_at(ImpactPoint{qp[0], qp[1]}, p, *sys, ParamPoint{qp[2], qp[3]}, *cfg);
            const StabilityInfo sm =
                stability_at(ImpactPoint{qm[0], qm[1]}, p, *sys, ParamPoint{qm[2], qm[3]}, *cfg);
            const double fp = (kind == BifKind::SN) ? sp.test_sn : sp.test_pd;
            const double fm = (kind == BifKind::SN) ? sm.test_sn : sm.test_pd;
            j[2][i] = (fp - fm) / (2 * hp);
        }
        return j;
    }

    /// Null vector of the 3x4 Jacobian via signed 3x3 minors.
    Vec<4> tangent(const Vec<4>& w, const Vec<4>* prev) const {
        const auto j = jacobian(w);
        auto det3 = [&](int skip) {
            double m[3][3];
            for (int r = 0; r < 3; ++r) {
                int cc = 0;
                for (int c = 0; c < 4; ++c) {
                    if (c == skip) continue;
                    m[r][cc++] = j[r][c];
                }
            }
            return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
                   m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
                   m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
        };
        Vec<4> t{};
        double n = 0.0;
        for (int i = 0; i < 4; ++i) {
            t[i] = ((i % 2 == 0) ? 1.0 : -1.0) * det3(i);
            n += t[i] * t[i];
        }
        n = std::sqrt(n);
        if (n == 0.0 || !std::isfinite(n))
            throw TangentDegenerate("curve tangent: rank drop of the augmented Jacobian");
        for (auto& c : t) c /= n;
        if (prev) {
            double dot = 0.0;
            for (int i = 0; i < 4; ++i) dot += t[i] * (*prev)[i];
            if (dot < 0.0)
                for (auto& c : t) c = -c;
        }
        return t;
    }

    bool correct(Vec<4>& w, const Vec<4>& row, const Vec<4>& w_ref, double v_tol, double psi_tol,
                 int iters = 14) const {
        const double omega = sys->omega_of(ParamPoint{w[2], w[3]});
        for (int it = 0; it < iters; ++it) {
            Vec<3> r;
            try {
                r = residual(w);
            } catch (const Error&) {
                return false;
            }
            double cres = 0.0;
            for (int i = 0; i < 4; ++i) cres += row[i] * (w[i] - w_ref[i]);
            const double vn = std::max(std::abs(r[0]), std::abs(r[1]) / omega);
            // The test function is itself finite-differenced; its noise
            // floor scales like 1/y_imp and caps the achievable residual.
            const double psi_accept = std::max(psi_tol, 5e-10 / std::max(std::abs(w[0]), 1e-5));
            if (vn < v_tol && std::abs(r[2]) < psi_accept && std::abs(cres) < 1e-11) return true;
            std::array<Vec<4>, 3> j;
            try {
                j = jacobian(w);
            } catch (const Error&) {
                return false;
            }
            Mat<4> a{};
            for (int i = 0; i < 4; ++i) {
                a[0][i] = j[0][i];
                a[1][i] = j[1][i];
                a[2][i] = j[2][i];
                a[3][i] = row[i];
            }
            Vec<4> rhs{-r[0], -r[1], -r[2], -cres};
            Vec<4> dw;
            try {
                dw = linsolve<4>(a, rhs, "curve corrector");
            } catch (const SingularJacobian&) {
                return false;
            }
            double dn = 0.0;
            for (double c : dw) dn += std::abs(c);
            if (!std::isfinite(dn) || dn > 0.5) return false;
            for (int i = 0; i < 4; ++i) w[i] += dw[i];
        }
        return false;
    }
};

inline CurvePoint curve_point_from(const Vec<4>& w, const CurveSystem& cs) {
    CurvePoint pt;
    pt.y_imp = w[0];
    pt.z_imp = w[1];
    pt.mu = w[2];
    pt.eta = w[3];
    const ParamPoint pp{w[2], w[3]};
    pt.omega = cs.sys->omega_of(pp);
    if (cs.sys->has_closed_form()) pt.amp = cs.sys->osc(pp).amp;
    const Vec<3> r = cs.residual(w);
    pt.residual = std::max({std::abs(r[0]), std::abs(r[1]) / pt.omega, std::abs(r[2])});
    return pt;
}

} // namespace detail

/// Pseudo-arclength continuation of a saddle-node or period-doubling curve
/// of the p-loop MPS in the (mu, eta) plane, from a seed record satisfying
/// its test function. Continues both directions; stops at the eta window,
/// the impact-velocity floor, or the sample budget.
inline CurveSample continue_curve(BifKind kind, int p, const BifurcationRecord& seed,
                                  const HybridSystemDef& sys, const IntegratorConfig& cfg,
                                  const CurveOptions& opt = {}) {
    if (kind == BifKind::GZ) throw Error("continue_curve: kind must be SN or PD");
    detail::CurveSystem cs{p, kind, &sys, &cfg};
    CurveSample out;
    out.kind = kind;
    out.p = p;

    detail::Vec<4> w0{seed.impact.y_imp, seed.impact.z_imp, seed.params.mu, seed.params.eta};
    {
        detail::Vec<4> t0{0, 0, 0, 1};
        if (!cs.correct(w0, {0, 0, 0, 1}, w0, 1e-10, opt.psi_tol))
            throw CurveLost("continue_curve: seed does not satisfy the augmented system");
        (void)t0;
    }
    out.points.push_back(detail::curve_point_from(w0, cs));

    for (const double dir_sign : {+1.0, -1.0}) {
        detail::Vec<4> w = w0;
        detail::Vec<4> t;
        try {
            t = cs.tangent(w, nullptr);
        } catch (const TangentDegenerate&) {
            out.termination += "tangent degenerate at seed; ";
            break;
        }
        for (auto& c : t) c *= dir_sign;
        double ds = opt.ds_init;
        int fails = 0, streak = 0;
        std::string reason;
        for (int k = 0; k < opt.max_samples; ++k) {
            detail::Vec<4> wp;
            for (int i = 0; i < 4; ++i) wp[i] = w[i] + ds * t[i];
            detail::Vec<4> wc = wp;
            if (!cs.correct(wc, t, wp, 1e-10, opt.psi_tol)) {
                ds *= 0.5;
                streak = 0;
                if (++fails > 6 || ds < opt.ds_min) {
                    reason = "CurveLost: corrector failed after step halvings";
                    break;
                }
                continue;
            }
            fails = 0;
            if (++streak >= 4) {
                ds = std::min(2.0 * ds, opt.ds_max);
                streak = 0;
            }
            if (std::abs(wc[3]) > opt.eta_max) {
                reason = "eta window";
                break;
            }
            if (wc[0] < opt.y_floor) {
                reason = "impact velocity floor";
                break;
            }
            out.points.push_back(detail::curve_point_from(wc, cs));
            try {
                t = cs.tangent(wc, &t);
            } catch (const TangentDegenerate&) {
                reason = "tangent degenerate";
                break;
            }
            w = wc;
        }
        if (reason.empty()) reason = "sample budget exhausted";
        out.termination += (dir_sign > 0 ? "dir+: " : "dir-: ") + reason + "; ";
    }
    if (out.points.size() <= 1)
        throw CurveLost("continue_curve: no curve points beyond the seed (" + out.termination + ")");

    std::stable_sort(out.points.begin(), out.points.end(),
                     [](const CurvePoint& a, const CurvePoint& b) { return a.eta < b.eta; });

    // least-squares fit mu = c eta^2 over the configured window
    double s4 = 0.0, s2m = 0.0;
    int n = 0;
    for (const auto& pt : out.points) {
        const double ae = std::abs(pt.eta);
        if (ae < opt.eta_fit_min || ae > opt.eta_fit) continue;
        s4 += pt.eta * pt.eta * pt.eta * pt.eta;
        s2m += pt.eta * pt.eta * pt.mu;
        ++n;
    }
    if (n >= 3 && s4 > 0.0) {
        out.fitted_c = s2m / s4;
        double ss = 0.0;
        for (const auto& pt : out.points) {
            const double ae = std::abs(pt.eta);
            if (ae < opt.eta_fit_min || ae > opt.eta_fit) continue;
            const double r = pt.mu - out.fitted_c * pt.eta * pt.eta;
            ss += r * r;
        }
        out.fitted_c_stderr = (n > 1) ? std::sqrt(ss / (n - 1) / s4) : 0.0;
        out.n_fit = n;
    }
    return out;
}

/// Grazing fixed point of the global map for a generic system: Newton on
/// P(0, z; mu, eta) = (0, z) in (z, mu) at fixed eta.
inline std::pair<double, double> locate_grazing_generic(const HybridSystemDef& sys, double eta,
                                                        double z_guess, double mu_guess,
                                                        const IntegratorConfig& cfg) {
    double z = z_guess, mu = mu_guess;
    for (int it = 0; it < 40; ++it) {
        const ParamPoint pp{mu, eta};
        const SectionPoint f = global_map(SectionPoint{0.0, z}, sys, pp, cfg);
        const double r1 = f.x, r2 = f.z - z;
        if (std::abs(r1) < 1e-12 && std::abs(r2) < 1e-12) return {z, mu};
        const double h = 1e-7;
        const SectionPoint fzp = global_map(SectionPoint{0.0, z + h}, sys, pp, cfg);
        const SectionPoint fzm = global_map(SectionPoint{0.0, z - h}, sys, pp, cfg);
        const SectionPoint fmp = global_map(SectionPoint{0.0, z}, sys, ParamPoint{mu + h, eta}, cfg);
        const SectionPoint fmm = global_map(SectionPoint{0.0, z}, sys, ParamPoint{mu - h, eta}, cfg);
        detail::Mat<2> a{{{(fzp.x - fzm.x) / (2 * h), (fmp.x - fmm.x) / (2 * h)},
                          {(fzp.z - fzm.z) / (2 * h) - 1.0, (fmp.z - fmm.z) / (2 * h)}}};
        detail::Vec<2> rhs{-r1, -r2};
        detail::Vec<2> d;
        try {
            d = detail::linsolve<2>(a, rhs, "grazing fixed point");
        } catch (const SingularJacobian&) {
            throw FixedPointLost("locate_grazing_generic: singular Newton matrix");
        }
        z += d[0];
        mu += d[1];
        if (!std::isfinite(z) || !std::isfinite(mu))
            throw FixedPointLost("locate_grazing_generic: iteration diverged");
    }
    throw FixedPointLost("locate_grazing_generic: Newton did not converge");
}

/// Grazing curve samples over a frequency range: closed form for oscillator
/// systems, fixed-point continuation for generic ones. For generic systems
/// `eta` is the second coordinate of the supplied grid and the returned mu
/// solves x*(mu, eta) = 0.
inline CurveSample grazing_curve(const HybridSystemDef& sys, std::pair<double, double> omega_range,
                                 int n_samples, const IntegratorConfig& cfg,
                                 double z_guess = 0.0, double mu_guess = 0.0) {
    CurveSample out;
    out.kind = BifKind::GZ;
    out.p = 0;
    if (n_samples < 2) throw Error("grazing_curve: need at least 2 samples");
    if (sys.has_closed_form()) {
        const OscParams base = sys.osc(ParamPoint{});
        const double om_ref = base.omega;
        for (int i = 0; i < n_samples; ++i) {
            const double om =
                omega_range.first + (omega_range.second - omega_range.first) * i / (n_samples - 1);
            CurvePoint pt;
            pt.eta = om - om_ref;
            pt.mu = 0.0;
            pt.omega = om;
            pt.amp = grazing_amplitude(om, base.zeta);
            pt.y_imp = 0.0;
            pt.z_imp = grazing_phase(om, base.zeta);
            pt.residual = 0.0;
            out.points.push_back(pt);
        }
        return out;
    }
    double z = z_guess, mu = mu_guess;
    for (int i = 0; i < n_samples; ++i) {
        const double eta =
            omega_range.first + (omega_range.second - omega_range.first) * i / (n_samples - 1);
        auto [zg, mug] = locate_grazing_generic(sys, eta, z, mu, cfg);
        z = zg;
        mu = mug;
        CurvePoint pt;
        pt.eta = eta;
        pt.mu = mug;
        pt.omega = sys.omega_of(ParamPoint{mug, eta});
        pt.amp = mug; // raw parameterizations use mu as the amplitude
        pt.y_imp = 0.0;
        pt.z_imp = zg;
        const SectionPoint f = global_map(SectionPoint{0.0, zg}, sys, ParamPoint{mug, eta}, cfg);
        pt.residual = std::abs(f.x);
        out.points.push_back(pt);
    }
    return out;
}

/// Generic-path resonance location: secant root-solve of a12(eta) (p = 1)
/// or kappa_p(eta) (p >= 2) along the grazing curve of a black-box system,
/// with grazing points located by the fixed-point Newton solve.
inline double find_resonance_generic(int p, const HybridSystemDef& sys,
                                     std::pair<double, double> eta_window,
                                     const IntegratorConfig& cfg, double z_guess, double mu_guess) {
    auto quantity = [&](double eta, double& z, double& mu) {
        std::tie(z, mu) = locate_grazing_generic(sys, eta, z, mu, cfg);
        const MapDerivs d = numeric_first_derivs(sys, ParamPoint{mu, eta}, SectionPoint{0.0, z}, cfg);
        if (p == 1) return d.a(0, 1);
        const SpectralData sd = spectral(d);
        return sd.tau - g_p(static_cast<double>(p), sd.delta);
    };
    double z = z_guess, mu = mu_guess;
    double a = eta_window.first, b = eta_window.second;
    double fa = quantity(a, z, mu);
    double zb = z, mub = mu;
    double fb = quantity(b, zb, mub);
    if (fa * fb > 0.0)
        throw NoResonanceInRange("find_resonance_generic: no sign change in the window");
    for (int it = 0; it < 80 && (b - a) > 1e-12; ++it) {
        const double mid = 0.5 * (a + b);
        double zm = z, mum = mu;
        const double fm = quantity(mid, zm, mum);
        if (fa * fm <= 0.0) {
            b = mid;
        } else {
            a = mid;
            fa = fm;
            z = zm;
            mu = mum;
        }
    }
    return 0.5 * (a + b);
}

/// Result of locating a resonant grazing point: the resonance frequency and
/// polished seed records for the SN and PD curves at small |eta|.
struct ResonantGrazing {
    int p = 1, n = 1;
    double omega_star = 0.0;
    CoeffSet coeffs;                      ///< closed-form coefficient set at the resonance
    std::optional<BifurcationRecord> sn;  ///< absent if seeding failed
    std::optional<BifurcationRecord> pd;
};

namespace detail {

/// Newton polish of a curve seed at fixed eta: unknowns (y, z, mu).
inline std::optional<BifurcationRecord> polish_seed(BifKind kind, int p, double eta, double y,
                                                    double z, double mu,
                                                    const HybridSystemDef& sys,
                                                    const IntegratorConfig& cfg, double psi_tol) {
    CurveSystem cs{p, kind, &sys, &cfg};
    Vec<4> w{y, z, mu, eta};
    if (!cs.correct(w, {0, 0, 0, 1}, w, 1e-10, psi_tol, 25)) return std::nullopt;
    BifurcationRecord rec;
    rec.kind = kind;
    rec.p = p;
    rec.params = {w[2], w[3]};
    rec.impact = {w[0], w[1]};
    const Vec<3> r = cs.residual(w);
    rec.refinement_residual = std::abs(r[2]);
    return rec;
}

} // namespace detail

/// Resonant coefficients assembled entirely from numerics: finite-difference
/// first/second derivatives of the global map plus central eta-differences
/// of the resonance quantity (a12 for p = 1, kappa_p for p >= 2). The
/// closed-form route exists independently in resonant_coeffs_osc; this is
/// the general path, exercised on the oscillator.
inline CoeffSet resonant_coeffs_numeric(int p, int n, double zeta, double epsilon,
                                        const IntegratorConfig& cfg, double h_eta = 1e-5) {
    const double om_star = resonant_frequency_osc(p, n, zeta);
    const HybridSystemDef sys = make_oscillator_system(zeta, epsilon, om_star);

    auto derivs_at = [&](double eta) {
        const ParamPoint pp{0.0, eta};
        const SectionPoint gz = oscillator_grazing_point(sys, pp);
        return numeric_first_derivs(sys, pp, gz, cfg);
    };

    const ParamPoint pp0{0.0, 0.0};
    const SectionPoint gz0 = oscillator_grazing_point(sys, pp0);
    const MapDerivs d0 = derivs_at(0.0);
    const SpectralData sd = spectral(d0);
    CoeffSet cs = unfolding_constants(sys, pp0, gz0, d0, sd, p);
    const SecondDerivs sd2 = numeric_second_derivs(p, sys, pp0, gz0, cfg);

    const MapDerivs dp = derivs_at(+h_eta);
    const MapDerivs dm = derivs_at(-h_eta);
    double deriv_eta;
    if (p == 1) {
        deriv_eta = (dp.a(0, 1) - dm.a(0, 1)) / (2.0 * h_eta);
        cs.a12_prime = deriv_eta;
    } else {
        const SpectralData sp_ = spectral(dp), sm_ = spectral(dm);
        const double kp = sp_.tau - g_p(static_cast<double>(p), sp_.delta);
        const double km = sm_.tau - g_p(static_cast<double>(p), sm_.delta);
        deriv_eta = (kp - km) / (2.0 * h_eta);
        cs.kappa_p_prime = deriv_eta;
    }
    return resonant_coeffs_general(p, cs, sd, d0, sd2);
}

/// Resonant grazing point of the oscillator with curve seeds built from the
/// leading-order unfolding predictions at |eta| = eta_seed and polished by
/// Newton. The returned system is centered at omega_star (eta = omega -
/// omega_star, mu = amp - A_graz(omega)).
inline ResonantGrazing find_resonant_grazing(int p, int n, double zeta, double epsilon,
                                             const IntegratorConfig& cfg,
                                             double eta_seed = 1e-3) {
    ResonantGrazing out;
    out.p = p;
    out.n = n;
    out.coeffs = resonant_coeffs_osc(p, n, zeta, epsilon);
    out.omega_star = out.coeffs.omega;
    const HybridSystemDef sys = make_oscillator_system(zeta, epsilon, out.omega_star);

    const CoeffSet& c = out.coeffs;
    const double om = c.omega, al = c.alpha, ga = c.gamma;
    const double deriv = (p == 1) ? c.a12_prime : c.kappa_p_prime;
    const double dp2 = c.E_p; // delta^{p/2}
    double k1;
    if (p == 1) {
        // a22 at the p = 1 resonance is (-1)^n E_1
        const double a22 = ((n % 2 == 1) ? -1.0 : 1.0) * std::exp(-two_pi * zeta / om);
        k1 = om * (a22 * (1.0 - al) - 1.0) / ((1.0 - a22) * ga);
    } else {
        k1 = -om * (1.0 + dp2 * (1.0 - al)) / ((1.0 + dp2) * ga);
    }
    // mixed second derivative entering the leading-order impact velocity;
    // a12' plays its role at p = 1
    double f_p = deriv;
    if (p >= 2) {
        const double a12 = std::exp(-two_pi * zeta / om) * std::sin(M_PI / p) / (n + 0.5 / p);
        const double sp = std::sin(M_PI / p);
        // delta^{p/2 - 1} written via dp2 = delta^{p/2}
        f_p = a12 * p * std::pow(dp2, (p - 2.0) / p) * c.kappa_p_prime / (2.0 * sp * sp);
    }

    for (const BifKind kind : {BifKind::SN, BifKind::PD}) {
        const double s_pm = (kind == BifKind::SN) ? c.s_plus : c.s_minus;
        const double side = (deriv * s_pm > 0.0) ? +1.0 : -1.0;
        const double eta = side * std::abs(eta_seed);
        const double y = al * om * f_p * eta / s_pm;
        if (!(y > 0.0)) continue; // wrong side; no admissible seed
        const double cq = (kind == BifKind::SN) ? c.c_sn : c.c_pd;
        const double mu = cq * eta * eta;
        const OscParams pe = sys.osc(ParamPoint{0.0, eta});
        const double zg = grazing_phase(pe.omega, zeta);
        auto rec = detail::polish_seed(kind, p, eta, y, zg + k1 * y, mu, sys, cfg, 1e-9);
        if (kind == BifKind::SN)
            out.sn = rec;
        else
            out.pd = rec;
    }
    return out;
}

} // namespace graze

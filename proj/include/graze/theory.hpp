// Closed-form quantities: spectral data of the grazing-return Jacobian,
// the S/T recurrences and the H function with its largest root, unfolding
// constants, side-of-bifurcation predictions, admissibility profiles, and
// the resonant-unfolding coefficients (both assembled from numerics and in
// oscillator closed form).
#pragma once

#include <cmath>
#include <complex>
#include <vector>

#include "graze/errors.hpp"
#include "graze/maps.hpp"
#include "graze/model.hpp"

namespace graze {

/// Trace/determinant/eigenvalue data of a 2x2 return-map Jacobian.
struct SpectralData {
    double tau = 0.0;
    double delta = 0.0;
    std::complex<double> lambda1, lambda2;
    double r = 0.0;        ///< modulus sqrt(delta)
    double theta = 0.0;    ///< argument, populated when tau^2 < 4*delta
    bool complex_pair = false;
    bool in_trapesium = false; ///< 0 < delta < 1 and |tau| < delta + 1

    [[nodiscard]] bool stable() const { return in_trapesium; }
};

/// Eigenvalue data from a 2x2 matrix.
inline SpectralData spectral(const MapDerivs& m) {
    SpectralData sd;
    sd.tau = m.trace();
    sd.delta = m.det();
    const double disc = sd.tau * sd.tau - 4.0 * sd.delta;
    if (disc >= 0.0) {
        const double root = std::sqrt(disc);
        sd.lambda1 = 0.5 * (sd.tau + root);
        sd.lambda2 = 0.5 * (sd.tau - root);
        sd.complex_pair = false;
    } else {
        const double im = 0.5 * std::sqrt(-disc);
        sd.lambda1 = {0.5 * sd.tau, im};
        sd.lambda2 = {0.5 * sd.tau, -im};
        sd.complex_pair = true;
    }
    if (sd.delta > 0.0) {
        sd.r = std::sqrt(sd.delta);
        if (sd.complex_pair) sd.theta = std::acos(sd.tau / (2.0 * sd.r));
    }
    sd.in_trapesium = (sd.delta > 0.0 && sd.delta < 1.0 && std::abs(sd.tau) < sd.delta + 1.0);
    return sd;
}

inline SpectralData spectral(double tau, double delta) {
    MapDerivs m;
    m.a_mat = {{{tau, 0.0}, {0.0, 0.0}}};
    m.a_mat[0][0] = tau;
    m.a_mat[1][1] = 0.0;
    m.a_mat[0][1] = 1.0;
    m.a_mat[1][0] = -delta; // companion matrix: trace tau, det delta
    return spectral(m);
}

/// S_1..S_{p+1} and T_p via the real three-term recurrence
/// S_{j+1} = tau S_j - delta S_{j-1}, S_0 = 0, S_1 = 1; T_p = sum_{j<p} S_j.
/// Avoids complex arithmetic and the repeated-eigenvalue degeneracy.
struct SSeq {
    std::vector<double> S; ///< S[0..p+1]
    std::vector<double> T; ///< T[0..p], T[j] = S_1 + ... + S_{j-1}
};

inline SSeq s_recurrence(int p, double tau, double delta) {
    if (p < 1) throw Error("s_recurrence: p must be >= 1");
    SSeq out;
    out.S.resize(static_cast<std::size_t>(p) + 2);
    out.T.resize(static_cast<std::size_t>(p) + 1);
    out.S[0] = 0.0;
    out.S[1] = 1.0;
    for (int j = 1; j <= p; ++j) out.S[j + 1] = tau * out.S[j] - delta * out.S[j - 1];
    out.T[0] = 0.0;
    for (int j = 1; j <= p; ++j) out.T[j] = out.T[j - 1] + ((j - 1 >= 1) ? out.S[j - 1] : 0.0);
    return out;
}

/// (S_p, T_p) pair.
inline std::pair<double, double> s_seq(int p, const SpectralData& sd) {
    const SSeq s = s_recurrence(p, sd.tau, sd.delta);
    return {s.S[p], s.T[p]};
}

/// g_p(delta) = 2 sqrt(delta) cos(pi/p); non-integer p allowed. p = 2 is
/// returned exactly as zero (cos(pi/2) carries rounding noise otherwise,
/// polluting kappa_2 = tau - g_2).
inline double g_p(double p, double delta) {
    if (!(delta > 0.0 && delta < 1.0)) throw Error("g_p: requires 0 < delta < 1");
    if (!(p >= 1.0)) throw Error("g_p: requires p >= 1");
    if (p == 2.0) return 0.0;
    return 2.0 * std::sqrt(delta) * std::cos(M_PI / p);
}

/// H_p(tau, delta): trigonometric closed form for complex eigenvalues,
/// recurrence-based sum otherwise.
inline double H_p(double tau, double delta, int p) {
    if (p < 1) throw Error("H_p: p must be >= 1");
    if (p == 1) return 0.0;
    const double r = std::sqrt(delta);
    if (tau * tau < 4.0 * delta) {
        const double th = std::acos(tau / (2.0 * r));
        const double num = std::pow(r, p) * std::sin(th) - r * std::sin(p * th) +
                           std::sin((p - 1) * th);
        return num / ((delta - tau + 1.0) * std::pow(r, p - 2) * std::sin(th));
    }
    const SSeq s = s_recurrence(p, tau, delta);
    double acc = 0.0;
    for (int j = 1; j <= p - 1; ++j) acc += s.S[j] / std::pow(delta, j - 1);
    return acc;
}

/// h_p(delta): for p = 2, exactly -2 sqrt(delta); for p >= 3 the largest
/// root of H_p(., delta) inside (g_{p/2}(delta), g_{p-1}(delta)), located by
/// a downward grid scan from the right endpoint followed by bisection.
inline double h_p(int p, double delta) {
    if (!(delta > 0.0 && delta < 1.0)) throw Error("h_p: requires 0 < delta < 1");
    if (p < 2) throw Error("h_p: p must be >= 2");
    if (p == 2) return -2.0 * std::sqrt(delta);
    const double lo = g_p(p / 2.0, delta) + 1e-12;
    const double hi = g_p(p - 1.0, delta) - 1e-12;
    const int n_scan = 512;
    double t_hi = hi;
    double f_hi = H_p(t_hi, delta, p);
    for (int k = 1; k <= n_scan; ++k) {
        const double t_lo = hi + (lo - hi) * (static_cast<double>(k) / n_scan);
        const double f_lo = H_p(t_lo, delta, p);
        if (f_hi * f_lo <= 0.0) {
            double a = t_lo, b = t_hi;
            double fa = f_lo;
            while (b - a > 1e-12) {
                const double m = 0.5 * (a + b);
                const double fm = H_p(m, delta, p);
                if (fa * fm <= 0.0)
                    b = m;
                else {
                    a = m;
                    fa = fm;
                }
            }
            return 0.5 * (a + b);
        }
        t_hi = t_lo;
        f_hi = f_lo;
    }
    throw BracketFailed("h_p: no sign change of H_p in (g_{p/2}, g_{p-1})");
}

/// Admissibility profile u^(j) = S_p T_j - S_j T_p for j = 0..p.
inline std::vector<double> u_profile(int p, const SpectralData& sd) {
    if (p < 2) throw Error("u_profile: p must be >= 2");
    const SSeq s = s_recurrence(p, sd.tau, sd.delta);
    std::vector<double> u(static_cast<std::size_t>(p) + 1);
    for (int j = 0; j <= p; ++j) u[j] = s.S[p] * s.T[j] - s.S[j] * s.T[p];
    return u;
}

/// Unfolding constants and resonant quadratic coefficients for one loop
/// count p. Fields are populated in stages: unfolding_constants fills
/// alpha..kappa_p; the resonant routines fill the rest.
struct CoeffSet {
    int p = 1;
    double omega = 0.0;   ///< forcing frequency at the evaluation point
    double alpha = 0.0;   ///< 1 + phi - gamma psi / omega
    double beta = 0.0;    ///< (1 - a22) b1 + a12 b2
    double gamma = 0.0;   ///< -F at the grazing point
    double phi = 0.0;     ///< Phi at the grazing point (restitution there)
    double kappa_p = 0.0; ///< tau - g_p(delta)
    double kappa_p_prime = 0.0;
    double a12_prime = 0.0;
    double xi_p = 0.0;
    double s_plus = 0.0;
    double s_minus = 0.0;
    double c_sn = 0.0;
    double c_pd = 0.0;
    double E_p = 0.0; ///< exp(-2 pi p zeta / omega) = delta^{p/2}
    bool lossless = false; ///< epsilon = 1 flagged (degenerate formulas possible)
};

/// alpha, beta, gamma, kappa_p from grazing data.
inline CoeffSet unfolding_constants(const HybridSystemDef& sys, const ParamPoint& pp,
                                    const SectionPoint& graz, const MapDerivs& derivs,
                                    const SpectralData& sd, int p) {
    CoeffSet cs;
    cs.p = p;
    const double F = sys.field(0.0, 0.0, graz.z, pp);
    if (!(F < 0.0)) throw NotGrazing("unfolding_constants: F >= 0 at the supplied grazing point");
    cs.gamma = -F;
    cs.omega = sys.omega_of(pp);
    const double phi = sys.phi(0.0, graz.z, pp);
    const double psi = sys.psi(0.0, graz.z, pp);
    cs.phi = phi;
    cs.alpha = 1.0 + phi - cs.gamma * psi / cs.omega;
    cs.beta = (1.0 - derivs.a(1, 1)) * derivs.b_vec[0] + derivs.a(0, 1) * derivs.b_vec[1];
    cs.kappa_p = sd.tau - g_p(static_cast<double>(p), sd.delta);
    cs.E_p = std::pow(sd.delta, 0.5 * p);
    if (sys.has_closed_form()) cs.lossless = sys.osc(pp).lossless();
    return cs;
}

enum class Side { mu_positive, mu_negative, not_covered };

/// Side of the grazing bifurcation on which the p-loop MPS emanates,
/// or not_covered when the hypotheses of the prediction fail.
inline Side emanation_side(int p, const CoeffSet& cs, const SpectralData& sd, double a12) {
    if (p == 1) {
        const double s = a12 * cs.beta;
        if (s == 0.0) return Side::not_covered;
        return s > 0.0 ? Side::mu_positive : Side::mu_negative;
    }
    if (!(a12 * cs.alpha > 0.0)) return Side::not_covered;
    if (!(sd.tau > h_p(p, sd.delta))) return Side::not_covered;
    const double s = cs.beta * cs.kappa_p;
    if (s == 0.0) return Side::not_covered; // codimension-two point
    return s > 0.0 ? Side::mu_positive : Side::mu_negative;
}

namespace detail {
inline constexpr double resonance_tol = 1e-6;
}

/// Assemble s+/s- and the quadratic curve coefficients from numeric
/// xi_p (in sd2) and the eta-derivative of the resonance quantity, which
/// the caller must have stored in cs (a12_prime for p = 1, kappa_p_prime
/// for p >= 2). Requires the codimension-two condition within tolerance.
inline CoeffSet resonant_coeffs_general(int p, CoeffSet cs, const SpectralData& sd,
                                        const MapDerivs& derivs, const SecondDerivs& sd2) {
    const double deriv_eta = (p == 1) ? cs.a12_prime : cs.kappa_p_prime;
    const double phi = cs.phi;
    const double xi_p = sd2.xi_p;
    cs.p = p;
    cs.xi_p = xi_p;
    const double om = cs.omega, al = cs.alpha, be = cs.beta, ga = cs.gamma;
    if (p == 1) {
        const double a12 = derivs.a(0, 1);
        if (std::abs(a12) > detail::resonance_tol)
            throw NotAtResonance("resonant coefficients: |a12| exceeds tolerance at p = 1");
        const double a11 = derivs.a(0, 0), a22 = derivs.a(1, 1);
        cs.a12_prime = deriv_eta;
        cs.s_plus = (1.0 - a22) * (a11 * phi * phi - 1.0) +
                    al * al * om * om * xi_p / ((1.0 - a22) * ga);
        cs.s_minus = (1.0 + a22) * (a11 * phi * phi + 1.0) +
                     al * al * om * om * xi_p / ((1.0 - a22) * ga);
        if (cs.s_plus == 0.0 || cs.s_minus == 0.0)
            throw DegenerateDenominator("resonant coefficients: s+ or s- vanishes");
        const double t = al * om * cs.a12_prime;
        cs.c_sn = t * t / (2.0 * be * ga * cs.s_plus);
        cs.c_pd = (cs.s_plus / cs.s_minus) * (2.0 - cs.s_plus / cs.s_minus) * cs.c_sn;
    } else {
        if (std::abs(cs.kappa_p) > detail::resonance_tol)
            throw NotAtResonance("resonant coefficients: |kappa_p| exceeds tolerance");
        const double dp2 = std::pow(sd.delta, 0.5 * p);
        cs.kappa_p_prime = deriv_eta;
        cs.s_plus = (1.0 + dp2) * (-dp2 * phi * phi - 1.0) +
                    al * al * om * om * xi_p / ((1.0 + dp2) * ga);
        cs.s_minus = (1.0 - dp2) * (-dp2 * phi * phi + 1.0) +
                     al * al * om * om * xi_p / ((1.0 + dp2) * ga);
        if (cs.s_plus == 0.0 || cs.s_minus == 0.0)
            throw DegenerateDenominator("resonant coefficients: s+ or s- vanishes");
        const double a12 = derivs.a(0, 1);
        const double sp2 = std::sin(M_PI / p);
        const double t = p * a12 * al * om * std::pow(sd.delta, 0.5 * p - 1.0) * cs.kappa_p_prime /
                         (2.0 * sp2 * sp2 * (1.0 + dp2));
        cs.c_sn = t * t * (sd.delta - sd.tau + 1.0) / (2.0 * be * ga * cs.s_plus);
        cs.c_pd = (cs.s_plus / cs.s_minus) * (2.0 - cs.s_plus / cs.s_minus) * cs.c_sn;
    }
    return cs;
}

/// Resonant forcing frequency of the oscillator: the plus-sign branch
/// omega1/omega = n + 1/(2p) for p >= 2, and omega1/omega = n/2 for p = 1.
inline double resonant_frequency_osc(int p, int n, double zeta) {
    if (p < 1 || n < 1) throw Error("resonant_frequency_osc: need p >= 1, n >= 1");
    const double om1 = std::sqrt(1.0 - zeta * zeta);
    return (p == 1) ? 2.0 * om1 / n : om1 / (n + 0.5 / p);
}

/// Fully closed-form coefficient set for the oscillator at the (p, n)
/// resonance, selecting the odd/even-n formulas for p = 1.
inline CoeffSet resonant_coeffs_osc(int p, int n, double zeta, double epsilon) {
    if (p < 1 || n < 1) throw Error("resonant_coeffs_osc: need p >= 1, n >= 1");
    const double om = resonant_frequency_osc(p, n, zeta);
    const double Ag = grazing_amplitude(om, zeta);
    const double E1 = std::exp(-2.0 * M_PI * zeta / om);
    const double Ep = std::exp(-2.0 * M_PI * p * zeta / om);
    const double tau = 2.0 * E1 * std::cos(two_pi * std::sqrt(1.0 - zeta * zeta) / om);
    const double delta = E1 * E1;

    CoeffSet cs;
    cs.p = p;
    cs.omega = om;
    cs.alpha = 1.0 + epsilon;
    cs.phi = epsilon;
    cs.gamma = om * om;
    cs.beta = (delta - tau + 1.0) / Ag;
    cs.kappa_p = 0.0;
    cs.E_p = Ep;
    cs.lossless = (epsilon == 1.0);

    const double eE = epsilon * Ep;
    if (p == 1) {
        cs.xi_p = (n % 2 == 1) ? E1 * (E1 + 1.0) : E1 * (E1 - 1.0);
        if (n % 2 == 1) {
            cs.a12_prime = 2.0 * M_PI * E1 / om;
            cs.s_plus = -(1.0 - eE) * (1.0 - eE);
            cs.s_minus = (1.0 + eE) * (1.0 + eE);
            const double q = (1.0 + epsilon) * E1 / ((1.0 - eE) * (1.0 + E1));
            cs.c_sn = -2.0 * M_PI * M_PI * Ag / (om * om) * q * q;
            const double m = (1.0 - eE) * (1.0 - eE) *
                             ((1.0 + eE) * (1.0 + eE) + 2.0 * (1.0 + eE * eE)) /
                             std::pow(1.0 + eE, 4);
            cs.c_pd = -m * cs.c_sn;
        } else {
            cs.a12_prime = -2.0 * M_PI * E1 / om;
            cs.s_plus = -(1.0 + eE) * (1.0 + eE);
            cs.s_minus = (1.0 - eE) * (1.0 - eE);
            const double q = (1.0 + epsilon) * E1 / ((1.0 + eE) * (1.0 - E1));
            cs.c_sn = -2.0 * M_PI * M_PI * Ag / (om * om) * q * q;
            const double m = (1.0 + eE) * (1.0 + eE) *
                             ((1.0 - eE) * (1.0 - eE) + 2.0 * (1.0 + eE * eE)) /
                             std::pow(1.0 - eE, 4);
            cs.c_pd = -m * cs.c_sn;
        }
    } else {
        cs.xi_p = Ep * (Ep + 1.0);
        cs.kappa_p_prime = 4.0 * M_PI * std::sqrt(1.0 - zeta * zeta) / (om * om) * E1 *
                           std::sin(M_PI / p);
        cs.s_plus = -(1.0 - eE) * (1.0 - eE);
        cs.s_minus = (1.0 + eE) * (1.0 + eE);
        const double q = (1.0 + epsilon) * Ep / ((1.0 - eE) * (1.0 + Ep));
        cs.c_sn = -2.0 * M_PI * M_PI * p * p * Ag / (om * om) * q * q;
        const double m = (1.0 - eE) * (1.0 - eE) *
                         ((1.0 + eE) * (1.0 + eE) + 2.0 * (1.0 + eE * eE)) /
                         std::pow(1.0 + eE, 4);
        cs.c_pd = -m * cs.c_sn;
    }
    return cs;
}

/// One sampled point of a predicted (dashed-overlay) quadratic curve.
struct PredictedPoint {
    double eta, mu, omega, amp;
};

/// Sampled quadratics mu = c eta^2 on the admissible eta half-line, in both
/// (mu, eta) and (amp, omega) coordinates. `zeta` enters only through the
/// coordinate inversion amp = A_graz(omega) + mu.
struct PredictedCurves {
    std::vector<PredictedPoint> sn, pd;
};

inline PredictedCurves predicted_curves(const CoeffSet& cs, double zeta, double eta_max,
                                        int n_samples = 61) {
    PredictedCurves out;
    const double deriv = (cs.p == 1) ? cs.a12_prime : cs.kappa_p_prime;
    const double side_sn = deriv * cs.s_plus;
    const double side_pd = deriv * cs.s_minus;
    for (int i = 0; i <= n_samples; ++i) {
        const double a = eta_max * i / n_samples;
        for (double sgn : {-1.0, 1.0}) {
            const double eta = sgn * a;
            const double om = cs.omega + eta;
            if (eta * side_sn >= 0.0) {
                out.sn.push_back({eta, cs.c_sn * eta * eta, om,
                                  grazing_amplitude(om, zeta) + cs.c_sn * eta * eta});
            }
            if (eta * side_pd >= 0.0) {
                out.pd.push_back({eta, cs.c_pd * eta * eta, om,
                                  grazing_amplitude(om, zeta) + cs.c_pd * eta * eta});
            }
        }
    }
    return out;
}

} // namespace graze

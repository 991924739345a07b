// Closed-form spectral data, recurrences, unfolding constants, and the
// resonant coefficient formulas.
#include <catch2/catch_amalgamated.hpp>

#include <complex>
#include <random>

#include "graze/config.hpp"
#include "graze/maps.hpp"
#include "graze/model.hpp"
#include "graze/theory.hpp"

using namespace graze;

namespace {
constexpr double kZeta = 0.02, kEps = 0.9, kOmega = 0.854;

// independent oracle: the literal eigenvalue double sums
std::pair<double, double> s_oracle(int p, double tau, double delta) {
    const std::complex<double> disc = std::sqrt(std::complex<double>(tau * tau - 4 * delta, 0.0));
    const std::complex<double> l1 = 0.5 * (tau + disc), l2 = 0.5 * (tau - disc);
    auto S = [&](int j) {
        std::complex<double> acc = 0.0;
        for (int k = 1; k <= j; ++k) acc += std::pow(l1, j - k) * std::pow(l2, k - 1);
        return acc.real();
    };
    double T = 0;
    for (int j = 1; j < p; ++j) T += S(j);
    return {S(p), T};
}

MapDerivs oscillator_closed_form_A(double omega, double zeta) {
    const double om1 = std::sqrt(1 - zeta * zeta);
    const double E1 = std::exp(-two_pi * zeta / omega);
    const double s = std::sin(two_pi * om1 / omega), c = std::cos(two_pi * om1 / omega);
    MapDerivs d;
    d.a_mat[0][0] = E1 * (c + zeta / om1 * s);
    d.a_mat[0][1] = E1 * omega / om1 * s;
    d.a_mat[1][0] = -E1 / (om1 * omega) * s;
    d.a_mat[1][1] = E1 * (c - zeta / om1 * s);
    const double Ag = grazing_amplitude(omega, zeta);
    d.b_vec[0] = (1.0 - d.a_mat[0][0]) / Ag;
    d.b_vec[1] = -d.a_mat[1][0] / Ag;
    return d;
}
} // namespace

TEST_CASE("spectral data") {
    SECTION("identity matrix") {
        MapDerivs m;
        m.a_mat = {{{1.0, 0.0}, {0.0, 1.0}}};
        const SpectralData sd = spectral(m);
        CHECK(sd.tau == 2.0);
        CHECK(sd.delta == 1.0);
        CHECK(sd.lambda1.real() == Catch::Approx(1.0));
        CHECK(sd.lambda2.real() == Catch::Approx(1.0));
        CHECK_FALSE(sd.in_trapesium); // delta = 1 is on the boundary
    }
    SECTION("oscillator closed-form matrix") {
        const SpectralData sd = spectral(oscillator_closed_form_A(kOmega, kZeta));
        CHECK(sd.tau == Catch::Approx(0.8248).margin(5e-5));
        CHECK(sd.delta == Catch::Approx(0.7451).margin(5e-5));
        CHECK(sd.in_trapesium);
        CHECK((sd.lambda1 * sd.lambda2).real() == Catch::Approx(sd.delta).margin(1e-12));
        CHECK((sd.lambda1 + sd.lambda2).real() == Catch::Approx(sd.tau).margin(1e-12));
    }
    SECTION("trig closed form for tau and delta") {
        const double E1 = std::exp(-two_pi * kZeta / kOmega);
        const double om1 = std::sqrt(1 - kZeta * kZeta);
        const SpectralData sd = spectral(oscillator_closed_form_A(kOmega, kZeta));
        CHECK(sd.tau == Catch::Approx(2 * E1 * std::cos(two_pi * om1 / kOmega)).epsilon(1e-12));
        CHECK(sd.delta == Catch::Approx(E1 * E1).epsilon(1e-12));
    }
}

TEST_CASE("S and T recurrences") {
    SECTION("base cases") {
        const SpectralData sd = spectral(0.8, 0.7);
        auto [S1, T1] = s_seq(1, sd);
        CHECK(S1 == 1.0);
        CHECK(T1 == 0.0);
    }
    SECTION("at a p-resonance: S_p = 0 and S_{p+1} = -delta^{p/2}") {
        for (int p : {2, 3, 4, 5}) {
            for (double delta : {0.3, 0.6, 0.85}) {
                const double tau = g_p(p, delta);
                const SSeq s = s_recurrence(p, tau, delta);
                CHECK(std::abs(s.S[p]) < 1e-12);
                CHECK(s.S[p + 1] == Catch::Approx(-std::pow(delta, 0.5 * p)).margin(1e-12));
                // T_p closed form at resonance
                CHECK(s.T[p] ==
                      Catch::Approx((1.0 + std::pow(delta, 0.5 * p)) / (delta - tau + 1.0))
                          .epsilon(1e-12));
            }
        }
    }
    SECTION("matches the eigenvalue double sums") {
        std::mt19937_64 rng(4242);
        std::uniform_real_distribution<double> ud(0.05, 0.95);
        for (int trial = 0; trial < 100; ++trial) {
            const double delta = ud(rng);
            std::uniform_real_distribution<double> ut(-(delta + 1) * 0.99, (delta + 1) * 0.99);
            const double tau = ut(rng);
            for (int p = 1; p <= 8; ++p) {
                const auto [So, To] = s_oracle(p, tau, delta);
                const SSeq s = s_recurrence(p, tau, delta);
                CHECK(s.S[p] == Catch::Approx(So).margin(1e-10));
                CHECK(s.T[p] == Catch::Approx(To).margin(1e-10));
            }
        }
    }
    SECTION("trig closed form when eigenvalues are complex") {
        std::mt19937_64 rng(11);
        std::uniform_real_distribution<double> ud(0.1, 0.9);
        for (int trial = 0; trial < 50; ++trial) {
            const double delta = ud(rng);
            std::uniform_real_distribution<double> ut(-2 * std::sqrt(delta) * 0.999,
                                                      2 * std::sqrt(delta) * 0.999);
            const double tau = ut(rng);
            const double r = std::sqrt(delta), th = std::acos(tau / (2 * r));
            for (int p = 1; p <= 8; ++p) {
                const SSeq s = s_recurrence(p, tau, delta);
                CHECK(s.S[p] ==
                      Catch::Approx(std::pow(r, p - 1) * std::sin(p * th) / std::sin(th))
                          .margin(1e-10));
            }
        }
    }
}

TEST_CASE("g_p, h_p, H_p") {
    SECTION("g_2 vanishes") {
        for (double delta : {0.1, 0.5, 0.9}) CHECK(g_p(2.0, delta) == Catch::Approx(0.0).margin(1e-16));
    }
    SECTION("h_2 closed form") {
        for (double delta : {0.1, 0.5, 0.9})
            CHECK(h_p(2, delta) == Catch::Approx(-2.0 * std::sqrt(delta)).margin(1e-14));
    }
    SECTION("bracket ordering") {
        for (double delta : {0.1, 0.3, 0.5, 0.7, 0.9}) {
            for (int p : {3, 4, 5, 6}) {
                const double hp = h_p(p, delta);
                CHECK(g_p(p / 2.0, delta) < hp);
                CHECK(hp < g_p(p - 1.0, delta));
                CHECK(std::abs(H_p(hp, delta, p)) < 1e-9);
            }
        }
    }
    SECTION("H identity against the S/T recurrences") {
        std::mt19937_64 rng(321);
        std::uniform_real_distribution<double> ud(0.05, 0.95);
        for (int trial = 0; trial < 100; ++trial) {
            const double delta = ud(rng);
            std::uniform_real_distribution<double> ut(-(delta + 1) * 0.99, (delta + 1) * 0.99);
            const double tau = ut(rng);
            for (int p = 2; p <= 8; ++p) {
                const SSeq s = s_recurrence(p, tau, delta);
                CHECK(s.S[p - 1] * s.T[p] - s.S[p] * s.T[p - 1] ==
                      Catch::Approx(std::pow(delta, p - 2) * H_p(tau, delta, p)).margin(1e-10));
            }
        }
    }
    SECTION("sign and positivity identities on a randomized grid") {
        std::mt19937_64 rng(555);
        std::uniform_real_distribution<double> ud(0.05, 0.95);
        for (int trial = 0; trial < 200; ++trial) {
            const double delta = ud(rng);
            for (int p = 2; p <= 8; ++p) {
                const double hp = h_p(p, delta);
                std::uniform_real_distribution<double> ut(hp + 1e-9, delta + 1.0 - 1e-9);
                const double tau = ut(rng);
                const SSeq s = s_recurrence(p, tau, delta);
                if (std::abs(s.S[p]) > 1e-12)
                    CHECK((s.S[p] > 0) == (tau - g_p(p, delta) > 0));
                if (tau >= g_p(p / 2.0, delta)) CHECK(s.T[p] > 0.0);
            }
        }
    }
}

TEST_CASE("u profile") {
    SECTION("endpoints and interior formulas") {
        std::mt19937_64 rng(8);
        std::uniform_real_distribution<double> ud(0.1, 0.9);
        for (int trial = 0; trial < 60; ++trial) {
            const double delta = ud(rng);
            std::uniform_real_distribution<double> ut(-(delta + 1) * 0.9, (delta + 1) * 0.9);
            const double tau = ut(rng);
            const SpectralData sd = spectral(tau, delta);
            for (int p = 2; p <= 8; ++p) {
                const auto u = u_profile(p, sd);
                const SSeq s = s_recurrence(p, tau, delta);
                REQUIRE(u.size() == static_cast<std::size_t>(p) + 1);
                CHECK(u[0] == 0.0);
                CHECK(std::abs(u[p]) < 1e-10);
                CHECK(u[1] == Catch::Approx(-s.T[p]).margin(1e-12));
                CHECK(u[p - 1] ==
                      Catch::Approx(-std::pow(delta, p - 2) * H_p(tau, delta, p)).margin(1e-9));
            }
        }
    }
    SECTION("boundary case tau = delta + 1 is negative inside") {
        for (double delta : {0.1, 0.3, 0.5, 0.7, 0.9}) {
            for (int p = 2; p <= 8; ++p) {
                for (int j = 1; j < p; ++j) {
                    const double u =
                        (j * (1 - std::pow(delta, p)) - p * (1 - std::pow(delta, j))) /
                        ((1 - delta) * (1 - delta));
                    CHECK(u < 0.0);
                }
            }
        }
    }
}

TEST_CASE("unfolding constants") {
    const HybridSystemDef sys = make_oscillator_system(kZeta, kEps, kOmega);
    IntegratorConfig cfg;
    const SectionPoint gz = oscillator_grazing_point(sys, ParamPoint{});
    const MapDerivs d = numeric_first_derivs(sys, ParamPoint{}, gz, cfg);
    const SpectralData sd = spectral(d);
    const CoeffSet cs = unfolding_constants(sys, ParamPoint{}, gz, d, sd, 2);
    CHECK(cs.alpha == Catch::Approx(1.9).margin(1e-12));
    CHECK(cs.gamma == Catch::Approx(kOmega * kOmega).epsilon(1e-10));
    CHECK(cs.beta ==
          Catch::Approx((sd.delta - sd.tau + 1.0) / grazing_amplitude(kOmega, kZeta)).epsilon(1e-6));
    CHECK(cs.kappa_p == Catch::Approx(sd.tau).margin(1e-12)); // g_2 = 0

    SECTION("alpha is independent of gamma when psi = 0") {
        HybridSystemDef gen = sys;
        gen.phi = [](double, double, const ParamPoint&) { return 0.73; };
        const CoeffSet c2 = unfolding_constants(gen, ParamPoint{}, gz, d, sd, 2);
        CHECK(c2.alpha == Catch::Approx(1.73).margin(1e-14));
    }
    SECTION("rejects non-grazing points") {
        // strong forcing makes F > 0 at phase 0 on the tangency set
        HybridSystemDef strong = make_oscillator_raw(kZeta, kEps);
        const ParamPoint loud{1.5, kOmega};
        CHECK(strong.field(0.0, 0.0, 0.0, loud) > 0.0);
        CHECK_THROWS_AS(unfolding_constants(strong, loud, SectionPoint{0.0, 0.0}, d, sd, 2),
                        NotGrazing);
    }
}

TEST_CASE("emanation side predictions") {
    const HybridSystemDef sys = make_oscillator_system(kZeta, kEps, kOmega);
    IntegratorConfig cfg;
    const SectionPoint gz = oscillator_grazing_point(sys, ParamPoint{});
    const MapDerivs d = numeric_first_derivs(sys, ParamPoint{}, gz, cfg);
    const SpectralData sd = spectral(d);
    SECTION("oscillator at omega = 0.854") {
        const CoeffSet c2 = unfolding_constants(sys, ParamPoint{}, gz, d, sd, 2);
        CHECK(emanation_side(2, c2, sd, d.a(0, 1)) == Side::mu_positive);
        for (int p : {3, 4, 5}) {
            const CoeffSet cp = unfolding_constants(sys, ParamPoint{}, gz, d, sd, p);
            CHECK(emanation_side(p, cp, sd, d.a(0, 1)) == Side::mu_negative);
        }
    }
    SECTION("kappa_p = 0 is not covered") {
        CoeffSet c2 = unfolding_constants(sys, ParamPoint{}, gz, d, sd, 2);
        c2.kappa_p = 0.0;
        CHECK(emanation_side(2, c2, sd, d.a(0, 1)) == Side::not_covered);
    }
    SECTION("negating beta flips the side") {
        CoeffSet c2 = unfolding_constants(sys, ParamPoint{}, gz, d, sd, 2);
        const Side s0 = emanation_side(2, c2, sd, d.a(0, 1));
        c2.beta = -c2.beta;
        const Side s1 = emanation_side(2, c2, sd, d.a(0, 1));
        CHECK(s0 != s1);
        CHECK(s1 != Side::not_covered);
    }
}

TEST_CASE("resonant closed-form coefficients") {
    SECTION("reported four-significant-figure values") {
        const CoeffSet c13 = resonant_coeffs_osc(1, 3, kZeta, kEps);
        CHECK(c13.c_sn == Catch::Approx(-282.4).epsilon(5e-4));
        CHECK(c13.c_pd == Catch::Approx(12.15).epsilon(5e-4));
        const CoeffSet c21 = resonant_coeffs_osc(2, 1, kZeta, kEps);
        CHECK(c21.c_sn == Catch::Approx(-244.5).epsilon(5e-4));
        CHECK(c21.c_pd == Catch::Approx(21.35).epsilon(5e-4));
        const CoeffSet c32 = resonant_coeffs_osc(3, 2, kZeta, kEps);
        CHECK(c32.c_sn == Catch::Approx(-613.4).epsilon(5e-4));
        CHECK(c32.c_pd == Catch::Approx(249.1).epsilon(5e-4));
    }
    SECTION("sign pattern of s+ and s- for p >= 2") {
        for (int p : {2, 3, 4}) {
            const CoeffSet c = resonant_coeffs_osc(p, 1, kZeta, kEps);
            const double eE = kEps * c.E_p;
            CHECK(c.s_plus == Catch::Approx(-(1 - eE) * (1 - eE)).epsilon(1e-12));
            CHECK(c.s_minus == Catch::Approx((1 + eE) * (1 + eE)).epsilon(1e-12));
            CHECK(c.s_plus < 0.0);
            CHECK(c.s_minus > 0.0);
        }
    }
    SECTION("curve-coefficient identity") {
        for (auto [p, n] : {std::pair{1, 3}, std::pair{1, 4}, std::pair{2, 1}, std::pair{3, 2}}) {
            const CoeffSet c = resonant_coeffs_osc(p, n, kZeta, kEps);
            const double q = c.s_plus / c.s_minus;
            CHECK(c.c_pd / c.c_sn == Catch::Approx(q * (2 - q)).margin(1e-10));
        }
    }
    SECTION("oscillator c_SN < 0 < c_PD away from the lossless degeneracy") {
        for (auto [p, n] : {std::pair{1, 3}, std::pair{1, 4}, std::pair{2, 1}, std::pair{2, 2},
                            std::pair{3, 1}, std::pair{3, 2}}) {
            const CoeffSet c = resonant_coeffs_osc(p, n, kZeta, kEps);
            CHECK(c.c_sn < 0.0);
            CHECK(c.c_pd > 0.0);
        }
    }
}

TEST_CASE("resonance frequencies") {
    CHECK(resonant_frequency_osc(1, 3, kZeta) == Catch::Approx(0.6665).margin(1e-4));
    CHECK(resonant_frequency_osc(1, 4, kZeta) == Catch::Approx(0.4999).margin(1e-4));
    CHECK(resonant_frequency_osc(1, 5, kZeta) == Catch::Approx(0.3999).margin(1e-4));
    CHECK(resonant_frequency_osc(2, 1, kZeta) == Catch::Approx(0.7998).margin(1e-4));
    // plus-sign branch for p = 3, n = 1: omega = omega1/(1 + 1/6) = 6 omega1/7
    const double om1 = std::sqrt(1 - kZeta * kZeta);
    CHECK(resonant_frequency_osc(3, 1, kZeta) == Catch::Approx(6.0 * om1 / 7.0).epsilon(1e-14));
}

TEST_CASE("predicted curve sampling") {
    const CoeffSet c = resonant_coeffs_osc(2, 1, kZeta, kEps);
    const PredictedCurves pc = predicted_curves(c, kZeta, 2e-3, 40);
    REQUIRE_FALSE(pc.sn.empty());
    REQUIRE_FALSE(pc.pd.empty());
    // eta = 0 maps to mu = 0 on both curves
    for (const auto& curve : {pc.sn, pc.pd}) {
        double min_abs_eta = 1e9;
        for (const auto& pt : curve) min_abs_eta = std::min(min_abs_eta, std::abs(pt.eta));
        CHECK(min_abs_eta == Catch::Approx(0.0).margin(1e-12));
    }
    // side selection: SN on sgn(kappa' s+) = -1, PD on +1 (kappa' > 0 here)
    for (const auto& pt : pc.sn)
        if (pt.eta != 0.0) CHECK(pt.eta < 0.0);
    for (const auto& pt : pc.pd)
        if (pt.eta != 0.0) CHECK(pt.eta > 0.0);
    // coordinate inversion
    for (const auto& pt : pc.pd) {
        CHECK(pt.omega == Catch::Approx(c.omega + pt.eta).margin(1e-14));
        CHECK(pt.amp ==
              Catch::Approx(grazing_amplitude(pt.omega, kZeta) + pt.mu).margin(1e-14));
        CHECK(pt.mu == Catch::Approx(c.c_pd * pt.eta * pt.eta).margin(1e-14));
    }
}

TEST_CASE("resonant coefficient preconditions") {
    IntegratorConfig cfg;
    // away from resonance the assembly must refuse
    const HybridSystemDef sys = make_oscillator_system(kZeta, kEps, kOmega);
    const SectionPoint gz = oscillator_grazing_point(sys, ParamPoint{});
    const MapDerivs d = numeric_first_derivs(sys, ParamPoint{}, gz, cfg);
    const SpectralData sd = spectral(d);
    CoeffSet cs = unfolding_constants(sys, ParamPoint{}, gz, d, sd, 2);
    const SecondDerivs sd2 = numeric_second_derivs(2, sys, ParamPoint{}, gz, cfg);
    cs.kappa_p_prime = 1.0;
    CHECK_THROWS_AS(resonant_coeffs_general(2, cs, sd, d, sd2), NotAtResonance);
}

// Oscillator model, closed-form flow, grazing formulas, reset law.
#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "graze/config.hpp"
#include "graze/integrate.hpp"
#include "graze/model.hpp"

using namespace graze;

namespace {
constexpr double kZeta = 0.02, kEps = 0.9;
}

TEST_CASE("osc_field values") {
    OscParams p{kZeta, kEps, 0.0, 0.854};
    // equilibrium of the unforced system
    auto [dx0, dy0, dz0] = osc_field(State{-1.0, 0.0, 0.3}, p);
    CHECK(dx0 == 0.0);
    CHECK(dy0 == Catch::Approx(0.0).margin(1e-15));
    CHECK(dz0 == p.omega);

    p.amp = 0.3;
    auto [dx1, dy1, dz1] = osc_field(State{0.0, 0.0, 0.0}, p);
    CHECK(dy1 == Catch::Approx(-0.7).margin(1e-15));

    // at the grazing state the deceleration is omega^2 (gamma = omega^2)
    p.amp = grazing_amplitude(p.omega, p.zeta);
    const double zg = grazing_phase(p.omega, p.zeta);
    auto [dx2, dy2, dz2] = osc_field(State{0.0, 0.0, zg}, p);
    CHECK(dy2 == Catch::Approx(-p.omega * p.omega).epsilon(1e-12));
}

TEST_CASE("OscParams validation") {
    CHECK_THROWS_AS((OscParams{1.2, kEps, 0.1, 0.8}.validate()), ConfigError);
    CHECK_THROWS_AS((OscParams{kZeta, 0.0, 0.1, 0.8}.validate()), ConfigError);
    CHECK_THROWS_AS((OscParams{kZeta, kEps, 0.1, -1.0}.validate()), ConfigError);
    CHECK_THROWS_AS((OscParams{kZeta, kEps, -0.1, 0.8}.validate()), ConfigError);
    CHECK_NOTHROW((OscParams{kZeta, 1.0, 0.1, 0.8}.validate())); // lossless allowed
    CHECK(OscParams{kZeta, 1.0, 0.1, 0.8}.lossless());
}

TEST_CASE("grazing amplitude") {
    CHECK(grazing_amplitude(0.854, kZeta) == Catch::Approx(0.2728309613222077).epsilon(1e-13));
    CHECK(grazing_amplitude(1.0, kZeta) == Catch::Approx(2.0 * kZeta).margin(1e-16));
    // frozen from an extended-precision evaluation of the closed form
    CHECK(grazing_amplitude(0.5, kZeta) == Catch::Approx(0.7502666192761077).epsilon(1e-13));
}

TEST_CASE("grazing phase") {
    const double zg = grazing_phase(0.854, kZeta);
    CHECK(std::sin(zg) * std::sin(zg) + std::cos(zg) * std::cos(zg) ==
          Catch::Approx(1.0).margin(1e-15));
    CHECK(grazing_phase(1.0, kZeta) == Catch::Approx(M_PI / 2).epsilon(1e-13));

    // the steady-state solution attains its maximum, value 0, at z_graz
    const OscParams p{kZeta, kEps, grazing_amplitude(0.854, kZeta), 0.854};
    const detail::Particular ph(p);
    double best_t = 0.0, best_v = -1e300;
    for (int i = 0; i < 8192; ++i) {
        const double t = two_pi * i / 8192.0 / p.omega;
        if (ph.value(t) > best_v) {
            best_v = ph.value(t);
            best_t = t;
        }
    }
    for (int it = 0; it < 60; ++it) {
        const double h = two_pi / p.omega / 8192.0 * std::pow(0.8, it);
        for (double cand : {best_t - h, best_t + h})
            if (ph.value(cand) > best_v) {
                best_v = ph.value(cand);
                best_t = cand;
            }
    }
    CHECK(best_v == Catch::Approx(0.0).margin(1e-10));
    CHECK(wrap_phase(p.omega * best_t) == Catch::Approx(zg).margin(1e-5));
}

TEST_CASE("osc_flow identities") {
    const OscParams p{kZeta, kEps, 0.28, 0.854};
    const double x0 = -0.7, y0 = 0.31, t0 = 2.2;
    SECTION("identity at zero elapsed time") {
        auto [x, y] = osc_flow(x0, y0, t0, t0, p);
        CHECK(x == Catch::Approx(x0).margin(1e-15));
        CHECK(y == Catch::Approx(y0).margin(1e-15));
    }
    SECTION("semigroup property") {
        auto [xa, ya] = osc_flow(x0, y0, t0, 5.1, p);
        auto [xb, yb] = osc_flow(xa, ya, 5.1, 9.4, p);
        auto [xc, yc] = osc_flow(x0, y0, t0, 9.4, p);
        CHECK(xb == Catch::Approx(xc).margin(1e-12));
        CHECK(yb == Catch::Approx(yc).margin(1e-12));
    }
    SECTION("long-time convergence to the steady state") {
        const double t = t0 + 200.0 * two_pi / p.omega;
        auto [x, y] = osc_flow(x0, y0, t0, t, p);
        const detail::Particular ph(p);
        CHECK(std::abs(x - ph.value(t)) < 1e-8);
    }
    SECTION("field matches the flow's time derivative") {
        const double t = t0 + 0.9;
        const double h = 1e-6;
        auto [xp, yp] = osc_flow(x0, y0, t0, t + h, p);
        auto [xm, ym] = osc_flow(x0, y0, t0, t - h, p);
        auto [x, y] = osc_flow(x0, y0, t0, t, p);
        auto [dx, dy, dz] = osc_field(State{x, y, p.omega * t}, p);
        CHECK((xp - xm) / (2 * h) == Catch::Approx(dx).margin(1e-6));
        CHECK((yp - ym) / (2 * h) == Catch::Approx(dy).margin(1e-6));
    }
    SECTION("agreement with adaptive integration over one period") {
        const HybridSystemDef raw = make_oscillator_raw(kZeta, kEps);
        const ParamPoint pp{p.amp, p.omega};
        IntegratorConfig cfg;
        const State s1 = advance(raw, pp, State{x0, y0, p.omega * t0}, two_pi / p.omega, cfg);
        auto [xe, ye] = osc_flow(x0, y0, t0, t0 + two_pi / p.omega, p);
        CHECK(s1.x == Catch::Approx(xe).margin(1e-9));
        CHECK(s1.y == Catch::Approx(ye).margin(1e-9));
    }
}

TEST_CASE("reset law") {
    const HybridSystemDef sys = make_oscillator_system(kZeta, kEps, 0.854);
    const ParamPoint pp{};
    SECTION("identity on the tangency set") {
        auto [y, z] = reset(0.0, 1.3, sys, pp);
        CHECK(y == 0.0);
        CHECK(z == Catch::Approx(1.3));
    }
    SECTION("oscillator instance") {
        auto [y, z] = reset(1.0, 2.0, sys, pp);
        CHECK(y == Catch::Approx(-0.9).margin(1e-15));
        CHECK(z == Catch::Approx(2.0).margin(1e-15));
    }
    SECTION("generic Phi, Psi instance") {
        // hand evaluation of the reset law with Phi = 0.8 + 0.1 y, Psi = 0.05
        HybridSystemDef gen = sys;
        gen.phi = [](double y, double, const ParamPoint&) { return 0.8 + 0.1 * y; };
        gen.psi = [](double, double, const ParamPoint&) { return 0.05; };
        auto [y, z] = reset(0.2, 1.0, gen, pp);
        CHECK(y == Catch::Approx(-0.164).margin(1e-15));
        CHECK(z == Catch::Approx(1.01).margin(1e-15));
    }
    SECTION("incoming maps to outgoing on a grid") {
        std::mt19937_64 rng(99);
        std::uniform_real_distribution<double> uy(1e-6, 2.0), uz(0.0, two_pi);
        for (int i = 0; i < 200; ++i) {
            auto [y, z] = reset(uy(rng), uz(rng), sys, pp);
            CHECK(y < 0.0);
            CHECK((z >= 0.0 && z < two_pi));
        }
    }
}

TEST_CASE("wrapped phase convention") {
    CHECK(wrap_phase(-0.1) == Catch::Approx(two_pi - 0.1));
    CHECK(wrap_phase(two_pi + 0.25) == Catch::Approx(0.25));
    const State s{0.0, 0.0, 7.0};
    CHECK(s.wrapped().z == Catch::Approx(7.0 - two_pi));
}

TEST_CASE("oscillator system parameterization") {
    const HybridSystemDef sys = make_oscillator_system(kZeta, kEps, 0.8);
    // grazing at mu = 0 for every eta
    for (double eta : {-1e-2, 0.0, 1e-2}) {
        const OscParams p = sys.osc(ParamPoint{0.0, eta});
        CHECK(p.amp == Catch::Approx(grazing_amplitude(0.8 + eta, kZeta)).epsilon(1e-14));
        CHECK(p.omega == Catch::Approx(0.8 + eta));
    }
    // field consistency with the parameter map
    const ParamPoint pp{3e-3, -2e-3};
    const OscParams p = sys.osc(pp);
    const double F = sys.field(-0.2, 0.1, 0.7, pp);
    CHECK(F == Catch::Approx(-2 * kZeta * 0.1 + 0.2 - 1.0 + p.amp * std::cos(0.7)).epsilon(1e-14));
}

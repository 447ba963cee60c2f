#include <doctest.h>

#include <cmath>
#include <numbers>

#include "fixtures.hpp"
#include "wavekit/mollification.hpp"
#include "wavekit/synth.hpp"
#include "wavekit/weakcheck.hpp"

using namespace wavekit;

TEST_SUITE("synth") {
    TEST_CASE("S0 closed form") {
        const auto t = fixtures::s0();
        const auto& p = t.stream.params;
        CHECK(p.p0 == doctest::Approx(-1.0).epsilon(1e-12));
        CHECK(p.Q == doctest::Approx(3.0).epsilon(1e-12));
        CHECK(p.B == doctest::Approx(1.5).epsilon(1e-12));
        const auto& g = t.stream.grid;
        for (std::size_t i = 0; i < g.nx(); i += 7)
            for (std::size_t j = 0; j < g.ny(); ++j) {
                const double y = g.y(i, j);
                CHECK(t.stream.psi(i, j) == doctest::Approx(1.0 - y).epsilon(1e-14));
                CHECK(t.velocity.P(i, j) == doctest::Approx(1.0 - y).epsilon(1e-14));
                CHECK(t.velocity.u(i, j) == doctest::Approx(0.0));
            }
        for (std::size_t j = 0; j < t.height.grid.np(); ++j)
            CHECK(t.height.h(0, j) == doctest::Approx(1.0 + t.height.grid.p[j]).epsilon(1e-14));
    }

    TEST_CASE("S1 closed form") {
        const auto t = fixtures::s1();
        const auto& p = t.stream.params;
        CHECK(p.p0 == doctest::Approx(-1.5).epsilon(1e-12));
        CHECK(p.Q == doctest::Approx(6.0).epsilon(1e-12));
        CHECK(p.B == doctest::Approx(3.0).epsilon(1e-12));
        CHECK(t.stream.gamma(-0.4) == doctest::Approx(-0.4).epsilon(1e-12));
        const auto& g = t.stream.grid;
        for (std::size_t j = 0; j < g.ny(); ++j) {
            const double y = g.y(3, j);
            CHECK(t.stream.psi(3, j) == doctest::Approx(1.5 - y - 0.5 * y * y).epsilon(1e-13));
            CHECK(t.velocity.u(3, j) == doctest::Approx(-y).epsilon(1e-13));
            CHECK(t.velocity.P(3, j) == doctest::Approx(1.0 - y).epsilon(1e-13));
        }
        for (std::size_t j = 0; j < t.height.grid.np(); ++j) {
            const double pv = t.height.grid.p[j];
            CHECK(t.height.h(0, j) == doctest::Approx(-1.0 + std::sqrt(4.0 + 2.0 * pv)).epsilon(1e-13));
        }
    }

    TEST_CASE("laminar specs with u >= c are rejected") {
        LaminarSpec spec;
        spec.u_bed = 1.5;
        CHECK_THROWS_AS(laminar(spec), InvalidInput);
        spec.u_bed = 0.0;
        spec.gamma0 = -3.0;
        CHECK_THROWS_AS(laminar(spec), InvalidInput);
    }

    TEST_CASE("shooting reproduces the constant-vorticity closed form") {
        LaminarSpec spec;
        spec.gamma0 = 1.0;
        const LaminarProfile closed(spec);
        spec.gamma_of_psi = [](double) { return 1.0; };
        const LaminarProfile shot(spec);
        for (double y : {0.0, 0.2, 0.5, 0.9, 1.0}) {
            CHECK(shot.psi(y) == doctest::Approx(closed.psi(y)).epsilon(1e-9));
            CHECK(shot.dpsi(y) == doctest::Approx(closed.dpsi(y)).epsilon(1e-9));
        }
        CHECK(closed.height(-1.0) == doctest::Approx(-1.0 + std::sqrt(2.0)).epsilon(1e-12));
    }

    TEST_CASE("tabulated vorticity passes invariants and classical residuals") {
        LaminarSpec spec;
        spec.gamma_of_psi = [](double s) { return 0.5 + 0.5 * s; };
        spec.nx = 64;
        spec.ny = 65;
        const auto t = laminar(spec);
        CHECK(check_invariants(t.velocity).passed());
        CHECK(check_invariants(t.stream).passed());
        CHECK(check_invariants(t.height).passed());
        const double ds = t.stream.grid.dsigma(), dp = t.height.grid.dp();
        CHECK(classical_residuals(t.stream, ds * ds).passed());
        const auto ch = classical_residuals(t.height, dp * dp);
        for (const auto& e : ch.entries) CHECK_MESSAGE(e.pass, e.label, " ", e.value);
    }

    TEST_CASE("Weierstrass fields") {
        RoughFieldSpec one;
        one.alpha = 1.0;
        one.octaves = 1;
        const WeierstrassField w(one, 1);
        for (double x : {0.0, 0.7, 2.0})
            CHECK(w(x) == doctest::Approx(std::cos(x + w.theta(0))).epsilon(1e-14));
        CHECK_THROWS_AS(WeierstrassField(RoughFieldSpec{.alpha = 1.5}, 1), InvalidInput);
        CHECK_THROWS_AS(WeierstrassField(RoughFieldSpec{.alpha = 0.0}, 1), InvalidInput);

        const auto line = interval_region(4.0, std::numbers::pi, 2001);
        const auto deltas = dyadic_scales(0.4, 8);
        double est[2];
        for (int s = 0; s < 2; ++s) {
            const WeierstrassField f(normalized_rough(0.5, 12, 7 + s, 1.0), 1);
            const ScalarField sf = [&](Point p) { return f(p.x); };
            est[s] = estimate_holder(sf, line, 1, deltas).alpha;
            CHECK(std::abs(est[s] - 0.5) <= 0.07);
        }
        CHECK(std::abs(est[0] - est[1]) <= 0.05);
        const WeierstrassField a(normalized_rough(0.5, 12, 7, 1.0), 1);
        const WeierstrassField b(normalized_rough(0.5, 12, 8, 1.0), 1);
        CHECK(a(1.0) != b(1.0));
    }

    TEST_CASE("sampled fields and the vertical antiderivative") {
        RoughFieldSpec spec;
        spec.octaves = 4;
        const auto f = weierstrass(spec, 2, 16);
        CHECK(f.nx() == 16);
        CHECK(f.ny() == 16);
        const WeierstrassField w(spec, 2);
        const double x = 0.8, y = 0.6, h = 1e-5;
        CHECK((w.A(x, y + h) - w.A(x, y - h)) / (2 * h) == doctest::Approx(w(x, y)).epsilon(1e-7));
        CHECK((w.A(x + h, y) - w.A(x - h, y)) / (2 * h) == doctest::Approx(w.A_x(x, y)).epsilon(1e-7));
        CHECK(w.A(x, 0.0) == 0.0);
    }

    TEST_CASE("perturbation") {
        const auto t = fixtures::s1();
        const auto same = perturb(t.stream, normalized_rough(0.5, 8, 7, 1.0), 0.0);
        CHECK(max_abs_diff(same.psi, t.stream.psi) == 0.0);

        const auto rough = perturb(t.stream, normalized_rough(0.5, 8, 7, 1.0), 0.05);
        CHECK_FALSE(rough.smooth);
        CHECK(check_invariants(rough).at("psi_y<0").pass);
        const std::size_t top = rough.grid.ny() - 1;
        for (std::size_t i = 0; i < rough.grid.nx(); ++i) {
            CHECK(rough.psi(i, 0) == t.stream.psi(i, 0));
            CHECK(rough.psi(i, top) == t.stream.psi(i, top));
        }
        CHECK(max_abs_diff(rough.psi, t.stream.psi) > 1e-4);

        RoughFieldSpec strong;
        strong.alpha = 0.25;
        CHECK_THROWS_AS(perturb(t.stream, strong, 3.0), InvariantViolation);
    }
}

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "fixtures.hpp"
#include "wavekit/weakcheck.hpp"

using namespace wavekit;

namespace {

constexpr double kPi = std::numbers::pi;

/// Midpoint rule over the bounding square of supp phi.
template <class F>
double midpoint(const TestFunction& phi, F&& integrand, int n = 800) {
    const double h = 2.0 * phi.radius / n;
    double acc = 0.0;
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
            const Point z{phi.center.x - phi.radius + (a + 0.5) * h, phi.center.y - phi.radius + (b + 0.5) * h};
            acc += integrand(z);
        }
    return acc * h * h;
}

TestFunction bump(double x, double y, double r, double period = 2.0 * kPi) {
    TestFunction phi;
    phi.center = {x, y};
    phi.radius = r;
    phi.period = period;
    return phi;
}

}  // namespace

TEST_SUITE("weakcheck") {
    TEST_CASE("test functions") {
        const auto phi = bump(1.0, 0.5, 0.2);
        CHECK(phi.value({1.0, 0.5}) == doctest::Approx(1.0));
        CHECK(phi.value({1.0, 0.71}) == 0.0);
        const double h = 1e-6;
        const Point z{1.07, 0.43};
        const Point g = phi.grad(z);
        CHECK(g.x == doctest::Approx((phi.value({z.x + h, z.y}) - phi.value({z.x - h, z.y})) / (2 * h)).epsilon(1e-6));
        CHECK(g.y == doctest::Approx((phi.value({z.x, z.y + h}) - phi.value({z.x, z.y - h})) / (2 * h)).epsilon(1e-6));
        double w = 0.0;
        for (const auto& n : support_quadrature(phi, 64)) w += n.w;
        CHECK(w == doctest::Approx(kPi * 0.04).epsilon(1e-3));
    }

    TEST_CASE("batteries are deterministic and inside the domain") {
        const auto t = fixtures::s1();
        const auto a = fluid_battery(t.stream.grid, 7);
        const auto b = fluid_battery(t.stream.grid, 7);
        REQUIRE(a.size() == 12);
        for (std::size_t k = 0; k < a.size(); ++k) {
            CHECK(a[k].center.x == b[k].center.x);
            CHECK(a[k].center.y == b[k].center.y);
            CHECK_NOTHROW(require_inside(t.stream.grid, a[k]));
        }
        for (const auto& phi : strip_battery(t.height.grid, 7)) CHECK_NOTHROW(require_inside(t.height.grid, phi));
        CHECK_THROWS_AS(require_inside(t.stream.grid, bump(1.0, 0.95, 0.1)), InvalidInput);
        CHECK_THROWS_AS(weak_residual_stream(t.stream, std::vector<TestFunction>{}), InvalidInput);
    }

    TEST_CASE("exact laminar solutions have vanishing weak residuals") {
        for (const auto& t : {fixtures::s0(), fixtures::s1()}) {
            const auto fluid = fluid_battery(t.stream.grid, 7);
            const auto strip = strip_battery(t.height.grid, 7);
            const auto rv = weak_residual_velocity(t.velocity, fluid);
            const auto rs = weak_residual_stream(t.stream, fluid);
            const auto rh = weak_residual_height(t.height, strip);
            CHECK(rv.passed());
            CHECK(rs.passed());
            CHECK(rh.passed());
            CHECK(rs.at("stream").value <= 1e-8);
        }
        const auto t0 = fixtures::s0();
        const auto fluid = fluid_battery(t0.stream.grid, 7);
        const auto rv = weak_residual_velocity(t0.velocity, fluid);
        CHECK(rv.at("mass").value <= 1e-10);
        CHECK(rv.at("x-momentum").value <= 1e-10);
        CHECK(rv.at("y-momentum").value <= 1e-10);
        CHECK(weak_residual_stream(t0.stream, fluid).at("stream").value <= 1e-10);
    }

    TEST_CASE("removing Gamma leaves the dropped term") {
        auto t = fixtures::s1();
        const auto phi = bump(2.0, 0.5, 0.3);
        t.stream.gamma = zero_vorticity(t.stream.params.p0);
        const double raw = weak_integral_stream(t.stream, phi);
        const double oracle = midpoint(phi, [&](Point z) {
            const double psi = 1.5 - z.y - 0.5 * z.y * z.y;
            return -psi * phi.grad(z).y;
        });
        CHECK(std::abs(oracle) > 1e-3);
        CHECK(std::abs(std::abs(raw) - std::abs(oracle)) <= 1e-7);
    }

    TEST_CASE("an injected pressure bump shows in the x-momentum residual") {
        auto t = fixtures::s1(128, 65);
        const auto b = [](double x) { return std::exp(-(x - 2.0) * (x - 2.0) / 0.25); };
        for (std::size_t i = 0; i < t.velocity.grid.nx(); ++i)
            for (std::size_t j = 0; j < t.velocity.grid.ny(); ++j) t.velocity.P(i, j) += 0.1 * b(t.velocity.grid.x(i));
        const std::vector<TestFunction> tests{bump(2.2, 0.5, 0.3)};
        const auto r = weak_residual_velocity(t.velocity, tests);
        const double oracle = midpoint(tests[0], [&](Point z) { return 0.1 * b(z.x) * tests[0].grad(z).x; });
        CHECK(std::abs(oracle) > 1e-3);
        CHECK(std::abs(std::abs(r.at("x-momentum").per_test[0]) - std::abs(oracle)) <= 1e-6);
        CHECK_FALSE(r.at("x-momentum").pass);
    }

    TEST_CASE("a non-solution height field has an O(1) residual") {
        auto t = fixtures::s1();
        for (std::size_t i = 0; i < t.height.grid.nq(); ++i)
            for (std::size_t j = 0; j < t.height.grid.np(); ++j) {
                const double p = t.height.grid.p[j];
                t.height.h(i, j) = (1.0 + p / 1.5) * (1.0 + 0.2 * std::sin(t.height.grid.q[i]) * p);
            }
        const auto r = weak_residual_height(t.height, strip_battery(t.height.grid, 7));
        CHECK_FALSE(r.passed());
        CHECK(r.at("height").value > 1e-3);
    }

    TEST_CASE("pullback through still water keeps the radial profile") {
        const auto t = fixtures::s0();
        const auto phi = bump(kPi, 0.5, 0.2);
        const auto pb = pullback_testfunction(phi, t.height);
        const auto strip_phi = bump(kPi, -0.5, 0.2);
        for (const Point qp : {Point{kPi, -0.5}, Point{kPi + 0.1, -0.45}, Point{kPi - 0.05, -0.62}}) {
            CHECK(pb.value(qp) == doctest::Approx(strip_phi.value(qp)).epsilon(1e-10));
            CHECK(pb.grad(qp).x == doctest::Approx(strip_phi.grad(qp).x).epsilon(1e-8));
            CHECK(pb.grad(qp).y == doctest::Approx(strip_phi.grad(qp).y).epsilon(1e-8));
        }
        CHECK(pb.level(kPi, 0.5) == doctest::Approx(-0.5).epsilon(1e-12));
    }

    TEST_CASE("change of variables and the equivalence audit on S1") {
        const auto t = fixtures::s1(128, 65);
        const auto tests = fluid_battery(t.stream.grid, 7);
        for (const auto& phi : tests) CHECK(jacobian_identity(phi, t.stream) <= 1e-8);
        const auto audit = equivalence_audit(t.stream, tests, 1e-6);
        CHECK(audit.passed());
        CHECK(audit.at("paired residual gap").value <= 1e-6);
        CHECK(audit.at("jacobian identity").value <= 1e-6);
    }

    TEST_CASE("streamline flux of q-independent and q-dependent fields") {
        const auto t = fixtures::s1();
        const auto& strip = t.height.grid;
        const auto tests = strip_battery(strip, 7);
        NodalField gamma_only(strip.nq(), strip.np());
        NodalField wavy(strip.nq(), strip.np());
        for (std::size_t i = 0; i < strip.nq(); ++i)
            for (std::size_t j = 0; j < strip.np(); ++j) {
                gamma_only(i, j) = strip.p[j] + 3.0;
                wavy(i, j) = std::sin(2.0 * kPi * strip.q[i] / strip.period);
            }
        CHECK(streamline_flux(strip, gamma_only, tests).at("streamline flux").value <= 1e-12);
        CHECK(streamline_flux(bernoulli_field(t.stream), tests).passed());

        const auto r = streamline_flux(strip, wavy, tests);
        CHECK_FALSE(r.passed());
        for (std::size_t k = 0; k < tests.size(); ++k) {
            const auto& phi = tests[k];
            const double oracle = midpoint(phi, [&](Point z) { return std::sin(z.x) * phi.grad(z).x; });
            CHECK(r.at("streamline flux").per_test[k] == doctest::Approx(oracle).epsilon(1e-5).scale(1e-2));
        }
    }

    TEST_CASE("flux studies on a smooth exact solution") {
        const auto t = fixtures::s1(64, 33);
        const auto F = bernoulli_field(t.stream).F;
        const GridFluxFields fields(t.stream, F);
        const auto phi = bump(kPi, 0.5, 0.3);
        const auto region = support_region(t.stream.grid, phi);
        FluxStudyConfig config;
        config.eps = eps_sweep(region.eps0, 3, 6);
        config.outer_nodes = 24;
        const auto m = flux_study_momentum(fields, region, phi, config);
        const auto b = flux_study_bernoulli(fields, region, phi, config);
        CHECK(std::abs(m.target) <= 1e-8);
        CHECK(std::abs(b.target) <= 1e-8);
        for (const auto& s : m.signed_terms)
            for (const auto& x : s.samples) CHECK(x.norm <= 1e-7);
        for (const auto& s : b.signed_terms)
            for (const auto& x : s.samples) CHECK(x.norm <= 1e-7);
        CHECK(m.identity_defect <= 1e-10);
        CHECK(b.identity_defect <= 1e-10);
    }

    TEST_CASE("the bound verdict never claims failure of equivalence") {
        CHECK(flux_verdict(0.25, -0.3).find("inconclusive") != std::string::npos);
        CHECK(flux_verdict(0.25, -0.3).find("fails") == std::string::npos);
        CHECK(flux_verdict(0.5, 0.6) == "bound decays");
    }

    TEST_CASE("classical residuals") {
        const auto t0 = fixtures::s0();
        for (const auto& e : classical_residuals(t0.stream).entries) CHECK(e.value <= 1e-10);
        for (const auto& e : classical_residuals(t0.height).entries) CHECK(e.value <= 1e-10);
        for (const auto& e : classical_residuals(t0.velocity).entries) CHECK(e.value <= 1e-10);
        const auto t1 = fixtures::s1(128, 65);
        CHECK(classical_residuals(t1.stream).passed());
        CHECK(classical_residuals(t1.height, 1e-5).passed());
        auto rough = t1.stream;
        rough.smooth = false;
        CHECK_THROWS_AS(classical_residuals(rough), InvalidInput);
    }
}

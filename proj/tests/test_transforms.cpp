#include <doctest.h>

#include <cmath>
#include <numbers>

#include "fixtures.hpp"
#include "wavekit/transforms.hpp"

using namespace wavekit;

namespace {

constexpr double kPi = std::numbers::pi;

double max_err(const NodalField& f, const FluidGrid& g, double (*exact)(double)) {
    double e = 0.0;
    for (std::size_t i = 0; i < g.nx(); ++i)
        for (std::size_t j = 0; j < g.ny(); ++j) e = std::max(e, std::abs(f(i, j) - exact(g.y(i, j))));
    return e;
}

double s1_psi(double y) { return 1.5 - y - 0.5 * y * y; }
double s1_u(double y) { return -y; }
double s0_psi(double y) { return 1.0 - y; }
double hydrostatic(double y) { return 1.0 - y; }

}  // namespace

TEST_SUITE("transforms") {
    TEST_CASE("velocity to stream on S0 and S1") {
        const auto t0 = fixtures::s0();
        const auto c0 = velocity_to_stream(t0.velocity);
        CHECK(c0.p0 == doctest::Approx(-1.0).epsilon(1e-12));
        CHECK(max_err(c0.stream.psi, c0.stream.grid, s0_psi) <= 1e-12);

        const auto t1 = fixtures::s1();
        const auto c1 = velocity_to_stream(t1.velocity);
        CHECK(c1.p0 == doctest::Approx(-1.5).epsilon(1e-10));
        CHECK(max_err(c1.stream.psi, c1.stream.grid, s1_psi) <= 1e-10);
        CHECK(c1.path_defect <= 1e-8);
        CHECK(c1.stream.params.B == doctest::Approx(3.0).epsilon(1e-8));
        CHECK(c1.stream.gamma(-1.0) == doctest::Approx(-1.0).epsilon(1e-8));
    }

    TEST_CASE("a non-solenoidal velocity is rejected by the path check") {
        auto t = fixtures::s1();
        for (double& v : t.velocity.v.values()) v += 0.1;
        CHECK_THROWS_AS(velocity_to_stream(t.velocity), InvariantViolation);
    }

    TEST_CASE("stream to velocity recovers u, v and P") {
        const auto t0 = fixtures::s0();
        const auto r0 = stream_to_velocity(t0.stream);
        CHECK(max_abs(r0.velocity.u) <= 1e-12);
        CHECK(max_abs(r0.velocity.v) <= 1e-12);
        CHECK(max_err(r0.velocity.P, r0.velocity.grid, hydrostatic) <= 1e-10);

        const auto t1 = fixtures::s1();
        const auto r1 = stream_to_velocity(t1.stream);
        CHECK(max_err(r1.velocity.u, r1.velocity.grid, s1_u) <= 1e-10);
        CHECK(max_abs(r1.velocity.v) <= 1e-12);
        CHECK(max_err(r1.velocity.P, r1.velocity.grid, hydrostatic) <= 1e-10);
        CHECK(r1.surface_pressure_defect <= 1e-10);
    }

    TEST_CASE("velocity round trip on S1 at N = 256") {
        const auto t = fixtures::s1(256, 129);
        const auto back = stream_to_velocity(velocity_to_stream(t.velocity).stream).velocity;
        CHECK(max_abs_diff(back.u, t.velocity.u) <= 1e-8);
        CHECK(max_abs_diff(back.v, t.velocity.v) <= 1e-8);
        CHECK(max_abs_diff(back.P, t.velocity.P) <= 1e-8);
    }

    TEST_CASE("stream to height against the closed forms") {
        const auto t0 = fixtures::s0();
        const auto h0 = stream_to_height(t0.stream);
        double e0 = 0.0;
        for (std::size_t i = 0; i < h0.grid.nq(); ++i)
            for (std::size_t j = 0; j < h0.grid.np(); ++j) e0 = std::max(e0, std::abs(h0.h(i, j) - 1.0 - h0.grid.p[j]));
        CHECK(e0 <= 1e-12);

        const auto t1 = fixtures::s1();
        const auto h1 = stream_to_height(t1.stream);
        CHECK(h1.grid.p0 == doctest::Approx(-1.5));
        double e1 = 0.0;
        for (std::size_t i = 0; i < h1.grid.nq(); ++i)
            for (std::size_t j = 0; j < h1.grid.np(); ++j)
                e1 = std::max(e1, std::abs(h1.h(i, j) + 1.0 - std::sqrt(4.0 + 2.0 * h1.grid.p[j])));
        CHECK(e1 <= 1e-11);
        CHECK(std::abs(h1.h(0, h1.grid.np() - 1) - 1.0) <= 1e-12);
        CHECK(std::abs(h1.h(0, 0)) <= 1e-12);
    }

    TEST_CASE("height to stream and back") {
        const TransformOptions opt;
        const auto t0 = fixtures::s0();
        CHECK(max_err(height_to_stream(t0.height).psi, t0.stream.grid, s0_psi) <= 10.0 * opt.root_tolerance);
        CHECK(max_abs_diff(stream_to_height(height_to_stream(t0.height)).h, t0.height.h) <= 10.0 * opt.root_tolerance);

        double errs[2];
        for (int k = 0; k < 2; ++k) {
            const auto t1 = k == 0 ? fixtures::s1(64, 33) : fixtures::s1(64, 65);
            const auto psi = height_to_stream(t1.height);
            errs[k] = max_err(psi.psi, psi.grid, s1_psi);
            CHECK(max_abs_diff(height_to_stream(stream_to_height(t1.stream)).psi, t1.stream.psi) <= errs[k] + 1e-12);
            CHECK(max_abs_diff(stream_to_height(psi).h, t1.height.h) <= 2.0 * errs[k]);
        }
        CHECK(errs[0] <= 1e-5);
        CHECK(errs[0] / errs[1] >= 12.0);
    }

    TEST_CASE("chain rule audit") {
        const auto t0 = fixtures::s0();
        const auto a0 = chain_rule_audit(t0.stream, t0.height);
        for (const auto& e : a0.entries) CHECK(e.value <= 1e-10);
        const auto t1 = fixtures::s1(128, 65);
        for (const auto& e : chain_rule_audit(t1.stream, t1.height).entries) CHECK(e.value <= 1e-5);
        const auto mixed = chain_rule_audit(t0.stream, fixtures::s1().height);
        CHECK(mixed.at("h_p + 1/psi_y").value >= 0.4);
    }

    TEST_CASE("Bernoulli field and Gamma extraction") {
        const auto t0 = fixtures::s0();
        const auto f0 = bernoulli_field(t0.velocity, t0.stream);
        for (double v : f0.F.values()) CHECK(v == doctest::Approx(1.5).epsilon(1e-10));
        const auto g0 = extract_gamma(f0);
        CHECK(g0.B == doctest::Approx(1.5).epsilon(1e-10));
        for (double v : g0.gamma.Gamma) CHECK(std::abs(v) <= 1e-10);

        const auto t1 = fixtures::s1();
        const auto f1 = bernoulli_field(t1.stream);
        for (std::size_t i = 0; i < f1.grid.nx(); ++i)
            for (std::size_t j = 0; j < f1.grid.ny(); ++j) {
                const double y = f1.grid.y(i, j);
                CHECK(f1.F(i, j) == doctest::Approx(y + 0.5 * y * y + 1.5).epsilon(1e-9));
            }
        const auto g1 = extract_gamma(f1);
        CHECK(g1.B == doctest::Approx(3.0).epsilon(1e-9));
        CHECK(g1.constancy_defect <= 1e-10);
        CHECK(g1.gamma(-0.7) == doctest::Approx(-0.7).epsilon(1e-9));
    }

    TEST_CASE("a q-dependent Bernoulli field shows a constancy defect") {
        const auto t1 = fixtures::s1();
        auto f = bernoulli_field(t1.stream);
        for (std::size_t i = 0; i < f.strip.nq(); ++i)
            for (std::size_t j = 0; j < f.strip.np(); ++j) f.F_strip(i, j) += 0.1 * std::sin(2.0 * kPi * f.strip.q[i] / f.strip.period);
        CHECK(extract_gamma(f).constancy_defect >= 0.19);
    }

    TEST_CASE("options are validated") {
        TransformOptions opt;
        opt.root_tolerance = -1.0;
        CHECK_THROWS_AS(opt.validate(), InvalidInput);
    }
}

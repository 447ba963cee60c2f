#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "wavekit/mollification.hpp"
#include "wavekit/synth.hpp"

using namespace wavekit;

namespace {

constexpr double kPi = std::numbers::pi;

RegionSpec plane_region() {
    const auto g = make_flat_grid(2.0 * kPi, 1.0, 32, 17);
    return interior_region(g, Rect{2.0, 3.0, 0.3, 0.7});
}

double max_abs_of(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

}  // namespace

TEST_SUITE("mollification") {
    TEST_CASE("kernel moments") {
        for (int d : {1, 2}) {
            const MollifierKernel k(d, 0.1);
            CHECK(k.moment(0, 0) == doctest::Approx(1.0).epsilon(1e-14));
            CHECK(std::abs(k.moment(1, 0)) <= 1e-15);
            CHECK(std::abs(k.moment(0, 1)) <= 1e-15);
            for (const auto& z : k.z) CHECK(z.x * z.x + z.y * z.y < 1.0);
        }
        CHECK(MollifierKernel::profile(1.0) == 0.0);
        CHECK(MollifierKernel::profile(0.25) > 0.0);
    }

    TEST_CASE("constants and linear fields are reproduced") {
        const auto region = plane_region();
        const MollifierKernel k(2, 0.5 * region.eps0);
        const ScalarField seven = [](Point) { return 7.0; };
        for (double v : mollify(seven, k, region)) CHECK(v == doctest::Approx(7.0).epsilon(1e-14));

        const auto line = interval_region(3.0, 1.0, 41);
        const MollifierKernel k1(1, 0.5);
        const ScalarField x = [](Point p) { return p.x; };
        const auto fx = mollify(x, k1, line);
        for (std::size_t i = 0; i < fx.size(); ++i) CHECK(std::abs(fx[i] - line.k_nodes[i].x) <= 1e-14);
        for (const auto& g : gradient_of_mollified(x, k1, line)) CHECK(g.x == doctest::Approx(1.0).epsilon(1e-12));
    }

    TEST_CASE("quadratic remainder of two linear fields") {
        const auto line = interval_region(3.0, 1.0, 21);
        const double eps = 0.4;
        const MollifierKernel k(1, eps);
        const ScalarField f = [](Point p) { return 2.0 * p.x; };
        const ScalarField g = [](Point p) { return -3.0 * p.x; };
        const double expected = -6.0 * eps * eps * k.moment(2, 0);
        for (double v : r_eps(f, g, k, line)) CHECK(v == doctest::Approx(expected).epsilon(1e-12));
        const ScalarField c = [](Point) { return 4.0; };
        CHECK(max_abs_of(r_eps(c, g, k, line)) <= 1e-15);
        CHECK(max_abs_of(R_eps(c, g, k, line)) <= 1e-14);
    }

    TEST_CASE("R_eps is symmetric") {
        const auto region = plane_region();
        const MollifierKernel k(2, 0.5 * region.eps0);
        const ScalarField f = [](Point p) { return std::sin(3.0 * p.x) * p.y; };
        const ScalarField g = [](Point p) { return std::cos(p.x + 2.0 * p.y); };
        const auto a = R_eps(f, g, k, region);
        const auto b = R_eps(g, f, k, region);
        for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
    }

    TEST_CASE("gradient of a mollified sine") {
        const auto line = interval_region(3.0, 1.0, 21);
        const double eps = 0.05;
        const MollifierKernel k(1, eps);
        const ScalarField f = [](Point p) { return std::sin(p.x); };
        const auto grad = gradient_of_mollified(f, k, line);
        for (std::size_t i = 0; i < grad.size(); ++i)
            CHECK(std::abs(grad[i].x - std::cos(line.k_nodes[i].x)) <= eps * eps);
    }

    TEST_CASE("product identity on smooth fields") {
        const auto region = plane_region();
        const MollifierKernel k(2, 0.5 * region.eps0);
        const ScalarField f = [](Point p) { return std::exp(std::sin(p.x)) * p.y; };
        const ScalarField g = [](Point p) { return std::cos(2.0 * p.x - p.y); };
        CHECK(product_identity_defect(f, g, k, region) <= 1e-12);
    }

    TEST_CASE("mollification beyond eps0 is rejected") {
        const auto region = plane_region();
        const MollifierKernel k(2, 2.0 * region.eps0);
        const ScalarField f = [](Point) { return 1.0; };
        CHECK_THROWS_AS(mollify(f, k, region), InvalidInput);
    }

    TEST_CASE("divergence of mollified pairs") {
        const auto region = plane_region();
        const MollifierKernel k(2, 0.5 * region.eps0, 64);
        const std::vector<ScalarField> curl{
            [](Point p) { return -std::sin(p.x) * std::sin(p.y); },
            [](Point p) { return -std::cos(p.x) * std::cos(p.y); }};
        CHECK(lemma2_check(curl, k, region) <= 1e-8);
        const std::vector<ScalarField> s1{[](Point p) { return -1.0 - p.y; }, [](Point) { return 0.0; }};
        CHECK(lemma2_check(s1, k, region) <= 1e-10);
        const std::vector<ScalarField> source{[](Point p) { return p.x; }, [](Point) { return 0.0; }};
        CHECK(lemma2_check(source, k, region) == doctest::Approx(1.0).epsilon(1e-10));
    }

    TEST_CASE("Hoelder estimates") {
        const auto line = interval_region(4.0, kPi, 2001);
        const auto deltas = dyadic_scales(0.1, 6);
        const ScalarField x = [](Point p) { return p.x; };
        const auto lin = estimate_holder(x, line, 1, deltas);
        CHECK(lin.defined);
        CHECK(lin.alpha == doctest::Approx(1.0).epsilon(0.05));

        const ScalarField c = [](Point) { return 2.0; };
        CHECK_FALSE(estimate_holder(c, line, 1, deltas).defined);

        for (double alpha : {0.25, 0.5}) {
            const WeierstrassField w(normalized_rough(alpha, 12, 7, 1.0), 1);
            const ScalarField f = [&](Point p) { return w(p.x); };
            const auto est = estimate_holder(f, line, 1, dyadic_scales(0.4, 8));
            CHECK(est.defined);
            CHECK(std::abs(est.alpha - alpha) <= 0.07);
        }
    }

    TEST_CASE("eps sweeps are geometric and decreasing") {
        const auto s = eps_sweep(1.0);
        REQUIRE(s.size() == 7);
        CHECK(s.front() == 0.125);
        for (std::size_t i = 1; i < s.size(); ++i) CHECK(s[i] == 0.5 * s[i - 1]);
    }
}

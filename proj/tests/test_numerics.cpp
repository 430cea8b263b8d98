#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "singspec/numerics.hpp"

#include <cmath>
#include <numbers>

using namespace singspec;
using std::numbers::pi;

TEST_CASE("gauss-kronrod on a smooth interval") {
    auto r = integrate_path([](cplx z) { return std::exp(z); }, {path_segment::line(0.0, 1.0)});
    CHECK(std::abs(r.value - (std::exp(1.0) - 1.0)) < 1e-13);
}

TEST_CASE("upper detour around a simple pole") {
    auto p = detour_path(-1.0, 1.0, {0.0}, 0.1, true);
    auto r = integrate_path([](cplx z) { return 1.0 / z; }, p);
    CHECK(std::abs(r.value - cplx(0.0, -pi)) < 1e-12);
    auto q = detour_path(-1.0, 1.0, {0.0}, 0.1, false);
    auto s = integrate_path([](cplx z) { return 1.0 / z; }, q);
    CHECK(std::abs(s.value - cplx(0.0, pi)) < 1e-12);
}

TEST_CASE("double pole detour is independent of side") {
    for (bool up : {true, false}) {
        auto r = integrate_path([](cplx z) { return 1.0 / (z * z); },
                                detour_path(-1.0, 1.0, {0.0}, 0.05, up));
        CHECK(std::abs(r.value - (-2.0)) < 1e-11);
    }
}

TEST_CASE("closed circle picks up the residue") {
    auto r = integrate_path([](cplx z) { return 3.0 / (z - cplx(0.2, 0.1)); },
                            circle_path(0.0, 1.0));
    CHECK(std::abs(r.value - cplx(0.0, 6 * pi)) < 1e-11);
}

TEST_CASE("quadrature failure is reported with a location") {
    quad_options o;
    o.max_panels = 50;
    CHECK_THROWS_AS(integrate_path([](cplx z) { return 1.0 / std::sqrt(std::abs(z - 0.3)); },
                                   {path_segment::line(0.0, 1.0)}, o),
                    quadrature_error);
}

TEST_CASE("detour validation") {
    CHECK_THROWS_AS(detour_path(-1.0, 1.0, {0.0, 0.1}, 0.1), validation_error);
    CHECK_THROWS_AS(detour_path(1.0, -1.0, {}, 0.1), validation_error);
}

TEST_CASE("roots of x^3 + 12") {
    polynomial p({12.0, 0.0, 0.0, 1.0});
    auto r = poly_roots(p);
    REQUIRE(r.roots.size() == 3);
    int real = 0;
    for (auto z : r.roots) {
        CHECK(std::abs(p(z)) < 1e-12 * 12);
        if (std::abs(z.imag()) < 1e-10) {
            ++real;
            CHECK(std::abs(z.real() - (-std::cbrt(12.0))) < 1e-12);
        }
    }
    CHECK(real == 1);
    CHECK(r.max_residual < 1e-14);
}

TEST_CASE("root clustering detects multiplicity") {
    polynomial p = polynomial({-1.0, 1.0}) * polynomial({-1.0, 1.0}) * polynomial({2.0, 1.0});
    auto r = poly_roots(p);
    bool found = false;
    for (auto& c : r.clusters)
        if (c.multiplicity == 2) {
            found = true;
            CHECK(std::abs(c.value - 1.0) < 1e-6);
        }
    CHECK(found);
}

TEST_CASE("polynomial algebra") {
    polynomial a({1.0, 2.0}), b({0.0, 1.0, 1.0});
    auto c = a * b + a;
    CHECK(std::abs(c(2.0) - (a(2.0) * b(2.0) + a(2.0))) < 1e-14);
    CHECK(std::abs(c.derivative()(1.5) - derivative([&](cplx z) { return c(z); }, 1.5, 1)) < 1e-9);
}

TEST_CASE("finite differences up to order four") {
    auto f = [](cplx z) { return std::exp(2.0 * z); };
    cplx z0(0.3, 0.2);
    for (int k = 1; k <= 4; ++k) {
        cplx exact = std::pow(2.0, k) * std::exp(2.0 * z0);
        CHECK(std::abs(derivative(f, z0, k) - exact) / std::abs(exact) < 1e-7);
    }
    CHECK_THROWS_AS(derivative(f, z0, 5), validation_error);
}

TEST_CASE("laurent and taylor coefficients") {
    auto f = [](cplx z) { return 1.0 / (z * z) + 3.0 / z + std::exp(z); };
    auto c = laurent_coefficients(f, 0.0, 0.5, -3, 2);
    CHECK(std::abs(c[0]) < 1e-12);
    CHECK(std::abs(c[1] - 1.0) < 1e-12);
    CHECK(std::abs(c[2] - 3.0) < 1e-12);
    CHECK(std::abs(c[3] - 1.0) < 1e-12);
    CHECK(std::abs(c[5] - 0.5) < 1e-12);
    auto t = taylor_coefficients([](cplx z) { return std::exp(z); }, 0.0, 1.0, 4);
    CHECK(std::abs(t[4] - 1.0 / 24) < 1e-13);
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "singspec/kdv_rational.hpp"

#include <cmath>
#include <random>

using namespace singspec;

namespace {
std::vector<long long> weights_ll(const tau_polynomial& t) {
    std::vector<long long> out;
    for (auto& b : t.weights()) out.push_back(b.convert_to<long long>());
    return out;
}
} // namespace

TEST_CASE("low order tau polynomials match the hand oracles") {
    CHECK(weights_ll(tau(1)) == std::vector<long long>{1});
    CHECK(weights_ll(tau(2)) == std::vector<long long>{1, 12});
    CHECK(weights_ll(tau(3)) == std::vector<long long>{1, 60, -720});
    CHECK(tau(2).to_string() == "x^3 + 12t");
}

TEST_CASE("tau_4 and tau_5 match the symbolic oracle") {
    // Independent sympy computation of the recursion plus bilinear KdV.
    CHECK(weights_ll(tau(4)) == std::vector<long long>{1, 180, 0, 302400});
    CHECK(weights_ll(tau(5)) ==
          std::vector<long long>{1, 420, 25200, 2116800, -254016000, -1524096000});
}

TEST_CASE("construction limits") {
    CHECK_THROWS_AS(tau(0), validation_error);
    CHECK_THROWS_AS(tau(13), validation_error);
    CHECK_NOTHROW(tau(12));
}

TEST_CASE("pole sets for small n") {
    auto p1 = poles(1, 1.0);
    CHECK(p1.real == 1);
    CHECK(std::abs(p1.roots[0]) == 0.0);
    auto p2 = poles(2, 1.0);
    CHECK(p2.total == 3);
    CHECK(p2.real == 1);
    for (std::size_t i = 0; i < p2.roots.size(); ++i)
        if (p2.is_real[i]) CHECK(std::abs(p2.roots[i].real() + std::cbrt(12.0)) < 1e-12);
    auto p3 = poles(3, 1.0);
    CHECK(p3.total == 6);
    CHECK(p3.real == 2);
    // x^3 solves s^2 + 60 s - 720 = 0.
    const double s1 = -30 + std::sqrt(900.0 + 720.0), s2 = -30 - std::sqrt(900.0 + 720.0);
    std::vector<double> expect = {std::cbrt(s1), std::cbrt(s2)};
    std::vector<double> got;
    for (std::size_t i = 0; i < p3.roots.size(); ++i)
        if (p3.is_real[i]) got.push_back(p3.roots[i].real());
    std::sort(got.begin(), got.end());
    std::sort(expect.begin(), expect.end());
    REQUIRE(got.size() == 2);
    CHECK(std::abs(got[0] - expect[0]) < 1e-10);
    CHECK(std::abs(got[1] - expect[1]) < 1e-10);
    auto p0 = poles(4, 0.0);
    CHECK(p0.multiplicity[0] == 10);
}

TEST_CASE("real pole census n = 1..10") {
    std::vector<int> ns;
    for (int n = 1; n <= 10; ++n) ns.push_back(n);
    for (double t : {1.0, 1e-3, 7.5}) {
        for (auto& r : real_pole_census(ns, t)) {
            INFO("n=" << r.n << " t=" << t);
            CHECK(r.total == r.n * (r.n + 1) / 2);
            CHECK(r.real == (r.n + 1) / 2);
            CHECK(r.ok);
        }
    }
    CHECK_THROWS_AS(real_pole_census({2}, 0.0), validation_error);
}

TEST_CASE("roots are simple for t > 0") {
    for (int n = 2; n <= 10; ++n) {
        auto p = poles(n, 1.0);
        double spread = 0.0, dmin = 1e300;
        for (auto a : p.roots)
            for (auto b : p.roots) {
                spread = std::max(spread, std::abs(a - b));
                if (a != b) dmin = std::min(dmin, std::abs(a - b));
            }
        CHECK(dmin > 1e-6 * spread);
        for (int m : p.multiplicity) CHECK(m == 1);
    }
}

TEST_CASE("scaling and symmetry of pole sets") {
    for (int n : {1, 2, 5, 8}) {
        auto r = scaling_symmetry_check(n, 1.0, 8.0);
        INFO("n=" << n);
        CHECK(r.scaling_distance < 1e-8 * 2);
        CHECK(r.conjugation_distance < 1e-8);
        CHECK(r.rotation_distance < 1e-8);
        CHECK(r.ok);
    }
}

TEST_CASE("kdv residual certifies the construction") {
    CHECK(kdv_residual(2, 1.0, 1.0 / 12) < 1e-6);
    CHECK(kdv_residual(1, cplx(0.7, 0.3), 2.0) < 1e-9);
    std::mt19937 gen(42);
    std::uniform_real_distribution<double> d(-1.5, 1.5);
    for (int n : {3, 4, 6}) {
        int done = 0;
        while (done < 20) {
            cplx x(d(gen), d(gen));
            try {
                double r = kdv_residual(n, x, 0.3);
                double scale = std::max(1.0, std::pow(std::abs(tau(n).potential(x, 0.3)), 2));
                CHECK(r / scale < 1e-5);
                ++done;
            } catch (const validation_error&) {
            }
        }
    }
    CHECK_THROWS_AS(kdv_residual(2, -std::cbrt(12.0), 1.0), validation_error);
}

TEST_CASE("pole sum representation of u") {
    auto th = tau(4);
    auto p = poles(4, 2.0);
    cplx x(0.4, 1.3), s = 0.0;
    for (auto r : p.roots) s += 2.0 / ((x - r) * (x - r));
    CHECK(std::abs(s - th.potential(x, 2.0)) < 1e-9 * std::abs(s));
}

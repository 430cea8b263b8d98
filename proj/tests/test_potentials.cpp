#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "singspec/potentials.hpp"

#include <cmath>
#include <numbers>

using namespace singspec;
using std::numbers::pi;

namespace {
const cplx I(0.0, 1.0);
elliptic_lattice square() { return lattice_from_half_periods(pi / 2, I * (pi / 2)); }
} // namespace

TEST_CASE("evaluation of catalog potentials") {
    CHECK(std::abs(potential::rational(1)(1.0) - 2.0) < 1e-15);
    auto L = square();
    CHECK(std::abs(potential::lame(1, L)(L.omega()) - 2.0 * L.e1()) < 1e-10);
    CHECK(std::abs(potential::trig(1, 1.0)(pi / 2) - 2.0) < 1e-14);
    CHECK(std::abs(potential::sinh_soliton(2, 0.5)(1.0) - 6 * 0.25 / std::pow(std::sinh(0.5), 2)) < 1e-13);
    CHECK(std::abs(potential::zero()(3.0)) == 0.0);
    CHECK_THROWS_AS(potential::rational(1)(0.0), pole_error);
    CHECK_THROWS_AS(potential::trig(1, 1.0)(pi), pole_error);
    CHECK_THROWS_AS(potential::rational(0), validation_error);
}

TEST_CASE("periodic potentials repeat") {
    auto t = potential::trig(2, 1.3);
    auto l = potential::lame(2, square(), 0.3 * I);
    auto tab = potential::tabulated(2.0, {cplx(0.1, 0.2), 1.0, cplx(0.1, -0.2)});
    for (double x : {0.3, 0.77, 1.9}) {
        CHECK(std::abs(t(x + *t.period()) - t(x)) < 1e-10 * std::abs(t(x)));
        CHECK(std::abs(l(x + *l.period()) - l(x)) < 1e-10 * std::abs(l(x)));
        CHECK(std::abs(tab(x + 2.0) - tab(x)) < 1e-12);
        CHECK(std::abs(tab(x).imag()) < 1e-14);
        CHECK(std::abs(t(x).imag()) < 1e-12);
    }
    CHECK_THROWS_AS(potential::tabulated(1.0, {1.0, 2.0}), validation_error);
}

TEST_CASE("singular points of the catalog") {
    auto sp = potential::trig(1, 2.0).singular_points(-0.1, 3.2);
    REQUIRE(sp.size() == 3);
    CHECK(std::abs(sp[2].x - pi) < 1e-14);
    auto lp = potential::lame(3, square()).singular_points(-0.5, 7.0);
    REQUIRE(lp.size() == 3);
    CHECK(std::abs(lp[1].x - pi) < 1e-12);
    CHECK(lp[0].order == 3);
    CHECK(potential::lame(1, square(), 0.5 * I).singular_points(-10, 10).empty());
    CHECK(potential::lame(1, square(), square().omega_prime()).singular_points(-10, 10).empty());
}

TEST_CASE("laurent check on the rational and elliptic potentials") {
    auto d = laurent_check(potential::rational(2), 0.0, 2);
    CHECK(std::abs(d.leading - 6.0) < 1e-8);
    for (auto c : d.even) CHECK(std::abs(c) < 1e-10);
    auto L = square();
    auto e = laurent_check(potential::lame(1, L), 0.0, 1);
    CHECK(std::abs(e.leading - 2.0) < 1e-8);
    CHECK(std::abs(e.even[0]) < 1e-10);
    // Next even coefficient of 2p is g2/10.
    CHECK(std::abs(e.remainder_bound - std::abs(L.g2()) / 10) < 1e-8);
    auto e3 = laurent_check(potential::lame(3, L), pi, 3);
    CHECK(e3.even.size() == 3);
    for (double o : e3.odd_abs) CHECK(o < 1e-8);
    auto s = laurent_check(potential::sinh_soliton(2, 1.2), 0.0, 2);
    CHECK(std::abs(s.even[0] - (-2.0 * 1.44)) < 1e-8); // 6k^2 (1/(k y)^2 - 1/3 + ...)
}

TEST_CASE("laurent check rejects odd terms") {
    auto bad = potential::custom("perturbed", [](cplx y) { return 2.0 / (y * y) + y; }, {{0.0, 1}});
    try {
        laurent_check(bad, 0.0, 1);
        FAIL("expected rejection");
    } catch (const meromorphy_error& e) {
        REQUIRE(e.offending.size() == 1);
        CHECK(e.offending[0] == 1);
    }
    auto wrong = potential::custom("wrong", [](cplx y) { return 3.0 / (y * y); }, {{0.0, 1}});
    CHECK_THROWS_AS(laurent_check(wrong, 0.0, 1), meromorphy_error);
    auto simple = potential::custom("simple", [](cplx y) { return 2.0 / (y * y) + 1.0 / y; }, {{0.0, 1}});
    CHECK_THROWS_AS(laurent_check(simple, 0.0, 1), meromorphy_error);
}

TEST_CASE("frobenius basis for 2/x^2") {
    cplx lam(0.7, -0.2);
    auto f = frobenius_basis(potential::rational(1), 0.0, lam);
    CHECK(std::abs(f.a[0] - lam / 2.0) < 1e-10);
    CHECK(f.residual < 1e-8);
    CHECK(f.wronskian_deviation < 1e-6);
    auto z = frobenius_basis(potential::rational(1), 0.0, 0.0);
    CHECK(std::abs(z.psi2[0] - 1.0) < 1e-15);
    for (std::size_t m = 1; m < z.psi2.size(); ++m) CHECK(std::abs(z.psi2[m]) < 1e-14);
}

TEST_CASE("frobenius basis for elliptic and trigonometric potentials") {
    auto L = square();
    for (int n : {1, 2, 3}) {
        auto f = frobenius_basis(potential::lame(n, L), 0.0, -L.e1());
        INFO("n=" << n);
        CHECK(f.order == n);
        CHECK(f.residual < 1e-8);
        CHECK(f.wronskian_deviation < 1e-6);
        CHECK(std::abs(f.obstruction) < 1e-8);
        // Parity: odd-offset coefficients vanish.
        for (std::size_t m = 1; m < f.psi1.size(); m += 2) CHECK(std::abs(f.psi1[m]) < 1e-9);
        for (std::size_t m = 1; m < f.psi2.size(); m += 2) CHECK(std::abs(f.psi2[m]) < 1e-9);
    }
    auto t = frobenius_basis(potential::trig(2, 1.0), pi, 1.5);
    CHECK(t.residual < 1e-8);
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "singspec/elliptic.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace singspec;
using std::numbers::pi;

namespace {
const cplx I(0.0, 1.0);

elliptic_lattice square() { return lattice_from_half_periods(pi / 2, I * (pi / 2)); }
elliptic_lattice rhombic() { return lattice_from_half_periods(1.0, std::polar(1.0, pi / 3)); }
elliptic_lattice rect() { return lattice_from_half_periods(1.0, 1.7 * I); }

std::vector<cplx> random_points(const elliptic_lattice& L, int n, unsigned seed) {
    std::mt19937 gen(seed);
    std::uniform_real_distribution<double> d(-3.0, 3.0);
    std::vector<cplx> out;
    while (static_cast<int>(out.size()) < n) {
        cplx z(d(gen), d(gen));
        if (std::abs(L.reduce(z).z0) > 0.05) out.push_back(z);
    }
    return out;
}
} // namespace

TEST_CASE("invariants against direct lattice sums") {
    // Frozen values from 60 sum w^-4, 140 sum w^-6 over |m|,|n| <= 800 with
    // Richardson extrapolation of the g2 tail.
    CHECK(std::abs(square().g2() - 1.94101718915) < 1e-8);
    CHECK(std::abs(square().g3()) < 1e-12);
    CHECK(std::abs(rect().g2() - 8.16217905540) < 1e-8);
    CHECK(std::abs(rect().g3() - 4.39931439912) < 1e-9);
    CHECK(std::abs(rhombic().g2()) < 1e-10);
    CHECK(std::abs(rhombic().g3() - 12.8253818293662) < 1e-9);
}

TEST_CASE("p at a generic point against a direct sum") {
    // Direct pairwise-regularized sum over |m|,|n| <= 1500.
    CHECK(std::abs(square().p(cplx(0.3, 0.2)) - cplx(2.963426036870852, -7.088948213675734)) < 1e-4);
    CHECK(std::abs(rhombic().p(cplx(0.3, 0.2)) - cplx(2.9531296484617173, -7.095095362682697)) < 1e-4);
}

TEST_CASE("lattice modes and branch values") {
    auto s = square();
    CHECK(s.mode() == lattice_mode::rectangular);
    CHECK(std::abs(s.e1().imag()) < 1e-12);
    CHECK(std::abs(s.e2() + s.e1() + s.e3()) < 1e-10);
    CHECK(std::abs(s.e2()) < 1e-10); // square symmetry
    auto r = rhombic();
    CHECK(r.mode() == lattice_mode::rhombic);
    CHECK(std::abs(r.e1().imag()) < 1e-12);
    CHECK(std::abs(r.e2() - std::conj(r.e3())) < 1e-10);
    CHECK(lattice_from_half_periods(1.0, cplx(0.2, 1.0)).mode() == lattice_mode::general);
    CHECK_THROWS_AS(lattice_from_half_periods(1.0, 2.0), validation_error);
}

TEST_CASE("legendre relation") {
    for (auto L : {square(), rhombic(), rect(), lattice_from_half_periods(cplx(0.8, 0.1), cplx(0.3, 1.1))}) {
        cplx lhs = L.eta() * L.omega_prime() - L.eta_prime() * L.omega();
        CHECK(std::abs(lhs - I * pi / 2.0) < 1e-12);
        CHECK(std::abs(L.e1() + L.e2() + L.e3()) < 1e-10);
        CHECK(std::abs(L.p(L.omega()) - L.e1()) < 1e-10);
    }
}

TEST_CASE("defining differential equation at random points") {
    for (auto L : {square(), rhombic()}) {
        for (cplx z : random_points(L, 100, 7)) {
            cplx p = L.p(z), dp = L.p_prime(z);
            double scale = std::max(1.0, std::pow(std::abs(p), 3));
            CHECK(std::abs(dp * dp - 4.0 * p * p * p + L.g2() * p + L.g3()) / scale < 1e-10);
        }
    }
}

TEST_CASE("parity") {
    auto L = rhombic();
    for (cplx z : random_points(L, 20, 11)) {
        CHECK(std::abs(L.p(-z) - L.p(z)) < 1e-10 * std::max(1.0, std::abs(L.p(z))));
        CHECK(std::abs(L.p_prime(-z) + L.p_prime(z)) < 1e-10 * std::max(1.0, std::abs(L.p_prime(z))));
        CHECK(std::abs(L.zeta(-z) + L.zeta(z)) < 1e-10 * std::max(1.0, std::abs(L.zeta(z))));
        CHECK(std::abs(L.sigma(-z) + L.sigma(z)) < 1e-10 * std::max(1.0, std::abs(L.sigma(z))));
    }
}

TEST_CASE("sigma quasi-periodicity and normalization") {
    for (auto L : {square(), rhombic()}) {
        for (cplx z : random_points(L, 20, 3)) {
            cplx lhs = L.sigma(z + 2.0 * L.omega());
            cplx rhs = -L.sigma(z) * std::exp(2.0 * L.eta() * (z + L.omega()));
            CHECK(std::abs(lhs - rhs) < 1e-10 * std::max(1.0, std::abs(rhs)));
            cplx lhs2 = L.sigma(z + 2.0 * L.omega_prime());
            cplx rhs2 = -L.sigma(z) * std::exp(2.0 * L.eta_prime() * (z + L.omega_prime()));
            CHECK(std::abs(lhs2 - rhs2) < 1e-10 * std::max(1.0, std::abs(rhs2)));
        }
        CHECK(std::abs(L.sigma(1e-3) / 1e-3 - 1.0) < 1e-6);
    }
}

TEST_CASE("zeta and sigma are consistent with p") {
    auto L = rect();
    cplx z(0.37, 0.52);
    auto zeta = [&](cplx w) { return L.zeta(w); };
    auto logsig = [&](cplx w) { return std::log(L.sigma(w)); };
    CHECK(std::abs(-derivative(zeta, z, 1) - L.p(z)) < 1e-8);
    CHECK(std::abs(derivative(logsig, z, 1) - L.zeta(z)) < 1e-8);
    CHECK(std::abs(derivative([&](cplx w) { return L.p(w); }, z, 1) - L.p_prime(z)) < 1e-7);
}

TEST_CASE("second derivative identity") {
    auto L = square();
    cplx z = 0.7;
    cplx d2 = derivative([&](cplx w) { return L.p(w); }, z, 2);
    CHECK(std::abs(d2 - (6.0 * L.p(z) * L.p(z) - L.g2() / 2.0)) < 1e-6);
}

TEST_CASE("homogeneity") {
    auto L = rect();
    auto L2 = lattice_from_half_periods(2.0 * L.omega(), 2.0 * L.omega_prime());
    for (cplx z : random_points(L, 10, 5))
        CHECK(std::abs(L2.p(2.0 * z) - L.p(z) / 4.0) < 1e-9 * std::max(1.0, std::abs(L.p(z))));
}

TEST_CASE("pole errors carry the lattice point") {
    auto L = square();
    cplx lp = 2.0 * L.omega() + 2.0 * L.omega_prime();
    try {
        L.p(lp);
        FAIL("expected pole_error");
    } catch (const pole_error& e) {
        CHECK(std::abs(e.point - lp) < 1e-12);
    }
    CHECK_THROWS_AS(L.zeta(0.0), pole_error);
    CHECK(std::abs(L.sigma(0.0)) < 1e-15);
}

TEST_CASE("degeneration toward the trigonometric limit") {
    // As w' grows, p approaches (pi/2w)^2 (csc^2(pi z/2w) - 1/3).
    const double w = pi / 2;
    cplx z(0.6, 0.1);
    cplx trig = 1.0 / (std::sin(z) * std::sin(z)) - 1.0 / 3.0;
    double prev = 1e300;
    for (double h : {1.5, 3.0, 6.0}) {
        auto L = lattice_from_half_periods(w, cplx(0.0, h));
        double d = std::abs(L.p(z) - trig);
        CHECK(d < prev);
        prev = d;
    }
    CHECK(prev < 1e-8);
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "singspec/finitegap.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace singspec;
using std::numbers::pi;

namespace {
const cplx I(0.0, 1.0);
elliptic_lattice square() { return lattice_from_half_periods(pi / 2, I * (pi / 2)); }
elliptic_lattice rhombic() { return lattice_from_half_periods(1.0, std::polar(1.0, pi / 3)); }
hyperelliptic_curve lame_curve(const elliptic_lattice& L) { return hyperelliptic_curve({-L.e1(), -L.e2(), -L.e3()}); }

// Closed loop starting and ending at angle pi/4 (off the principal cuts).
std::vector<cplx> circle(cplx c, double r, int n) {
    std::vector<cplx> out;
    for (int i = 1; i <= n; ++i) out.push_back(c + r * std::polar(1.0, pi / 4 + 2 * pi * i / n));
    return out;
}
} // namespace

TEST_CASE("curve validation and sheet tracking") {
    CHECK_THROWS_AS(hyperelliptic_curve({0.0, 1.0}), validation_error);
    CHECK_THROWS_AS(hyperelliptic_curve({0.0, 1.0, 1.0}), validation_error);
    hyperelliptic_curve c({-1.0, 0.0, 2.0});
    auto p = make_point(c, cplx(-0.5, 0.5), 1);
    CHECK(std::abs(p.w * p.w - c.R(p.lambda)) < 1e-12);
    // Around one branch point the sheet flips, around two it returns.
    auto start = make_point(c, -1.0 + 0.3 * std::polar(1.0, pi / 4), 1);
    auto one = continue_point(c, start, circle(-1.0, 0.3, 64));
    CHECK(one.sheet == -1);
    auto s2 = make_point(c, -0.5 + 0.8 * std::polar(1.0, pi / 4), 1);
    auto two = continue_point(c, s2, circle(-0.5, 0.8, 64));
    CHECK(two.sheet == 1);
}

TEST_CASE("genus zero degenerates to Fourier") {
    hyperelliptic_curve c({0.0});
    auto ch = quasimomentum(c);
    CHECK(ch.c.empty());
    for (double l : {0.5, 3.0, 40.0}) {
        auto pt = make_point(c, l, 1);
        CHECK(std::abs(ch.density(pt) - 1.0 / (2.0 * std::sqrt(l))) < 1e-14);
        CHECK(std::abs(spectral_weight(c, {}, pt) - 1.0 / (2.0 * std::sqrt(l))) < 1e-14);
    }
    // p = k along the real axis.
    CHECK(std::abs(integrate_dp(ch, make_point(c, 1.0, 1), {9.0}) - 2.0) < 1e-10);
}

TEST_CASE("quasimomentum periods are real for lame curves") {
    for (auto L : {square(), rhombic(), lattice_from_half_periods(1.0, cplx(0.0, 1.7))}) {
        auto ch = quasimomentum(lame_curve(L));
        CHECK(ch.max_imag_period() < 1e-8);
        CHECK(std::abs(ch.c[0] - lame_c0(L)) < 1e-8);
        auto d = asymptotic_defect(ch, {1e4, 1e5, 1e6});
        CHECK(d[1] < 0.2 * d[0]);
        CHECK(d[2] < 0.2 * d[1]);
    }
    // A generic complex genus-2 curve.
    hyperelliptic_curve c({cplx(-2, 0.1), cplx(-1, -0.3), cplx(0.2, 0.4), cplx(1.0, -0.2), cplx(2.5, 0.3)});
    auto ch = quasimomentum(c);
    CHECK(ch.max_imag_period() < 1e-8);
    CHECK(ch.periods.size() == 4);
}

TEST_CASE("chart density agrees with the elliptic parametrization") {
    auto L = rhombic();
    auto ch = quasimomentum(lame_curve(L));
    for (cplx a : {cplx(0.3, 0.2), cplx(0.7, -0.4), cplx(-0.2, 0.5)}) {
        const cplx lam = -L.p(a);
        const cplx lhs_plus = ch.density(make_point(ch.curve, lam, 1)) * (-L.p_prime(a));
        const cplx rhs = I * (L.p(a) + L.eta() / L.omega());
        CHECK(std::min(std::abs(lhs_plus - rhs), std::abs(lhs_plus + rhs)) < 1e-8 * std::abs(rhs));
    }
}

TEST_CASE("lame bloch function") {
    auto L = square();
    auto b = lame_bloch(0.4, L.omega(), L);
    CHECK(std::abs(b.kappa - 1.0) < 1e-12);
    CHECK(std::abs(b.lambda + L.e1()) < 1e-12);
    CHECK_THROWS_AS(lame_bloch(0.4, 2.0 * L.omega(), L), validation_error);

    // Eigen-residual on a 20 x 20 grid and the multiplier identity.
    double worst = 0.0, worst_mult = 0.0;
    for (int i = 0; i < 20; ++i)
        for (int j = 0; j < 20; ++j) {
            const double x = 0.1 + 1.3 * i / 19.0;
            const cplx a(-0.7 + 1.4 * j / 19.0, 0.35 + 0.2 * std::sin(j));
            auto f = [&](cplx z) { return lame_bloch(z, a, L).psi; };
            auto c = taylor_coefficients(f, x, 0.05, 4, 64);
            const auto v = lame_bloch(x, a, L);
            const cplx res = -2.0 * c[2] + 2.0 * L.p(x) * c[0] - v.lambda * c[0];
            worst = std::max(worst, std::abs(res) / (std::abs(c[0]) * (1 + std::abs(v.lambda) + 2 * std::abs(L.p(x)))));
            const cplx shifted = lame_bloch(x + 2.0 * L.omega(), a, L).psi;
            worst_mult = std::max(worst_mult, std::abs(shifted - v.kappa * v.psi) / std::abs(shifted));
            CHECK(std::abs(std::exp(I * v.p * 2.0 * L.omega()) - v.kappa) < 1e-9 * std::abs(v.kappa));
        }
    CHECK(worst < 1e-7);
    CHECK(worst_mult < 1e-8);
}

TEST_CASE("multiplicative identity") {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> u(-1.2, 1.2);
    for (auto L : {square(), rhombic()}) {
        double worst = 0.0;
        int done = 0;
        while (done < 50) {
            const double x = u(rng), y = u(rng);
            if (std::abs(x) < 0.1 || std::abs(y) < 0.1 || std::abs(x + y) < 0.1) continue;
            const cplx a(u(rng), 0.2 + 0.5 * std::abs(u(rng)));
            worst = std::max(worst, multiplicative_check(x, y, a, L));
            ++done;
        }
        CHECK(worst < 1e-8);
        CHECK(multiplicative_check(0.45, 0.45, cplx(0.3, 0.4), L) < 1e-8);
    }
    auto thin = lattice_from_half_periods(1.0, cplx(0.0, 4.0));
    CHECK(multiplicative_check(0.3, 0.5, cplx(0.2, 0.7), thin) < 1e-6);
    CHECK_THROWS_AS(multiplicative_check(0.0, 0.5, cplx(0.2, 0.7), thin), validation_error);
}

TEST_CASE("canonical contour") {
    auto sq = canonical_contour(square(), 120);
    CHECK(sq.components.size() == 2);
    int through = 0;
    for (auto& c : sq.components) {
        through += c.through_infinity;
        for (auto& line : c.polylines)
            for (auto& p : line) CHECK(std::abs(p.lambda.imag()) <= 1e-8 * std::max(1.0, std::abs(p.lambda)));
    }
    CHECK(through == 1);
    CHECK(sq.max_level_defect < 1e-10);

    auto rh = canonical_contour(rhombic(), 120);
    REQUIRE(rh.components.size() == 1);
    CHECK(rh.components[0].max_imag_lambda > 0.01);
    CHECK(contour_csv(rh).rfind("component,polyline,re_alpha", 0) == 0);
    CHECK_THROWS_AS(canonical_contour(square(), 4), validation_error);
}

TEST_CASE("bloch points on the square lattice") {
    auto L = square();
    const double phi0 = 0.3, T = 2 * L.omega().real();
    auto pts = bloch_points(L, phi0, 6);
    // |p - phi0| <= 2 pi N / T: 12 on the infinite band (the label nearest
    // phi0 falls in the gap of p), one on the finite band.
    CHECK(pts.size() == 13);
    for (auto& b : pts) CHECK(std::abs(b.p - phi0) * T <= 2 * pi * 6 + 1e-9);
    int finite = 0;
    const cplx c0 = lame_c0(L);
    for (auto& b : pts) {
        const cplx kappa = lame_bloch(0.3, b.alpha, L).kappa;
        CHECK(std::abs(kappa - std::exp(I * phi0 * T)) < 1e-9);
        CHECK(std::abs(b.lambda.imag()) < 1e-9);
        if (b.finite_band) {
            ++finite;
            CHECK(b.weight.real() < 0);
        } else {
            CHECK(b.weight.real() > 0);
        }
        // <Psi, Psi^sigma> over a period equals T (lambda + c0).
        auto f = [&](cplx z) { return lame_bloch(z, b.alpha, L).psi * lame_bloch(z, -b.alpha, L).psi; };
        const cplx z0(0.0, 0.5 * L.omega_prime().imag());
        const cplx v = integrate_path(f, {path_segment::line(z0, z0 + T)}).value;
        CHECK(std::abs(v - T * (b.lambda + c0)) < 1e-8 * std::abs(T * (b.lambda + c0)));
    }
    CHECK(finite == 1);
    // Asymptotically lambda ~ p^2.
    const auto& last = pts.back();
    CHECK(std::abs(std::sqrt(last.lambda.real()) / last.p - 1.0) < 0.02);
    CHECK_THROWS_AS(bloch_points(rhombic().omega().imag() == 0 ? lattice_from_half_periods(cplx(1, 1), cplx(-1, 1)) : rhombic(), 0.1, 2),
                    validation_error);
}

TEST_CASE("hill discriminant band edges") {
    auto L = square();
    lame_hill h(L, 1);
    auto e = h.band_edges();
    REQUIRE(e.size() == 3);
    CHECK(std::abs(e[0] + L.e1().real()) < 1e-7);
    CHECK(std::abs(e[1] + L.e2().real()) < 1e-7);
    CHECK(std::abs(e[2] + L.e3().real()) < 1e-7);
}

TEST_CASE("measure sign census") {
    auto L = square();
    for (int n = 1; n <= 4; ++n) {
        auto r = measure_sign_census(L, n, 0.37, 10);
        CHECK(r.band_edges.size() == static_cast<std::size_t>(2 * n + 1));
        CHECK(r.negative == (n + 1) / 2);
        CHECK(measure_sign_census(L, n, 0.37, 20).negative == r.negative);
    }
    CHECK_THROWS_AS(measure_sign_census(L, 1, 0.0, 5), validation_error);
}

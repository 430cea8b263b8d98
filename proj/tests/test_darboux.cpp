#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "singspec/darboux.hpp"

#include <cmath>

using namespace singspec;

namespace {
const cplx I(0.0, 1.0);

wave plane(cplx k) {
    const cplx ik = I * k;
    return {[ik](cplx z) {
                cplx e = std::exp(ik * z);
                return std::pair<cplx, cplx>{e, ik * e};
            },
            k * k};
}

std::vector<double> window(double a, double b, int n) {
    std::vector<double> x;
    for (int i = 0; i < n; ++i) x.push_back(a + (b - a) * (i + 0.5) / n);
    return x;
}
} // namespace

TEST_CASE("vacuum step with seed x gives 2/x^2") {
    auto c = vacuum_chain(1);
    REQUIRE(c.steps.size() == 1);
    const auto& u1 = c.final_potential();
    for (double x : {0.3, -1.7, 2.5}) CHECK(std::abs(u1(x) - 2.0 / (x * x)) < 1e-12);
    auto pts = u1.singular_points(-5, 5);
    REQUIRE(pts.size() == 1);
    CHECK(pts[0].order == 1);
    auto c3 = vacuum_chain(3);
    CHECK(c3.order_table.back()[0] == 3);
    CHECK(std::abs(c3.final_potential()(0.7) - 12.0 / 0.49) < 1e-9);
}

TEST_CASE("exponential seed leaves the vacuum unchanged") {
    darboux_step s(potential::zero(), plane(cplx(0.8, 0.3)));
    for (double x : {0.0, 1.0, -3.0}) CHECK(std::abs(s.target()(x)) < 1e-12);
}

TEST_CASE("real zeros of a seed are rejected unless allowed") {
    wave x{[](cplx z) { return std::pair<cplx, cplx>{z - 0.5, 1.0}; }, 0.0};
    try {
        darboux_step s(potential::zero(), x);
        FAIL("expected seed_vanishes_error");
    } catch (const seed_vanishes_error& e) {
        CHECK(std::abs(e.point - 0.5) < 1e-10);
    }
    wave bad{[](cplx z) { return std::pair<cplx, cplx>{std::cosh(z), std::sinh(z)}; }, 0.0};
    CHECK_THROWS_AS(darboux_step(potential::zero(), bad), validation_error);
}

TEST_CASE("dressing from the vacuum") {
    const cplx k(0.9, 0.4);
    auto w1 = dress_from_vacuum(1, k);
    for (double x : {0.4, 1.3, -2.2}) {
        cplx expect = std::exp(I * k * x) * (1.0 - 1.0 / (I * k * x));
        CHECK(std::abs(w1.value(x) - expect) < 1e-12 * std::abs(expect));
    }
    auto w2 = dress_from_vacuum(2, k);
    for (double x : {0.4, 1.3, -2.2}) {
        cplx expect = std::exp(I * k * x) * (1.0 - 3.0 / (I * k * x) - 3.0 / (k * k * x * x));
        CHECK(std::abs(w2.value(x) - expect) < 1e-11 * std::abs(expect));
    }
    for (int n = 0; n <= 4; ++n)
        CHECK(eigen_residual(potential::rational(n == 0 ? 1 : n), dress_from_vacuum(n == 0 ? 1 : n, k),
                             window(0.3, 4.0, 12)) < 1e-8);
    CHECK(std::abs(dress_from_vacuum(0, k).value(1.0) - std::exp(I * k)) < 1e-15);
    CHECK_THROWS_AS(dress_from_vacuum(2, 0.0), validation_error);
}

TEST_CASE("dressing the seed level is rejected") {
    auto c = vacuum_chain(1);
    CHECK_THROWS_AS(dress_eigenfunction(c.steps[0], wave{[](cplx) { return std::pair<cplx, cplx>{1.0, 0.0}; }, 0.0}),
                    validation_error);
}

TEST_CASE("smoothing 2/x^2 gives a shifted regular potential") {
    const cplx k1(1.0, 1.0);
    auto c = rational_smoothing_chain(1, {k1});
    REQUIRE(c.steps.size() == 1);
    const auto& u = c.final_potential();
    const cplx shift(0.5, 0.5);
    for (double x : {-3.0, -0.7, -0.01, 0.0, 0.005, 0.3, 1.9}) {
        cplx expect = 2.0 / ((x + shift) * (x + shift));
        INFO("x=" << x);
        CHECK(std::abs(u(x) - expect) < 1e-9);
    }
    CHECK(c.order_table.size() == 2);
    CHECK(c.order_table[0][0] == 1);
    CHECK(c.order_table[1][0] == 0);
    CHECK(u.singular_points(-10, 10).empty());
}

TEST_CASE("order reduction table for n <= 3") {
    std::vector<cplx> ks{cplx(0.7, 0.9), cplx(-1.1, 0.6), cplx(0.4, 1.3)};
    for (int n = 1; n <= 3; ++n) {
        auto c = rational_smoothing_chain(n, std::vector<cplx>(ks.begin(), ks.begin() + n));
        REQUIRE(c.order_table.size() == static_cast<std::size_t>(n + 1));
        for (int s = 0; s <= n; ++s) CHECK(c.order_table[s][0] == n - s);
        CHECK(regularity_scan(c.final_potential(), -6, 6).regular);
        // Dressed plane waves are eigenfunctions of the final potential.
        auto w = c.dress(dress_from_vacuum(n, cplx(1.3, 0.0)));
        CHECK(eigen_residual(c.final_potential(), w, window(-3, 3, 10)) < 1e-8);
    }
}

TEST_CASE("smoothing needs one level per order") {
    CHECK_THROWS_AS(rational_smoothing_chain(2, {cplx(0.7, 0.9)}), validation_error);
    CHECK_THROWS_AS(rational_smoothing_chain(1, {cplx(0.7, 0.0)}), validation_error);
}

TEST_CASE("factorization and intertwining") {
    auto c = rational_smoothing_chain(2, {cplx(0.7, 0.9), cplx(-1.1, 0.6)});
    std::vector<complex_fn> fs{[](cplx z) { return std::exp(-z * z); }, [](cplx z) { return std::cos(z); },
                               [](cplx z) { return z * z * z + 1.0; }};
    std::vector<cplx> mus{0.3, cplx(1.0, -0.4), cplx(-2.0, 0.7)};
    for (auto& s : c.steps) {
        auto r = step_residuals(s, fs, window(0.5, 2.5, 6), mus);
        CHECK(r.factorization < 1e-9);
        CHECK(r.intertwining < 1e-9);
    }
}

TEST_CASE("operator M equals the product of shifted operators") {
    auto v = vacuum_chain(1);
    CHECK(m_operator_residual(v, [](cplx z) { return std::exp(-z * z); }, window(0.5, 2.0, 5)) < 1e-9);
    auto c = rational_smoothing_chain(2, {cplx(0.7, 0.9), cplx(-1.1, 0.6)});
    CHECK(m_operator_residual(c, [](cplx z) { return std::cos(z); }, window(1.0, 2.0, 5)) < 1e-8);
    auto c3 = rational_smoothing_chain(3, {cplx(0.7, 0.9), cplx(-1.1, 0.6), cplx(0.4, 1.3)});
    CHECK(m_operator_residual(c3, [](cplx z) { return std::exp(-z * z / 3.0); }, window(0.5, 2.5, 7)) < 1e-6);
    CHECK_THROWS_AS(m_operator_residual(c3, [](cplx z) { return std::cos(z); }, {0.0}), validation_error);
    // On an eigenfunction, prod (L_n - l_k) acts as the scalar prod (mu - l_k).
    const cplx k(1.2, 0.0);
    auto w = c.dress(dress_from_vacuum(2, k));
    cplx expected = 1.0;
    for (auto l : c.levels()) expected *= k * k - l;
    auto t = taylor_series::of([w](cplx z) { return w.value(z); }, 1.5, 0.05, 20);
    auto un = taylor_series::of(c.final_potential().evaluator(), 1.5, 0.05, 20);
    auto h = t;
    for (auto l : c.levels()) h = h.derivative().derivative() * -1.0 + un * h - h * l;
    CHECK(std::abs(h.value() - expected * t.value()) < 1e-8 * std::abs(expected * t.value()));
}

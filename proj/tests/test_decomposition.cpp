#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "singspec/darboux.hpp"
#include "singspec/decomposition.hpp"
#include "singspec/finitegap.hpp"

#include <cmath>
#include <numbers>

using namespace singspec;
using std::numbers::pi;

namespace {
const cplx I(0.0, 1.0);

elliptic_lattice square() { return elliptic_lattice(1.0, I); }

complex_fn bump(double c, double w) {
    return [c, w](cplx z) -> cplx {
        const cplx s = (z - c) / w;
        if (std::abs(s.real()) >= 1.0) return 0.0;
        return std::exp(-1.0 / (1.0 - s * s));
    };
}

bool decreasing(const std::vector<double>& v) {
    for (std::size_t i = 1; i < v.size(); ++i)
        if (!(v[i] < v[i - 1])) return false;
    return true;
}
} // namespace

TEST_CASE("quadrature rules") {
    auto r = path_rule({path_segment::line(0.0, 2.0)}, 0.5);
    cplx s = 0.0;
    for (auto& q : r) s += q.w * std::pow(q.z, 7);
    CHECK(std::abs(s - 32.0) < 1e-12);
    // Upper detour: integral of 1/x^2 over [-1, 1] is -2 (no residue).
    auto d = line_rule(-1.0, 1.0, {0.0}, 0.1, 0.2);
    s = 0.0;
    for (auto& q : d) s += q.w / (q.z * q.z);
    CHECK(std::abs(s + 2.0) < 1e-12);
    CHECK_THROWS_AS(path_rule({path_segment::line(0.0, 1.0)}, 0.1, 7), validation_error);
    CHECK(std::abs(fitted_decay({1, 2, 4, 8}, {1, 1.0 / 8, 1.0 / 64, 1.0 / 512}) - 3.0) < 1e-12);
}

TEST_CASE("vacuum degenerations") {
    auto vac = vacuum_line();
    auto g = [](cplx z) { return std::exp(-z * z); };
    auto y = line_rule(-9.0, 9.0, {}, 0.25);
    CHECK(std::abs(forward_continuous(*vac, g, y, 0.0) - std::sqrt(pi) / (2 * pi)) < 1e-12);
    // Sheet swap: fhat(k) is the classical coefficient with e^{-iky}
    // (a shifted Gaussian tells k from -k).
    auto gs = [](cplx z) { return std::exp(-(z - 0.5) * (z - 0.5)); };
    for (double k : {1.7, -0.6}) {
        const cplx ref = std::sqrt(pi) * std::exp(-k * k / 4) * std::exp(-0.5 * I * k) / (2 * pi);
        CHECK(std::abs(forward_continuous(*vac, gs, y, k) - ref) < 1e-12);
    }
    // Vacuum kernels are classical.
    std::vector<double> grid{-0.8, -0.4, 0.0, 0.4, 0.8};
    for (auto& k : continuous_kernel_grid(*vac, 30.0, grid, grid, 1.0)) CHECK(std::abs(k.correction) < 1e-10);

    const double T = 2.0, phi0 = 0.37;
    auto vp = vacuum_periodic(T, phi0);
    auto f = [phi0](cplx z) { return std::exp(I * phi0 * z) * std::exp(std::cos(pi * z)); };
    auto modes = vp->modes(6);
    auto c = transform_discrete(*vp, f, modes);
    for (std::size_t i = 0; i < modes.size(); ++i)
        CHECK(std::abs(c[i] - std::cyl_bessel_i(std::abs(modes[i].j), 1.0)) < 1e-12);
    for (auto& k : discrete_kernel_grid(*vp, 7, grid, grid)) CHECK(std::abs(k.correction) < 1e-10);
    CHECK(std::abs(discrete_kernel(*vp, 7, 0.3, 0.3 + T).correction) < 1e-10);
    auto tab = reconstruct_discrete(*vp, f, {0.1, 0.7, 1.9}, {4, 8, 16}, f);
    CHECK(decreasing(tab.max_error));
    CHECK(tab.max_error.back() < 1e-12);
}

TEST_CASE("rational eigenfunctions agree with the dressing chain") {
    for (int n = 1; n <= 3; ++n) {
        auto fam = rational_line(n);
        for (cplx k : {cplx(1.3, 0.2), cplx(-0.7, 0.0)}) {
            auto w = dress_from_vacuum(n, k);
            for (double x : {0.7, 1.5, -2.2}) CHECK(std::abs(w.value(x) - fam->psi(x, k)) < 1e-12);
            CHECK(std::abs(fam->psi_star(0.9, k) - fam->psi(0.9, -k)) == 0.0);
        }
    }
    CHECK_THROWS_AS(rational_line(-1), validation_error);
    CHECK_THROWS_AS(rational_line(1, 0.0, 2.0)->nodes(10.0, 1.0), validation_error);
}

TEST_CASE("smooth complex potential: continuous reconstruction converges") {
    auto fam = rational_line(1, -cplx(1, 1) / 2.0);
    auto f = bump(0.0, 1.0);
    auto y = line_rule(-1.0, 1.0, {}, 0.02);
    std::vector<double> xs{-0.7, -0.3, 0.1, 0.5, 0.8};
    auto tab = reconstruct_continuous(*fam, f, y, xs, {50.0}, 1.0, f);
    REQUIRE(tab.cutoffs == std::vector<double>{50.0, 100.0, 200.0});
    CHECK(decreasing(tab.max_error));
    CHECK(tab.max_error[2] <= 0.01);
    CHECK(tab.max_error[2] < 1e-6); // measured 2.1e-8
    CHECK_THROWS_AS(reconstruct_continuous(*fam, f, y, xs, {50.5}, 1.0), validation_error);

    // Off support the partial sums decay faster than K^-4.
    std::vector<double> cut;
    for (int i = 1; i <= 48; ++i) cut.push_back(10.0 * i);
    auto off = reconstruct_continuous(*fam, f, y, {1.5}, cut, 1.0);
    std::vector<double> Ks, env;
    for (double K0 : {40.0, 80.0, 160.0}) {
        double e = 0.0;
        for (std::size_t c = 0; c < cut.size(); ++c)
            if (cut[c] >= K0 && cut[c] <= 1.5 * K0) e = std::max(e, std::abs(off.values[c][0]));
        Ks.push_back(K0);
        env.push_back(e);
    }
    CHECK(fitted_decay(Ks, env) >= 4.0);

    // Kernel correction is Cauchy-decreasing on a compact grid.
    std::vector<double> grid{-0.8, -0.4, 0.0, 0.4, 0.8};
    std::vector<std::vector<kernel_split>> G;
    for (double K : {25.0, 50.0, 100.0, 200.0, 400.0}) G.push_back(continuous_kernel_grid(*fam, K, grid, grid, 1.0));
    CHECK(decreasing(cauchy_differences(G)));
    for (auto& k : G[0]) CHECK(std::abs(k.total - k.classical - k.correction) == 0.0);
}

TEST_CASE("singular rational potential: transform, residues and the Darboux route") {
    auto fam = rational_line(1);
    // Compact support away from the pole: fhat decays faster than lambda^-4.
    auto f = bump(1.5, 0.5);
    auto y = line_rule(1.0, 2.0, {}, 0.005);
    std::vector<double> ls, env;
    for (double k0 : {400.0, 400.0 * std::sqrt(2.0), 800.0, 800.0 * std::sqrt(2.0)}) {
        ls.push_back(k0 * k0);
        env.push_back(envelope([&](double k) { return std::abs(forward_continuous(*fam, f, y, k)); }, k0));
    }
    CHECK(fitted_decay(ls, env) >= 4.0);

    // f = e^{-x^2}/x lies in F_X of 2/x^2; reconstruction away from x = 0.
    auto g = [](cplx z) { return std::exp(-z * z) / z; };
    auto yr = line_rule(-7.0, 7.0, {0.0}, 0.05, 0.1);
    CHECK_NOTHROW(check_residues(*fam, g, -1.0, 1.0, {0.5, 2.0, cplx(0.3, 0.2)}));
    std::vector<double> xs{-2.0, -1.0, -0.4, 0.35, 0.8, 1.6};
    auto tab = reconstruct_continuous(*fam, g, yr, xs, {25.0, 50.0, 100.0}, 1.0, g);
    CHECK(tab.max_error[2] <= 0.02);
    // An even term at the pole leaves a residue.
    auto bad = [](cplx z) { return std::exp(-z * z) * (1.0 / z + 1.0); };
    CHECK_THROWS_AS(check_residues(*fam, bad, -1.0, 1.0, {0.5}), form_domain_error);

    for (cplx k : {cplx(0.7), cplx(2.5), cplx(-1.3)})
        CHECK(std::abs(forward_continuous(*fam, g, yr, k) - darboux_route_transform(1, 0.0, g, yr, k)) < 1e-10);
    auto fam2 = rational_line(2);
    auto g2 = [](cplx z) { return std::exp(-z * z) / (z * z); };
    for (cplx k : {cplx(0.7), cplx(2.5)})
        CHECK(std::abs(forward_continuous(*fam2, g2, yr, k) - darboux_route_transform(2, 0.0, g2, yr, k)) < 1e-8);
    CHECK_THROWS_AS(darboux_route_transform(1, 0.0, g, yr, 0.0), validation_error);
}

TEST_CASE("soliton dressing adds one bound state") {
    auto fam = sinh_line(1.0);
    auto pot = potential::sinh_soliton(1, 1.0);
    const cplx k = 1.7;
    wave w{[&](cplx x) {
               return std::make_pair(fam->psi(x, k), derivative([&](cplx z) { return fam->psi(z, k); }, x, 1));
           },
           k * k};
    CHECK(eigen_residual(pot, w, {0.5, 1.2, -0.8}) < 1e-8);
    REQUIRE(fam->levels().size() == 1);
    CHECK(std::abs(fam->levels()[0].lambda + 1.0) < 1e-15);

    auto f = [](cplx z) { return z * std::exp(-z * z); };
    auto y = line_rule(-7.0, 7.0, {0.0}, 0.05, 0.1);
    auto d = level_coefficients(*fam, f, y);
    CHECK(std::abs(d[0] - (-0.8227468782642538)) < 1e-10); // mpmath oracle
    std::vector<double> xs{-1.5, -0.6, 0.4, 0.9, 2.0};
    auto tab = reconstruct_continuous(*fam, f, y, xs, {25.0, 50.0, 100.0}, 1.0, f);
    CHECK(tab.max_error[2] < 1e-8);
    // Without the level term the expansion misses the bound-state component.
    auto samples = transform_continuous(*fam, f, y, 100.0, 1.0);
    CHECK(std::abs(synthesize_continuous(*fam, samples, 0.4, 100.0) - f(0.4)) > 0.1);
}

TEST_CASE("genus-one continuous transform") {
    const auto L = square();
    auto fam = lame_line(L, 0.5 * L.omega_prime() + 0.2);
    auto nodes = fam->nodes(8.0, 0.5);
    for (auto& n : nodes) CHECK(std::abs(lame_quasimomentum(n.param, L) - n.p) < 1e-10);
    std::vector<double> grid{-0.8, -0.4, 0.0, 0.4, 0.8};
    std::vector<std::vector<kernel_split>> G;
    for (double K : {12.5, 25.0, 50.0, 100.0}) G.push_back(continuous_kernel_grid(*fam, K, grid, grid, 0.5));
    CHECK(decreasing(cauchy_differences(G)));

    auto f = bump(0.0, 1.0);
    auto y = line_rule(-1.0, 1.0, {}, 0.1);
    auto tab = reconstruct_continuous(*fam, f, y, {-0.5, 0.2, 0.6}, {10.0, 20.0, 40.0}, 0.5, f);
    CHECK(decreasing(tab.max_error));
    CHECK(tab.max_error[2] < 1e-3);
    CHECK_THROWS_AS(lame_line(elliptic_lattice(1.0, std::polar(1.0, pi / 3)), 0.0), validation_error);
}

TEST_CASE("discrete Bloch series for Lame potentials") {
    const auto L = square();
    const double phi0 = 0.37, T = 2.0;
    auto f = [phi0](cplx z) { return std::exp(I * phi0 * z) * std::exp(std::cos(pi * z)); };
    auto fam = lame_periodic(L, L.omega_prime(), phi0);
    auto modes = fam->modes(4);
    REQUIRE(modes.size() == 9);
    for (auto& m : modes) CHECK(std::abs(m.p - phi0 - 2 * pi * m.j / T) < 1e-9);
    std::vector<double> xs{0.13, 0.55, 0.9, 1.3, 1.77};
    auto tab = reconstruct_discrete(*fam, f, xs, {16, 32, 64}, f);
    CHECK(tab.max_error[2] <= 0.01);
    CHECK(tab.max_error[2] < 1e-10);

    // Period-shift invariance.
    for (auto& m : {modes[2], modes[4], modes[7]})
        CHECK(std::abs(forward_discrete(*fam, f, m, 0.0) - forward_discrete(*fam, f, m, 0.3)) < 1e-9);

    // Off support the partial sums decay faster than N^-3.
    auto pb = [phi0](cplx z) -> cplx {
        const cplx s = z - 2.0 * std::floor(z.real() / 2.0);
        const cplx u = (s - 1.0) / 0.4;
        if (std::abs(u.real()) >= 1.0) return 0.0;
        return std::exp(I * phi0 * z) * std::exp(-1.0 / (1.0 - u * u));
    };
    std::vector<int> cut{8, 16, 32, 64};
    auto off = reconstruct_discrete(*fam, pb, {0.2}, cut);
    std::vector<double> Ns, vals;
    for (std::size_t c = 0; c < cut.size(); ++c) {
        Ns.push_back(cut[c]);
        vals.push_back(std::abs(off.values[c][0]));
    }
    CHECK(fitted_decay(Ns, vals) >= 3.0);

    // The kernel correction converges (not monotonically at every step).
    std::vector<double> grid{-0.8, -0.4, 0.0, 0.4, 0.8};
    std::vector<std::vector<kernel_split>> G;
    for (int N : {4, 8, 16, 32, 64, 128}) G.push_back(discrete_kernel_grid(*fam, N, grid, grid));
    auto d = cauchy_differences(G);
    CHECK(d.back() < 0.1 * d.front());

    CHECK_THROWS_AS(lame_periodic(L, L.omega_prime(), 0.0), validation_error);
    CHECK_THROWS_AS(lame_periodic(L, L.omega_prime(), pi / T), validation_error);
}

TEST_CASE("singular Lame potential: indefinite expansion") {
    const auto L = square();
    const double phi0 = 0.37, T = 2.0;
    singularity_spec sp;
    sp.points = {0.0};
    sp.orders = {1};
    sp.period = T;
    sp.phi0 = phi0;
    auto fam = lame_periodic(L, 0.0, phi0);

    // Self-reconstruction and the norm formula T (lambda + c0).
    auto modes = fam->modes(6);
    auto e = mode_element(*fam, modes[4], sp);
    auto self = singular_reconstruct(*fam, e, 6, {0.5}, {6});
    for (std::size_t q = 0; q < self.modes.size(); ++q) {
        CHECK(std::abs(self.coefficients[q] - (q == 4 ? 1.0 : 0.0)) < 1e-8);
        CHECK(std::abs(self.norms[q] * self.modes[q].weight - T) < 1e-8 * T);
    }
    int negative = 0;
    for (auto nq : self.norms) negative += nq.real() < 0;
    CHECK(negative == 1);

    // Periodic Xi member.
    auto xi = xi_family(sp, 0.5, 2, xi_mode::periodic);
    REQUIRE(xi.size() == 1);
    std::vector<double> xr;
    for (int i = 0; i < 20; ++i) xr.push_back(0.3 + 1.4 * i / 19.0);
    auto rep = singular_reconstruct(*fam, xi[0], 32, xr, {8, 16, 32});
    CHECK(rep.sup_error[2] <= 0.02);
    CHECK(decreasing(rep.sup_error));
    CHECK(rep.principal_error < 1e-6);
    CHECK(rep.decay_order >= 4.0);

    // Parseval under the indefinite product on a finite span.
    auto m = fam->modes(3);
    std::vector<fx_element> es;
    for (auto& mm : m) es.push_back(mode_element(*fam, mm, sp));
    auto fsum = es[1].scaled(0.7).plus(es[3].scaled(cplx(0.2, -1.0))).plus(es[5].scaled(-0.4));
    auto gsum = es[1].scaled(cplx(0.1, 0.3)).plus(es[3].scaled(1.5)).plus(es[6].scaled(2.0));
    auto cf = singular_reconstruct(*fam, fsum, 3, {0.5}, {3});
    auto cg = singular_reconstruct(*fam, gsum, 3, {0.5}, {3});
    cplx s = 0.0;
    for (std::size_t q = 0; q < cf.modes.size(); ++q) s += cf.coefficients[q] * std::conj(cg.coefficients[q]) * cf.norms[q];
    const cplx direct = inner_product(fsum, gsum);
    CHECK(std::abs(s - direct) < 1e-6 * std::max(1.0, std::abs(direct)));

    CHECK_THROWS_AS(singular_reconstruct(*fam, xi[0], 4, xr, {}, 1e6), validation_error);
    auto other = lame_periodic(L, L.omega_prime(), phi0);
    CHECK_THROWS_AS(singular_reconstruct(*other, xi[0], 4, xr), validation_error);
}

TEST_CASE("asymptotic coefficient phi1") {
    const auto L = square();
    auto u = potential::lame(1, L, L.omega_prime());
    auto ph = phi1(u);
    CHECK(std::abs(ph(0.3) - ph(2.3)) < 1e-9);
    // Mean of 2 p over a period is -2 eta / omega.
    CHECK(std::abs(ph.mean_u() + 2.0 * L.eta() / L.omega()) < 1e-12);
    std::vector<double> xs{0.1, 0.5, 0.9, 1.3, 1.7};
    for (double p : {30.0, 60.0, -30.0, -60.0}) CHECK(phi1_defect(L, L.omega_prime(), ph, p, xs) <= 2e-2);
    // The defect is O(1/p).
    const cplx sh = 0.5 * L.omega_prime() + 0.2;
    auto pc = phi1(potential::lame(1, L, sh));
    const double d30 = phi1_defect(L, sh, pc, 30.0, xs), d60 = phi1_defect(L, sh, pc, 60.0, xs);
    CHECK(d60 / d30 == doctest::Approx(0.5).epsilon(0.1));

    auto z = phi1(potential::tabulated(2.0, {0.0, 0.0, 0.0}));
    CHECK(std::abs(z(0.4)) == 0.0);
    CHECK_THROWS_AS(phi1(potential::lame(1, L, 0.0)), validation_error);
    CHECK_THROWS_AS(phi1(potential::rational(1)), validation_error);
    CHECK_THROWS_AS(phi1_defect(L, sh, pc, 0.5, xs), validation_error);
}

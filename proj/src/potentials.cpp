#include "singspec/potentials.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace singspec {

namespace {
constexpr double pi = std::numbers::pi;

void require_order(int n, const char* who) {
    if (n < 1) throw validation_error(std::string(who) + ": need n >= 1");
}

void near_pole(cplx z, cplx pole, const char* who) {
    if (std::abs(z - pole) < 1e-12) throw pole_error(std::string(who) + ": argument at a pole", pole);
}
} // namespace

potential potential::zero() { return potential(); }

potential potential::rational(int n) {
    require_order(n, "rational");
    potential u;
    u.kind_ = potential_kind::rational;
    u.name_ = "rational";
    u.n_ = n;
    return u;
}

potential potential::trig(int n, double k) {
    require_order(n, "trig");
    if (!(k > 0)) throw validation_error("trig: need k > 0");
    potential u;
    u.kind_ = potential_kind::trig;
    u.name_ = "trig";
    u.n_ = n;
    u.k_ = k;
    u.period_ = pi / k;
    return u;
}

potential potential::sinh_soliton(int n, double k) {
    require_order(n, "sinh_soliton");
    if (!(k > 0)) throw validation_error("sinh_soliton: need k > 0");
    potential u;
    u.kind_ = potential_kind::sinh_soliton;
    u.name_ = "sinh";
    u.n_ = n;
    u.k_ = k;
    return u;
}

potential potential::lame(int n, const elliptic_lattice& lattice, cplx shift) {
    require_order(n, "lame");
    potential u;
    u.kind_ = potential_kind::lame;
    u.name_ = "lame";
    u.n_ = n;
    u.shift_ = shift;
    u.lattice_ = std::make_shared<const elliptic_lattice>(lattice);
    if (std::abs(lattice.omega().imag()) < 1e-14 * std::abs(lattice.omega()))
        u.period_ = 2.0 * lattice.omega().real();
    return u;
}

potential potential::tabulated(double period, std::vector<cplx> coefficients) {
    if (!(period > 0)) throw validation_error("tabulated: need period > 0");
    if (coefficients.size() % 2 == 0)
        throw validation_error("tabulated: need 2M+1 coefficients for m = -M..M");
    potential u;
    u.kind_ = potential_kind::tabulated;
    u.name_ = "tabulated";
    u.period_ = period;
    u.coeffs_ = std::move(coefficients);
    return u;
}

potential potential::custom(std::string name, complex_fn eval, std::vector<singular_point> points,
                            std::optional<double> period, potential_kind kind) {
    potential u;
    u.kind_ = kind;
    u.name_ = std::move(name);
    u.custom_ = std::move(eval);
    u.custom_points_ = std::move(points);
    u.period_ = period;
    for (auto& p : u.custom_points_) u.n_ = std::max(u.n_, p.order);
    return u;
}

cplx potential::operator()(cplx z) const {
    const double nn = static_cast<double>(n_) * (n_ + 1);
    switch (kind_) {
    case potential_kind::zero: return 0.0;
    case potential_kind::rational:
        near_pole(z, 0.0, "rational");
        return nn / (z * z);
    case potential_kind::trig: {
        double m = std::round(z.real() * k_ / pi);
        near_pole(z, m * pi / k_, "trig");
        cplx s = std::sin(k_ * z);
        return nn * k_ * k_ / (s * s);
    }
    case potential_kind::sinh_soliton: {
        near_pole(z, 0.0, "sinh");
        cplx s = std::sinh(k_ * z);
        return nn * k_ * k_ / (s * s);
    }
    case potential_kind::lame: {
        auto r = lattice_->reduce(z + shift_);
        near_pole(r.z0, 0.0, "lame");
        return nn * lattice_->p(z + shift_);
    }
    case potential_kind::tabulated: {
        const int M = static_cast<int>(coeffs_.size() / 2);
        cplx s = 0.0;
        for (int m = -M; m <= M; ++m)
            s += coeffs_[m + M] * std::exp(cplx(0.0, 2 * pi * m / *period_) * z);
        return s;
    }
    default: return custom_(z);
    }
}

complex_fn potential::evaluator() const {
    auto self = std::make_shared<potential>(*this);
    return [self](cplx z) { return (*self)(z); };
}

std::vector<singular_point> potential::singular_points(double a, double b) const {
    std::vector<singular_point> out;
    switch (kind_) {
    case potential_kind::rational:
    case potential_kind::sinh_soliton:
        if (a <= 0.0 && 0.0 <= b) out.push_back({0.0, n_});
        break;
    case potential_kind::trig: {
        long m0 = static_cast<long>(std::ceil(a * k_ / pi - 1e-12));
        for (long m = m0; m * pi / k_ <= b + 1e-12; ++m) out.push_back({m * pi / k_, n_});
        break;
    }
    case potential_kind::lame: {
        const cplx w1 = lattice_->omega(), w3 = lattice_->omega_prime();
        const double area = std::abs((2.0 * w1 * std::conj(2.0 * w3)).imag());
        const double height = area / std::max(std::abs(2.0 * w1), std::abs(2.0 * w3));
        const long N =
            static_cast<long>(std::ceil((std::max(std::abs(a), std::abs(b)) + std::abs(shift_)) /
                                        height)) + 2;
        for (long m = -N; m <= N; ++m)
            for (long mp = -N; mp <= N; ++mp) {
                cplx p = 2.0 * static_cast<double>(m) * w1 + 2.0 * static_cast<double>(mp) * w3 - shift_;
                if (std::abs(p.imag()) < 1e-10 && p.real() >= a - 1e-12 && p.real() <= b + 1e-12)
                    out.push_back({p.real(), n_});
            }
        break;
    }
    case potential_kind::dressed:
    case potential_kind::custom:
        for (auto& p : custom_points_) {
            if (!period_) {
                if (p.x >= a && p.x <= b) out.push_back(p);
                continue;
            }
            const double T = *period_;
            long m0 = static_cast<long>(std::floor((a - p.x) / T)) - 1;
            for (long m = m0; p.x + m * T <= b + 1e-12; ++m) {
                double x = p.x + m * T;
                if (x >= a - 1e-12) out.push_back({x, p.order});
            }
        }
        break;
    default: break;
    }
    std::sort(out.begin(), out.end(), [](auto& l, auto& r) { return l.x < r.x; });
    return out;
}

namespace {

// Radius for contour extraction around xj: start at half the distance to
// neighbouring real singular points (at most 0.5) and halve until the low
// order coefficients agree on two circles, which rules out hidden complex
// poles inside the circle.
double extraction_radius(const potential& u, double xj, int nj) {
    double r = 0.5;
    for (auto& p : u.singular_points(xj - 1.0, xj + 1.0))
        if (std::abs(p.x - xj) > 1e-9) r = std::min(r, 0.5 * std::abs(p.x - xj));
    const double nn = static_cast<double>(nj) * (nj + 1);
    auto v = [&](cplx y) { return u(xj + y) - nn / (y * y); };
    while (r > 0.02) {
        auto c1 = laurent_coefficients(v, 0.0, r, -2, 2, 256);
        auto c2 = laurent_coefficients(v, 0.0, 0.5 * r, -2, 2, 256);
        bool same = true;
        for (std::size_t i = 0; i < c1.size(); ++i)
            if (std::abs(c1[i] - c2[i]) > 1e-9 * std::max(1.0, std::abs(c1[i]))) same = false;
        if (same) return r;
        r *= 0.5;
    }
    return 0.02;
}

} // namespace

laurent_data laurent_check(const potential& u, double xj, int nj, double tol) {
    require_order(nj, "laurent_check");
    const double r = extraction_radius(u, xj, nj);
    const double nn = static_cast<double>(nj) * (nj + 1);
    auto raw = [&](cplx y) { return u(xj + y); };
    auto v = [&](cplx y) { return u(xj + y) - nn / (y * y); };
    laurent_data d;
    d.point = xj;
    d.order = nj;
    d.radius = r;
    d.leading = laurent_coefficients(raw, 0.0, r, -2, -2, 256)[0];
    double S = 0.0;
    for (int j = 0; j < 64; ++j) S = std::max(S, std::abs(v(r * std::polar(1.0, 2 * pi * j / 64))));
    d.noise_floor = 1e-13 * std::max(S, 1.0);
    auto c = laurent_coefficients(v, 0.0, r, -6, 2 * nj, 256); // index e + 6
    auto coef = [&](int e) { return c[e + 6]; };
    auto floor_at = [&](int e) { return d.noise_floor / std::pow(r, e); };

    std::vector<int> bad;
    if (std::abs(d.leading - nn) > tol * std::max(1.0, nn)) bad.push_back(-2);
    for (int e = -6; e <= -3; ++e)
        if (std::abs(coef(e)) > tol + floor_at(e)) bad.push_back(e);
    for (int e = -1; e < 2 * nj; e += 2) {
        d.odd_abs.push_back(std::abs(coef(e)));
        if (std::abs(coef(e)) > tol + floor_at(e)) bad.push_back(e);
    }
    for (int k = 0; k < nj; ++k) d.even.push_back(coef(2 * k));
    d.remainder_bound = std::abs(coef(2 * nj));
    if (!bad.empty()) {
        std::string msg = "laurent_check: local form violated at exponents";
        for (int e : bad) msg += " " + std::to_string(e);
        throw meromorphy_error(msg, bad);
    }
    return d;
}

std::pair<cplx, cplx> frobenius_result::eval_psi1(cplx y) const {
    cplx v = 0.0, dv = 0.0;
    for (std::size_t m = 0; m < psi1.size(); ++m) {
        double e = static_cast<double>(m) - order;
        v += psi1[m] * std::pow(y, e);
        dv += psi1[m] * e * std::pow(y, e - 1);
    }
    return {v, dv};
}

std::pair<cplx, cplx> frobenius_result::eval_psi2(cplx y) const {
    cplx v = 0.0, dv = 0.0;
    for (std::size_t m = 0; m < psi2.size(); ++m) {
        double e = static_cast<double>(m) + order + 1;
        v += psi2[m] * std::pow(y, e);
        dv += psi2[m] * e * std::pow(y, e - 1);
    }
    return {v, dv};
}

frobenius_result frobenius_basis(const potential& u, double xj, cplx lambda, int depth, double tol) {
    // Find the order from the leading coefficient, then validate.
    const double r0 = extraction_radius(u, xj, 1);
    cplx lead = laurent_coefficients([&](cplx y) { return u(xj + y); }, 0.0, r0, -2, -2, 256)[0];
    const int n = static_cast<int>(std::lround((-1.0 + std::sqrt(1.0 + 4.0 * lead.real())) / 2.0));
    laurent_data ld = laurent_check(u, xj, n, tol);
    if (depth < 0) depth = 2 * n + 16;
    if (depth < 2 * n + 2) throw validation_error("frobenius_basis: depth must reach 2n+2");

    const double r = ld.radius;
    const double nn = static_cast<double>(n) * (n + 1);
    auto v = [&](cplx y) { return u(xj + y) - nn / (y * y); };
    auto c = laurent_coefficients(v, 0.0, r, 0, depth, 256);
    for (int i = 0; i <= depth; ++i)
        if (std::abs(c[i]) < 10 * ld.noise_floor / std::pow(r, i)) c[i] = 0.0;

    frobenius_result res;
    res.order = n;
    res.lambda = lambda;
    auto solve = [&](double rho, std::vector<cplx>& b, cplx* obstruction) {
        b.assign(depth + 1, 0.0);
        b[0] = 1.0;
        for (int m = 1; m <= depth; ++m) {
            cplx rhs = 0.0;
            if (m >= 2) {
                rhs += lambda * b[m - 2];
                for (int i = 0; i <= m - 2; ++i) rhs -= c[i] * b[m - 2 - i];
            }
            double f = nn - (m + rho) * (m + rho - 1);
            if (std::abs(f) < 1e-12) {
                if (obstruction) *obstruction = rhs;
                b[m] = 0.0;
            } else {
                b[m] = rhs / f;
            }
        }
    };
    res.obstruction = 0.0;
    solve(-static_cast<double>(n), res.psi1, &res.obstruction);
    solve(static_cast<double>(n) + 1.0, res.psi2, nullptr);
    double scale = 0.0;
    for (int m = 0; m < 2 * n + 1; ++m) scale += std::abs(res.psi1[m]) * std::pow(0.05, m);
    if (std::abs(res.obstruction) > tol * std::max(1.0, scale))
        throw meromorphy_error("frobenius_basis: logarithmic obstruction is nonzero", {n + 1});
    for (int k = 1; k <= n; ++k) res.a.push_back(res.psi1[2 * k]);

    // Residual of the truncated series and Wronskian on a small circle.
    const double rho = std::min(0.05, 0.5 * r);
    res.residual = 0.0;
    res.wronskian_deviation = 0.0;
    for (int j = 0; j < 16; ++j) {
        cplx y = rho * std::polar(1.0, 2 * pi * (j + 0.5) / 16);
        for (auto* series : {&res.psi1, &res.psi2}) {
            const double shift = series == &res.psi1 ? -static_cast<double>(n) : n + 1.0;
            cplx p = 0.0, p2 = 0.0;
            for (std::size_t m = 0; m < series->size(); ++m) {
                double e = m + shift;
                p += (*series)[m] * std::pow(y, e);
                p2 += (*series)[m] * e * (e - 1) * std::pow(y, e - 2);
            }
            cplx uy = u(xj + y);
            cplx resid = -p2 + (uy - lambda) * p;
            double mag = std::abs(p2) + std::abs(uy * p) + std::abs(lambda * p);
            res.residual = std::max(res.residual, std::abs(resid) / mag);
        }
        auto [f1, d1] = res.eval_psi1(y);
        auto [f2, d2] = res.eval_psi2(y);
        res.wronskian_deviation =
            std::max(res.wronskian_deviation, std::abs(f1 * d2 - d1 * f2 - (2.0 * n + 1.0)));
    }
    return res;
}

} // namespace singspec

#include "singspec/kdv_rational.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace singspec {

namespace {

using rpoly = std::vector<rational>; // ascending coefficients

void trim(rpoly& p) {
    while (p.size() > 1 && p.back() == 0) p.pop_back();
}

rpoly add(const rpoly& a, const rpoly& b, const rational& sb = 1) {
    rpoly r(std::max(a.size(), b.size()), rational(0));
    for (std::size_t i = 0; i < a.size(); ++i) r[i] += a[i];
    for (std::size_t i = 0; i < b.size(); ++i) r[i] += sb * b[i];
    trim(r);
    return r;
}

rpoly mul(const rpoly& a, const rpoly& b) {
    rpoly r(a.size() + b.size() - 1, rational(0));
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i] != 0)
            for (std::size_t j = 0; j < b.size(); ++j) r[i + j] += a[i] * b[j];
    trim(r);
    return r;
}

rpoly deriv(const rpoly& a) {
    if (a.size() <= 1) return {rational(0)};
    rpoly r(a.size() - 1);
    for (std::size_t i = 1; i < a.size(); ++i) r[i - 1] = a[i] * static_cast<int>(i);
    return r;
}

rpoly scale(const rpoly& a, const rational& s) {
    rpoly r = a;
    for (auto& c : r) c *= s;
    trim(r);
    return r;
}

bool is_zero(const rpoly& a) {
    return std::all_of(a.begin(), a.end(), [](const rational& c) { return c == 0; });
}

// Bilinear KdV form (D_x D_t + D_x^4) theta.theta at t = 1, where theta is
// weighted homogeneous of weight d so that theta_t = (d theta - x theta_x)/3.
rpoly bilinear(const rpoly& th, int d) {
    rpoly x = {rational(0), rational(1)};
    rpoly t1 = deriv(th), t2 = deriv(t1), t3 = deriv(t2), t4 = deriv(t3);
    rpoly tt = scale(add(scale(th, d), mul(x, t1), -1), rational(1, 3));
    rpoly txt = deriv(tt);
    rpoly r = add(mul(th, txt), mul(t1, tt), -1);
    r = add(r, mul(th, t4));
    r = add(r, mul(t1, t3), -4);
    r = add(r, mul(t2, t2), 3);
    return scale(r, 2);
}

// Solve theta' A - theta A' = R for theta of degree D (monic), with the
// coefficient of x^deg(A) set to `free_value`.
rpoly solve_recursion(const rpoly& A, const rpoly& R, int D, const rational& free_value) {
    const int a = static_cast<int>(A.size()) - 1;
    const rational lead = A.back();
    rpoly th(D + 1, rational(0));
    auto apply = [&](const rpoly& p) { return add(mul(deriv(p), A), mul(p, deriv(A)), -1); };
    for (int j = D; j >= 0; --j) {
        if (j == a) {
            th[j] = free_value;
            continue;
        }
        rpoly cur = apply(th);
        const int row = j + a - 1;
        rational rv = row < static_cast<int>(R.size()) && row >= 0 ? R[row] : rational(0);
        rational cv = row < static_cast<int>(cur.size()) && row >= 0 ? cur[row] : rational(0);
        th[j] = (rv - cv) / (lead * (j - a));
    }
    if (!is_zero(add(apply(th), R, -1)))
        throw convergence_error("tau: bilinear recursion is inconsistent");
    return th;
}

std::vector<rational> to_weights(const rpoly& th, int d) {
    std::vector<rational> b;
    for (int m = 0; 3 * m <= d; ++m) {
        int j = d - 3 * m;
        b.push_back(j < static_cast<int>(th.size()) ? th[j] : rational(0));
    }
    for (int j = 0; j < static_cast<int>(th.size()); ++j)
        if ((d - j) % 3 != 0 && th[j] != 0)
            throw convergence_error("tau: homogeneity violated");
    return b;
}

} // namespace

tau_polynomial::tau_polynomial(int n, std::vector<rational> b) : n_(n), b_(std::move(b)) {}

polynomial tau_polynomial::at(double t) const {
    const int d = degree();
    std::vector<cplx> c(d + 1, 0.0);
    for (std::size_t m = 0; m < b_.size(); ++m)
        c[d - 3 * m] = b_[m].convert_to<double>() * std::pow(t, static_cast<double>(m));
    return polynomial(c);
}

cplx tau_polynomial::operator()(cplx x, double t) const { return at(t)(x); }

cplx tau_polynomial::potential(cplx x, double t) const {
    polynomial p = at(t), p1 = p.derivative(), p2 = p1.derivative();
    cplx th = p(x), d1 = p1(x), d2 = p2(x);
    return -2.0 * (th * d2 - d1 * d1) / (th * th);
}

std::string tau_polynomial::to_string() const {
    std::ostringstream os;
    const int d = degree();
    bool first = true;
    for (std::size_t m = 0; m < b_.size(); ++m) {
        if (b_[m] == 0) continue;
        if (!first) os << (b_[m] > 0 ? " + " : " - ");
        else if (b_[m] < 0) os << "-";
        rational a = abs(b_[m]);
        const int j = d - 3 * static_cast<int>(m);
        if (a != 1 || (j == 0 && m == 0)) os << a;
        if (m > 0) os << "t" << (m > 1 ? "^" + std::to_string(m) : "");
        if (j > 0) os << "x" << (j > 1 ? "^" + std::to_string(j) : "");
        first = false;
    }
    return os.str();
}

tau_polynomial tau(int n) {
    if (n < 1 || n > 12) throw validation_error("tau: need 1 <= n <= 12");
    rpoly prev = {rational(1)};              // theta_0
    rpoly cur = {rational(0), rational(1)};  // theta_1
    for (int k = 1; k < n; ++k) {
        const int D = (k + 1) * (k + 2) / 2;
        const int a = static_cast<int>(prev.size()) - 1;
        rpoly R = scale(mul(cur, cur), 2 * k + 1);
        rpoly base = solve_recursion(prev, R, D, rational(0));
        if ((D - a) % 3 == 0) {
            // Free constant of weight D - a: c t^((D-a)/3) theta_{k-1}.
            rpoly bp = bilinear(add(base, prev), D), bm = bilinear(add(base, prev, -1), D);
            rpoly lin = scale(add(bp, bm, -1), rational(1, 2));
            rpoly b0 = bilinear(base, D);
            rational c = 0;
            bool found = false;
            for (std::size_t i = 0; i < lin.size(); ++i)
                if (lin[i] != 0) {
                    rational r0 = i < b0.size() ? b0[i] : rational(0);
                    c = -r0 / lin[i];
                    found = true;
                    break;
                }
            if (found) base = add(base, prev, c);
        }
        if (!is_zero(bilinear(base, D)))
            throw convergence_error("tau: bilinear KdV residual does not vanish");
        prev = cur;
        cur = base;
    }
    return tau_polynomial(n, to_weights(cur, n * (n + 1) / 2));
}

double hausdorff_distance(const std::vector<cplx>& a, const std::vector<cplx>& b) {
    auto one = [](const std::vector<cplx>& p, const std::vector<cplx>& q) {
        double h = 0.0;
        for (auto x : p) {
            double m = 1e300;
            for (auto y : q) m = std::min(m, std::abs(x - y));
            h = std::max(h, m);
        }
        return h;
    };
    return std::max(one(a, b), one(b, a));
}

pole_set poles(int n, double t) {
    tau_polynomial th = tau(n);
    pole_set out;
    out.t = t;
    const int d = th.degree();
    if (t == 0.0 || n == 1) {
        out.roots = {0.0};
        out.is_real = {true};
        out.multiplicity = {d};
        out.total = d;
        out.real = 1;
        return out;
    }
    root_result rr = poly_roots(th.at(t));
    out.max_residual = rr.max_residual;
    for (auto& c : rr.clusters) {
        cplx x = c.value;
        out.roots.push_back(x);
        bool real = std::abs(x.imag()) <= 1e-8 * std::max(1.0, std::abs(x));
        if (real) out.roots.back() = x.real();
        out.is_real.push_back(real);
        out.multiplicity.push_back(c.multiplicity);
        out.total += c.multiplicity;
        if (real) ++out.real;
    }
    return out;
}

std::vector<census_row> real_pole_census(const std::vector<int>& n_range, double t) {
    if (!(t > 0)) throw validation_error("real_pole_census: need t > 0");
    std::vector<census_row> rows;
    for (int n : n_range) {
        pole_set p = poles(n, t);
        census_row r{n, p.total, p.real, n * (n + 1) / 2, (n + 1) / 2, false};
        r.ok = r.total == r.expected_total && r.real == r.expected_real &&
               static_cast<int>(p.roots.size()) == r.total;
        rows.push_back(r);
    }
    return rows;
}

scaling_report scaling_symmetry_check(int n, double t1, double t2, double tol) {
    if (!(t1 > 0 && t2 > 0)) throw validation_error("scaling_symmetry_check: need t > 0");
    pole_set p1 = poles(n, t1), p2 = poles(n, t2);
    const double r = std::cbrt(t2 / t1);
    std::vector<cplx> scaled, a, ac, ar;
    for (auto x : p1.roots) scaled.push_back(x * r);
    const cplx xi = std::polar(1.0, 2 * std::numbers::pi / 3);
    for (auto x : p1.roots) {
        cplx q = x / std::cbrt(t1);
        a.push_back(q);
        ac.push_back(std::conj(q));
        ar.push_back(q * xi);
    }
    scaling_report rep;
    rep.scaling_distance = hausdorff_distance(scaled, p2.roots);
    rep.conjugation_distance = hausdorff_distance(a, ac);
    rep.rotation_distance = hausdorff_distance(a, ar);
    rep.ok = rep.scaling_distance <= tol * std::max(1.0, std::cbrt(t2)) &&
             rep.conjugation_distance <= tol && rep.rotation_distance <= tol;
    return rep;
}

double kdv_residual(int n, cplx x, double t, double h) {
    tau_polynomial th = tau(n);
    double dist = std::abs(x);
    if (n > 1 && t != 0.0) {
        dist = 1e300;
        for (auto r : poly_roots(th.at(t)).roots) dist = std::min(dist, std::abs(r - x));
    }
    if (dist < 10 * h) throw validation_error("kdv_residual: sample point too close to a pole");
    // x-derivatives from the Cauchy integral on a circle at half the pole
    // distance; the t-derivative by a central difference with step h.
    auto u_x = [&](cplx z) { return th.potential(z, t); };
    auto c = taylor_coefficients(u_x, x, 0.5 * dist, 3, 64);
    cplx u = c[0], ux = c[1], uxxx = 6.0 * c[3];
    auto u_t = [&](cplx s) { return th.potential(x, s.real()); };
    cplx ut = derivative(u_t, t, 1, h);
    return std::abs(ut - 6.0 * u * ux + uxxx);
}

} // namespace singspec

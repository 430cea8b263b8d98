#include "singspec/fx_space.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace singspec {

namespace {
constexpr double pi = std::numbers::pi;
constexpr double inf = std::numeric_limits<double>::infinity();

// Singular points of the spec lying in [a, b].
std::vector<double> points_in(const singularity_spec& s, double a, double b) {
    std::vector<double> out;
    if (!s.periodic()) {
        for (double x : s.points)
            if (x >= a && x <= b) out.push_back(x);
    } else {
        const double T = *s.period;
        for (double x : s.points) {
            long m0 = static_cast<long>(std::floor((a - x) / T)) - 1;
            for (long m = m0; x + m * T <= b; ++m)
                if (x + m * T >= a) out.push_back(x + m * T);
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

double min_gap(const singularity_spec& s) {
    double g = inf;
    for (std::size_t i = 1; i < s.points.size(); ++i) g = std::min(g, s.points[i] - s.points[i - 1]);
    if (s.periodic() && !s.points.empty())
        g = std::min(g, s.points.front() + *s.period - s.points.back());
    return g;
}

int order_at(const singularity_spec& s, double x) {
    for (std::size_t i = 0; i < s.points.size(); ++i) {
        double d = x - s.points[i];
        if (s.periodic()) d -= *s.period * std::round(d / *s.period);
        if (std::abs(d) < 1e-9) return s.orders[i];
    }
    return 0;
}

bool same_spec(const singularity_spec& a, const singularity_spec& b) {
    if (a.periodic() != b.periodic()) return false;
    if (a.periodic() && (std::abs(*a.period - *b.period) > 1e-14 ||
                         std::abs(a.kappa0() - b.kappa0()) > 1e-12))
        return false;
    return true;
}

double detour_radius_for(const fx_element& f, const fx_element& g, double requested) {
    // 0.1 caps the automatic choice only; an explicit request may use the
    // full admissible radius (large arcs avoid cancellation for high orders).
    const double limit = std::min({0.5 * min_gap(f.spec()), 0.5 * min_gap(g.spec()), f.analytic_radius(),
                                   g.analytic_radius()});
    double r = std::min(0.1, limit);
    if (requested > 0) {
        if (requested > limit * (1 + 1e-12))
            throw validation_error("inner_product: detour radius exceeds the admissible radius");
        r = requested;
    }
    return r;
}

std::vector<double> merged_points(const fx_element& f, const fx_element& g, double a, double b) {
    auto p = points_in(f.spec(), a, b);
    auto q = points_in(g.spec(), a, b);
    p.insert(p.end(), q.begin(), q.end());
    std::sort(p.begin(), p.end());
    p.erase(std::unique(p.begin(), p.end(), [](double x, double y) { return std::abs(x - y) < 1e-12; }),
            p.end());
    return p;
}

// Left end of an integration period placed mid-gap between singular points.
double period_start(const singularity_spec& s) {
    const double T = *s.period;
    if (s.points.empty()) return 0.0;
    double best = s.points.front() - 0.5 * (s.points.front() + T - s.points.back());
    double gap = s.points.front() + T - s.points.back();
    for (std::size_t i = 1; i < s.points.size(); ++i)
        if (s.points[i] - s.points[i - 1] > gap) {
            gap = s.points[i] - s.points[i - 1];
            best = 0.5 * (s.points[i] + s.points[i - 1]);
        }
    return best;
}

} // namespace

cplx singularity_spec::kappa0() const {
    if (!period) return 1.0;
    return std::polar(1.0, *period * phi0);
}

void singularity_spec::validate() const {
    if (points.size() != orders.size())
        throw validation_error("singularity_spec: points and orders differ in length");
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (orders[i] < 1) throw validation_error("singularity_spec: orders must be >= 1");
        if (i > 0 && !(points[i] > points[i - 1]))
            throw validation_error("singularity_spec: points must be strictly increasing");
    }
    if (period) {
        if (!(*period > 0)) throw validation_error("singularity_spec: period must be positive");
        for (double x : points)
            if (x < 0 || x >= *period)
                throw validation_error("singularity_spec: periodic points must lie in [0, T)");
    }
}

cplx principal_part::eval(cplx y) const {
    cplx s = 0.0;
    for (int k = 0; k <= order; ++k) s += a[k] * std::pow(y, order - 2 * k);
    return s;
}

principal_part extract_principal_part(const complex_fn& f, double xj, int nj, double r) {
    auto c = laurent_coefficients([&](cplx y) { return f(xj + y); }, 0.0, r, -nj, nj, 256);
    principal_part p{xj, nj, {}};
    for (int k = 0; k <= nj; ++k) p.a.push_back(c[(nj - 2 * k) + nj]);
    return p;
}

fx_element::fx_element(singularity_spec spec, complex_fn f, std::optional<decay_info> decay,
                       double analytic_radius, std::vector<principal_part> parts)
    : spec_(std::move(spec)), f_(std::move(f)), decay_(std::move(decay)),
      analytic_radius_(analytic_radius), parts_(std::move(parts)) {
    spec_.validate();
    if (!(analytic_radius_ > 0)) throw validation_error("fx_element: analytic radius must be positive");
    if (parts_.empty()) {
        const double r = std::min({0.8 * analytic_radius_, 0.4 * min_gap(spec_), 0.1});
        for (std::size_t i = 0; i < spec_.points.size(); ++i)
            parts_.push_back(extract_principal_part(f_, spec_.points[i], spec_.orders[i], r));
    }
}

fx_element fx_element::scaled(cplx c) const {
    auto f = f_;
    auto parts = parts_;
    for (auto& p : parts)
        for (auto& a : p.a) a *= c;
    auto d = decay_;
    if (d)
        for (auto& t : d->tail) t *= c;
    return fx_element(spec_, [f, c](cplx z) { return c * f(z); }, d, analytic_radius_, parts);
}

fx_element fx_element::plus(const fx_element& o) const {
    if (!same_spec(spec_, o.spec_) || spec_.points != o.spec_.points)
        throw validation_error("fx_element::plus: incompatible singularity specs");
    auto f = f_, g = o.f_;
    auto parts = parts_;
    for (std::size_t i = 0; i < parts.size(); ++i)
        for (std::size_t k = 0; k < parts[i].a.size(); ++k) parts[i].a[k] += o.parts_[i].a[k];
    std::optional<decay_info> d;
    if (decay_ && o.decay_) {
        d = decay_info{std::max(decay_->radius, o.decay_->radius), decay_->tail};
        if (d->tail.size() < o.decay_->tail.size()) d->tail.resize(o.decay_->tail.size(), 0.0);
        for (std::size_t i = 0; i < o.decay_->tail.size(); ++i) d->tail[i] += o.decay_->tail[i];
    }
    return fx_element(spec_, [f, g](cplx z) { return f(z) + g(z); }, d,
                      std::min(analytic_radius_, o.analytic_radius_), parts);
}

fx_element star(const fx_element& f) {
    auto ev = f.evaluator();
    auto parts = f.principal_parts();
    for (auto& p : parts)
        for (auto& a : p.a) a = std::conj(a);
    auto d = f.decay();
    if (d)
        for (auto& t : d->tail) t = std::conj(t);
    singularity_spec s = f.spec();
    // The conjugate of a kappa0-periodic function is conj(kappa0)-periodic.
    if (s.period) s.phi0 = -s.phi0;
    return fx_element(s, [ev](cplx z) { return std::conj(ev(std::conj(z))); }, d, f.analytic_radius(),
                      parts);
}

std::vector<residue_entry> residue_census(const fx_element& f, const fx_element& g) {
    const double r = detour_radius_for(f, g, 0.0);
    std::vector<double> pts;
    if (f.spec().periodic())
        pts = merged_points(f, g, 0.0, *f.spec().period - 1e-12);
    else
        pts = merged_points(f, g, -inf, inf);
    auto fe = f.evaluator(), ge = g.evaluator();
    auto h = [&](cplx z) { return fe(z) * std::conj(ge(std::conj(z))); };
    std::vector<residue_entry> out;
    for (double x : pts) {
        cplx res = laurent_coefficients(h, x, r, -1, -1, 256)[0];
        double scale = 0.0;
        for (int j = 0; j < 32; ++j) scale = std::max(scale, std::abs(h(x + r * std::polar(1.0, 2 * pi * j / 32))));
        out.push_back({x, res, scale * r});
    }
    return out;
}

cplx inner_product(const fx_element& f, const fx_element& g, const inner_product_options& opt) {
    if (!same_spec(f.spec(), g.spec()))
        throw validation_error("inner_product: incompatible modes (period or multiplier differ)");
    for (auto& e : residue_census(f, g))
        if (std::abs(e.residue) > opt.residue_tol * std::max(1.0, e.scale))
            throw form_domain_error("inner_product: product has a residue at x = " +
                                        std::to_string(e.point) + "; not in the quadratic-form domain",
                                    e.point);
    const double r = detour_radius_for(f, g, opt.detour_radius);
    auto fe = f.evaluator(), ge = g.evaluator();
    complex_fn h = [fe, ge](cplx z) { return fe(z) * std::conj(ge(std::conj(z))); };
    quad_options q;
    q.rel_tol = opt.rel_tol;
    q.abs_tol = 1e-14;

    auto integrate = [&](double a, double b) {
        auto pts = merged_points(f, g, a - 1.0, b + 1.0);
        auto path = detour_path(a, b, pts, r, opt.upper);
        // Tolerance relative to the integral of |h|: the signed value may
        // cancel to zero (neutral pairs).
        quad_options coarse;
        coarse.rel_tol = 1e-3;
        coarse.abs_tol = 1e-300;
        const double mag = std::abs(integrate_path([&h](cplx z) { return cplx(std::abs(h(z))); }, path, coarse).value);
        quad_options qq = q;
        qq.abs_tol = std::max(q.abs_tol, opt.rel_tol * mag);
        return integrate_path(h, path, qq).value;
    };

    if (f.spec().periodic()) {
        const double a = period_start(f.spec());
        return integrate(a, a + *f.spec().period);
    }

    double xmax = 0.0;
    for (double x : f.spec().points) xmax = std::max(xmax, std::abs(x));
    for (double x : g.spec().points) xmax = std::max(xmax, std::abs(x));
    const auto& fd = f.decay();
    const auto& gd = g.decay();
    const bool f_negligible = fd && fd->tail.empty();
    const bool g_negligible = gd && gd->tail.empty();
    if (f_negligible || g_negligible || (fd && gd)) {
        double R = xmax + 2 * r;
        if (fd) R = std::max(R, fd->radius);
        if (gd) R = std::max(R, gd->radius);
        if (f_negligible && !g_negligible) R = std::max(xmax + 2 * r, fd->radius);
        if (g_negligible && !f_negligible) R = std::max(xmax + 2 * r, gd->radius);
        if (f_negligible && g_negligible) R = std::max(xmax + 2 * r, std::min(fd->radius, gd->radius));
        cplx total = integrate(-R, R);
        if (!f_negligible && !g_negligible) {
            // Exact tails: integral over |x| > R of sum b_p conj(c_q) x^{-(p+q)}.
            for (std::size_t p = 0; p < fd->tail.size(); ++p)
                for (std::size_t qq = 0; qq < gd->tail.size(); ++qq) {
                    cplx c = fd->tail[p] * std::conj(gd->tail[qq]);
                    if (c == cplx(0.0)) continue;
                    const int m = static_cast<int>(p + qq);
                    if (m <= 1)
                        throw validation_error("inner_product: product is not integrable at infinity");
                    if (m % 2 == 0) total += c * 2.0 * std::pow(R, 1 - m) / (m - 1.0);
                }
        }
        return total;
    }
    // No decay metadata: grow the window until the added pieces are small.
    double R = std::max(xmax + 1.0, 4.0);
    cplx total = integrate(-R, R);
    for (int it = 0; it < 20; ++it) {
        cplx add = integrate(-2 * R, -R) + integrate(R, 2 * R);
        total += add;
        R *= 2;
        if (std::abs(add) < 1e-10) return total;
    }
    throw convergence_error("inner_product: tail did not converge");
}

std::vector<parity_entry> parity_membership(const fx_element& f) {
    std::vector<parity_entry> out;
    const auto& s = f.spec();
    const double r = std::min({0.5 * f.analytic_radius(), 0.25 * min_gap(s), 0.1});
    for (std::size_t i = 0; i < s.points.size(); ++i) {
        const double x = s.points[i];
        const int n = s.orders[i];
        const double sgn = (n % 2 == 0) ? -1.0 : 1.0; // (-1)^{n+1}
        auto h = [&](double rad) {
            double m = 0.0;
            for (int j = 0; j < 8; ++j) {
                cplx y = rad * std::polar(1.0, pi * (j + 0.25) / 8);
                m = std::max(m, std::abs(f(x + y) + sgn * f(x - y)));
            }
            return m;
        };
        const double scale = std::abs(f(x + r)) + std::abs(f(x - r));
        double h1 = h(r), h2 = h(r / 2), h4 = h(r / 4);
        parity_entry e{x, n, false, inf};
        if (h1 <= 1e-12 * scale && h2 <= 1e-12 * std::pow(2.0, n) * scale &&
            h4 <= 1e-12 * std::pow(4.0, n) * scale) {
            e.member = true;
        } else {
            const double o1 = std::log2(h1 / h2), o2 = std::log2(h2 / h4);
            e.fitted_order = std::min(o1, o2);
            e.member = e.fitted_order >= n + 1 - 0.25;
        }
        out.push_back(e);
    }
    return out;
}

int negative_count_bound(const singularity_spec& spec) {
    int l = 0;
    for (int n : spec.orders) l += (n + 1) / 2;
    return l;
}

namespace {

// Ascending Laurent polynomial in w = e^{iy} with offset: coefficient of w^m
// stored at index m + offset.
struct laurent_poly {
    std::vector<cplx> c{1.0};
    int offset = 0;
    void mul_sin(double sk) {
        // sin(y - s_k) = (e^{-i s_k} w - e^{i s_k} w^{-1}) / (2i)
        const cplx up = std::polar(1.0, -sk) / cplx(0.0, 2.0);
        const cplx dn = -std::polar(1.0, sk) / cplx(0.0, 2.0);
        std::vector<cplx> r(c.size() + 2, 0.0);
        for (std::size_t i = 0; i < c.size(); ++i) {
            r[i + 2] += c[i] * up;
            r[i] += c[i] * dn;
        }
        c = std::move(r);
        offset += 1;
    }
};

} // namespace

std::vector<fx_element> xi_family(const singularity_spec& spec, double eps, int big_n, xi_mode mode) {
    spec.validate();
    int nmax = 0;
    for (int n : spec.orders) nmax = std::max(nmax, n);
    if (big_n <= nmax) throw validation_error("xi_family: need N > max n_j");
    if (!(eps > 0)) throw validation_error("xi_family: need eps > 0");
    const int N2 = 2 * big_n;
    std::vector<fx_element> out;

    if (mode == xi_mode::decaying) {
        if (spec.periodic()) throw validation_error("xi_family: decaying mode needs a non-periodic spec");
        if (!(eps < 0.5 * min_gap(spec))) throw validation_error("xi_family: eps too large for the gaps");
        double xmax = 0.0;
        for (double x : spec.points) xmax = std::max(xmax, std::abs(x));
        const double radius = xmax + eps * std::pow(40.0, 1.0 / N2) + eps;
        for (std::size_t j = 0; j < spec.points.size(); ++j) {
            const double xj = spec.points[j];
            const int nj = spec.orders[j];
            std::vector<double> d;
            for (std::size_t k = 0; k < spec.points.size(); ++k)
                if (k != j) d.push_back(std::pow(spec.points[k] - xj, N2));
            auto zeta = [d, big_n, N2](cplx y) {
                cplx yn = std::pow(y, N2), prod = 1.0;
                for (double dk : d) {
                    cplx q = (yn - dk) * (yn - dk);
                    prod *= std::pow(q / (q + 1.0), big_n);
                }
                return prod;
            };
            const cplx z0 = zeta(0.0);
            for (int l = 0; l <= (nj - 1) / 2; ++l) {
                const int p = nj - 2 * l;
                auto f = [=](cplx z) {
                    cplx y = z - xj;
                    return std::pow(eps, -0.5) * std::pow(eps / y, p) * std::exp(-std::pow(y / eps, N2)) *
                           zeta(y);
                };
                std::vector<principal_part> parts;
                for (std::size_t k = 0; k < spec.points.size(); ++k) {
                    principal_part pp{spec.points[k], spec.orders[k],
                                      std::vector<cplx>(spec.orders[k] + 1, 0.0)};
                    if (k == j) pp.a[nj - l] = std::pow(eps, p - 0.5) * z0;
                    parts.push_back(pp);
                }
                out.emplace_back(spec, f, decay_info{radius, {}}, 0.5 * eps, parts);
            }
        }
        return out;
    }

    if (!spec.periodic()) throw validation_error("xi_family: periodic mode needs a period");
    const double T = *spec.period;
    const double sc = pi / T; // s = sc * x
    if (!(eps < 0.5 * min_gap(spec) * sc)) throw validation_error("xi_family: eps too large for the gaps");
    laurent_poly lp;
    std::vector<double> s_pts;
    for (double x : spec.points) s_pts.push_back(sc * x);
    for (double sk : s_pts)
        for (int i = 0; i < N2; ++i) lp.mul_sin(sk);
    const cplx d0 = lp.c[lp.offset];
    auto alpha = [lp, d0](cplx s) {
        cplx v = d0 * s;
        for (std::size_t i = 0; i < lp.c.size(); ++i) {
            const int m = static_cast<int>(i) - lp.offset;
            if (m == 0 || lp.c[i] == cplx(0.0)) continue;
            v += lp.c[i] * (std::exp(cplx(0.0, m) * s) - 1.0) / cplx(0.0, m);
        }
        return v / (d0 * pi);
    };
    const cplx kappa = spec.kappa0();
    for (std::size_t j = 0; j < spec.points.size(); ++j) {
        const double sj = s_pts[j];
        const int nj = spec.orders[j];
        const double cj = std::arg(((nj % 2 == 0) ? 1.0 : -1.0) * kappa);
        std::vector<double> d;
        for (std::size_t k = 0; k < s_pts.size(); ++k)
            if (k != j) d.push_back(std::pow(std::sin(s_pts[k] - sj), N2));
        for (int l = 0; l <= (nj - 1) / 2; ++l) {
            const int p = nj - 2 * l;
            auto f = [=](cplx z) {
                cplx s = sc * z;
                cplx sn = std::sin(s - sj);
                cplx yn = std::pow(sn, N2), prod = 1.0;
                for (double dk : d) {
                    cplx q = (yn - dk) * (yn - dk);
                    prod *= std::pow(q / (q + 1.0), big_n);
                }
                return std::pow(eps, -0.5) * std::pow(eps / sn, p) * std::exp(-std::pow(sn / eps, N2)) * prod *
                       std::exp(cplx(0.0, cj) * alpha(s));
            };
            out.emplace_back(spec, f, std::nullopt, 0.5 * eps / sc);
        }
    }
    return out;
}

fx_element regular_bump(const singularity_spec& spec, double center, double width, cplx amplitude) {
    if (!(width > 0)) throw validation_error("regular_bump: width must be positive");
    auto bump = [center, width, amplitude](cplx z) -> cplx {
        cplx s = (z - center) / width;
        if (std::abs(s.real()) >= 1.0) return 0.0;
        return amplitude * std::exp(-1.0 / (1.0 - s * s));
    };
    auto clear = [&](double c) {
        for (double x : points_in(spec, c - width - 0.2, c + width + 0.2))
            if (std::abs(x - c) < width + 0.1)
                throw validation_error("regular_bump: support too close to a singular point");
    };
    clear(center);
    if (!spec.periodic())
        return fx_element(spec, bump, decay_info{std::abs(center) + width, {}}, inf);
    const double T = *spec.period;
    if (2 * width >= T) throw validation_error("regular_bump: support longer than the period");
    const cplx kappa = spec.kappa0();
    auto f = [bump, T, kappa](cplx z) {
        long m0 = static_cast<long>(std::floor(z.real() / T)) - 3;
        cplx s = 0.0;
        for (long m = m0; m <= m0 + 6; ++m) s += std::pow(kappa, static_cast<double>(m)) * bump(z - static_cast<double>(m) * T);
        return s;
    };
    return fx_element(spec, f, std::nullopt, inf);
}

fx_element gaussian_element(const singularity_spec& spec, cplx amplitude, double center, int power) {
    if (spec.periodic()) throw validation_error("gaussian_element: decaying mode only");
    for (double x : spec.points)
        (void)x;
    auto f = [=](cplx z) {
        cplx y = z - center;
        return amplitude * std::pow(y, power) * std::exp(-y * y);
    };
    return fx_element(spec, f, decay_info{std::abs(center) + 9.0 + power, {}}, inf);
}

fx_element pure_power(const singularity_spec& spec, double xj, int p) {
    if (spec.periodic()) throw validation_error("pure_power: decaying mode only");
    if (p < 1) throw validation_error("pure_power: need p >= 1");
    const int n = order_at(spec, xj);
    if (n < p || (n - p) % 2 != 0)
        throw validation_error("pure_power: power incompatible with the order at x_j");
    // (x - a)^{-p} = sum_i C(p+i-1, i) a^i x^{-p-i}; truncation error ~ 4^{-60}.
    const double R = std::max(4.0 * std::abs(xj), std::abs(xj) + 1.0);
    std::vector<cplx> tail(p + 61, 0.0);
    double binom = 1.0;
    for (int i = 0; i <= 60; ++i) {
        if (i > 0) binom *= static_cast<double>(p + i - 1) / i;
        tail[p + i] = binom * std::pow(xj, i);
    }
    std::vector<principal_part> parts;
    for (std::size_t k = 0; k < spec.points.size(); ++k) {
        principal_part pp{spec.points[k], spec.orders[k], std::vector<cplx>(spec.orders[k] + 1, 0.0)};
        if (std::abs(spec.points[k] - xj) < 1e-12) pp.a[(n + p) / 2] = 1.0;
        parts.push_back(pp);
    }
    return fx_element(spec, [xj, p](cplx z) { return std::pow(z - xj, -p); }, decay_info{R, tail}, inf,
                      parts);
}

gram_report gram_signature(const std::vector<fx_element>& elements, double zero_threshold,
                           const inner_product_options& opt) {
    const int m = static_cast<int>(elements.size());
    gram_report rep;
    rep.matrix = Eigen::MatrixXcd::Zero(m, m);
    for (int k = 0; k < m; ++k)
        for (int l = 0; l < m; ++l) rep.matrix(k, l) = inner_product(elements[k], elements[l], opt);
    Eigen::MatrixXcd H = 0.5 * (rep.matrix + rep.matrix.adjoint());
    const double norm = std::max(rep.matrix.norm(), 1e-300);
    rep.hermitian_defect = (rep.matrix - rep.matrix.adjoint()).norm() / norm;

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H);
    for (int i = 0; i < m; ++i) rep.eigenvalues.push_back(es.eigenvalues()(i));

    // Congruence by D = diag(|G_kk|^{-1/2}) preserves the signature and
    // removes the scale disparity between elements.
    Eigen::VectorXd dg(m);
    for (int i = 0; i < m; ++i) {
        double a = std::abs(H(i, i).real());
        dg(i) = a > 1e-300 ? 1.0 / std::sqrt(a) : 1.0;
    }
    Eigen::MatrixXcd S = dg.asDiagonal() * H * dg.asDiagonal();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es2(S);
    double emax = 0.0;
    for (int i = 0; i < m; ++i) {
        rep.scaled_eigenvalues.push_back(es2.eigenvalues()(i));
        emax = std::max(emax, std::abs(es2.eigenvalues()(i)));
    }
    rep.zero_threshold = zero_threshold > 0 ? zero_threshold : 1e-8 * emax;
    if (emax == 0.0) rep.zero_threshold = zero_threshold > 0 ? zero_threshold : 1e-12;
    for (double e : rep.scaled_eigenvalues) {
        if (std::abs(e) <= rep.zero_threshold) ++rep.zero;
        else if (e > 0) ++rep.positive;
        else ++rep.negative;
    }
    return rep;
}

} // namespace singspec

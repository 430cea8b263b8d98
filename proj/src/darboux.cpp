#include "singspec/darboux.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace singspec {

namespace {
constexpr double pi = std::numbers::pi;

// Points within this distance of a removable singularity are evaluated by
// the mean value over a circle, avoiding cancellation between large terms.
constexpr double removable_radius = 0.02;

complex_fn with_removable(complex_fn f, std::vector<double> pts, std::optional<double> period) {
    if (pts.empty()) return f;
    return [f, pts, period](cplx z) {
        for (double x : pts) {
            double d = z.real() - x;
            if (period) d -= *period * std::round(d / *period);
            const cplx y = cplx(d, z.imag());
            if (std::abs(y) < removable_radius) {
                const cplx c = z;
                cplx s = 0.0;
                constexpr int m = 32;
                for (int j = 0; j < m; ++j) s += f(c + 2 * removable_radius * std::polar(1.0, 2 * pi * (j + 0.5) / m));
                return s / static_cast<double>(m);
            }
        }
        return f(z);
    };
}

std::pair<double, double> scan_window(const potential& u, const step_options& opt) {
    if (u.period()) return {0.0, *u.period()};
    return {opt.window_a, opt.window_b};
}

double distance_to_points(double x, const std::vector<singular_point>& pts) {
    double d = 1e300;
    for (auto& p : pts) d = std::min(d, std::abs(x - p.x));
    return d;
}

// Sample points in [a, b] at least `margin` from the listed points.
std::vector<double> regular_samples(double a, double b, const std::vector<singular_point>& pts, int count,
                                    double margin) {
    std::vector<double> out;
    for (int i = 0; i < count; ++i) {
        double x = a + (b - a) * (i + 0.37) / count;
        if (distance_to_points(x, pts) <= margin) x += 2 * margin;
        if (distance_to_points(x, pts) > margin) out.push_back(x);
    }
    return out;
}

double taylor_radius(double x, const std::vector<singular_point>& pts) {
    return std::min(0.05, 0.4 * distance_to_points(x, pts));
}

} // namespace

cplx wave::log_derivative(cplx z) const {
    auto p = eval(z);
    return p.second / p.first;
}

taylor_series taylor_series::of(const complex_fn& f, cplx z0, double r, int order) {
    return taylor_series(taylor_coefficients(f, z0, r, order, 64));
}

taylor_series taylor_series::derivative() const {
    std::vector<cplx> d;
    for (std::size_t k = 1; k < c_.size(); ++k) d.push_back(static_cast<double>(k) * c_[k]);
    return taylor_series(d);
}

taylor_series taylor_series::operator*(const taylor_series& o) const {
    const std::size_t n = std::min(c_.size(), o.c_.size());
    std::vector<cplx> r(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; i + j < n; ++j) r[i + j] += c_[i] * o.c_[j];
    return taylor_series(r);
}

taylor_series taylor_series::operator+(const taylor_series& o) const {
    const std::size_t n = std::min(c_.size(), o.c_.size());
    std::vector<cplx> r(n);
    for (std::size_t i = 0; i < n; ++i) r[i] = c_[i] + o.c_[i];
    return taylor_series(r);
}

taylor_series taylor_series::operator-(const taylor_series& o) const { return *this + o * -1.0; }

taylor_series taylor_series::operator*(cplx s) const {
    auto r = c_;
    for (auto& c : r) c *= s;
    return taylor_series(r);
}

int detect_order(const potential& u, double xj, double r) {
    auto f = u.evaluator();
    for (auto& p : u.singular_points(xj - 1.0, xj + 1.0))
        if (std::abs(p.x - xj) > 1e-9) r = std::min(r, 0.4 * std::abs(p.x - xj));
    // Shrink until two concentric circles agree (no complex pole between
    // them); larger circles suffer less cancellation.
    std::vector<cplx> c, c2;
    for (;; r *= 0.5) {
        c = laurent_coefficients(f, xj, r, -8, 0, 256);
        c2 = laurent_coefficients(f, xj, 0.5 * r, -8, 0, 256);
        double diff = 0.0, mag = 1.0;
        for (int i = 0; i <= 8; ++i) {
            diff = std::max(diff, std::abs(c[i] - c2[i]));
            mag = std::max(mag, std::abs(c[i]));
        }
        if (diff < 1e-6 * mag || r < 0.01) break;
    }
    double scale = std::max(1.0, std::abs(c[8]));
    double neg = 0.0;
    for (int i = 0; i < 8; ++i) neg = std::max(neg, std::abs(c[i]));
    if (neg < 1e-6 * scale) return 0;
    const cplx lead = c[6]; // coefficient of y^{-2}
    if (std::abs(lead - c2[6]) > 1e-6 * std::abs(lead) || std::abs(lead.imag()) > 1e-6 * std::abs(lead))
        throw meromorphy_error("detect_order: no n(n+1)/y^2 leading term", {-2});
    const double n = (-1.0 + std::sqrt(1.0 + 4.0 * lead.real())) / 2.0;
    const int ni = static_cast<int>(std::lround(n));
    if (ni < 1 || std::abs(n - ni) > 1e-6)
        throw meromorphy_error("detect_order: leading coefficient is not n(n+1)", {-2});
    laurent_check(u, xj, ni);
    return ni;
}

darboux_step::darboux_step(potential source, wave seed, const step_options& opt)
    : source_(std::move(source)), seed_(std::move(seed)) {
    const auto [a, b] = scan_window(source_, opt);
    const auto src_pts = source_.singular_points(a - 1.0, b + 1.0);

    // Seed must solve the source equation.
    for (double x : regular_samples(a, b, src_pts, 16, 0.05)) {
        const double r = taylor_radius(x, src_pts);
        auto ts = taylor_series::of([this](cplx z) { return seed_.value(z); }, x, r, 4).coefficients();
        const cplx uu = source_(x);
        const cplx res = -2.0 * ts[2] + (uu - seed_.lambda) * ts[0];
        const double scale = std::abs(ts[0]) * (1.0 + std::abs(uu) + std::abs(seed_.lambda));
        seed_residual_ = std::max(seed_residual_, std::abs(res) / scale);
    }
    if (seed_residual_ > opt.residual_tol)
        throw validation_error("darboux_step: seed is not an eigenfunction at the given level (residual " +
                               std::to_string(seed_residual_) + ")");

    // Zeros of the seed close to the real axis.
    std::vector<double> zeros;
    const double h = 0.01;
    auto newton_dist = [this](double x) {
        auto p = seed_.eval(x);
        return std::abs(p.first / p.second);
    };
    const int steps = static_cast<int>(std::ceil((b - a) / h));
    double prev2 = 1e300, prev1 = 1e300;
    for (int i = 0; i <= steps + 1; ++i) {
        const double x = a + i * h;
        double d = distance_to_points(x, src_pts) > 2 * h ? newton_dist(x) : 1e300;
        if (!std::isfinite(d)) d = 0.0;
        if (i >= 2 && prev1 <= prev2 && prev1 <= d && prev1 < 1.0) {
            cplx z = x - h;
            bool ok = false;
            for (int it = 0; it < 60; ++it) {
                auto p = seed_.eval(z);
                if (p.first == cplx(0.0)) { ok = true; break; }
                const cplx dz = p.first / p.second;
                z -= dz;
                if (std::abs(dz) < 1e-14 * std::max(1.0, std::abs(z))) { ok = true; break; }
            }
            if (ok && std::abs(z.imag()) < opt.zero_distance && z.real() >= a && z.real() <= b &&
                distance_to_points(z.real(), src_pts) > h) {
                if (!opt.allow_real_zeros) {
                    std::ostringstream os;
                    os << "seed vanishes on R near x = " << z.real() << "; choose a different level";
                    throw seed_vanishes_error(os.str(), z.real());
                }
                if (std::abs(z.imag()) > 1e-10)
                    throw seed_vanishes_error("seed zero lies just off R; step would create a near-real pole",
                                              z.real());
                if (zeros.empty() || std::abs(zeros.back() - z.real()) > 1e-8) zeros.push_back(z.real());
            }
        }
        prev2 = prev1;
        prev1 = d;
    }

    const cplx l = seed_.lambda;
    auto src = source_.evaluator();
    auto sd = seed_;
    complex_fn raw = [src, sd, l](cplx z) {
        cplx chi = sd.log_derivative(z);
        return -src(z) + 2.0 * l + 2.0 * chi * chi;
    };
    // Candidate points: the source points and new zeros within one period
    // (periodic) or the window.
    std::vector<double> cand;
    const double hi = source_.period() ? *source_.period() - 1e-12 : b;
    for (auto& p : source_.singular_points(a, hi)) cand.push_back(p.x);
    for (double z : zeros)
        if (z <= hi) cand.push_back(z);
    potential probe = potential::custom("probe", raw, {}, source_.period());
    std::vector<singular_point> tgt;
    std::vector<double> removable;
    for (double x : cand) {
        int n = detect_order(probe, x);
        if (n > 0) tgt.push_back({x, n});
        else removable.push_back(x);
    }
    target_ = potential::custom("darboux(" + source_.name() + ")", with_removable(raw, removable, source_.period()),
                                tgt, source_.period(), potential_kind::dressed);
}

wave dress_eigenfunction(const darboux_step& step, const wave& psi) {
    const cplx l = step.level();
    if (std::abs(psi.lambda - l) <= 1e-12 * std::max(1.0, std::abs(l)))
        throw validation_error("dress_eigenfunction: lambda equals the step level");
    const wave seed = step.seed();
    const cplx lam = psi.lambda;
    const auto f = psi.eval;
    return wave{[seed, f, l, lam](cplx z) {
                    const cplx chi = seed.log_derivative(z);
                    auto [v, d] = f(z);
                    const cplx inv = 1.0 / (lam - l);
                    return std::pair<cplx, cplx>{(d - chi * v) * inv, ((l - lam + chi * chi) * v - chi * d) * inv};
                },
                lam};
}

std::vector<cplx> darboux_chain::levels() const {
    std::vector<cplx> out;
    for (auto& s : steps) out.push_back(s.level());
    return out;
}

wave darboux_chain::dress(const wave& psi) const {
    wave w = psi;
    for (auto& s : steps) w = dress_eigenfunction(s, w);
    return w;
}

namespace {

void record_orders(darboux_chain& c, const potential& u) {
    std::vector<int> row;
    for (double x : c.points) row.push_back(detect_order(u, x));
    c.order_table.push_back(row);
}

} // namespace

darboux_chain smoothing_chain(const potential& base, const std::vector<wave>& seeds, const step_options& opt) {
    darboux_chain c{base, {}, {}, {}};
    const auto [a, b] = scan_window(base, opt);
    const double hi = base.period() ? *base.period() - 1e-12 : b;
    int nmax = 0;
    for (auto& p : base.singular_points(a, hi)) {
        c.points.push_back(p.x);
        nmax = std::max(nmax, p.order);
    }
    if (static_cast<int>(seeds.size()) != nmax)
        throw validation_error("smoothing_chain: need exactly max n_j seeds");
    record_orders(c, base);
    potential cur = base;
    for (std::size_t k = 0; k < seeds.size(); ++k) {
        wave s = seeds[k];
        for (auto& st : c.steps) s = dress_eigenfunction(st, s);
        c.steps.emplace_back(cur, s, opt);
        cur = c.steps.back().target();
        record_orders(c, cur);
        for (std::size_t j = 0; j < c.points.size(); ++j) {
            const int expect = std::max(c.order_table[0][j] - static_cast<int>(k) - 1, 0);
            if (c.order_table.back()[j] != expect) {
                std::ostringstream os;
                os << "smoothing_chain: step " << k + 1 << " left order " << c.order_table.back()[j] << " at x = "
                   << c.points[j] << " (expected " << expect << "); choose a different level";
                throw validation_error(os.str());
            }
        }
    }
    if (!c.steps.empty()) {
        auto reg = regularity_scan(cur, a, b);
        if (!reg.regular)
            throw validation_error("smoothing_chain: final potential has a pole near the real line");
    }
    return c;
}

darboux_chain vacuum_chain(int n) {
    if (n < 0) throw validation_error("vacuum_chain: need n >= 0");
    step_options opt;
    opt.allow_real_zeros = true;
    darboux_chain c{potential::zero(), {}, {0.0}, {{0}}};
    potential cur = potential::zero();
    for (int m = 1; m <= n; ++m) {
        wave seed{[m](cplx z) {
                      return std::pair<cplx, cplx>{std::pow(z, m), static_cast<double>(m) * std::pow(z, m - 1)};
                  },
                  0.0};
        c.steps.emplace_back(cur, seed, opt);
        cur = c.steps.back().target();
        c.order_table.push_back({detect_order(cur, 0.0)});
    }
    return c;
}

wave dress_from_vacuum(int n, cplx k) {
    if (k == cplx(0.0)) throw validation_error("dress_from_vacuum: k must be nonzero");
    if (n < 0) throw validation_error("dress_from_vacuum: need n >= 0");
    const cplx ik(-k.imag(), k.real());
    wave w{[ik](cplx z) {
               const cplx e = std::exp(ik * z);
               return std::pair<cplx, cplx>{e, ik * e};
           },
           k * k};
    if (n == 0) return w;
    // Each vacuum step at level 0 multiplies the leading term by i/k.
    const cplx norm = std::pow(-ik, n);
    for (int m = 1; m <= n; ++m) {
        const wave prev = w;
        const cplx lam = k * k;
        w = wave{[prev, m, lam](cplx z) {
                     const cplx chi = static_cast<double>(m) / z;
                     auto [v, d] = prev.eval(z);
                     return std::pair<cplx, cplx>{(d - chi * v) / lam, ((chi * chi - lam) * v - chi * d) / lam};
                 },
                 lam};
    }
    const wave raw = w;
    return wave{[raw, norm](cplx z) {
                    auto [v, d] = raw.eval(z);
                    return std::pair<cplx, cplx>{norm * v, norm * d};
                },
                k * k};
}

darboux_chain rational_smoothing_chain(int n, const std::vector<cplx>& ks, const step_options& opt) {
    std::vector<wave> seeds;
    for (cplx k : ks) {
        if (std::abs(k.imag()) < 1e-12)
            throw validation_error("rational_smoothing_chain: levels must be off the real spectrum (Im k != 0)");
        seeds.push_back(dress_from_vacuum(n, k));
    }
    return smoothing_chain(potential::rational(n), seeds, opt);
}

residual_report step_residuals(const darboux_step& step, const std::vector<complex_fn>& fs,
                               const std::vector<double>& samples, const std::vector<cplx>& mus) {
    residual_report rep;
    const int order = 12;
    auto pts = step.source().singular_points(-1e6, 1e6);
    auto tp = step.target().singular_points(-1e6, 1e6);
    pts.insert(pts.end(), tp.begin(), tp.end());
    const cplx l = step.level();
    for (double x : samples) {
        const double r = taylor_radius(x, pts);
        auto chi = taylor_series::of([&](cplx z) { return step.chi(z); }, x, r, order);
        auto u = taylor_series::of(step.source().evaluator(), x, r, order);
        auto u1 = taylor_series::of(step.target().evaluator(), x, r, order);
        auto Q = [&](const taylor_series& g) { return g.derivative() - chi * g; };
        auto Qs = [&](const taylor_series& g) { return g.derivative() * -1.0 - chi * g; };
        auto L = [&](const taylor_series& pot, const taylor_series& g, cplx m) {
            return g.derivative().derivative() * -1.0 + pot * g - g * m;
        };
        for (auto& f : fs) {
            auto g = taylor_series::of(f, x, r, order);
            const double s = std::abs(g.value()) + std::abs(g.derivative().derivative().value()) +
                             std::abs((u * g).value()) + std::abs((u1 * g).value());
            rep.factorization = std::max(rep.factorization, std::abs((L(u, g, l) - Qs(Q(g))).value()) / s);
            rep.factorization = std::max(rep.factorization, std::abs((L(u1, g, l) - Q(Qs(g))).value()) / s);
            for (cplx mu : mus) {
                const double sm = s * (1.0 + std::abs(chi.value()) + std::abs(mu));
                rep.intertwining =
                    std::max(rep.intertwining, std::abs((Q(L(u, g, mu)) - L(u1, Q(g), mu)).value()) / sm);
            }
        }
    }
    return rep;
}

double m_operator_residual(const darboux_chain& chain, const complex_fn& f, const std::vector<double>& samples) {
    const int n = static_cast<int>(chain.steps.size());
    const int order = 2 * n + 12;
    std::vector<singular_point> pts = chain.base.singular_points(-1e6, 1e6);
    for (auto& s : chain.steps) {
        auto q = s.target().singular_points(-1e6, 1e6);
        pts.insert(pts.end(), q.begin(), q.end());
    }
    double worst = 0.0;
    for (double x : samples) {
        const double r = taylor_radius(x, pts);
        if (r < 1e-3) throw validation_error("m_operator_residual: sample too close to a singular point");
        std::vector<taylor_series> chi;
        for (auto& s : chain.steps) chi.push_back(taylor_series::of([&s](cplx z) { return s.chi(z); }, x, r, order));
        auto un = taylor_series::of(chain.final_potential().evaluator(), x, r, order);
        auto g = taylor_series::of(f, x, r, order);
        auto h = g;
        for (int k = n - 1; k >= 0; --k) g = g.derivative() * -1.0 - chi[k] * g;
        for (int k = 0; k < n; ++k) g = g.derivative() - chi[k] * g;
        for (int k = 0; k < n; ++k) h = h.derivative().derivative() * -1.0 + un * h - h * chain.steps[k].level();
        worst = std::max(worst, std::abs(g.value() - h.value()) / (std::abs(h.value()) + 1e-300));
    }
    return worst;
}

double eigen_residual(const potential& u, const wave& psi, const std::vector<double>& samples) {
    auto pts = u.singular_points(-1e6, 1e6);
    double worst = 0.0;
    for (double x : samples) {
        const double r = taylor_radius(x, pts);
        auto c = taylor_coefficients([&psi](cplx z) { return psi.value(z); }, x, r, 4, 64);
        const cplx uu = u(x);
        const cplx res = -2.0 * c[2] + (uu - psi.lambda) * c[0];
        worst = std::max(worst, std::abs(res) / (std::abs(c[0]) * (1.0 + std::abs(uu) + std::abs(psi.lambda))));
    }
    return worst;
}

regularity_report regularity_scan(const potential& u, double a, double b, double min_distance) {
    double m = 0.0;
    const double h = 0.5 * min_distance;
    const long steps = static_cast<long>(std::ceil((b - a) / h));
    for (long i = 0; i <= steps; ++i) {
        cplx v;
        try {
            v = u(a + i * h);
        } catch (const pole_error&) {
            return {false, HUGE_VAL, 0.0};
        }
        if (!std::isfinite(std::abs(v))) return {false, HUGE_VAL, 0.0};
        m = std::max(m, std::abs(v));
    }
    const double d = m > 0 ? std::sqrt(2.0 / m) : HUGE_VAL;
    return {d > min_distance && u.singular_points(a, b).empty(), m, d};
}

} // namespace singspec

#include "singspec/decomposition.hpp"

#include "singspec/finitegap.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>

namespace singspec {

namespace {
constexpr double pi = std::numbers::pi;
const cplx I(0.0, 1.0);

struct gl_table {
    std::vector<double> x, w;
};

template <int N>
gl_table make_gl() {
    using rule = boost::math::quadrature::gauss<double, N>;
    gl_table t;
    const auto& a = rule::abscissa();
    const auto& w = rule::weights();
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] == 0.0) {
            t.x.push_back(0.0);
            t.w.push_back(w[i]);
            continue;
        }
        t.x.push_back(a[i]);
        t.w.push_back(w[i]);
        t.x.push_back(-a[i]);
        t.w.push_back(w[i]);
    }
    return t;
}

const gl_table& gl(int order) {
    static const gl_table t10 = make_gl<10>(), t20 = make_gl<20>(), t30 = make_gl<30>();
    switch (order) {
    case 10: return t10;
    case 20: return t20;
    case 30: return t30;
    default: throw validation_error("quadrature order must be 10, 20 or 30");
    }
}

double segment_length(const path_segment& s) {
    if (s.type == path_segment::kind::line) return std::abs(s.b - s.a);
    return s.radius * std::abs(s.theta1 - s.theta0);
}

// Breakpoints of [-K, K] at multiples of h, plus extra interior points.
std::vector<double> breakpoints(double K, double h, const std::vector<double>& extra) {
    if (!(K > 0) || !(h > 0)) throw validation_error("spectral nodes: need K > 0 and h > 0");
    const int m = static_cast<int>(std::ceil(K / h - 1e-9));
    std::vector<double> b;
    for (int i = -m; i <= m; ++i) b.push_back(std::clamp(i * h, -K, K));
    for (double e : extra)
        if (e > -K && e < K) b.push_back(e);
    std::sort(b.begin(), b.end());
    b.erase(std::unique(b.begin(), b.end(), [](double u, double v) { return std::abs(u - v) < 1e-14; }), b.end());
    return b;
}

// Gauss nodes on each [b_i, b_{i+1}].
void panel_nodes(const std::vector<double>& b, int order, std::vector<double>& ps, std::vector<double>& ws) {
    const auto& g = gl(order);
    for (std::size_t i = 0; i + 1 < b.size(); ++i) {
        const double c = 0.5 * (b[i] + b[i + 1]), r = 0.5 * (b[i + 1] - b[i]);
        for (std::size_t k = 0; k < g.x.size(); ++k) {
            ps.push_back(c + r * g.x[k]);
            ws.push_back(r * g.w[k]);
        }
    }
}

double factorial(int n) { return std::tgamma(n + 1.0); }

// ---------------------------------------------------------------- Lame inversion

// alpha on the canonical contour of a rectangular lattice with p(alpha) =
// target: Re alpha = 0 for |p| >= pi/T, Re alpha = omega inside.
class lame_inverse {
public:
    explicit lame_inverse(const elliptic_lattice& L) : L_(L) {
        if (std::abs(L.omega().imag()) > 1e-14 || L.omega().real() <= 0 ||
            std::abs(L.omega_prime().real()) > 1e-12 * std::abs(L.omega_prime()))
            throw validation_error("Lame family: need a rectangular lattice (omega real, omega' imaginary)");
        w_ = L.omega().real();
        wp_ = std::abs(L.omega_prime().imag());
        c_ = L.eta() / L.omega();
    }

    double edge() const { return pi / (2 * w_); }

    cplx alpha(double target) const {
        double base, lo, hi;
        const double tiny = 1e-12;
        if (target >= edge()) {
            base = 0.0, lo = -wp_, hi = -tiny;
        } else if (target <= -edge()) {
            base = 0.0, lo = tiny, hi = wp_;
        } else {
            base = w_, lo = -wp_, hi = wp_;
        }
        auto f = [&](double s) { return lame_quasimomentum(cplx(base, s), L_).real() - target; };
        double flo = f(lo), fhi = f(hi);
        if (flo * fhi > 0) throw convergence_error("Lame family: quasimomentum not bracketed on the contour");
        if (flo == 0.0) return cplx(base, lo);
        if (fhi == 0.0) return cplx(base, hi);
        double s = 0.5 * (lo + hi);
        for (int it = 0; it < 200; ++it) {
            const double fs = f(s);
            if (std::abs(fs) <= 1e-14 * std::max(1.0, std::abs(target))) break;
            if ((fs < 0) == (flo < 0))
                lo = s, flo = fs;
            else
                hi = s;
            const cplx a(base, s);
            const double d = -(L_.p(a) + c_).real(); // dp/ds on the contour
            double next = s - fs / d;
            if (!(next > lo && next < hi) || !std::isfinite(next)) next = 0.5 * (lo + hi);
            if (std::abs(next - s) < 1e-16 * std::max(1.0, std::abs(s))) {
                s = next;
                break;
            }
            s = next;
        }
        return cplx(base, s);
    }

private:
    const elliptic_lattice& L_;
    double w_, wp_;
    cplx c_;
};

// Real x with x + shift on the lattice (omega real).
std::vector<double> lattice_points_on_line(const elliptic_lattice& L, cplx shift, double a, double b) {
    const double w = L.omega().real();
    std::vector<double> out;
    for (int mp = -4; mp <= 4; ++mp) {
        const cplx z = -shift + 2.0 * mp * L.omega_prime();
        if (std::abs(z.imag()) > 1e-12) continue;
        for (long k = static_cast<long>(std::floor((a - z.real()) / (2 * w))) - 1;
             k <= static_cast<long>(std::ceil((b - z.real()) / (2 * w))) + 1; ++k) {
            const double x = z.real() + 2 * w * k;
            if (x >= a && x <= b) out.push_back(x);
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

// sigma(a - z) / (sigma(a) sigma(z)) e^{zeta(a) z}: the Bloch function
// without the derivative and quasimomentum bookkeeping of lame_bloch.
cplx lame_psi(const elliptic_lattice& L, cplx z, cplx a) {
    return L.sigma(a - z) / (L.sigma(a) * L.sigma(z)) * std::exp(L.zeta(a) * z);
}

// ---------------------------------------------------------------- families

class vacuum_family : public continuous_family {
public:
    std::string name() const override { return "vacuum"; }
    cplx psi(cplx x, cplx k) const override { return std::exp(I * k * x); }
    cplx psi_star(cplx y, cplx k) const override { return std::exp(-I * k * y); }
    std::vector<spectral_node> nodes(double K, double h) const override {
        std::vector<double> ps, ws;
        panel_nodes(breakpoints(K, h, {}), 20, ps, ws);
        std::vector<spectral_node> out;
        for (std::size_t i = 0; i < ps.size(); ++i) out.push_back({ps[i], ps[i], ps[i] * ps[i], ws[i]});
        return out;
    }
    std::vector<double> singular_points(double, double) const override { return {}; }
};

class rational_family : public continuous_family {
public:
    rational_family(int n, cplx a, double rho) : n_(n), a_(a), rho_(rho) {
        if (n < 0) throw validation_error("rational_line: need n >= 0");
        if (!(rho > 0)) throw validation_error("rational_line: detour radius must be positive");
        for (int m = 0; m <= n; ++m) b_.push_back(factorial(n + m) / (factorial(m) * factorial(n - m) * std::pow(2.0, m)));
    }
    std::string name() const override { return "rational n=" + std::to_string(n_); }
    cplx psi(cplx x, cplx k) const override {
        const cplx t = I / (k * (x - a_));
        cplx s = 0.0;
        for (int m = n_; m >= 0; --m) s = s * t + b_[m];
        return std::exp(I * k * x) * s;
    }
    cplx psi_star(cplx y, cplx k) const override { return psi(y, -k); }
    std::vector<spectral_node> nodes(double K, double h) const override {
        if (!(rho_ < h) || !(rho_ < K)) throw validation_error("rational_line: detour radius must be below h and K");
        auto b = breakpoints(K, h, {-rho_, rho_});
        std::vector<double> ps, ws;
        std::vector<double> outer;
        std::vector<spectral_node> out;
        // Real panels outside (-rho, rho).
        for (std::size_t i = 0; i + 1 < b.size(); ++i) {
            if (b[i] >= -rho_ && b[i + 1] <= rho_) continue;
            panel_nodes({b[i], b[i + 1]}, 20, ps, ws);
        }
        for (std::size_t i = 0; i < ps.size(); ++i) out.push_back({ps[i], ps[i], ps[i] * ps[i], ws[i]});
        // Upper semicircle from -rho to rho.
        const auto& g = gl(20);
        for (std::size_t i = 0; i < g.x.size(); ++i) {
            const double th = 0.5 * pi * (1.0 - g.x[i]); // pi .. 0
            const cplx k = rho_ * std::polar(1.0, th);
            const cplx dk = -0.5 * pi * I * k * g.w[i];
            out.push_back({k, k, k * k, dk});
        }
        std::sort(out.begin(), out.end(), [](const spectral_node& u, const spectral_node& v) {
            return u.p.real() < v.p.real();
        });
        return out;
    }
    std::vector<double> singular_points(double a, double b) const override {
        if (n_ == 0 || std::abs(a_.imag()) > 1e-14 || a_.real() < a || a_.real() > b) return {};
        return {a_.real()};
    }

private:
    int n_;
    cplx a_;
    double rho_;
    std::vector<double> b_;
};

class sinh_family : public continuous_family {
public:
    explicit sinh_family(double kappa) : k_(kappa) {
        if (!(kappa > 0)) throw validation_error("sinh_line: need kappa > 0");
    }
    std::string name() const override { return "sinh soliton"; }
    cplx psi(cplx x, cplx k) const override {
        const cplx ct = std::cosh(k_ * x) / std::sinh(k_ * x);
        return std::exp(I * k * x) * (I * k - k_ * ct) / (I * k - k_);
    }
    cplx psi_star(cplx y, cplx k) const override { return psi(y, -k); }
    std::vector<spectral_node> nodes(double K, double h) const override {
        std::vector<double> ps, ws;
        panel_nodes(breakpoints(K, h, {}), 20, ps, ws);
        std::vector<spectral_node> out;
        for (std::size_t i = 0; i < ps.size(); ++i) out.push_back({ps[i], ps[i], ps[i] * ps[i], ws[i]});
        return out;
    }
    std::vector<double> singular_points(double a, double b) const override {
        if (a <= 0.0 && b >= 0.0) return {0.0};
        return {};
    }
    std::vector<discrete_level> levels() const override {
        const double k = k_;
        return {{-k * k, [k](cplx x) { return 1.0 / std::sinh(k * x); }, -2.0 / k}};
    }

private:
    double k_;
};

class lame_family : public continuous_family {
public:
    lame_family(const elliptic_lattice& L, cplx shift) : L_(L), inv_(L_), shift_(shift), c0_(lame_c0(L_)) {}
    std::string name() const override { return "Lame"; }
    cplx psi(cplx x, cplx a) const override { return lame_psi(L_, x + shift_, a); }
    cplx psi_star(cplx y, cplx a) const override { return lame_psi(L_, y + shift_, -a); }
    std::vector<spectral_node> nodes(double K, double h) const override {
        std::vector<double> ps, ws;
        panel_nodes(breakpoints(K, h, {-inv_.edge(), inv_.edge()}), 20, ps, ws);
        std::vector<spectral_node> out(ps.size());
        parallel_for(ps.size(), [&](std::size_t i) {
            const cplx a = inv_.alpha(ps[i]);
            const cplx lam = -L_.p(a);
            out[i] = {a, ps[i], lam, ws[i] / (lam + c0_)};
        });
        return out;
    }
    std::vector<double> singular_points(double a, double b) const override {
        return lattice_points_on_line(L_, shift_, a, b);
    }

private:
    elliptic_lattice L_;
    lame_inverse inv_;
    cplx shift_;
    cplx c0_;
};

class vacuum_bloch : public periodic_family {
public:
    vacuum_bloch(double T, double phi0) : T_(T), phi0_(phi0) {
        if (!(T > 0)) throw validation_error("vacuum_periodic: period must be positive");
    }
    std::string name() const override { return "vacuum"; }
    double period() const override { return T_; }
    double phi0() const override { return phi0_; }
    cplx psi(cplx x, cplx p) const override { return std::exp(I * p * x); }
    cplx psi_star(cplx y, cplx p) const override { return std::exp(-I * p * y); }
    std::vector<bloch_mode> modes(int N) const override {
        if (N < 0) throw validation_error("modes: need N >= 0");
        std::vector<bloch_mode> out;
        for (int j = -N; j <= N; ++j) {
            const double p = phi0_ + 2 * pi * j / T_;
            out.push_back({j, p, p, p * p, 1.0, false});
        }
        return out;
    }
    std::vector<double> singular_points(double, double) const override { return {}; }

private:
    double T_, phi0_;
};

class lame_bloch_family : public periodic_family {
public:
    lame_bloch_family(const elliptic_lattice& L, cplx shift, double phi0) : L_(L), shift_(shift), phi0_(phi0) {
        if (std::abs(L.omega().imag()) > 1e-14 || L.omega().real() <= 0)
            throw validation_error("lame_periodic: need a real half-period omega");
        // A real multiplier pairs alpha with -alpha at equal lambda and
        // breaks biorthogonality.
        if (std::abs(std::sin(phi0 * period())) < 1e-8)
            throw validation_error("lame_periodic: non-generic multiplier kappa0 = +-1");
    }
    std::string name() const override { return "Lame"; }
    double period() const override { return 2 * L_.omega().real(); }
    double phi0() const override { return phi0_; }
    cplx psi(cplx x, cplx a) const override { return lame_psi(L_, x + shift_, a); }
    cplx psi_star(cplx y, cplx a) const override { return lame_psi(L_, y + shift_, -a); }
    std::vector<bloch_mode> modes(int N) const override {
        const double T = period();
        std::vector<bloch_mode> out;
        for (auto& b : bloch_points(L_, phi0_, N)) {
            const int j = static_cast<int>(std::lround((b.p - phi0_) * T / (2 * pi)));
            out.push_back({j, b.alpha, b.p, b.lambda, b.weight, b.finite_band});
        }
        std::sort(out.begin(), out.end(), [](const bloch_mode& u, const bloch_mode& v) { return u.j < v.j; });
        for (std::size_t i = 1; i < out.size(); ++i)
            if (out[i].j == out[i - 1].j) throw convergence_error("lame_periodic: duplicate mode label");
        return out;
    }
    std::vector<double> singular_points(double a, double b) const override {
        return lattice_points_on_line(L_, shift_, a, b);
    }

private:
    elliptic_lattice L_;
    cplx shift_;
    double phi0_;
};

// Laurent polynomial in t = y - a with integer exponents.
using laurent = std::map<int, double>;

} // namespace

// ---------------------------------------------------------------- rules

quad_rule path_rule(const path& p, double h, int order) {
    if (!(h > 0)) throw validation_error("path_rule: panel length must be positive");
    const auto& g = gl(order);
    quad_rule out;
    for (const auto& seg : p) {
        const int m = std::max(1, static_cast<int>(std::ceil(segment_length(seg) / h - 1e-9)));
        for (int i = 0; i < m; ++i) {
            const double s0 = static_cast<double>(i) / m, s1 = static_cast<double>(i + 1) / m;
            for (std::size_t k = 0; k < g.x.size(); ++k) {
                const double s = s0 + 0.5 * (s1 - s0) * (g.x[k] + 1.0);
                out.push_back({seg.point(s), seg.tangent(s) * (0.5 * (s1 - s0) * g.w[k])});
            }
        }
    }
    return out;
}

quad_rule line_rule(double a, double b, const std::vector<double>& points, double h, double detour_radius,
                    int order) {
    return path_rule(detour_path(a, b, points, detour_radius, true), h, order);
}

family_ptr vacuum_line() { return std::make_shared<vacuum_family>(); }
family_ptr rational_line(int n, cplx a, double detour) { return std::make_shared<rational_family>(n, a, detour); }
family_ptr sinh_line(double kappa) { return std::make_shared<sinh_family>(kappa); }
family_ptr lame_line(const elliptic_lattice& L, cplx shift) { return std::make_shared<lame_family>(L, shift); }

periodic_ptr vacuum_periodic(double period, double phi0) { return std::make_shared<vacuum_bloch>(period, phi0); }
periodic_ptr lame_periodic(const elliptic_lattice& L, cplx shift, double phi0) {
    return std::make_shared<lame_bloch_family>(L, shift, phi0);
}

// ---------------------------------------------------------------- continuous

cplx forward_continuous(const continuous_family& fam, const complex_fn& f, const quad_rule& y, cplx param) {
    cplx s = 0.0;
    for (const auto& q : y) s += q.w * f(q.z) * fam.psi_star(q.z, param);
    return s / (2 * pi);
}

std::vector<transform_sample> transform_continuous(const continuous_family& fam, const complex_fn& f,
                                                   const quad_rule& y, double K, double h) {
    const auto nodes = fam.nodes(K, h);
    std::vector<cplx> fy(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) fy[i] = y[i].w * f(y[i].z);
    std::vector<transform_sample> out(nodes.size());
    parallel_for(nodes.size(), [&](std::size_t i) {
        cplx s = 0.0;
        for (std::size_t k = 0; k < y.size(); ++k) s += fy[k] * fam.psi_star(y[k].z, nodes[i].param);
        out[i] = {nodes[i], s / (2 * pi)};
    });
    return out;
}

void check_residues(const continuous_family& fam, const complex_fn& f, double a, double b,
                    const std::vector<cplx>& params, double radius, double tol) {
    const int M = 128;
    for (double x : fam.singular_points(a, b))
        for (cplx g : params) {
            cplx res = 0.0;
            double mag = 0.0;
            for (int i = 0; i < M; ++i) {
                const cplx e = std::polar(1.0, 2 * pi * i / M);
                const cplx v = f(x + radius * e) * fam.psi_star(x + radius * e, g);
                res += v * e;
                mag += std::abs(v);
            }
            res *= radius / M;
            mag *= radius / M;
            if (std::abs(res) > tol * std::max(mag, 1e-300))
                throw form_domain_error("transform: f Psi* has a residue at x = " + std::to_string(x) +
                                            "; f is not in the quadratic-form domain",
                                        x);
        }
}

std::vector<cplx> level_coefficients(const continuous_family& fam, const complex_fn& f, const quad_rule& y) {
    std::vector<cplx> out;
    for (const auto& l : fam.levels()) {
        cplx s = 0.0;
        for (const auto& q : y) s += q.w * f(q.z) * l.psi(q.z);
        out.push_back(s / l.norm);
    }
    return out;
}

cplx synthesize_continuous(const continuous_family& fam, const std::vector<transform_sample>& samples, cplx x,
                           double K, const std::vector<cplx>& level_coeffs) {
    const double lim = K * (1 + 1e-12) + 1e-12;
    cplx s = 0.0;
    for (const auto& t : samples)
        if (std::abs(t.node.p.real()) <= lim) s += t.node.measure * t.value * fam.psi(x, t.node.param);
    const auto lv = fam.levels();
    if (!level_coeffs.empty() && level_coeffs.size() != lv.size())
        throw validation_error("synthesize_continuous: level coefficient count mismatch");
    for (std::size_t m = 0; m < level_coeffs.size(); ++m) s += level_coeffs[m] * lv[m].psi(x);
    return s;
}

reconstruction_table reconstruct_continuous(const continuous_family& fam, const complex_fn& f, const quad_rule& y,
                                            const std::vector<double>& xs, std::vector<double> cutoffs, double h,
                                            const complex_fn& reference) {
    if (cutoffs.empty()) throw validation_error("reconstruct_continuous: need at least one cutoff");
    if (cutoffs.size() == 1) cutoffs = {cutoffs[0], 2 * cutoffs[0], 4 * cutoffs[0]};
    for (double K : cutoffs) {
        const double r = K / h;
        if (!(K > 0) || std::abs(r - std::round(r)) > 1e-9)
            throw validation_error("reconstruct_continuous: cutoffs must be positive multiples of h");
    }
    const double Kmax = *std::max_element(cutoffs.begin(), cutoffs.end());
    const auto samples = transform_continuous(fam, f, y, Kmax, h);
    const auto lc = level_coefficients(fam, f, y);
    reconstruction_table t;
    t.cutoffs = cutoffs;
    t.xs = xs;
    t.values.assign(cutoffs.size(), std::vector<cplx>(xs.size()));
    parallel_for(cutoffs.size() * xs.size(), [&](std::size_t idx) {
        const std::size_t c = idx / xs.size(), i = idx % xs.size();
        t.values[c][i] = synthesize_continuous(fam, samples, xs[i], cutoffs[c], lc);
    });
    if (reference) {
        for (std::size_t c = 0; c < cutoffs.size(); ++c) {
            double e = 0.0;
            for (std::size_t i = 0; i < xs.size(); ++i) e = std::max(e, std::abs(t.values[c][i] - reference(xs[i])));
            t.max_error.push_back(e);
        }
    }
    return t;
}

namespace {

kernel_split split(double cutoff, double x, double y, cplx total, cplx classical) {
    return {cutoff, x, y, total, classical, total - classical};
}

} // namespace

std::vector<kernel_split> continuous_kernel_grid(const continuous_family& fam, double K,
                                                 const std::vector<double>& xs, const std::vector<double>& ys,
                                                 double h) {
    const auto nodes = fam.nodes(K, h);
    std::vector<kernel_split> out(xs.size() * ys.size());
    parallel_for(out.size(), [&](std::size_t idx) {
        const double x = xs[idx / ys.size()], y = ys[idx % ys.size()];
        cplx s = 0.0;
        for (const auto& n : nodes) s += n.measure * fam.psi(x, n.param) * fam.psi_star(y, n.param);
        const double d = x - y;
        out[idx] = split(K, x, y, s, d == 0.0 ? cplx(2 * K) : cplx(2 * std::sin(K * d) / d));
    });
    return out;
}

kernel_split continuous_kernel(const continuous_family& fam, double K, double x, double y, double h) {
    return continuous_kernel_grid(fam, K, {x}, {y}, h)[0];
}

std::vector<double> cauchy_differences(const std::vector<std::vector<kernel_split>>& grids) {
    std::vector<double> out;
    for (std::size_t c = 0; c + 1 < grids.size(); ++c) {
        if (grids[c].size() != grids[c + 1].size()) throw validation_error("cauchy_differences: grid size mismatch");
        double m = 0.0;
        for (std::size_t i = 0; i < grids[c].size(); ++i)
            m = std::max(m, std::abs(grids[c + 1][i].correction - grids[c][i].correction));
        out.push_back(m);
    }
    return out;
}

cplx darboux_route_transform(int n, cplx a, const complex_fn& f, const quad_rule& y, cplx k, double cauchy_radius) {
    if (n < 0) throw validation_error("darboux_route_transform: need n >= 0");
    if (std::abs(k) < 1e-14) throw validation_error("darboux_route_transform: k = 0 is excluded");
    // D = Q_1* ... Q_n* as sum_r A_r(t) d^r with Laurent coefficients.
    std::vector<laurent> D(1);
    D[0][0] = 1.0;
    for (int m = n; m >= 1; --m) {
        std::vector<laurent> next(D.size() + 1);
        for (std::size_t r = 0; r < D.size(); ++r)
            for (auto [e, c] : D[r]) {
                if (e != 0) next[r][e - 1] -= e * c;  // -A'
                next[r + 1][e] -= c;                   // -A d
                next[r][e - 1] -= m * c;               // -(m/t) A
            }
        D = std::move(next);
    }
    const int order = static_cast<int>(D.size()) - 1;
    cplx s = 0.0;
    for (const auto& q : y) {
        const auto tc = taylor_coefficients(f, q.z, cauchy_radius, order, 64);
        const cplx t = q.z - a;
        cplx g = 0.0;
        for (int r = 0; r <= order; ++r) {
            cplx A = 0.0;
            for (auto [e, c] : D[r]) A += c * std::pow(t, e);
            g += A * factorial(r) * tc[r];
        }
        s += q.w * std::exp(-I * k * q.z) * g;
    }
    return s / (2 * pi) / std::pow(-I * k, n);
}

// ---------------------------------------------------------------- discrete

namespace {

quad_rule period_rule(const periodic_family& fam, double base, const discrete_options& opt) {
    const double T = fam.period();
    const double r = opt.detour_radius;
    auto near_end = [&](double b0) {
        for (double x : fam.singular_points(b0 - T, b0 + 2 * T))
            if (std::abs(x - b0) < 2 * r || std::abs(x - b0 - T) < 2 * r) return true;
        return false;
    };
    // The integrand is T-periodic, so moving the base is exact.
    double b0 = base;
    for (int i = 0; i < 8 && near_end(b0); ++i) b0 += 2.5 * r;
    if (near_end(b0)) throw validation_error("forward_discrete: cannot place the period away from singular points");
    return line_rule(b0, b0 + T, fam.singular_points(b0, b0 + T), T / opt.panels, r, opt.order);
}

} // namespace

cplx forward_discrete(const periodic_family& fam, const complex_fn& f, const bloch_mode& m, double base,
                      const discrete_options& opt) {
    cplx s = 0.0;
    for (const auto& q : period_rule(fam, base, opt)) s += q.w * f(q.z) * fam.psi_star(q.z, m.param);
    return s / fam.period();
}

std::vector<cplx> transform_discrete(const periodic_family& fam, const complex_fn& f,
                                     const std::vector<bloch_mode>& modes, double base, const discrete_options& opt) {
    const auto rule = period_rule(fam, base, opt);
    std::vector<cplx> fy(rule.size());
    for (std::size_t i = 0; i < rule.size(); ++i) fy[i] = rule[i].w * f(rule[i].z);
    std::vector<cplx> out(modes.size());
    parallel_for(modes.size(), [&](std::size_t j) {
        cplx s = 0.0;
        for (std::size_t i = 0; i < rule.size(); ++i) s += fy[i] * fam.psi_star(rule[i].z, modes[j].param);
        out[j] = s / fam.period();
    });
    return out;
}

cplx synthesize_discrete(const periodic_family& fam, const std::vector<bloch_mode>& modes,
                         const std::vector<cplx>& fhat, cplx x, int N) {
    if (fhat.size() != modes.size()) throw validation_error("synthesize_discrete: coefficient count mismatch");
    cplx s = 0.0;
    for (std::size_t i = 0; i < modes.size(); ++i)
        if (std::abs(modes[i].j) <= N) s += fhat[i] * modes[i].weight * fam.psi(x, modes[i].param);
    return s;
}

reconstruction_table reconstruct_discrete(const periodic_family& fam, const complex_fn& f,
                                          const std::vector<double>& xs, const std::vector<int>& cutoffs,
                                          const complex_fn& reference, const discrete_options& opt) {
    if (cutoffs.empty()) throw validation_error("reconstruct_discrete: need at least one cutoff");
    const int Nmax = *std::max_element(cutoffs.begin(), cutoffs.end());
    const auto modes = fam.modes(Nmax);
    const auto fhat = transform_discrete(fam, f, modes, 0.0, opt);
    reconstruction_table t;
    for (int N : cutoffs) t.cutoffs.push_back(N);
    t.xs = xs;
    t.values.assign(cutoffs.size(), std::vector<cplx>(xs.size()));
    parallel_for(cutoffs.size() * xs.size(), [&](std::size_t idx) {
        const std::size_t c = idx / xs.size(), i = idx % xs.size();
        t.values[c][i] = synthesize_discrete(fam, modes, fhat, xs[i], cutoffs[c]);
    });
    if (reference) {
        for (std::size_t c = 0; c < cutoffs.size(); ++c) {
            double e = 0.0;
            for (std::size_t i = 0; i < xs.size(); ++i) e = std::max(e, std::abs(t.values[c][i] - reference(xs[i])));
            t.max_error.push_back(e);
        }
    }
    return t;
}

std::vector<kernel_split> discrete_kernel_grid(const periodic_family& fam, int N, const std::vector<double>& xs,
                                               const std::vector<double>& ys) {
    const double T = fam.period();
    const auto modes = fam.modes(N);
    std::vector<kernel_split> out(xs.size() * ys.size());
    parallel_for(out.size(), [&](std::size_t idx) {
        const double x = xs[idx / ys.size()], y = ys[idx % ys.size()];
        cplx s = 0.0;
        for (const auto& m : modes) s += m.weight * fam.psi(x, m.param) * fam.psi_star(y, m.param);
        const double r = (x - y) / T;
        // At x - y = 0 mod T the quotient tends to 2N + 1.
        const cplx cl = std::exp(I * fam.phi0() * (x - y)) *
                        (std::abs(r - std::round(r)) < 1e-12 ? (2.0 * N + 1) / T
                                                             : std::sin(pi * (2.0 * N + 1) * r) / (T * std::sin(pi * r)));
        out[idx] = split(N, x, y, s / T, cl);
    });
    return out;
}

kernel_split discrete_kernel(const periodic_family& fam, int N, double x, double y) {
    return discrete_kernel_grid(fam, N, {x}, {y})[0];
}

fx_element mode_element(const periodic_family& fam, const bloch_mode& m, const singularity_spec& spec) {
    if (!spec.periodic() || std::abs(*spec.period - fam.period()) > 1e-12 * fam.period())
        throw validation_error("mode_element: spec period differs from the family period");
    if (std::abs(spec.kappa0() - std::exp(I * fam.phi0() * fam.period())) > 1e-10)
        throw validation_error("mode_element: spec multiplier differs from the family multiplier");
    const auto& ff = fam;
    const cplx a = m.param;
    // Poles off the spec points are at least a quarter period away for the
    // families provided here.
    return fx_element(spec, [&ff, a](cplx z) { return ff.psi(z, a); }, std::nullopt, 0.25 * fam.period());
}

singular_report singular_reconstruct(const periodic_family& fam, const fx_element& f, int N,
                                     const std::vector<double>& xs, std::vector<int> cutoffs, double neutral_tol) {
    const auto& spec = f.spec();
    if (N < 1) throw validation_error("singular_reconstruct: need N >= 1");
    if (!spec.periodic()) throw validation_error("singular_reconstruct: need a periodic element");
    const double T = fam.period();
    // Family singular points must be exactly the spec points.
    const auto fpts = fam.singular_points(0.0, T * (1 - 1e-12));
    auto mod = [T](double x) { return x - T * std::floor(x / T); };
    if (fpts.size() != spec.points.size())
        throw validation_error("singular_reconstruct: family singular points differ from the spec");
    for (double x : fpts) {
        bool found = false;
        for (double s : spec.points) {
            const double d = std::abs(mod(x) - mod(s));
            if (d < 1e-9 || std::abs(d - T) < 1e-9) found = true;
        }
        if (!found) throw validation_error("singular_reconstruct: family singular points differ from the spec");
    }
    if (cutoffs.empty()) cutoffs = {std::max(1, N / 4), std::max(1, N / 2), N};
    for (int c : cutoffs)
        if (c < 0 || c > N) throw validation_error("singular_reconstruct: cutoffs must lie in [0, N]");

    singular_report rep;
    rep.modes = fam.modes(N);
    rep.xs = xs;
    rep.cutoffs = cutoffs;
    const std::size_t Q = rep.modes.size();
    rep.coefficients.resize(Q);
    rep.norms.resize(Q);
    std::vector<std::vector<principal_part>> parts(Q);
    parallel_for(Q, [&](std::size_t q) {
        const auto e = mode_element(fam, rep.modes[q], spec);
        const cplx nq = inner_product(e, e);
        double scale = 0.0;
        for (double x : {0.17, 0.41, 0.73}) scale = std::max(scale, std::norm(fam.psi(x * T, rep.modes[q].param)));
        if (std::abs(nq) < neutral_tol * scale * T)
            throw validation_error("singular_reconstruct: neutral mode <Psi_q, Psi_q> = 0 (non-generic kappa0)");
        rep.norms[q] = nq;
        rep.coefficients[q] = inner_product(f, e) / nq;
        parts[q] = e.principal_parts();
    });

    rep.partial_sums.assign(cutoffs.size(), std::vector<cplx>(xs.size()));
    for (std::size_t c = 0; c < cutoffs.size(); ++c) {
        double e = 0.0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            cplx s = 0.0;
            for (std::size_t q = 0; q < Q; ++q)
                if (std::abs(rep.modes[q].j) <= cutoffs[c]) s += rep.coefficients[q] * fam.psi(xs[i], rep.modes[q].param);
            rep.partial_sums[c][i] = s;
            e = std::max(e, std::abs(s - f(xs[i])));
        }
        rep.sup_error.push_back(e);
    }

    const auto& fp = f.principal_parts();
    for (std::size_t j = 0; j < fp.size(); ++j) {
        std::vector<cplx> target, series;
        const int n = fp[j].order;
        for (int k = 0; k <= n; ++k) {
            if (n - 2 * k >= 0) continue; // regular terms are not principal
            target.push_back(fp[j].a[k]);
            cplx s = 0.0;
            for (std::size_t q = 0; q < Q; ++q) {
                // Match the mode's part at the same anchor.
                for (const auto& pp : parts[q])
                    if (std::abs(pp.anchor - fp[j].anchor) < 1e-9 && k < static_cast<int>(pp.a.size()))
                        s += rep.coefficients[q] * pp.a[k];
            }
            series.push_back(s);
            rep.principal_error =
                std::max(rep.principal_error, std::abs(s - fp[j].a[k]) / std::max(1.0, std::abs(fp[j].a[k])));
        }
        rep.principal_target.push_back(target);
        rep.principal_series.push_back(series);
    }

    // Envelope max(|c_j|, |c_-j|) above the roundoff floor.
    double cmax = 0.0;
    for (auto c : rep.coefficients) cmax = std::max(cmax, std::abs(c));
    std::vector<double> js, env;
    for (int j = 1; j <= N; ++j) {
        double e = 0.0;
        for (std::size_t q = 0; q < Q; ++q)
            if (std::abs(rep.modes[q].j) == j) e = std::max(e, std::abs(rep.coefficients[q]));
        if (e <= 1e-13 * cmax) break;
        js.push_back(j);
        env.push_back(e);
    }
    rep.decay_order = js.size() >= 3 ? fitted_decay(js, env) : std::numeric_limits<double>::infinity();
    return rep;
}

// ---------------------------------------------------------------- diagnostics

double fitted_decay(const std::vector<double>& cutoffs, const std::vector<double>& values) {
    if (cutoffs.size() != values.size() || cutoffs.size() < 2)
        throw validation_error("fitted_decay: need at least two matching samples");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(cutoffs.size());
    for (std::size_t i = 0; i < cutoffs.size(); ++i) {
        if (!(cutoffs[i] > 0) || !(values[i] > 0)) throw validation_error("fitted_decay: need positive samples");
        const double x = std::log(cutoffs[i]), y = std::log(values[i]);
        sx += x, sy += y, sxx += x * x, sxy += x * y;
    }
    const double den = n * sxx - sx * sx;
    if (std::abs(den) < 1e-300) throw validation_error("fitted_decay: cutoffs must differ");
    return -(n * sxy - sx * sy) / den;
}

double envelope(const std::function<double(double)>& g, double c0, double spread, int samples) {
    if (samples < 2 || !(spread >= 0)) throw validation_error("envelope: need samples >= 2 and spread >= 0");
    double e = 0.0;
    for (int i = 0; i < samples; ++i) e = std::max(e, g(c0 * (1.0 + spread * i / (samples - 1))));
    return e;
}

asymptotic_coefficient::asymptotic_coefficient(double period, std::vector<cplx> fourier)
    : T_(period), c_(std::move(fourier)) {
    if (!(period > 0)) throw validation_error("asymptotic_coefficient: period must be positive");
    if (c_.size() % 2 == 0) throw validation_error("asymptotic_coefficient: need 2M+1 coefficients");
    mean_ = c_[c_.size() / 2];
}

cplx asymptotic_coefficient::operator()(cplx x) const {
    const int M = static_cast<int>(c_.size() / 2);
    cplx s = 0.0;
    for (int m = -M; m <= M; ++m) {
        if (m == 0) continue;
        const double w = 2 * pi * m / T_;
        s += c_[m + M] / (I * w) * std::exp(I * w * x);
    }
    return s / (2.0 * I);
}

asymptotic_coefficient phi1(const potential& u, int samples) {
    if (!u.period()) throw validation_error("phi1: potential is not periodic");
    if (samples < 8) throw validation_error("phi1: too few samples");
    const double T = *u.period();
    if (!u.singular_points(0.0, T).empty()) throw validation_error("phi1: potential is singular on the real line");
    std::vector<cplx> v(samples);
    for (int i = 0; i < samples; ++i) v[i] = u(T * i / samples);
    const int M = samples / 2 - 1;
    std::vector<cplx> c(2 * M + 1);
    for (int m = -M; m <= M; ++m) {
        cplx s = 0.0;
        for (int i = 0; i < samples; ++i) s += v[i] * std::polar(1.0, -2 * pi * m * i / samples);
        c[m + M] = s / static_cast<double>(samples);
    }
    return asymptotic_coefficient(T, c);
}

double phi1_defect(const elliptic_lattice& L, cplx shift, const asymptotic_coefficient& phi, double p,
                   const std::vector<double>& xs) {
    const lame_inverse inv(L);
    if (std::abs(p) < inv.edge()) throw validation_error("phi1_defect: p must lie on the infinite band");
    const cplx a = inv.alpha(p);
    const double T = 2 * L.omega().real();
    auto chi = [&](double x) { return lame_bloch(x + shift, a, L).psi * std::exp(-I * p * x); };
    const int M = 256;
    cplx mean = 0.0;
    for (int i = 0; i < M; ++i) mean += chi(T * i / M);
    mean /= static_cast<double>(M);
    double d = 0.0;
    for (double x : xs) d = std::max(d, std::abs(p * (chi(x) / mean - 1.0) - phi(x)));
    return d;
}

} // namespace singspec

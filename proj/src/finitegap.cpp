#include "singspec/finitegap.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numbers>
#include <numeric>
#include <sstream>

namespace singspec {

namespace {
constexpr double pi = std::numbers::pi;
const cplx I(0.0, 1.0);

// sqrt with its cut along the ray from the origin in direction `dir`.
cplx sqrt_cut(cplx z, cplx dir) {
    const cplx m = -dir;
    return std::sqrt(m) * std::sqrt(z / m);
}
} // namespace

hyperelliptic_curve::hyperelliptic_curve(std::vector<cplx> branch_points) : e_(std::move(branch_points)) {
    if (e_.size() % 2 == 0) throw validation_error("hyperelliptic_curve: need an odd number of branch points");
    for (std::size_t i = 0; i < e_.size(); ++i)
        for (std::size_t j = i + 1; j < e_.size(); ++j)
            if (std::abs(e_[i] - e_[j]) < 1e-10)
                throw validation_error("hyperelliptic_curve: branch points must be distinct (singular curve)");
}

cplx hyperelliptic_curve::R(cplx lambda) const {
    cplx r = 1.0;
    for (auto e : e_) r *= lambda - e;
    return r;
}

cplx hyperelliptic_curve::w_principal(cplx lambda) const {
    cplx r = 1.0;
    for (auto e : e_) r *= std::sqrt(lambda - e);
    return r;
}

surface_point make_point(const hyperelliptic_curve& c, cplx lambda, int sheet) {
    if (sheet != 1 && sheet != -1) throw validation_error("make_point: sheet must be +1 or -1");
    return {lambda, sheet, static_cast<double>(sheet) * c.w_principal(lambda)};
}

surface_point continue_point(const hyperelliptic_curve& c, const surface_point& start,
                             const std::vector<cplx>& polyline, int substeps) {
    cplx w = start.w;
    cplx prev = start.lambda;
    for (cplx target : polyline) {
        for (int s = 1; s <= substeps; ++s) {
            const cplx l = prev + (target - prev) * (static_cast<double>(s) / substeps);
            const cplx v = c.w_principal(l);
            w = std::abs(v - w) <= std::abs(v + w) ? v : -v;
        }
        prev = target;
    }
    const cplx v = c.w_principal(prev);
    return {prev, std::abs(v - w) <= std::abs(v + w) ? 1 : -1, w};
}

cplx quasimomentum_chart::numerator(cplx lambda) const {
    cplx s = 1.0;
    for (int m = static_cast<int>(c.size()) - 1; m >= 0; --m) s = s * lambda + c[m];
    return s;
}

cplx quasimomentum_chart::density(const surface_point& p) const { return numerator(p.lambda) / (2.0 * p.w); }

double quasimomentum_chart::max_imag_period() const {
    double m = 0.0;
    for (auto q : periods) m = std::max(m, std::abs(q.imag()));
    return m;
}

namespace {

// Integrals of lambda^m / (2w) dlambda, m = 0..g, over the ellipse around
// (Ea, Eb). On the Joukowski circle the integrand is smooth and periodic.
struct loop_data {
    std::vector<cplx> moments;
    std::vector<cplx> points;
};

loop_data loop_moments(const std::vector<cplx>& E, std::size_t a, std::size_t b, int g, int resolution) {
    const cplx m = 0.5 * (E[a] + E[b]);
    const cplx h = 0.5 * (E[b] - E[a]);
    double rho = 3.0;
    for (std::size_t k = 0; k < E.size(); ++k) {
        if (k == a || k == b) continue;
        const cplx s = (E[k] - m) / h;
        cplx z = s + std::sqrt(s * s - 1.0);
        if (std::abs(z) < 1.0) z = s - std::sqrt(s * s - 1.0);
        rho = std::min(rho, std::abs(z));
    }
    const double R = 1.0 + 0.5 * (rho - 1.0);
    auto eval = [&](int M) {
        std::vector<cplx> mom(g + 1, 0.0);
        for (int i = 0; i < M; ++i) {
            const cplx zeta = R * std::polar(1.0, 2 * pi * i / M);
            const cplx lam = m + 0.5 * h * (zeta + 1.0 / zeta);
            cplx w = 0.5 * h * (zeta - 1.0 / zeta);
            for (std::size_t k = 0; k < E.size(); ++k)
                if (k != a && k != b) w *= sqrt_cut(lam - E[k], (E[k] - m) / std::abs(E[k] - m));
            const cplx dl = 0.5 * h * (1.0 - 1.0 / (zeta * zeta)) * I * zeta * (2 * pi / M);
            cplx lp = 1.0;
            for (int q = 0; q <= g; ++q) {
                mom[q] += lp / (2.0 * w) * dl;
                lp *= lam;
            }
        }
        return mom;
    };
    int M = std::max(64, resolution);
    auto prev = eval(M / 2);
    for (;; M *= 2) {
        auto cur = eval(M);
        double diff = 0.0, mag = 0.0;
        for (int q = 0; q <= g; ++q) {
            diff = std::max(diff, std::abs(cur[q] - prev[q]));
            mag = std::max(mag, std::abs(cur[q]));
        }
        if (diff <= 1e-13 * mag) {
            loop_data d{cur, {}};
            for (int i = 0; i < 128; ++i) {
                const cplx zeta = R * std::polar(1.0, 2 * pi * i / 128);
                d.points.push_back(m + 0.5 * h * (zeta + 1.0 / zeta));
            }
            return d;
        }
        if (M > (1 << 20)) throw convergence_error("quasimomentum: cycle integral did not converge");
        prev = cur;
    }
}

} // namespace

quasimomentum_chart quasimomentum(const hyperelliptic_curve& curve, int cycle_resolution) {
    const int g = curve.genus();
    const auto& E = curve.branch_points();
    quasimomentum_chart chart{curve, std::vector<cplx>(g, 0.0), {}, {}, 1.0};
    if (g == 0) return chart;
    std::vector<std::vector<cplx>> mom;
    for (int j = 0; j < 2 * g; ++j) {
        auto d = loop_moments(E, j, j + 1, g, cycle_resolution);
        mom.push_back(d.moments);
        chart.cycles.push_back(d.points);
    }
    // Unknowns c_m = a_m + i b_m; rows Im(period_j) = 0.
    Eigen::MatrixXd A(2 * g, 2 * g);
    Eigen::VectorXd rhs(2 * g);
    for (int j = 0; j < 2 * g; ++j) {
        for (int m = 0; m < g; ++m) {
            A(j, m) = mom[j][m].imag();
            A(j, g + m) = mom[j][m].real();
        }
        rhs(j) = -mom[j][g].imag();
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    chart.condition = sv(0) / sv(2 * g - 1);
    if (!(chart.condition < 1e13)) {
        std::ostringstream os;
        os << "quasimomentum: period system ill-conditioned (condition " << chart.condition << ")";
        throw convergence_error(os.str());
    }
    Eigen::VectorXd x = svd.solve(rhs);
    for (int m = 0; m < g; ++m) chart.c[m] = cplx(x(m), x(g + m));
    for (int j = 0; j < 2 * g; ++j) {
        cplx s = mom[j][g];
        for (int m = 0; m < g; ++m) s += chart.c[m] * mom[j][m];
        chart.periods.push_back(s);
    }
    return chart;
}

std::vector<double> asymptotic_defect(const quasimomentum_chart& chart, const std::vector<double>& lambdas) {
    std::vector<double> out;
    for (double l : lambdas) {
        const cplx d = chart.numerator(l) / (2.0 * chart.curve.w_principal(l));
        out.push_back(std::abs(2.0 * std::sqrt(cplx(l)) * d - 1.0));
    }
    return out;
}

cplx integrate_dp(const quasimomentum_chart& chart, const surface_point& start, const std::vector<cplx>& polyline) {
    // 8-point Gauss-Legendre on short pieces, w continued node to node.
    static const double xg[8] = {-0.9602898564975363, -0.7966664774136267, -0.5255324099163290,
                                 -0.1834346424956498, 0.1834346424956498,  0.5255324099163290,
                                 0.7966664774136267,  0.9602898564975363};
    static const double wg[8] = {0.1012285362903763, 0.2223810344533745, 0.3137066458778873, 0.3626837833783620,
                                 0.3626837833783620, 0.3137066458778873, 0.2223810344533745, 0.1012285362903763};
    cplx total = 0.0;
    cplx w = start.w;
    cplx prev = start.lambda;
    auto follow = [&](cplx l) {
        const cplx v = chart.curve.w_principal(l);
        w = std::abs(v - w) <= std::abs(v + w) ? v : -v;
        return w;
    };
    for (cplx target : polyline) {
        const int pieces = 256;
        for (int s = 0; s < pieces; ++s) {
            const cplx a = prev + (target - prev) * (static_cast<double>(s) / pieces);
            const cplx b = prev + (target - prev) * (static_cast<double>(s + 1) / pieces);
            const cplx mid = 0.5 * (a + b), half = 0.5 * (b - a);
            for (int k = 0; k < 8; ++k) {
                const cplx l = mid + half * xg[k];
                total += wg[k] * half * chart.numerator(l) / (2.0 * follow(l));
            }
        }
        prev = target;
    }
    return total;
}

cplx lame_c0(const elliptic_lattice& L) { return -L.eta() / L.omega(); }

cplx lame_quasimomentum(cplx alpha, const elliptic_lattice& L) {
    return -I * (L.zeta(alpha) - L.eta() * alpha / L.omega());
}

bloch_value lame_bloch(cplx x, cplx alpha, const elliptic_lattice& L) {
    if (std::abs(alpha - L.nearest_lattice_point(alpha)) < 1e-12)
        throw validation_error("lame_bloch: alpha is a lattice point");
    const cplx za = L.zeta(alpha);
    const cplx psi = L.sigma(alpha - x) / (L.sigma(alpha) * L.sigma(x)) * std::exp(za * x);
    const cplx dpsi = psi * (za - L.zeta(alpha - x) - L.zeta(x));
    return {psi, dpsi, -L.p(alpha), std::exp(2.0 * (L.omega() * za - L.eta() * alpha)), lame_quasimomentum(alpha, L)};
}

double multiplicative_check(double x, double y, cplx alpha, const elliptic_lattice& L) {
    for (double z : {x, y, x + y})
        if (std::abs(z - L.nearest_lattice_point(z)) < 1e-6)
            throw validation_error("multiplicative_check: argument too close to a pole");
    const auto bx = lame_bloch(x, alpha, L), by = lame_bloch(y, alpha, L), bz = lame_bloch(x + y, alpha, L);
    const cplx a1 = -(L.zeta(x) + L.zeta(y) - L.zeta(x + y));
    const cplx lhs = bx.psi * by.psi;
    // With Psi~ = -Psi: Psi~ Psi~ - (Psi~' + a1 Psi~) = Psi Psi + Psi' + a1 Psi.
    return std::abs(lhs + bz.dpsi + a1 * bz.psi) / std::abs(lhs);
}

cplx spectral_weight(const hyperelliptic_curve& c, const std::vector<cplx>& divisor, const surface_point& g) {
    for (auto e : c.branch_points())
        if (std::abs(g.lambda - e) < 1e-8) throw validation_error("spectral_weight: point too close to a branch point");
    cplx num = 1.0;
    for (auto l : divisor) num *= g.lambda - l;
    return num / (2.0 * g.w);
}

// ---------------------------------------------------------------- contour

namespace {

struct union_find {
    std::vector<int> parent;
    explicit union_find(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    int find(int a) { return parent[a] == a ? a : parent[a] = find(parent[a]); }
    void unite(int a, int b) { parent[find(a)] = find(b); }
};

} // namespace

canonical_contour_result canonical_contour(const elliptic_lattice& L, int resolution) {
    if (resolution < 8) throw validation_error("canonical_contour: resolution too low");
    const int N = resolution + (resolution % 2); // even: alpha = 0 sits at a cell centre
    const cplx w1 = L.omega(), w3 = L.omega_prime(), eta = L.eta();
    auto alpha_at = [&](double i, double j) {
        return (-0.5 + (i + 0.5) / N) * 2.0 * w1 + (-0.5 + (j + 0.5) / N) * 2.0 * w3;
    };
    auto F = [&](cplx a) { return (w1 * L.zeta(a) - eta * a).real(); };
    std::vector<double> f(static_cast<std::size_t>(N) * N);
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j) f[i * N + j] = F(alpha_at(i, j));
    auto fv = [&](int i, int j) { return f[((i % N + N) % N) * N + ((j % N + N) % N)]; };

    // Edge ids: horizontal (i,j)-(i+1,j) -> 2*(i*N+j), vertical (i,j)-(i,j+1) -> 2*(i*N+j)+1.
    std::map<int, cplx> vertex;
    double defect = 0.0;
    auto edge_vertex = [&](int i, int j, bool vertical) {
        const int ii = (i % N + N) % N, jj = (j % N + N) % N;
        const int id = 2 * (ii * N + jj) + (vertical ? 1 : 0);
        if (vertex.count(id)) return id;
        double lo = 0.0, hi = 1.0;
        auto at = [&](double t) { return vertical ? alpha_at(ii, jj + t) : alpha_at(ii + t, jj); };
        double flo = F(at(lo));
        for (int it = 0; it < 60; ++it) {
            const double mid = 0.5 * (lo + hi);
            const double fm = F(at(mid));
            if ((fm > 0) == (flo > 0)) {
                lo = mid;
                flo = fm;
            } else {
                hi = mid;
            }
        }
        const cplx a = at(0.5 * (lo + hi));
        defect = std::max(defect, std::abs(F(a)) / (1.0 + std::abs(w1 * L.zeta(a))));
        vertex[id] = a;
        return id;
    };

    std::vector<std::pair<int, int>> segments;
    std::vector<int> seg_cell;
    std::vector<char> contour_cell(static_cast<std::size_t>(N) * N, 0);
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j) {
            const double v0 = fv(i, j), v1 = fv(i + 1, j), v2 = fv(i + 1, j + 1), v3 = fv(i, j + 1);
            std::vector<int> e;
            if ((v0 > 0) != (v1 > 0)) e.push_back(edge_vertex(i, j, false));
            if ((v1 > 0) != (v2 > 0)) e.push_back(edge_vertex(i + 1, j, true));
            if ((v3 > 0) != (v2 > 0)) e.push_back(edge_vertex(i, j + 1, false));
            if ((v0 > 0) != (v3 > 0)) e.push_back(edge_vertex(i, j, true));
            if (e.empty()) continue;
            contour_cell[i * N + j] = 1;
            if (e.size() == 2) {
                segments.push_back({e[0], e[1]});
                seg_cell.push_back(i * N + j);
            } else if (e.size() == 4) {
                // Saddle: pair by the sign at the cell centre.
                const double c = F(alpha_at(i + 0.5, j + 0.5));
                if ((c > 0) == (v0 > 0)) {
                    segments.push_back({e[0], e[1]});
                    segments.push_back({e[2], e[3]});
                } else {
                    segments.push_back({e[0], e[3]});
                    segments.push_back({e[1], e[2]});
                }
                seg_cell.push_back(i * N + j);
                seg_cell.push_back(i * N + j);
            }
        }

    // Components: contour cells joined by 8-neighbourhood on the torus, so
    // crossings that marching squares splits stay in one component.
    union_find uf(N * N);
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j) {
            if (!contour_cell[i * N + j]) continue;
            for (int di = -1; di <= 1; ++di)
                for (int dj = -1; dj <= 1; ++dj) {
                    const int a = ((i + di) % N + N) % N, b = ((j + dj) % N + N) % N;
                    if (contour_cell[a * N + b]) uf.unite(i * N + j, a * N + b);
                }
        }
    const int origin_cell = (N / 2 - 1) * N + (N / 2 - 1);

    // Chain segments into polylines.
    std::map<int, std::vector<int>> adj;
    for (std::size_t s = 0; s < segments.size(); ++s) {
        adj[segments[s].first].push_back(static_cast<int>(s));
        adj[segments[s].second].push_back(static_cast<int>(s));
    }
    std::vector<char> used(segments.size(), 0);
    std::map<int, int> comp_index;
    canonical_contour_result res{{}, N, 0.0};
    auto point_of = [&](int id) {
        const cplx a = vertex.at(id);
        return contour_point{a, -L.p(a), lame_quasimomentum(a, L)};
    };
    for (std::size_t s0 = 0; s0 < segments.size(); ++s0) {
        if (used[s0]) continue;
        // Walk backwards to an open end (if any), then forwards.
        int start_edge = segments[s0].first;
        {
            int cur_seg = static_cast<int>(s0), cur_edge = segments[s0].first;
            std::vector<char> seen(segments.size(), 0);
            seen[cur_seg] = 1;
            while (true) {
                int next = -1;
                for (int t : adj[cur_edge])
                    if (!used[t] && !seen[t]) next = t;
                if (next < 0) break;
                seen[next] = 1;
                cur_edge = segments[next].first == cur_edge ? segments[next].second : segments[next].first;
                cur_seg = next;
            }
            start_edge = cur_edge;
        }
        std::vector<contour_point> line{point_of(start_edge)};
        int cur_edge = start_edge;
        int cell = seg_cell[s0];
        while (true) {
            int next = -1;
            for (int t : adj[cur_edge])
                if (!used[t]) next = t;
            if (next < 0) break;
            used[next] = 1;
            cell = seg_cell[next];
            cur_edge = segments[next].first == cur_edge ? segments[next].second : segments[next].first;
            line.push_back(point_of(cur_edge));
        }
        const int root = uf.find(cell);
        if (!comp_index.count(root)) {
            comp_index[root] = static_cast<int>(res.components.size());
            res.components.push_back({{}, contour_cell[origin_cell] && uf.find(origin_cell) == root, 0.0});
        }
        auto& comp = res.components[comp_index[root]];
        for (auto& p : line) comp.max_imag_lambda = std::max(comp.max_imag_lambda, std::abs(p.lambda.imag()));
        comp.polylines.push_back(std::move(line));
    }
    res.max_level_defect = defect;
    return res;
}

std::string contour_csv(const canonical_contour_result& c) {
    std::ostringstream os;
    os.precision(12);
    os << "component,polyline,re_alpha,im_alpha,re_lambda,im_lambda,re_p,im_p\n";
    for (std::size_t k = 0; k < c.components.size(); ++k)
        for (std::size_t l = 0; l < c.components[k].polylines.size(); ++l)
            for (auto& p : c.components[k].polylines[l])
                os << k << ',' << l << ',' << p.alpha.real() << ',' << p.alpha.imag() << ',' << p.lambda.real() << ','
                   << p.lambda.imag() << ',' << p.p.real() << ',' << p.p.imag() << '\n';
    return os.str();
}

// ---------------------------------------------------------------- bloch points

namespace {

// Newton for p(alpha) = target starting at alpha.
cplx solve_p(const elliptic_lattice& L, cplx alpha, double target) {
    const cplx c = L.eta() / L.omega();
    for (int it = 0; it < 50; ++it) {
        const cplx d = I * (L.p(alpha) + c);
        if (std::abs(d) < 1e-8) throw validation_error("bloch_points: dp vanishes on the contour (singular contour)");
        const cplx step = (lame_quasimomentum(alpha, L) - target) / d;
        alpha -= step;
        if (std::abs(step) < 1e-14 * std::max(1.0, std::abs(alpha))) return alpha;
    }
    throw convergence_error("bloch_points: Newton did not converge");
}

// Continues the solution of p(alpha) = q from q0 to q1 with small steps.
cplx continue_p(const elliptic_lattice& L, cplx alpha, double q0, double q1, double max_step) {
    const int n = std::max(1, static_cast<int>(std::ceil(std::abs(q1 - q0) / max_step)));
    const cplx c = L.eta() / L.omega();
    for (int k = 1; k <= n; ++k) {
        const double q = q0 + (q1 - q0) * k / n;
        const double dq = (q1 - q0) / n;
        alpha += dq / (I * (L.p(alpha) + c)); // predictor
        alpha = solve_p(L, alpha, q);
    }
    return alpha;
}

} // namespace

std::vector<bloch_point> bloch_points(const elliptic_lattice& L, double phi0, int N) {
    if (std::abs(L.omega().imag()) > 1e-14 || L.omega().real() <= 0)
        throw validation_error("bloch_points: need a real half-period omega");
    if (N < 0) throw validation_error("bloch_points: need N >= 0");
    const double w = L.omega().real();
    const double dp = pi / w;
    const cplx c0 = lame_c0(L);
    std::vector<bloch_point> out;
    // Labels come from the representative in the centred cell, where
    // p ~ -i / alpha ~ k near alpha = 0.
    auto make = [&](cplx a, bool finite) {
        const cplx a0 = L.reduce(a).z0;
        const cplx lam = -L.p(a0);
        if (std::abs(lam + c0) < 1e-10) throw validation_error("bloch_points: non-generic multiplier");
        return bloch_point{a0, lam, lame_quasimomentum(a0, L).real(), finite, 1.0 / (lam + c0)};
    };

    // Infinite component: p runs over R; near alpha = 0, p ~ -i / alpha.
    const double big = std::abs(phi0) + dp * (N + 4) + 10.0;
    cplx a = solve_p(L, I / big, -big);
    double q = -big;
    const double max_step = std::min(0.2, 0.25 * dp);
    for (int j = -N - 2; j <= N + 2; ++j) {
        const double target = phi0 + dp * j;
        a = continue_p(L, a, q, target, max_step);
        q = target;
        auto b = make(a, false);
        if (std::abs(b.p - phi0) <= dp * N + 1e-9) out.push_back(b);
    }

    // Finite components: closed loops avoiding alpha = 0, each carrying one
    // point per period of p.
    const auto cont = canonical_contour(L, 64);
    for (auto& comp : cont.components) {
        if (comp.through_infinity) continue;
        const auto& start = comp.polylines.front().front();
        cplx as = solve_p(L, start.alpha, start.p.real());
        const double ps = lame_quasimomentum(as, L).real();
        double shift = std::fmod(phi0 - ps, dp);
        if (shift < 0) shift += dp;
        cplx at = continue_p(L, as, ps, ps + shift, max_step);
        out.push_back(make(at, true));
        // The loop must close after one period of p.
        cplx back = continue_p(L, at, ps + shift, ps + dp, max_step);
        if (std::abs(back - as - (L.nearest_lattice_point(back - as))) > 1e-6)
            throw validation_error("bloch_points: finite component does not close after one period");
    }
    std::sort(out.begin(), out.end(), [](const bloch_point& l, const bloch_point& r) { return l.p < r.p; });
    return out;
}

// ---------------------------------------------------------------- Hill discriminant

lame_hill::lame_hill(const elliptic_lattice& L, int n, int steps) : n_(n), steps_(steps) {
    if (std::abs(L.omega().imag()) > 1e-14) throw validation_error("lame_hill: need a real half-period omega");
    if (n < 1) throw validation_error("lame_hill: need n >= 1");
    T_ = 2.0 * L.omega().real();
    // Midline between rows of poles.
    z0_ = L.omega_prime().imag() > 0 ? L.omega_prime() : -L.omega_prime();
    z0_ = cplx(0.0, z0_.imag());
    scale_ = std::max({std::abs(L.e1()), std::abs(L.e2()), std::abs(L.e3())});
    const double nn = static_cast<double>(n) * (n + 1);
    const double h = T_ / steps_;
    u_.resize(2 * steps_ + 1);
    for (int k = 0; k <= 2 * steps_; ++k) u_[k] = nn * L.p(z0_ + 0.5 * h * k);
}

cplx lame_hill::discriminant(double lambda) const {
    const double h = T_ / steps_;
    // Two solutions at once: (y1, y1', y2, y2').
    cplx a = 1.0, ap = 0.0, b = 0.0, bp = 1.0;
    for (int k = 0; k < steps_; ++k) {
        const cplx q0 = u_[2 * k] - lambda, q1 = u_[2 * k + 1] - lambda, q2 = u_[2 * k + 2] - lambda;
        auto rk = [&](cplx& y, cplx& yp) {
            const cplx k1 = yp, l1 = q0 * y;
            const cplx k2 = yp + 0.5 * h * l1, l2 = q1 * (y + 0.5 * h * k1);
            const cplx k3 = yp + 0.5 * h * l2, l3 = q1 * (y + 0.5 * h * k2);
            const cplx k4 = yp + h * l3, l4 = q2 * (y + h * k3);
            y += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            yp += h / 6.0 * (l1 + 2.0 * l2 + 2.0 * l3 + l4);
        };
        rk(a, ap);
        rk(b, bp);
    }
    return 0.5 * (a + bp);
}

std::vector<double> lame_hill::band_edges() const {
    const double nn = static_cast<double>(n_) * (n_ + 1);
    const double lo = -nn * scale_ * 3.0 - 5.0;
    const double hi = nn * scale_ * 3.0 + 10.0;
    const int expected = 2 * n_ + 1;
    for (int M = 4000; M <= 64000; M *= 2) {
        std::vector<double> roots;
        for (double sgn : {1.0, -1.0}) {
            auto g = [&](double l) { return discriminant(l).real() - sgn; };
            std::vector<double> r;
            double xa = lo, ga = g(lo);
            for (int i = 1; i <= M; ++i) {
                const double xb = lo + (hi - lo) * i / M;
                const double gb = g(xb);
                if ((ga > 0) != (gb > 0)) {
                    double a = xa, b = xb, fa = ga;
                    for (int it = 0; it < 60; ++it) {
                        const double m = 0.5 * (a + b);
                        const double fm = g(m);
                        if ((fm > 0) == (fa > 0)) {
                            a = m;
                            fa = fm;
                        } else {
                            b = m;
                        }
                    }
                    r.push_back(0.5 * (a + b));
                }
                xa = xb;
                ga = gb;
            }
            // Closed gaps give pairs of nearby roots; drop them.
            std::vector<double> kept;
            for (std::size_t i = 0; i < r.size(); ++i) {
                if (i + 1 < r.size() && r[i + 1] - r[i] < 1e-4 * (1.0 + std::abs(r[i]))) {
                    ++i;
                    continue;
                }
                kept.push_back(r[i]);
            }
            roots.insert(roots.end(), kept.begin(), kept.end());
        }
        std::sort(roots.begin(), roots.end());
        if (static_cast<int>(roots.size()) == expected) return roots;
    }
    throw convergence_error("lame_hill: could not isolate 2n+1 band edges");
}

census_report measure_sign_census(const elliptic_lattice& L, int n, double phi0, int count) {
    if (count < 1) throw validation_error("measure_sign_census: count must be positive");
    lame_hill hill(L, n);
    const double T = hill.period();
    const double target = std::cos(phi0 * T);
    if (std::abs(std::abs(target) - 1.0) < 1e-8)
        throw validation_error("measure_sign_census: non-generic multiplier (band edge)");
    census_report rep;
    rep.band_edges = hill.band_edges();
    std::vector<cplx> E(rep.band_edges.begin(), rep.band_edges.end());
    const auto chart = quasimomentum(hyperelliptic_curve(E), 512);
    auto g = [&](double l) { return hill.discriminant(l).real() - target; };
    auto bisect = [&](double a, double b) {
        double fa = g(a);
        for (int it = 0; it < 60; ++it) {
            const double m = 0.5 * (a + b);
            const double fm = g(m);
            if ((fm > 0) == (fa > 0)) {
                a = m;
                fa = fm;
            } else {
                b = m;
            }
        }
        return 0.5 * (a + b);
    };
    const int gen = n;
    for (int i = 0; i < gen && static_cast<int>(rep.lambdas.size()) < count; ++i)
        rep.lambdas.push_back(bisect(rep.band_edges[2 * i], rep.band_edges[2 * i + 1]));
    double a = rep.band_edges[2 * gen];
    double ga = g(a);
    while (static_cast<int>(rep.lambdas.size()) < count) {
        const double step = std::min(0.05 * (1.0 + std::abs(a)), std::max(0.01, std::sqrt(std::abs(a)) * pi / (8.0 * T)));
        const double b = a + step;
        const double gb = g(b);
        if ((ga > 0) != (gb > 0)) rep.lambdas.push_back(bisect(a, b));
        a = b;
        ga = gb;
    }
    for (double l : rep.lambdas) {
        const double s = chart.numerator(l).real();
        rep.signs.push_back(s < 0 ? -1 : 1);
        if (s < 0) ++rep.negative;
    }
    return rep;
}

} // namespace singspec

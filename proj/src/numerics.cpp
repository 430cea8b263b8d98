#include "singspec/numerics.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <numbers>
#include <queue>
#include <thread>

namespace singspec {

namespace {

constexpr double pi = std::numbers::pi;

// Gauss-Kronrod 7/15 abscissae and weights on [-1,1].
constexpr std::array<double, 8> xgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> wgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> wg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct panel {
    int seg;
    double s0, s1;
    cplx value;
    double error;
    bool operator<(const panel& o) const { return error < o.error; }
};

panel eval_panel(const complex_fn& f, const path_segment& seg, int idx, double s0, double s1) {
    const double c = 0.5 * (s0 + s1), h = 0.5 * (s1 - s0);
    auto g = [&](double s) { return f(seg.point(s)) * seg.tangent(s); };
    cplx fc = g(c);
    cplx kron = fc * wgk[7];
    cplx gauss = fc * wg[3];
    for (int j = 0; j < 7; ++j) {
        cplx f1 = g(c - h * xgk[j]);
        cplx f2 = g(c + h * xgk[j]);
        kron += wgk[j] * (f1 + f2);
        if (j % 2 == 1) gauss += wg[j / 2] * (f1 + f2);
    }
    kron *= h;
    gauss *= h;
    return {idx, s0, s1, kron, std::abs(kron - gauss)};
}

} // namespace

path_segment path_segment::line(cplx from, cplx to) {
    path_segment s;
    s.type = kind::line;
    s.a = from;
    s.b = to;
    return s;
}

path_segment path_segment::arc(cplx center, double radius, double theta0, double theta1) {
    path_segment s;
    s.type = kind::arc;
    s.center = center;
    s.radius = radius;
    s.theta0 = theta0;
    s.theta1 = theta1;
    return s;
}

cplx path_segment::point(double s) const {
    if (type == kind::line) return a + (b - a) * s;
    double th = theta0 + (theta1 - theta0) * s;
    return center + radius * std::polar(1.0, th);
}

cplx path_segment::tangent(double s) const {
    if (type == kind::line) return b - a;
    double th = theta0 + (theta1 - theta0) * s;
    return cplx(0.0, 1.0) * radius * std::polar(1.0, th) * (theta1 - theta0);
}

quad_result integrate_path(const complex_fn& f, const path& p, const quad_options& opt) {
    if (p.empty()) return {0.0, 0.0, 0};
    std::priority_queue<panel> heap;
    cplx total = 0.0;
    double err = 0.0;
    for (int i = 0; i < static_cast<int>(p.size()); ++i) {
        for (int k = 0; k < 4; ++k) {
            panel pn = eval_panel(f, p[i], i, k / 4.0, (k + 1) / 4.0);
            total += pn.value;
            err += pn.error;
            heap.push(pn);
        }
    }
    int panels = static_cast<int>(heap.size());
    while (err > std::max(opt.rel_tol * std::abs(total), opt.abs_tol)) {
        if (panels >= opt.max_panels) {
            const panel& worst = heap.top();
            cplx where = p[worst.seg].point(0.5 * (worst.s0 + worst.s1));
            throw quadrature_error("integrate_path: tolerance not reached", where, err);
        }
        panel worst = heap.top();
        heap.pop();
        double mid = 0.5 * (worst.s0 + worst.s1);
        panel l = eval_panel(f, p[worst.seg], worst.seg, worst.s0, mid);
        panel r = eval_panel(f, p[worst.seg], worst.seg, mid, worst.s1);
        total += l.value + r.value - worst.value;
        err += l.error + r.error - worst.error;
        heap.push(l);
        heap.push(r);
        ++panels;
        if (!std::isfinite(std::abs(total)))
            throw quadrature_error("integrate_path: non-finite integrand",
                                   p[worst.seg].point(mid), err);
    }
    // Resum to limit drift from incremental updates.
    total = 0.0;
    err = 0.0;
    while (!heap.empty()) {
        total += heap.top().value;
        err += heap.top().error;
        heap.pop();
    }
    return {total, err, panels};
}

path detour_path(double a, double b, const std::vector<double>& points, double radius,
                 bool upper) {
    if (!(b > a)) throw validation_error("detour_path: need a < b");
    std::vector<double> pts;
    for (double x : points)
        if (x > a - radius && x < b + radius) pts.push_back(x);
    std::sort(pts.begin(), pts.end());
    for (std::size_t i = 1; i < pts.size(); ++i)
        if (pts[i] - pts[i - 1] < 2.0 * radius)
            throw validation_error("detour_path: detour radius exceeds half the gap");
    for (double x : pts)
        if (x - radius < a - 1e-15 || x + radius > b + 1e-15)
            throw validation_error("detour_path: singular point too close to an endpoint");
    path out;
    double cur = a;
    for (double x : pts) {
        if (x - radius > cur) out.push_back(path_segment::line(cur, x - radius));
        if (upper)
            out.push_back(path_segment::arc(x, radius, pi, 0.0));
        else
            out.push_back(path_segment::arc(x, radius, -pi, 0.0));
        cur = x + radius;
    }
    if (b > cur) out.push_back(path_segment::line(cur, b));
    return out;
}

path circle_path(cplx center, double radius) {
    return {path_segment::arc(center, radius, 0.0, pi), path_segment::arc(center, radius, pi, 2 * pi)};
}

polynomial::polynomial(std::vector<cplx> coeffs) : c_(std::move(coeffs)) {
    if (c_.empty()) c_.push_back(0.0);
}

cplx polynomial::operator()(cplx z) const {
    cplx r = 0.0;
    for (auto it = c_.rbegin(); it != c_.rend(); ++it) r = r * z + *it;
    return r;
}

polynomial polynomial::derivative() const {
    if (c_.size() <= 1) return polynomial({0.0});
    std::vector<cplx> d(c_.size() - 1);
    for (std::size_t i = 1; i < c_.size(); ++i) d[i - 1] = c_[i] * static_cast<double>(i);
    return polynomial(d);
}

polynomial polynomial::operator*(const polynomial& o) const {
    std::vector<cplx> r(c_.size() + o.c_.size() - 1, 0.0);
    for (std::size_t i = 0; i < c_.size(); ++i)
        for (std::size_t j = 0; j < o.c_.size(); ++j) r[i + j] += c_[i] * o.c_[j];
    return polynomial(r);
}

polynomial polynomial::operator+(const polynomial& o) const {
    std::vector<cplx> r(std::max(c_.size(), o.c_.size()), 0.0);
    for (std::size_t i = 0; i < c_.size(); ++i) r[i] += c_[i];
    for (std::size_t i = 0; i < o.c_.size(); ++i) r[i] += o.c_[i];
    return polynomial(r);
}

polynomial& polynomial::normalize(double tol) {
    while (c_.size() > 1 && std::abs(c_.back()) <= tol) c_.pop_back();
    return *this;
}

root_result poly_roots(const polynomial& p_in, double tol, int max_iter) {
    polynomial p = p_in;
    p.normalize();
    const int n = p.degree();
    if (n < 1) throw validation_error("poly_roots: polynomial must have degree >= 1");
    const auto& c = p.coeffs();
    polynomial dp = p.derivative();

    // Initial guesses on a circle whose radius follows the Fujiwara bound.
    double rad = 0.0;
    for (int i = 0; i < n; ++i) {
        double v = std::pow(std::abs(c[i] / c[n]), 1.0 / (n - i));
        rad = std::max(rad, v);
    }
    rad = std::max(rad, 1e-3);
    std::vector<cplx> z(n);
    for (int k = 0; k < n; ++k) z[k] = 0.5 * rad * std::polar(1.0, 2 * pi * k / n + 0.4);

    auto backward = [&](cplx r) {
        double s = 0.0, ar = std::abs(r), pw = 1.0;
        for (int i = 0; i <= n; ++i) {
            s += std::abs(c[i]) * pw;
            pw *= ar;
        }
        return std::abs(p(r)) / s;
    };

    bool done = false;
    for (int it = 0; it < max_iter && !done; ++it) {
        done = true;
        for (int k = 0; k < n; ++k) {
            cplx pv = p(z[k]);
            if (pv == cplx(0.0)) continue;
            cplx ratio = pv / dp(z[k]);
            cplx sum = 0.0;
            for (int j = 0; j < n; ++j)
                if (j != k) sum += 1.0 / (z[k] - z[j]);
            cplx w = ratio / (1.0 - ratio * sum);
            if (!std::isfinite(std::abs(w))) continue;
            z[k] -= w;
            if (std::abs(w) > tol * std::max(1.0, std::abs(z[k])) && backward(z[k]) > 1e-15)
                done = false;
        }
    }
    for (int k = 0; k < n; ++k) {
        for (int s = 0; s < 5; ++s) {
            cplx d = dp(z[k]);
            if (std::abs(d) == 0.0) break;
            cplx step = p(z[k]) / d;
            cplx trial = z[k] - step;
            if (backward(trial) <= backward(z[k])) z[k] = trial;
        }
    }
    root_result res;
    res.roots = z;
    res.max_residual = 0.0;
    for (auto r : z) res.max_residual = std::max(res.max_residual, backward(r));
    std::vector<bool> used(n, false);
    for (int k = 0; k < n; ++k) {
        if (used[k]) continue;
        cplx sum = z[k];
        int m = 1;
        used[k] = true;
        for (int j = k + 1; j < n; ++j)
            if (!used[j] && std::abs(z[j] - z[k]) < 1e-6 * std::max(1.0, std::abs(z[k]))) {
                used[j] = true;
                sum += z[j];
                ++m;
            }
        res.clusters.push_back({sum / static_cast<double>(m), m});
    }
    return res;
}

cplx derivative(const complex_fn& f, cplx z, int order, double h) {
    if (order < 0 || order > 4) throw validation_error("derivative: order must be in 0..4");
    if (order == 0) return f(z);
    static constexpr double scale[4] = {1.0, 2.5, 6.0, 12.0};
    if (h <= 0.0) h = std::max(1e-3, std::abs(z) * 1e-3) * scale[order - 1];
    auto stencil = [&](double s) -> cplx {
        switch (order) {
        case 1: return (f(z + s) - f(z - s)) / (2 * s);
        case 2: return (f(z + s) - 2.0 * f(z) + f(z - s)) / (s * s);
        case 3:
            return (f(z + 2 * s) - 2.0 * f(z + s) + 2.0 * f(z - s) - f(z - 2 * s)) /
                   (2 * s * s * s);
        default:
            return (f(z + 2 * s) - 4.0 * f(z + s) + 6.0 * f(z) - 4.0 * f(z - s) +
                    f(z - 2 * s)) /
                   (s * s * s * s);
        }
    };
    cplx d1 = stencil(h), d2 = stencil(0.5 * h);
    return (4.0 * d2 - d1) / 3.0;
}

std::vector<cplx> laurent_coefficients(const complex_fn& f, cplx z0, double radius, int kmin,
                                       int kmax, int nodes) {
    if (radius <= 0 || nodes < 4) throw validation_error("laurent_coefficients: bad circle");
    std::vector<cplx> vals(nodes);
    for (int j = 0; j < nodes; ++j) vals[j] = f(z0 + radius * std::polar(1.0, 2 * pi * j / nodes));
    std::vector<cplx> out;
    for (int k = kmin; k <= kmax; ++k) {
        cplx s = 0.0;
        for (int j = 0; j < nodes; ++j) s += vals[j] * std::polar(1.0, -2 * pi * j * k / nodes);
        out.push_back(s / (static_cast<double>(nodes) * std::pow(radius, k)));
    }
    return out;
}

std::vector<cplx> taylor_coefficients(const complex_fn& f, cplx z0, double radius, int order,
                                      int nodes) {
    return laurent_coefficients(f, z0, radius, 0, order, nodes);
}

namespace {
std::atomic<int> g_threads{0};
}

void set_thread_count(int n) {
    if (n < 0) throw validation_error("set_thread_count: need n >= 0");
    g_threads = n;
}

int thread_count() {
    const int n = g_threads.load();
    if (n > 0) return n;
    return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
    const std::size_t workers = std::min<std::size_t>(n, thread_count());
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) {
                try {
                    body(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!error) error = std::current_exception();
                }
            }
        });
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

} // namespace singspec

#pragma once

#include <complex>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace singspec {

using cplx = std::complex<double>;
using complex_fn = std::function<cplx(cplx)>;

// Base for all library errors that carry a validation meaning.
class validation_error : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Thrown when an iterative or adaptive routine fails to reach its tolerance.
class convergence_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class quadrature_error : public convergence_error {
public:
    quadrature_error(const std::string& what, cplx where, double estimate)
        : convergence_error(what), location(where), error_estimate(estimate) {}
    cplx location;
    double error_estimate;
};

// A piece of an integration contour: a straight segment or a circular arc.
struct path_segment {
    enum class kind { line, arc };
    kind type = kind::line;
    cplx a{}, b{};           // line endpoints
    cplx center{};           // arc data
    double radius = 0.0;
    double theta0 = 0.0, theta1 = 0.0;

    static path_segment line(cplx from, cplx to);
    static path_segment arc(cplx center, double radius, double theta0, double theta1);

    cplx point(double s) const;       // s in [0,1]
    cplx tangent(double s) const;     // dz/ds
    cplx start() const { return point(0.0); }
    cplx end() const { return point(1.0); }
};

using path = std::vector<path_segment>;

struct quad_options {
    double rel_tol = 1e-12;
    double abs_tol = 1e-13;
    int max_panels = 20000;
};

struct quad_result {
    cplx value;
    double error;
    int panels;
};

// Adaptive Gauss-Kronrod (7/15) over a path, global error control.
quad_result integrate_path(const complex_fn& f, const path& p, const quad_options& opt = {});

// Real interval [a,b] with semicircular detours of the given radius around
// each point in `points` lying on the interval. Upper or lower half plane.
path detour_path(double a, double b, const std::vector<double>& points, double radius,
                 bool upper = true);

// Circle of given radius traversed counterclockwise.
path circle_path(cplx center, double radius);

// Coefficients in ascending order: c[0] + c[1] z + ...
class polynomial {
public:
    polynomial() = default;
    explicit polynomial(std::vector<cplx> coeffs);

    cplx operator()(cplx z) const;
    int degree() const { return static_cast<int>(c_.size()) - 1; }
    const std::vector<cplx>& coeffs() const { return c_; }
    polynomial derivative() const;
    polynomial operator*(const polynomial& o) const;
    polynomial operator+(const polynomial& o) const;
    polynomial& normalize(double tol = 0.0);

private:
    std::vector<cplx> c_;
};

struct root_cluster {
    cplx value;
    int multiplicity;
};

struct root_result {
    std::vector<cplx> roots;            // with repetition
    std::vector<root_cluster> clusters; // merged at 1e-6
    double max_residual;                // backward error, relative
};

// Aberth-Ehrlich simultaneous iteration followed by Newton polishing.
root_result poly_roots(const polynomial& p, double tol = 1e-14, int max_iter = 500);

// Central finite difference with one Richardson extrapolation step.
// h <= 0 selects a default step depending on |z| and the order.
cplx derivative(const complex_fn& f, cplx z, int order, double h = 0.0);

// Taylor coefficients a_0..a_order of f about z0 from the Cauchy integral on
// a circle of the given radius (trapezoidal rule, exact for analytic f up to
// aliasing).
std::vector<cplx> taylor_coefficients(const complex_fn& f, cplx z0, double radius, int order,
                                      int nodes = 64);

// Laurent coefficients c_k for k in [kmin, kmax] on a circle.
std::vector<cplx> laurent_coefficients(const complex_fn& f, cplx z0, double radius, int kmin,
                                       int kmax, int nodes = 256);

// Worker count for parallel loops; 0 selects the hardware concurrency.
void set_thread_count(int n);
int thread_count();

// Calls body(i) for i in [0, n) on up to thread_count() threads. Each index
// is visited exactly once; results written by index are deterministic.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

} // namespace singspec

#pragma once

#include "singspec/numerics.hpp"
#include "singspec/potentials.hpp"

#include <functional>
#include <memory>
#include <utility>
#include <vector>

namespace singspec {

// Eigenfunction of some operator -d^2 + u at level lambda, evaluated
// together with its derivative.
struct wave {
    std::function<std::pair<cplx, cplx>(cplx)> eval;
    cplx lambda;

    cplx value(cplx z) const { return eval(z).first; }
    cplx log_derivative(cplx z) const;
};

// Window on which seeds are scanned for real zeros and residuals sampled.
struct step_options {
    double window_a = -10.0;
    double window_b = 10.0;
    double zero_distance = 1e-3;   // a zero closer than this to R counts as real
    bool allow_real_zeros = false; // vacuum dressing deliberately creates poles
    double residual_tol = 1e-8;
};

class seed_vanishes_error : public validation_error {
public:
    seed_vanishes_error(const std::string& what, double at) : validation_error(what), point(at) {}
    double point;
};

// One step u -> u1 = u - 2 (log psi)'' = -u + 2l + 2 chi^2.
class darboux_step {
public:
    darboux_step(potential source, wave seed, const step_options& opt = {});

    cplx level() const { return seed_.lambda; }
    const wave& seed() const { return seed_; }
    const potential& source() const { return source_; }
    const potential& target() const { return target_; }
    cplx chi(cplx z) const { return seed_.log_derivative(z); }
    double seed_residual() const { return seed_residual_; }

private:
    potential source_;
    wave seed_;
    potential target_;
    double seed_residual_ = 0.0;
};

// (lambda - l)^{-1} (Psi' - chi Psi); an eigenfunction of the target.
wave dress_eigenfunction(const darboux_step& step, const wave& psi);

struct darboux_chain {
    potential base;
    std::vector<darboux_step> steps;
    // order_table[k][j]: order at the j-th base singular point after k steps.
    std::vector<double> points;
    std::vector<std::vector<int>> order_table;

    const potential& final_potential() const { return steps.empty() ? base : steps.back().target(); }
    std::vector<cplx> levels() const;
    // Applies every step in order.
    wave dress(const wave& psi) const;
};

// seeds[k] is an eigenfunction of the base potential; it is dressed through
// the first k steps before being used at step k+1.
darboux_chain smoothing_chain(const potential& base, const std::vector<wave>& seeds,
                              const step_options& opt = {});

// Chain smoothing n(n+1)/x^2 with seeds at lambda = k_m^2.
darboux_chain rational_smoothing_chain(int n, const std::vector<cplx>& ks, const step_options& opt = {});

// Eigenfunction of n(n+1)/x^2 at lambda = k^2 normalized to e^{ikx}(1 + O(1/x)).
wave dress_from_vacuum(int n, cplx k);
// Vacuum chain 0 -> 2/x^2 -> ... -> n(n+1)/x^2 with seeds x^m at lambda = 0.
darboux_chain vacuum_chain(int n);

// Order of a singularity of u at xj (0 when u is regular there).
int detect_order(const potential& u, double xj, double r = 0.25);

// Local operator calculus on truncated Taylor series around a point.
class taylor_series {
public:
    taylor_series() = default;
    explicit taylor_series(std::vector<cplx> c) : c_(std::move(c)) {}
    static taylor_series of(const complex_fn& f, cplx z0, double r, int order);

    cplx value() const { return c_.empty() ? cplx(0.0) : c_[0]; }
    std::size_t size() const { return c_.size(); }
    const std::vector<cplx>& coefficients() const { return c_; }
    taylor_series derivative() const;
    taylor_series operator*(const taylor_series& o) const;
    taylor_series operator+(const taylor_series& o) const;
    taylor_series operator-(const taylor_series& o) const;
    taylor_series operator*(cplx s) const;

private:
    std::vector<cplx> c_;
};

struct residual_report {
    double factorization = 0.0; // (L - l) f vs Q* Q f, and (L1 - l) f vs Q Q* f
    double intertwining = 0.0;  // Q (L - mu) f vs (L1 - mu) Q f
};

// Relative residuals at the samples for test functions fs and spectral
// parameters mus.
residual_report step_residuals(const darboux_step& step, const std::vector<complex_fn>& fs,
                               const std::vector<double>& samples, const std::vector<cplx>& mus);

// max |(Q_n..Q_1 Q_1*..Q_n*) f - prod_k (L_n - l_k) f| over samples,
// relative to the size of the right-hand side.
double m_operator_residual(const darboux_chain& chain, const complex_fn& f, const std::vector<double>& samples);

// Max |-psi'' + u psi - lambda psi| / (|psi| + |u psi|) at the samples.
double eigen_residual(const potential& u, const wave& psi, const std::vector<double>& samples);

struct regularity_report {
    bool regular;
    double max_abs;           // max |u| on the scan grid
    double pole_distance_est; // sqrt(2 / max_abs)
};
// Real-line scan: a double pole at distance d gives |u| ~ 2/d^2 nearby.
regularity_report regularity_scan(const potential& u, double a, double b, double min_distance = 1e-3);

} // namespace singspec

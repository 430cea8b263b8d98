#pragma once

#include "singspec/elliptic.hpp"
#include "singspec/fx_space.hpp"
#include "singspec/numerics.hpp"
#include "singspec/potentials.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace singspec {

// Gauss-Legendre rule along a path; weights include dz/ds.
struct quad_node {
    cplx z;
    cplx w;
};
using quad_rule = std::vector<quad_node>;

// Panels no longer than h on every segment, `order` nodes per panel.
quad_rule path_rule(const path& p, double h, int order = 20);

// Real interval [a, b] with upper semicircular detours around `points`.
quad_rule line_rule(double a, double b, const std::vector<double>& points, double h,
                    double detour_radius = 0.1, int order = 20);

// ------------------------------------------------------------ continuous

// A point of the spectral contour Im p = 0. `param` is k (rational and
// soliton families) or alpha (Lame). `measure` is the p-quadrature weight
// divided by the numerator of dp, so that
//   f(x) = sum measure * fhat * Psi(x) + discrete levels.
struct spectral_node {
    cplx param;
    cplx p;
    cplx lambda;
    cplx measure;
};

// A bound state psi with Psi* = psi and regularized norm of psi^2.
struct discrete_level {
    cplx lambda;
    complex_fn psi;
    cplx norm;
};

class continuous_family {
public:
    virtual ~continuous_family() = default;
    virtual std::string name() const = 0;
    virtual cplx psi(cplx x, cplx param) const = 0;
    // Psi*(y, gamma) = Psi(y, sigma gamma).
    virtual cplx psi_star(cplx y, cplx param) const = 0;
    // Nodes on |Re p| <= K with panels of length h in p. Cutoffs that are
    // multiples of h split the node set exactly.
    virtual std::vector<spectral_node> nodes(double K, double h) const = 0;
    virtual std::vector<double> singular_points(double a, double b) const = 0;
    virtual std::vector<discrete_level> levels() const { return {}; }
};

using family_ptr = std::shared_ptr<const continuous_family>;

// u = 0, Psi = e^{ikx}.
family_ptr vacuum_line();
// u = n(n+1)/(x-a)^2, Psi = e^{ikx} sum_m b_m (i/(k(x-a)))^m. The k path
// passes above k = 0 on a semicircle of the given radius.
family_ptr rational_line(int n, cplx a = 0.0, double detour = 0.25);
// u = 2 kappa^2 / sinh^2(kappa x) with the bound state 1/sinh(kappa x) at
// lambda = -kappa^2.
family_ptr sinh_line(double kappa);
// u = 2 p(x + shift) on a rectangular lattice (omega real, omega' imaginary).
family_ptr lame_line(const elliptic_lattice& L, cplx shift);

struct transform_sample {
    spectral_node node;
    cplx value; // fhat
};

// fhat(gamma) = (1/2pi) sum over the y rule of Psi*(y, gamma) f(y).
cplx forward_continuous(const continuous_family& fam, const complex_fn& f, const quad_rule& y, cplx param);

std::vector<transform_sample> transform_continuous(const continuous_family& fam, const complex_fn& f,
                                                   const quad_rule& y, double K, double h);

// Residue of f Psi*(., gamma) at each singular point of the family inside
// [a, b]; throws form_domain_error above tol (relative to the circle mean of
// |f Psi*|).
void check_residues(const continuous_family& fam, const complex_fn& f, double a, double b,
                    const std::vector<cplx>& params, double radius = 0.05, double tol = 1e-8);

// Level coefficients <f, psi_m> / <psi_m, psi_m>.
std::vector<cplx> level_coefficients(const continuous_family& fam, const complex_fn& f, const quad_rule& y);

// Sum over samples with |Re p| <= K of measure * fhat * Psi(x), plus
// the level terms when given.
cplx synthesize_continuous(const continuous_family& fam, const std::vector<transform_sample>& samples, cplx x,
                           double K, const std::vector<cplx>& level_coeffs = {});

struct reconstruction_table {
    std::vector<double> cutoffs;
    std::vector<double> xs;
    std::vector<std::vector<cplx>> values; // values[c][i]
    std::vector<double> max_error;         // per cutoff, when a reference was given
};

// Cutoffs must be multiples of h. A single cutoff K expands to K, 2K, 4K.
reconstruction_table reconstruct_continuous(const continuous_family& fam, const complex_fn& f,
                                            const quad_rule& y, const std::vector<double>& xs,
                                            std::vector<double> cutoffs, double h,
                                            const complex_fn& reference = nullptr);

struct kernel_split {
    double cutoff;
    double x, y;
    cplx total;
    cplx classical;
    cplx correction; // total - classical
};

// S(K, x, y) = integral over |p| <= K of Psi(x) Psi*(y) / N(lambda) dp;
// classical part 2 sin(K (x - y)) / (x - y).
kernel_split continuous_kernel(const continuous_family& fam, double K, double x, double y, double h);
// Same on the grid xs x ys (row-major in xs), sharing one node set.
std::vector<kernel_split> continuous_kernel_grid(const continuous_family& fam, double K,
                                                 const std::vector<double>& xs, const std::vector<double>& ys,
                                                 double h);

// fhat for u = n(n+1)/(x-a)^2 through the vacuum:
// (-ik)^{-n} (1/2pi) integral e^{-iky} (Q_1* ... Q_n* f)(y) dy with
// Q_m* = -d/dy - m/(y-a). Derivatives of f by Cauchy integrals of the
// given radius around each node.
cplx darboux_route_transform(int n, cplx a, const complex_fn& f, const quad_rule& y, cplx k,
                             double cauchy_radius = 0.02);

// ------------------------------------------------------------ discrete

struct bloch_mode {
    int j;
    cplx param;
    double p;
    cplx lambda;
    cplx weight; // 1 / N(lambda): inverse of the period mean of Psi Psi*
    bool finite_band;
};

class periodic_family {
public:
    virtual ~periodic_family() = default;
    virtual std::string name() const = 0;
    virtual double period() const = 0;
    virtual double phi0() const = 0;
    virtual cplx psi(cplx x, cplx param) const = 0;
    virtual cplx psi_star(cplx y, cplx param) const = 0;
    // Modes with |(p - phi0) T| <= 2 pi N, ordered by j.
    virtual std::vector<bloch_mode> modes(int N) const = 0;
    virtual std::vector<double> singular_points(double a, double b) const = 0;
};

using periodic_ptr = std::shared_ptr<const periodic_family>;

periodic_ptr vacuum_periodic(double period, double phi0);
// u = 2 p(x + shift); omega must be real.
periodic_ptr lame_periodic(const elliptic_lattice& L, cplx shift, double phi0);

struct discrete_options {
    int panels = 128;   // per period
    int order = 20;
    double detour_radius = 0.1;
};

// fhat_j = (1/T) integral over [base, base + T] of Psi*(y, kappa_j) f(y).
cplx forward_discrete(const periodic_family& fam, const complex_fn& f, const bloch_mode& m, double base = 0.0,
                      const discrete_options& opt = {});
std::vector<cplx> transform_discrete(const periodic_family& fam, const complex_fn& f,
                                     const std::vector<bloch_mode>& modes, double base = 0.0,
                                     const discrete_options& opt = {});

// sum_{|j| <= N} fhat_j weight_j Psi(x, kappa_j).
cplx synthesize_discrete(const periodic_family& fam, const std::vector<bloch_mode>& modes,
                         const std::vector<cplx>& fhat, cplx x, int N);

// Cutoffs in N; coefficients computed once at the largest.
reconstruction_table reconstruct_discrete(const periodic_family& fam, const complex_fn& f,
                                          const std::vector<double>& xs, const std::vector<int>& cutoffs,
                                          const complex_fn& reference = nullptr,
                                          const discrete_options& opt = {});

// (1/T) sum Psi(x) Psi*(y) weight; classical part is the Dirichlet kernel
// e^{i phi0 s} sin(pi (2N+1) s / T) / (T sin(pi s / T)), s = x - y.
kernel_split discrete_kernel(const periodic_family& fam, int N, double x, double y);
std::vector<kernel_split> discrete_kernel_grid(const periodic_family& fam, int N, const std::vector<double>& xs,
                                               const std::vector<double>& ys);

// max over the grid of |S_corr(c_{i+1}) - S_corr(c_i)| for consecutive
// cutoffs; the correction is Cauchy-convergent when this sequence decreases.
std::vector<double> cauchy_differences(const std::vector<std::vector<kernel_split>>& grids);

// Bloch modes as elements of F_X for the given spec (same period and
// multiplier as the family). The family must outlive the element.
fx_element mode_element(const periodic_family& fam, const bloch_mode& m, const singularity_spec& spec);

struct singular_report {
    std::vector<bloch_mode> modes;
    std::vector<cplx> coefficients; // c_q = <f, Psi_q> / <Psi_q, Psi_q>
    std::vector<cplx> norms;        // <Psi_q, Psi_q>
    std::vector<double> xs;
    std::vector<int> cutoffs;
    std::vector<std::vector<cplx>> partial_sums; // [cutoff][x]
    std::vector<double> sup_error;               // per cutoff
    // Principal part: a_{jk} of f against sum_q c_q a_{(q)jk}, per singular
    // point and k, at the largest cutoff.
    std::vector<std::vector<cplx>> principal_target;
    std::vector<std::vector<cplx>> principal_series;
    double principal_error = 0.0;
    double decay_order = 0.0; // fitted exponent of |c_q| against |j|
};

// Indefinite expansion of f in F_X over the Bloch modes of a periodic family
// sharing f's singular points. Throws validation_error for a neutral mode.
singular_report singular_reconstruct(const periodic_family& fam, const fx_element& f, int N,
                                     const std::vector<double>& xs, std::vector<int> cutoffs = {},
                                     double neutral_tol = 1e-10);

// ------------------------------------------------------------ diagnostics

// Slope of -log(value) against log(cutoff) by least squares.
double fitted_decay(const std::vector<double>& cutoffs, const std::vector<double>& values);

// max of g over [c0, (1 + spread) c0]; smooths out zeros of oscillating
// magnitudes before a decay fit.
double envelope(const std::function<double(double)>& g, double c0, double spread = 0.1, int samples = 41);

// phi_1(x) = (2i)^{-1} integral_0^x (u - mean u) ds + const, constant fixed
// by zero mean, so that phi_1 is T-periodic.
class asymptotic_coefficient {
public:
    asymptotic_coefficient(double period, std::vector<cplx> fourier); // c_m, m = -M..M
    cplx operator()(cplx x) const;
    double period() const { return T_; }
    cplx mean_u() const { return mean_; }

private:
    double T_;
    cplx mean_;
    std::vector<cplx> c_;
};

// Requires a periodic potential regular on the real line.
asymptotic_coefficient phi1(const potential& u, int samples = 256);

// max over xs of |p (chi / mean chi - 1) - phi_1(x)| with chi = Psi e^{-ipx}
// for the Lame Bloch function of 2 p(x + shift) at real quasimomentum p.
double phi1_defect(const elliptic_lattice& L, cplx shift, const asymptotic_coefficient& phi, double p,
                   const std::vector<double>& xs);

} // namespace singspec

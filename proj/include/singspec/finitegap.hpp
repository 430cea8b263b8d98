#pragma once

#include "singspec/elliptic.hpp"
#include "singspec/numerics.hpp"

#include <string>
#include <vector>

namespace singspec {

// Curve w^2 = (lambda - E_0) ... (lambda - E_{2g}).
class hyperelliptic_curve {
public:
    explicit hyperelliptic_curve(std::vector<cplx> branch_points);

    int genus() const { return static_cast<int>(e_.size() - 1) / 2; }
    const std::vector<cplx>& branch_points() const { return e_; }
    cplx R(cplx lambda) const;
    // Product of principal square roots; ~ lambda^{g+1/2} for large real lambda.
    cplx w_principal(cplx lambda) const;

private:
    std::vector<cplx> e_;
};

struct surface_point {
    cplx lambda;
    int sheet; // +1 or -1 relative to w_principal
    cplx w;
};

surface_point make_point(const hyperelliptic_curve& c, cplx lambda, int sheet);

// Continues w along the polyline starting from `start`, choosing at each
// substep the root of R nearest to the previous value.
surface_point continue_point(const hyperelliptic_curve& c, const surface_point& start,
                             const std::vector<cplx>& polyline, int substeps = 64);

// dp = (lambda^g + c_{g-1} lambda^{g-1} + ... + c_0) / (2w) dlambda with all
// periods over the cycle basis real.
struct quasimomentum_chart {
    hyperelliptic_curve curve;
    std::vector<cplx> c;              // c_0 .. c_{g-1}
    std::vector<cplx> periods;        // integral of dp over each basis cycle
    std::vector<std::vector<cplx>> cycles; // sampled loop points for export
    double condition = 1.0;

    cplx numerator(cplx lambda) const;
    // dp / dlambda on the given sheet point.
    cplx density(const surface_point& p) const;
    double max_imag_period() const;
};

// Basis: loops around consecutive branch-point pairs (E_j, E_{j+1}),
// j = 0..2g-1, branch points ordered as given.
quasimomentum_chart quasimomentum(const hyperelliptic_curve& curve, int cycle_resolution = 512);

// |2 sqrt(lambda) dp/dlambda - 1| at the sample lambdas (decays like 1/lambda).
std::vector<double> asymptotic_defect(const quasimomentum_chart& chart, const std::vector<double>& lambdas);

// Integral of dp along a polyline from a surface point.
cplx integrate_dp(const quasimomentum_chart& chart, const surface_point& start, const std::vector<cplx>& polyline);

// Genus-1 Bloch function of 2 p(x).
struct bloch_value {
    cplx psi;
    cplx dpsi;
    cplx lambda;
    cplx kappa;
    cplx p;
};

// Psi = sigma(alpha - x) / (sigma(alpha) sigma(x)) e^{zeta(alpha) x}.
bloch_value lame_bloch(cplx x, cplx alpha, const elliptic_lattice& L);
// p(alpha) = -i (zeta(alpha) - eta alpha / omega), analytic in alpha.
cplx lame_quasimomentum(cplx alpha, const elliptic_lattice& L);
// Numerator constant: dp = (lambda + c0) dlambda / (2w) with c0 = -eta/omega.
cplx lame_c0(const elliptic_lattice& L);

// |Psi~(x) Psi~(y) - (d/dz + a1) Psi~(z)|_{z=x+y}| / |Psi~(x) Psi~(y)| with
// Psi~ = -Psi and a1 = -(zeta(x) + zeta(y) - zeta(x+y)).
double multiplicative_check(double x, double y, cplx alpha, const elliptic_lattice& L);

struct contour_point {
    cplx alpha;
    cplx lambda;
    cplx p;
};

struct contour_component {
    std::vector<std::vector<contour_point>> polylines;
    bool through_infinity; // contains alpha = 0 (lambda = infinity)
    double max_imag_lambda;
};

struct canonical_contour_result {
    std::vector<contour_component> components;
    int resolution;
    double max_level_defect; // max |Re(omega zeta - eta alpha)| at vertices
};

// Level set Re(omega zeta(alpha) - eta alpha) = 0 (|kappa| = 1) over the
// period cell centred at 0, traced by marching squares with every vertex
// refined onto the level set.
canonical_contour_result canonical_contour(const elliptic_lattice& L, int resolution = 200);

// CSV rows: component, polyline, Re alpha, Im alpha, Re lambda, Im lambda, Re p, Im p.
std::string contour_csv(const canonical_contour_result& c);

// Pi_j (lambda - lambda_j) / (2 w).
cplx spectral_weight(const hyperelliptic_curve& c, const std::vector<cplx>& divisor, const surface_point& g);

struct bloch_point {
    cplx alpha;
    cplx lambda;
    double p;
    bool finite_band;
    cplx weight; // 1 / (lambda + c0)
};

// Points with p = phi0 + pi j / omega, |j| <= N, on the contour of 2 p
// (lattice with real omega, regular contour).
std::vector<bloch_point> bloch_points(const elliptic_lattice& L, double phi0, int N);

// Hill discriminant of n(n+1) p(x) with real period T = 2 omega, from the
// monodromy along Im z = |omega'|.
class lame_hill {
public:
    lame_hill(const elliptic_lattice& L, int n, int steps = 2000);
    cplx discriminant(double lambda) const;
    double period() const { return T_; }
    // Simple roots of Delta^2 - 1 (band edges), ascending.
    std::vector<double> band_edges() const;

private:
    int n_;
    double T_;
    int steps_;
    double scale_; // max |e_k|, sets the scan range for band edges
    cplx z0_;
    std::vector<cplx> u_; // u at half-step nodes
};

struct census_report {
    std::vector<double> band_edges;
    std::vector<double> lambdas;  // points with e^{ipT} = kappa0, ascending
    std::vector<int> signs;       // sign of dmu/dp
    int negative = 0;
};

census_report measure_sign_census(const elliptic_lattice& L, int n, double phi0, int count);

} // namespace singspec

#pragma once

#include "singspec/numerics.hpp"

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

namespace singspec {

// Set X of real singular points with orders, optionally periodic with a
// unitary Bloch multiplier kappa0 = exp(i T phi0).
struct singularity_spec {
    std::vector<double> points;
    std::vector<int> orders;
    std::optional<double> period;
    double phi0 = 0.0;

    cplx kappa0() const;
    void validate() const;
    bool periodic() const { return period.has_value(); }
};

// Coefficients a_k of y^{n-2k}, k = 0..n, y = x - anchor.
struct principal_part {
    double anchor;
    int order;
    std::vector<cplx> a;
    cplx eval(cplx y) const;
};

// Beyond |x| >= radius the element either equals sum_p tail[p] x^{-p}
// exactly (when tail is non-empty) or is negligible.
struct decay_info {
    double radius;
    std::vector<cplx> tail;
};

class fx_element {
public:
    fx_element(singularity_spec spec, complex_fn f, std::optional<decay_info> decay,
               double analytic_radius, std::vector<principal_part> parts = {});

    cplx operator()(cplx z) const { return f_(z); }
    const complex_fn& evaluator() const { return f_; }
    const singularity_spec& spec() const { return spec_; }
    const std::vector<principal_part>& principal_parts() const { return parts_; }
    const std::optional<decay_info>& decay() const { return decay_; }
    double analytic_radius() const { return analytic_radius_; }

    fx_element scaled(cplx c) const;
    fx_element plus(const fx_element& o) const;

private:
    singularity_spec spec_;
    complex_fn f_;
    std::optional<decay_info> decay_;
    double analytic_radius_;
    std::vector<principal_part> parts_;
};

// Principal part at x_j by contour extraction on a circle of radius r.
principal_part extract_principal_part(const complex_fn& f, double xj, int nj, double r);

// g(z) = conj(f(conj z)).
fx_element star(const fx_element& f);

// Residues of f * star(g) at every singular point in one period (periodic)
// or on the whole line (decaying).
struct residue_entry {
    double point;
    cplx residue;
    double scale;
};
std::vector<residue_entry> residue_census(const fx_element& f, const fx_element& g);

class form_domain_error : public validation_error {
public:
    form_domain_error(const std::string& what, double at) : validation_error(what), point(at) {}
    double point;
};

struct inner_product_options {
    double detour_radius = 0.0; // <= 0: automatic
    bool upper = true;
    double rel_tol = 1e-12;
    double residue_tol = 1e-9;
};

// Contour-regularized indefinite product: integral of f * star(g) with
// detours around the singular points.
cplx inner_product(const fx_element& f, const fx_element& g, const inner_product_options& opt = {});

struct parity_entry {
    double point;
    int order;
    bool member;
    double fitted_order; // +inf when the symmetrized combination vanishes
};
std::vector<parity_entry> parity_membership(const fx_element& f);

int negative_count_bound(const singularity_spec& spec);

enum class xi_mode { decaying, periodic };

// Negative-subspace test family: floor((n_j+1)/2) functions per point.
std::vector<fx_element> xi_family(const singularity_spec& spec, double eps, int big_n, xi_mode mode);

// Regular elements (no principal part).
fx_element regular_bump(const singularity_spec& spec, double center, double width, cplx amplitude);
fx_element gaussian_element(const singularity_spec& spec, cplx amplitude, double center = 0.0,
                            int power = 0);
// Pure power y^{-p} anchored at x_j (decaying mode, exact tail).
fx_element pure_power(const singularity_spec& spec, double xj, int p);

struct gram_report {
    Eigen::MatrixXcd matrix;
    std::vector<double> eigenvalues;           // raw Gram eigenvalues
    std::vector<double> scaled_eigenvalues;    // after diagonal equilibration
    int positive = 0, zero = 0, negative = 0;  // from the equilibrated matrix
    double zero_threshold = 0.0;
    double hermitian_defect = 0.0;
};

// zero_threshold <= 0 selects 1e-8 * max |eigenvalue|.
gram_report gram_signature(const std::vector<fx_element>& elements, double zero_threshold = 0.0,
                           const inner_product_options& opt = {});

} // namespace singspec

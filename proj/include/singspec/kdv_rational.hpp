#pragma once

#include "singspec/numerics.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include <map>
#include <string>
#include <vector>

namespace singspec {

using rational = boost::multiprecision::cpp_rational;

// theta_n(x;t) = sum_m b_m t^m x^(d-3m), d = n(n+1)/2.  Solutions of
// u_t = 6 u u_x - u_xxx with u = -2 (log theta)_xx and u(x,0) = n(n+1)/x^2.
class tau_polynomial {
public:
    tau_polynomial(int n, std::vector<rational> b);

    int n() const { return n_; }
    int degree() const { return n_ * (n_ + 1) / 2; }
    // b[m] multiplies t^m x^(d-3m).
    const std::vector<rational>& weights() const { return b_; }

    // Ascending x-coefficients at time t.
    polynomial at(double t) const;
    cplx operator()(cplx x, double t) const;
    // u = -2 (log theta)_xx evaluated from exact polynomial derivatives.
    cplx potential(cplx x, double t) const;

    std::string to_string() const;

private:
    int n_;
    std::vector<rational> b_;
};

// Exact construction by the bilinear recursion; the free constants whose
// weight is a multiple of 3 are fixed by the bilinear KdV equation.
tau_polynomial tau(int n);

struct pole_set {
    double t = 0.0;
    std::vector<cplx> roots;
    std::vector<bool> is_real;
    std::vector<int> multiplicity;
    int total = 0;
    int real = 0;
    double max_residual = 0.0;
};

pole_set poles(int n, double t);

struct census_row {
    int n, total, real, expected_total, expected_real;
    bool ok;
};

std::vector<census_row> real_pole_census(const std::vector<int>& n_range, double t);

struct scaling_report {
    double scaling_distance;      // Hausdorff distance after rescaling
    double conjugation_distance;  // a-set vs its conjugate
    double rotation_distance;     // a-set vs e^{2 pi i/3} a-set
    bool ok;
};

scaling_report scaling_symmetry_check(int n, double t1, double t2, double tol = 1e-8);

// |u_t - 6 u u_x + u_xxx| by finite differences with step h.
double kdv_residual(int n, cplx x, double t, double h = 1e-3);

// Symmetric Hausdorff distance between two finite point sets.
double hausdorff_distance(const std::vector<cplx>& a, const std::vector<cplx>& b);

} // namespace singspec

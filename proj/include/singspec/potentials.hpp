#pragma once

#include "singspec/elliptic.hpp"
#include "singspec/numerics.hpp"

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace singspec {

struct singular_point {
    double x;
    int order; // n_j >= 1, leading term n_j(n_j+1)/y^2
};

enum class potential_kind { zero, rational, trig, sinh_soliton, lame, dressed, tabulated, custom };

class potential {
public:
    static potential zero();
    static potential rational(int n);
    static potential trig(int n, double k);
    static potential sinh_soliton(int n, double k);
    static potential lame(int n, const elliptic_lattice& lattice, cplx shift = 0.0);
    // Smooth periodic u(x) = sum_m c_m exp(2 pi i m x / T), m = -M..M, c
    // listed from m = -M upward.
    static potential tabulated(double period, std::vector<cplx> coefficients);
    // Arbitrary evaluator with declared real singular points (pattern
    // repeated with `period` when given). Used for dressed potentials.
    static potential custom(std::string name, complex_fn eval, std::vector<singular_point> points,
                            std::optional<double> period = std::nullopt,
                            potential_kind kind = potential_kind::custom);

    cplx operator()(cplx z) const;
    complex_fn evaluator() const;
    potential_kind kind() const { return kind_; }
    const std::string& name() const { return name_; }
    int n() const { return n_; }
    double k() const { return k_; }
    cplx shift() const { return shift_; }
    std::optional<double> period() const { return period_; }
    const elliptic_lattice* lattice() const { return lattice_.get(); }
    const std::vector<cplx>& coefficients() const { return coeffs_; }

    // Real singular points in [a, b].
    std::vector<singular_point> singular_points(double a, double b) const;

private:
    potential_kind kind_ = potential_kind::zero;
    std::string name_ = "zero";
    int n_ = 0;
    double k_ = 0.0;
    cplx shift_ = 0.0;
    std::optional<double> period_;
    std::shared_ptr<const elliptic_lattice> lattice_;
    std::vector<cplx> coeffs_;
    complex_fn custom_;
    std::vector<singular_point> custom_points_;
};

class meromorphy_error : public validation_error {
public:
    meromorphy_error(const std::string& what, std::vector<int> exponents)
        : validation_error(what), offending(std::move(exponents)) {}
    std::vector<int> offending;
};

struct laurent_data {
    double point;
    int order;
    cplx leading;                  // coefficient of y^-2
    std::vector<cplx> even;        // u_{jk}, k = 0..n-1 (coefficient of y^{2k})
    std::vector<double> odd_abs;   // |coefficient of y^e| for odd e in [-1, 2n-1]
    double remainder_bound;        // |coefficient of y^{2n}|
    double radius;                 // circle used for extraction
    double noise_floor;            // roundoff bound used for the odd test
};

// Extracts and validates the local form n(n+1)/y^2 + sum u_k y^{2k} + O(y^{2n}).
laurent_data laurent_check(const potential& u, double xj, int nj, double tol = 1e-8);

struct frobenius_result {
    int order;
    cplx lambda;
    std::vector<cplx> psi1; // coefficient of y^{m-n}, m = 0..depth
    std::vector<cplx> psi2; // coefficient of y^{m+n+1}
    std::vector<cplx> a;    // a_k = coefficient of y^{2k-n}, k = 1..n
    cplx obstruction;
    double residual;
    double wronskian_deviation;

    // Value and derivative of the truncated series at local coordinate y.
    std::pair<cplx, cplx> eval_psi1(cplx y) const;
    std::pair<cplx, cplx> eval_psi2(cplx y) const;
};

frobenius_result frobenius_basis(const potential& u, double xj, cplx lambda, int depth = -1,
                                 double tol = 1e-8);

} // namespace singspec

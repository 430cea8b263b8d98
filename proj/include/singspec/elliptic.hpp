#pragma once

#include "singspec/numerics.hpp"

namespace singspec {

// Raised when a pole-bearing Weierstrass function is evaluated on the lattice.
class pole_error : public validation_error {
public:
    pole_error(const std::string& what, cplx lattice_point)
        : validation_error(what), point(lattice_point) {}
    cplx point;
};

enum class lattice_mode { rectangular, rhombic, general };

enum class weierstrass_kind { p, p_prime, zeta, sigma };

// Period lattice 2w Z + 2w' Z. Functions are evaluated by q-series in the
// nome q = exp(i pi w'/w) after reducing the argument to the period cell
// centred at the origin.
class elliptic_lattice {
public:
    elliptic_lattice(cplx omega, cplx omega_prime);

    cplx omega() const { return w1_; }
    cplx omega_prime() const { return w3_; }
    cplx tau() const { return tau_; }
    cplx eta() const { return eta1_; }
    cplx eta_prime() const { return eta3_; }
    cplx e1() const { return e_[0]; }
    cplx e2() const { return e_[1]; }
    cplx e3() const { return e_[2]; }
    cplx g2() const { return g2_; }
    cplx g3() const { return g3_; }
    lattice_mode mode() const { return mode_; }
    int series_terms() const { return terms_; }

    cplx p(cplx z) const;
    cplx p_prime(cplx z) const;
    cplx zeta(cplx z) const;
    cplx sigma(cplx z) const;
    cplx eval(weierstrass_kind kind, cplx z) const;

    // z = z0 + 2 m w + 2 m' w' with z0 in the centred cell.
    struct reduction {
        cplx z0;
        long m, mp;
    };
    reduction reduce(cplx z) const;

    // Nearest lattice point to z.
    cplx nearest_lattice_point(cplx z) const;

private:
    cplx p_reduced(cplx z0) const;
    cplx zeta_reduced(cplx z0) const;
    cplx sigma_reduced(cplx z0) const;
    void check_pole(const reduction& r, const char* who) const;

    cplx w1_, w3_, tau_, q_;
    cplx eta1_{}, eta3_{};
    cplx e_[3]{};
    cplx g2_{}, g3_{};
    lattice_mode mode_ = lattice_mode::general;
    int terms_ = 0;
};

elliptic_lattice lattice_from_half_periods(cplx omega, cplx omega_prime);

// Convenience free function.
cplx weierstrass(weierstrass_kind kind, cplx z, const elliptic_lattice& lattice);

} // namespace singspec

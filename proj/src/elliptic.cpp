#include "singspec/elliptic.hpp"

#include <cmath>
#include <numbers>

namespace singspec {

namespace {
constexpr double pi = std::numbers::pi;
const cplx I(0.0, 1.0);
} // namespace

elliptic_lattice::elliptic_lattice(cplx omega, cplx omega_prime) : w1_(omega), w3_(omega_prime) {
    if (std::abs(omega) == 0.0 || std::abs(omega_prime) == 0.0)
        throw validation_error("elliptic_lattice: zero half-period");
    tau_ = w3_ / w1_;
    if (!(tau_.imag() > 1e-8))
        throw validation_error("elliptic_lattice: need Im(omega'/omega) > 0");
    q_ = std::exp(I * pi * tau_);
    // Terms until |q|^(2n) drops below 1e-18 relative, with the argument reduced.
    terms_ = static_cast<int>(std::ceil(42.0 / (2.0 * pi * tau_.imag()))) + 2;
    if (terms_ > 5000) throw validation_error("elliptic_lattice: lattice too degenerate");

    cplx s = 0.0;
    for (int n = 1; n <= 4 * terms_; ++n) {
        cplx q2n = std::pow(q_, 2 * n);
        s += static_cast<double>(n) * q2n / (1.0 - q2n);
    }
    eta1_ = pi * pi / (12.0 * w1_) * (1.0 - 24.0 * s);
    eta3_ = zeta_reduced(w3_);
    e_[0] = p_reduced(w1_);
    e_[1] = p(w1_ + w3_);
    e_[2] = p_reduced(w3_);
    g2_ = 2.0 * (e_[0] * e_[0] + e_[1] * e_[1] + e_[2] * e_[2]);
    g3_ = 4.0 * e_[0] * e_[1] * e_[2];

    const double tol = 1e-12 * std::abs(w1_);
    if (std::abs(w1_.imag()) <= tol && std::abs(w3_.real()) <= tol)
        mode_ = lattice_mode::rectangular;
    else if (std::abs(w1_.imag()) <= tol && std::abs(w3_.real() - 0.5 * w1_.real()) <= tol)
        mode_ = lattice_mode::rhombic;
}

elliptic_lattice::reduction elliptic_lattice::reduce(cplx z) const {
    // Solve z = a (2w) + b (2w') for real a, b.
    cplx A = 2.0 * w1_, B = 2.0 * w3_;
    double det = A.real() * B.imag() - A.imag() * B.real();
    double a = (z.real() * B.imag() - z.imag() * B.real()) / det;
    double b = (A.real() * z.imag() - A.imag() * z.real()) / det;
    long m = std::lround(a), mp = std::lround(b);
    return {z - static_cast<double>(m) * A - static_cast<double>(mp) * B, m, mp};
}

cplx elliptic_lattice::nearest_lattice_point(cplx z) const {
    auto r = reduce(z);
    return z - r.z0;
}

void elliptic_lattice::check_pole(const reduction& r, const char* who) const {
    if (std::abs(r.z0) < 1e-14 * std::abs(w1_))
        throw pole_error(std::string(who) + ": argument is a lattice point",
                         2.0 * static_cast<double>(r.m) * w1_ +
                             2.0 * static_cast<double>(r.mp) * w3_);
}

cplx elliptic_lattice::p_reduced(cplx z0) const {
    const cplx k = pi / (2.0 * w1_);
    const cplx v = k * z0;
    const cplx step = pi * tau_;
    cplx s = 0.0;
    for (int n = -terms_; n <= terms_; ++n) {
        cplx sn = std::sin(v + static_cast<double>(n) * step);
        s += 1.0 / (sn * sn);
    }
    return -eta1_ / w1_ + k * k * s;
}

cplx elliptic_lattice::zeta_reduced(cplx z0) const {
    const cplx k = pi / (2.0 * w1_);
    const cplx v = k * z0;
    const cplx step = pi * tau_;
    cplx s = 1.0 / std::tan(v);
    for (int n = 1; n <= terms_; ++n)
        s += 1.0 / std::tan(v + static_cast<double>(n) * step) +
             1.0 / std::tan(v - static_cast<double>(n) * step);
    return eta1_ * z0 / w1_ + k * s;
}

cplx elliptic_lattice::sigma_reduced(cplx z0) const {
    const cplx k = pi / (2.0 * w1_);
    const cplx v = k * z0;
    const cplx c2 = std::cos(2.0 * v);
    cplx prod = 1.0;
    for (int n = 1; n <= terms_; ++n) {
        cplx q2n = std::pow(q_, 2 * n);
        prod *= (1.0 - 2.0 * q2n * c2 + q2n * q2n) / ((1.0 - q2n) * (1.0 - q2n));
    }
    return std::exp(eta1_ * z0 * z0 / (2.0 * w1_)) * std::sin(v) / k * prod;
}

cplx elliptic_lattice::p(cplx z) const {
    auto r = reduce(z);
    check_pole(r, "p");
    return p_reduced(r.z0);
}

cplx elliptic_lattice::p_prime(cplx z) const {
    auto r = reduce(z);
    check_pole(r, "p_prime");
    const cplx k = pi / (2.0 * w1_);
    const cplx v = k * r.z0;
    const cplx step = pi * tau_;
    cplx s = 0.0;
    for (int n = -terms_; n <= terms_; ++n) {
        cplx w = v + static_cast<double>(n) * step;
        cplx sn = std::sin(w);
        s += std::cos(w) / (sn * sn * sn);
    }
    return -2.0 * k * k * k * s;
}

cplx elliptic_lattice::zeta(cplx z) const {
    auto r = reduce(z);
    check_pole(r, "zeta");
    return zeta_reduced(r.z0) + 2.0 * static_cast<double>(r.m) * eta1_ +
           2.0 * static_cast<double>(r.mp) * eta3_;
}

cplx elliptic_lattice::sigma(cplx z) const {
    auto r = reduce(z);
    // sigma(z0 + 2W) = (-1)^(m+m'+mm') exp(2 H (z0 + W)) sigma(z0), W = m w + m' w'.
    const double m = static_cast<double>(r.m), mp = static_cast<double>(r.mp);
    const cplx W = m * w1_ + mp * w3_;
    const cplx H = m * eta1_ + mp * eta3_;
    const long parity = r.m + r.mp + r.m * r.mp;
    const double sign = (parity % 2 == 0) ? 1.0 : -1.0;
    return sign * std::exp(2.0 * H * (r.z0 + W)) * sigma_reduced(r.z0);
}

cplx elliptic_lattice::eval(weierstrass_kind kind, cplx z) const {
    switch (kind) {
    case weierstrass_kind::p: return p(z);
    case weierstrass_kind::p_prime: return p_prime(z);
    case weierstrass_kind::zeta: return zeta(z);
    default: return sigma(z);
    }
}

elliptic_lattice lattice_from_half_periods(cplx omega, cplx omega_prime) {
    return elliptic_lattice(omega, omega_prime);
}

cplx weierstrass(weierstrass_kind kind, cplx z, const elliptic_lattice& lattice) {
    return lattice.eval(kind, z);
}

} // namespace singspec

#pragma once

// Independent reference computations for the test suites. Nothing here
// calls into the library's solvers.

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

namespace oracle {

using cd = std::complex<double>;

inline cd kz_of(cd n, double n0_cos) {
    cd q = std::sqrt(n * n - n0_cos * n0_cos);
    if (q.imag() < 0.0 || (q.imag() == 0.0 && q.real() < 0.0)) q = -q;
    return q;
}

/// Same branch, expanded around n0 = 1 for grazing angles: n^2 - cos^2 t = (n^2 - 1) + sin^2 t.
inline cd kz_grazing(cd n_minus_1, double theta) {
    const double s = std::sin(theta);
    cd q = std::sqrt(n_minus_1 * (n_minus_1 + 2.0) + s * s);
    if (q.imag() < 0.0 || (q.imag() == 0.0 && q.real() < 0.0)) q = -q;
    return q;
}

/// s-polarized single-interface amplitude reflection (vacuum -> n).
inline cd fresnel_rs(cd n, double theta) {
    const cd k0 = std::sin(theta);
    const cd k1 = kz_grazing(n - 1.0, theta);
    return (k0 - k1) / (k0 + k1);
}

struct Film {
    cd n;
    double d;  // nm
};

/// Characteristic-matrix (Abeles) solution acting on (E, dE/dz). Incidence
/// from a lossless medium of index n0.
struct MatrixSolution {
    cd r;
    cd t;
    std::vector<double> boundaries;  // depth of each interface
    std::vector<cd> e_at;            // E at each interface
    std::vector<cd> de_at;           // dE/dz at each interface
};

inline MatrixSolution abeles(double n0, const std::vector<Film>& films, cd n_sub, double theta, double lambda_nm) {
    const double k = 2.0 * std::numbers::pi / lambda_nm;
    const double c = n0 * std::cos(theta);
    auto kz = [&](cd n) { return n0 == 1.0 ? kz_grazing(n - 1.0, theta) : kz_of(n, c); };
    const cd q0 = k * kz(n0), qs = k * kz(n_sub);
    // Total matrix M maps (E, E') at the top to (E, E') at the bottom.
    cd m11 = 1.0, m12 = 0.0, m21 = 0.0, m22 = 1.0;
    for (const auto& f : films) {
        const cd q = k * kz(f.n);
        const cd cs = std::cos(q * f.d), sn = std::sin(q * f.d);
        const cd a11 = cs, a12 = (std::abs(q) > 0.0 ? sn / q : cd(f.d)), a21 = -q * sn, a22 = cs;
        const cd n11 = a11 * m11 + a12 * m21, n12 = a11 * m12 + a12 * m22;
        const cd n21 = a21 * m11 + a22 * m21, n22 = a21 * m12 + a22 * m22;
        m11 = n11, m12 = n12, m21 = n21, m22 = n22;
    }
    // Top: E = 1 + r, E' = i q0 (1 - r). Bottom: E = t, E' = i qs t.
    const cd i(0.0, 1.0);
    // t = m11 (1 + r) + m12 i q0 (1 - r); i qs t = m21 (1 + r) + m22 i q0 (1 - r)
    const cd A = m11 + m12 * i * q0, B = m11 - m12 * i * q0;
    const cd C = m21 + m22 * i * q0, D = m21 - m22 * i * q0;
    // t = A + r B ; i qs t = C + r D  =>  r = (i qs A - C) / (D - i qs B)
    const cd r = (i * qs * A - C) / (D - i * qs * B);
    MatrixSolution s;
    s.r = r;
    s.t = A + r * B;
    cd e = 1.0 + r, de = i * q0 * (1.0 - r);
    double z = 0.0;
    s.boundaries.push_back(z);
    s.e_at.push_back(e);
    s.de_at.push_back(de);
    for (const auto& f : films) {
        const cd q = k * kz(f.n);
        const cd cs = std::cos(q * f.d), sn = std::sin(q * f.d);
        const cd e2 = cs * e + (std::abs(q) > 0.0 ? sn / q : cd(f.d)) * de;
        const cd de2 = -q * sn * e + cs * de;
        e = e2, de = de2;
        z += f.d;
        s.boundaries.push_back(z);
        s.e_at.push_back(e);
        s.de_at.push_back(de);
    }
    return s;
}

/// Free-space 2D Gaussian beam by direct trapezoidal integration of its
/// angular spectrum (uniform grid, independent of the library quadrature).
inline cd free_space_trapezoid(double lambda_nm, double w0, double theta_in, double fx, double fz, double x,
                               double z, int n = 20001, double span_sigmas = 8.0) {
    const double k = 2.0 * std::numbers::pi / lambda_nm;
    const double div = lambda_nm / (std::numbers::pi * w0);
    const double lo = theta_in - span_sigmas * div, hi = theta_in + span_sigmas * div;
    const double h = (hi - lo) / (n - 1);
    cd sum = 0.0;
    for (int j = 0; j < n; ++j) {
        const double t = lo + j * h;
        const double a = std::exp(-std::pow((t - theta_in) / div, 2)) / (div * std::sqrt(std::numbers::pi));
        const double ph = k * (std::cos(t) * (x - fx) + std::sin(t) * (z - fz));
        sum += (j == 0 || j == n - 1 ? 0.5 : 1.0) * a * std::polar(1.0, ph);
    }
    return sum * h;
}

// Pulse area from the cross-section route: Phi^2 = 24 sqrt(pi) c^2 Gamma_rad E tau / (hbar w^3 w0^2),
// all SI. Derived separately from the library's prefactor form.
inline double pulse_area_cross_section(double energy_keV, double gamma_rad_neV, double pulse_uJ, double b_r,
                                       double w0_nm) {
    const double pi = std::numbers::pi;
    const double hbar = 6.62607015e-34 / (2.0 * pi), e = 1.602176634e-19, c = 299792458.0;
    const double w = energy_keV * 1e3 * e / hbar;
    const double g = gamma_rad_neV * 1e-9 * e / hbar;
    const double tau = 2.0 * std::sqrt(std::log(2.0)) / (b_r * w);
    const double w0 = w0_nm * 1e-9;
    return std::sqrt(24.0 * std::sqrt(pi) * c * c * g * pulse_uJ * 1e-6 * tau / (hbar * w * w * w * w0 * w0));
}

}  // namespace oracle

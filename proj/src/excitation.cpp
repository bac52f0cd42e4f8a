#include "nucav/excitation.hpp"

#include "nucav/constants.hpp"
#include "nucav/error.hpp"
#include "nucav/format.hpp"

#include <cmath>
#include <complex>

namespace nucav {

using constants::pi;

namespace {

// Transition characteristic in SI units, m / sqrt(J).
double chi_sigma_si(const Isotope& iso) {
    using namespace constants;
    const double d = effective_dipole(iso);
    const double omega = iso.angular_frequency();
    return d / hbar * std::sqrt(16.0 * std::sqrt(std::log(2.0)) / (std::sqrt(pi) * epsilon0 * speed_of_light * omega));
}

// 1 m / sqrt(J) = 1e9 nm / (1e3 sqrt(uJ))
constexpr double si_to_nm_per_sqrt_uJ = 1e6;

}  // namespace

double chi_sigma(const Isotope& iso) { return chi_sigma_si(iso) * si_to_nm_per_sqrt_uJ; }

double pulse_area(double chi_sig, double chi_src, double w0_nm, double xi) { return chi_sig / w0_nm * chi_src * xi; }

double pulse_area(const Isotope& iso, const SourceParams& source, double w0_nm, double xi) {
    validate(source);
    if (!(w0_nm > 0.0)) throw DomainError("pulse area: w0 must be > 0");
    if (!(xi >= 0.0)) throw DomainError("pulse area: xi must be >= 0");
    return pulse_area(chi_sigma(iso), source.chi_source(), w0_nm, xi);
}

double sigma_z(double phi) { return -std::cos(phi); }

double chi_source_nec(const Isotope& iso, double w0_nm, double xi) {
    if (!(xi > 0.0)) throw SingularError("necessary source characteristic: xi = " + format_double(xi) + " leaves the nuclei dark");
    if (!(w0_nm > 0.0)) throw DomainError("necessary source characteristic: w0 must be > 0");
    return pi * w0_nm / (chi_sigma(iso) * xi);
}

double achievable_sigma_z(double chi_src, double chi_nec) {
    if (chi_src >= chi_nec) return 1.0;
    return sigma_z(pi * chi_src / chi_nec);
}

ExcitationResult excite(const Isotope& iso, const SourceParams& source, double w0_nm, double xi) {
    ExcitationResult r;
    r.chi_sigma = chi_sigma(iso);
    r.chi_source = source.chi_source();
    r.xi = xi;
    r.w0_nm = w0_nm;
    r.pulse_area = pulse_area(iso, source, w0_nm, xi);
    r.sigma_z = sigma_z(r.pulse_area);
    r.chi_source_nec = chi_source_nec(iso, w0_nm, xi);
    return r;
}

double fluence_per_bandwidth(double chi_src, const Isotope& iso, double w0_nm, double theta_in) {
    if (!(w0_nm > 0.0)) throw DomainError("fluence: w0 must be > 0");
    if (!(theta_in > 0.0 && theta_in < pi / 2.0)) throw DomainError("fluence: incidence angle must lie in (0, pi/2)");
    const double w0_um = w0_nm * 1e-3;
    const double area_um2 = pi * (w0_um / std::sin(theta_in)) * w0_um;
    const double energy_meV = iso.transition_energy_keV * 1e6;
    // E / b_r = chi^2
    return chi_src * chi_src / (area_um2 * energy_meV);
}

double fluence_per_bandwidth(const SourceParams& source, const Isotope& iso, double w0_nm, double theta_in) {
    validate(source);
    return fluence_per_bandwidth(source.chi_source(), iso, w0_nm, theta_in);
}

BlochResult integrate_two_level(const std::vector<double>& W, double h) {
    if (W.size() < 3 || W.size() % 2 == 0) throw DomainError("two-level integration: need 2n+1 half-step samples");
    using c = std::complex<double>;
    const c mi(0.0, -0.5);
    c g = 1.0, e = 0.0;
    double angle = 0.0;
    const std::size_t n = (W.size() - 1) / 2;
    for (std::size_t k = 0; k < n; ++k) {
        const double w0 = W[2 * k], wm = W[2 * k + 1], w1 = W[2 * k + 2];
        const c k1g = mi * w0 * e, k1e = mi * w0 * g;
        const c k2g = mi * wm * (e + 0.5 * h * k1e), k2e = mi * wm * (g + 0.5 * h * k1g);
        const c k3g = mi * wm * (e + 0.5 * h * k2e), k3e = mi * wm * (g + 0.5 * h * k2g);
        const c k4g = mi * w1 * (e + h * k3e), k4e = mi * w1 * (g + h * k3g);
        g += h / 6.0 * (k1g + 2.0 * k2g + 2.0 * k3g + k4g);
        e += h / 6.0 * (k1e + 2.0 * k2e + 2.0 * k3e + k4e);

        // Bloch angle from the ground state, unwrapped step by step.
        const double w = std::norm(e) - std::norm(g);
        const double v = -2.0 * std::imag(std::conj(g) * e);
        const double wrapped = std::atan2(v, -w);
        double delta = wrapped - std::remainder(angle, 2.0 * pi);
        delta = std::remainder(delta, 2.0 * pi);
        angle += delta;
    }
    BlochResult r;
    r.sigma_z = std::norm(e) - std::norm(g);
    r.phi_effective = angle;
    r.steps = n;
    return r;
}

BlochResult bloch_oracle(const Isotope& iso, const PulseSpec& pulse, const BlochOptions& opt) {
    using namespace constants;
    validate(iso);
    if (!(pulse.energy_uJ >= 0.0)) throw DomainError("bloch: pulse energy must be >= 0");
    if (!(pulse.relative_bandwidth > 0.0)) throw DomainError("bloch: bandwidth must be > 0");
    if (!(pulse.waist_nm > 0.0)) throw DomainError("bloch: waist must be > 0");
    if (!(pulse.xi >= 0.0)) throw DomainError("bloch: xi must be >= 0");

    const double omega = iso.angular_frequency();
    const double tau = 2.0 * std::sqrt(std::log(2.0)) / (pulse.relative_bandwidth * omega);
    const double w0 = pulse.waist_nm * 1e-9;

    // Transverse area of |E|^2 ~ exp(-2 r^2 / w0^2), Simpson in r out to 6 w0.
    const int nr = 4000;
    const double rmax = 6.0 * w0, dr = rmax / nr;
    double area = 0.0;
    for (int i = 0; i <= nr; ++i) {
        const double r = i * dr;
        const double f = 2.0 * pi * r * std::exp(-2.0 * r * r / (w0 * w0));
        area += f * ((i == 0 || i == nr) ? 1.0 : (i % 2 ? 4.0 : 2.0));
    }
    area *= dr / 3.0;

    // Time in units of tau; Rabi frequency in units of 1/tau.
    const double span = 2.0 * opt.window_taus;
    auto run = [&](std::size_t n) {
        const double h = span / static_cast<double>(n);
        const std::size_t m = 2 * n + 1;
        std::vector<double> env(m);
        double env2 = 0.0;
        for (std::size_t k = 0; k < m; ++k) {
            const double s = -opt.window_taus + 0.5 * h * static_cast<double>(k);
            env[k] = std::exp(-0.5 * s * s);
            env2 += env[k] * env[k] * ((k == 0 || k == m - 1) ? 0.5 : 1.0);
        }
        env2 *= 0.5 * h * tau;  // integral of envelope^2 dt, seconds
        const double fluence_time = pulse.energy_uJ * 1e-6 / area;  // J / m^2
        const double e0 = std::sqrt(2.0 * fluence_time / (epsilon0 * speed_of_light * env2));
        const double rabi_peak = effective_dipole(iso) * e0 * pulse.xi / hbar * tau;
        for (auto& v : env) v *= rabi_peak;
        return std::pair{integrate_two_level(env, h), rabi_peak};
    };

    // Step count from the peak Rabi frequency, estimated with a coarse pass.
    const double peak = run(opt.min_steps).second;
    const double cycles = peak * span / (2.0 * pi);
    std::size_t n = std::max(opt.min_steps, static_cast<std::size_t>(std::ceil(opt.points_per_cycle * cycles)));
    BlochResult coarse = run(n).first;
    while (2 * n <= opt.max_steps) {
        const BlochResult fine = run(2 * n).first;
        if (std::abs(fine.sigma_z - coarse.sigma_z) <= opt.tolerance) return fine;
        coarse = fine;
        n *= 2;
    }
    throw ConvergenceError("bloch: sigma_z not converged to " + format_double(opt.tolerance) + " within " +
                           std::to_string(opt.max_steps) + " steps");
}

}  // namespace nucav

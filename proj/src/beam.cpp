#include "nucav/beam.hpp"

#include "nucav/constants.hpp"
#include "nucav/error.hpp"
#include "nucav/format.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>

namespace nucav {

using constants::pi;

double GaussianBeam::wavenumber() const { return 2.0 * pi / wavelength_nm; }

double GaussianBeam::divergence() const { return divergence_from_waist(waist_nm, wavelength_nm); }

double GaussianBeam::rayleigh_range() const { return pi * waist_nm * waist_nm / wavelength_nm; }

void GaussianBeam::validate() const {
    if (!(wavelength_nm > 0.0)) throw DomainError("beam: wavelength must be > 0");
    if (!(waist_nm > wavelength_nm / 10.0))
        throw DomainError("beam: waist " + format_double(waist_nm) + " nm is below lambda/10 (non-paraxial)");
    if (!(incidence_angle > 0.0 && incidence_angle < pi / 2.0))
        throw DomainError("beam: incidence angle must lie in (0, pi/2)");
    if (!(divergence() < incidence_angle))
        throw DomainError("beam: divergence " + format_double(divergence(), 6) + " rad exceeds incidence angle " +
                          format_double(incidence_angle, 6) + " rad");
    if (!std::isfinite(focus.x) || !std::isfinite(focus.z)) throw DomainError("beam: focus must be finite");
}

GaussianBeam make_beam(double wavelength_nm, double waist_nm, double incidence_angle, Point focus) {
    GaussianBeam b{wavelength_nm, waist_nm, incidence_angle, focus};
    b.validate();
    return b;
}

double divergence_from_waist(double waist_nm, double wavelength_nm) {
    if (!(waist_nm > 0.0 && wavelength_nm > 0.0)) throw DomainError("divergence: waist and wavelength must be > 0");
    return wavelength_nm / (pi * waist_nm);
}

namespace {

// Legendre polynomial P_n(x) and its derivative.
std::pair<double, double> legendre(int n, double x) {
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    return {p1, n * (x * p1 - p0) / (x * x - 1.0)};
}

GaussLegendre compute_gauss_legendre(int n) {
    GaussLegendre gl;
    gl.nodes.resize(n);
    gl.weights.resize(n);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(pi * (i + 0.75) / (n + 0.5));
        for (int iter = 0; iter < 100; ++iter) {
            const auto [p, dp] = legendre(n, x);
            const double dx = p / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        const double dp = legendre(n, x).second;
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        gl.nodes[i] = -x;
        gl.nodes[n - 1 - i] = x;
        gl.weights[i] = w;
        gl.weights[n - 1 - i] = w;
    }
    if (n % 2 == 1) gl.nodes[n / 2] = 0.0;
    return gl;
}

}  // namespace

GaussLegendre gauss_legendre(int n) {
    if (n < 1) throw DomainError("Gauss-Legendre order must be >= 1");
    if (n == 1) return {{0.0}, {2.0}};
    static std::mutex mutex;
    static std::map<int, std::shared_ptr<const GaussLegendre>> cache;
    std::shared_ptr<const GaussLegendre> rule;
    {
        std::lock_guard lock(mutex);
        auto it = cache.find(n);
        if (it != cache.end()) rule = it->second;
    }
    if (!rule) {
        auto fresh = std::make_shared<const GaussLegendre>(compute_gauss_legendre(n));
        std::lock_guard lock(mutex);
        rule = cache.emplace(n, std::move(fresh)).first->second;
    }
    return *rule;
}

double AngularSpectrum::power_fraction() const {
    if (divergence == 0.0) return 1.0;
    double sum = 0.0;
    for (const auto& s : samples) sum += s.quadrature * s.density * s.density;
    return sum * divergence * std::sqrt(2.0 * pi);
}

AngularSpectrum AngularSpectrum::plane_wave(double theta, double wavenumber, Point focus) {
    if (!(theta > 0.0 && theta < pi / 2.0)) throw DomainError("plane wave: angle must lie in (0, pi/2)");
    AngularSpectrum s;
    const double phase = -wavenumber * (std::cos(theta) * focus.x + std::sin(theta) * focus.z);
    s.samples.push_back({theta, std::polar(1.0, phase), 1.0, 1.0});
    s.window_lo = s.window_hi = theta;
    s.divergence = 0.0;
    return s;
}

AngularSpectrum angular_spectrum(const GaussianBeam& beam, int n_samples, double cutoff_sigmas,
                                 HorizonPolicy policy) {
    beam.validate();
    const double k = beam.wavenumber();
    if (n_samples == 1) return AngularSpectrum::plane_wave(beam.incidence_angle, k, beam.focus);
    if (n_samples < 15) throw DomainError("angular spectrum: need at least 15 samples");
    if (!(cutoff_sigmas >= 3.0)) throw DomainError("angular spectrum: cutoff must be >= 3 sigma");

    const double div = beam.divergence();
    const double half_width = cutoff_sigmas * div / std::sqrt(2.0);
    double lo = beam.incidence_angle - half_width;
    double hi = beam.incidence_angle + half_width;
    if (hi >= pi / 2.0) throw DomainError("angular spectrum: window extends past normal incidence");
    if (lo <= 0.0) {
        if (policy == HorizonPolicy::reject) {
            throw DomainError("angular spectrum: window reaches " + format_double(lo, 6) +
                              " rad, below the horizon");
        }
        // Components at or below the surface plane carry no incident flux.
        lo = 1e-9;
    }

    const auto gl = gauss_legendre(n_samples);
    const double mid = 0.5 * (hi + lo), half = 0.5 * (hi - lo);
    const double norm = 1.0 / (div * std::sqrt(pi));

    AngularSpectrum spec;
    spec.window_lo = lo;
    spec.window_hi = hi;
    spec.divergence = div;
    spec.samples.reserve(n_samples);
    for (int j = 0; j < n_samples; ++j) {
        const double th = mid + half * gl.nodes[j];
        const double q = half * gl.weights[j];
        const double dth = (th - beam.incidence_angle) / div;
        const double a = norm * std::exp(-dth * dth);
        const double phase = -k * (std::cos(th) * beam.focus.x + std::sin(th) * beam.focus.z);
        spec.samples.push_back({th, q * a * std::polar(1.0, phase), a, q});
    }
    return spec;
}

std::complex<double> synthesize_free_space(const AngularSpectrum& spectrum, double k, Point r) {
    std::complex<double> e = 0.0;
    for (const auto& s : spectrum.samples) {
        e += s.weight * std::polar(1.0, k * (std::cos(s.theta) * r.x + std::sin(s.theta) * r.z));
    }
    return e;
}

std::complex<double> free_space_field(const GaussianBeam& beam, Point r, FocusGeometry geometry) {
    beam.validate();
    const double k = beam.wavenumber();
    const double zr = beam.rayleigh_range();
    const double c = std::cos(beam.incidence_angle), s = std::sin(beam.incidence_angle);
    const double dx = r.x - beam.focus.x, dz = r.z - beam.focus.z;
    const double along = dx * c + dz * s;
    const double across = -dx * s + dz * c;
    const std::complex<double> i(0.0, 1.0);
    const std::complex<double> q(along, -zr);
    const std::complex<double> ratio = std::complex<double>(0.0, -zr) / q;
    const std::complex<double> amplitude = geometry == FocusGeometry::line ? std::sqrt(ratio) : ratio;
    return amplitude * std::exp(i * k * along) * std::exp(i * k * across * across / (2.0 * q));
}

}  // namespace nucav

#pragma once

#include <complex>
#include <vector>

namespace nucav {

/// Point in the scattering plane: x along the surface (beam direction
/// projected), z the surface normal pointing into the cavity. nm.
struct Point {
    double x = 0.0;
    double z = 0.0;
};

/// Focused Gaussian beam in the x-z plane (line focus), grazing incidence.
struct GaussianBeam {
    double wavelength_nm = 0.0;
    double waist_nm = 0.0;          // amplitude 1/e radius at focus
    double incidence_angle = 0.0;   // grazing, rad
    Point focus;                    // free-space focal point

    double wavenumber() const;
    double divergence() const;      // lambda / (pi w0)
    double rayleigh_range() const;  // pi w0^2 / lambda

    /// Throws DomainError on a beam outside the paraxial regime or one whose
    /// divergence straddles the horizon.
    void validate() const;
};

GaussianBeam make_beam(double wavelength_nm, double waist_nm, double incidence_angle, Point focus);

/// Far-field half-angle divergence of a Gaussian beam.
double divergence_from_waist(double waist_nm, double wavelength_nm);

struct SpectralSample {
    double theta = 0.0;
    std::complex<double> weight;  // quadrature weight x density x focal phase
    double density = 0.0;         // A(theta), normalized so that the integral of A is 1
    double quadrature = 0.0;      // Gauss-Legendre weight
};

/// Plane-wave decomposition E(r) = sum_j weight_j exp(i k (cos t_j x + sin t_j z)).
struct AngularSpectrum {
    std::vector<SpectralSample> samples;
    double window_lo = 0.0;
    double window_hi = 0.0;
    double divergence = 0.0;

    /// Quadrature of |A|^2 over the window relative to its integral over the
    /// whole real line; 1 when the window captures the beam.
    double power_fraction() const;

    /// Single plane wave of unit amplitude at the focus.
    static AngularSpectrum plane_wave(double theta, double wavenumber, Point focus = {});
};

/// What to do when the sampling window reaches below the horizon.
enum class HorizonPolicy {
    reject,  // DomainError
    clip,    // drop components with theta <= 0 (they cannot illuminate the surface)
};

/// Gauss-Legendre sampling of exp(-(t - t_in)^2 / t_div^2) over
/// t_in +- cutoff_sigmas * t_div / sqrt(2), phases referenced to the focus.
AngularSpectrum angular_spectrum(const GaussianBeam& beam, int n_samples, double cutoff_sigmas = 5.0,
                                 HorizonPolicy policy = HorizonPolicy::reject);

/// Field synthesized from a spectrum in free space.
std::complex<double> synthesize_free_space(const AngularSpectrum& spectrum, double wavenumber, Point r);

enum class FocusGeometry {
    line,   // 2D beam, invariant along y
    point,  // 3D circular beam evaluated in the y = 0 plane
};

/// Paraxial Gaussian beam, amplitude 1 at the focus. The default line
/// geometry matches the 2D angular spectrum.
std::complex<double> free_space_field(const GaussianBeam& beam, Point r, FocusGeometry geometry = FocusGeometry::line);

/// Largest |free_space_field| over all space (the focal amplitude).
inline constexpr double free_space_peak = 1.0;

/// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussLegendre {
    std::vector<double> nodes;
    std::vector<double> weights;
};
GaussLegendre gauss_legendre(int n);

}  // namespace nucav

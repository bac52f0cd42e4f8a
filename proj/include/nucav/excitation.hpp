#pragma once

#include "nucav/materials.hpp"

#include <vector>

namespace nucav {

// Units: w0 in nm, chi_source in sqrt(uJ), so chi_sigma is in nm/sqrt(uJ)
// and chi_sigma / w0 * chi_source is the pulse area in rad.
//
// Conventions: temporal envelope E0 exp(-t^2 / 2 tau^2), tau set by the
// spectral-intensity FWHM b_r omega = 2 sqrt(ln 2) / tau, intensity
// eps0 c |E|^2 / 2, transverse effective area pi w0^2 / 2.

/// Transition characteristic of an isotope, nm/sqrt(uJ).
double chi_sigma(const Isotope& iso);

/// Pulse area experienced by nuclei at amplitude enhancement `xi`.
double pulse_area(const Isotope& iso, const SourceParams& source, double w0_nm, double xi);
double pulse_area(double chi_sigma, double chi_source, double w0_nm, double xi);

/// Population inversion after a resonant pulse: -cos(phi).
double sigma_z(double phi);

/// Source characteristic needed for Phi = pi, sqrt(uJ). SingularError for xi <= 0.
double chi_source_nec(const Isotope& iso, double w0_nm, double xi);

/// -cos(pi chi / chi_nec), clamped to +1 once chi reaches chi_nec.
double achievable_sigma_z(double chi_source, double chi_nec);

struct ExcitationResult {
    double pulse_area = 0.0;      // rad
    double sigma_z = -1.0;
    double chi_sigma = 0.0;       // nm / sqrt(uJ)
    double chi_source = 0.0;      // sqrt(uJ)
    double chi_source_nec = 0.0;  // sqrt(uJ)
    double xi = 0.0;
    double w0_nm = 0.0;
};

ExcitationResult excite(const Isotope& iso, const SourceParams& source, double w0_nm, double xi);

/// Pulse energy per footprint area per bandwidth at the cavity surface,
/// uJ/(um^2 meV). Footprint: ellipse with semi-axes w0/sin(theta_in), w0.
double fluence_per_bandwidth(const SourceParams& source, const Isotope& iso, double w0_nm, double theta_in);

/// Same metric for a source with exactly chi_source = chi (any E/b_r split).
double fluence_per_bandwidth(double chi_source, const Isotope& iso, double w0_nm, double theta_in);

// ---------------------------------------------------------------------------
// Direct time-domain check of the pulse-area relation.

struct PulseSpec {
    double energy_uJ = 0.0;
    double relative_bandwidth = 0.0;
    double waist_nm = 0.0;
    double xi = 1.0;  // field amplitude enhancement at the nuclei
};

struct BlochResult {
    double phi_effective = 0.0;  // unwrapped rotation angle of the Bloch vector
    double sigma_z = -1.0;
    std::size_t steps = 0;
};

struct BlochOptions {
    double window_taus = 8.0;          // envelope sampled over +- window_taus * tau
    double points_per_cycle = 200.0;   // minimum RK4 steps per Rabi period
    std::size_t min_steps = 2000;
    double tolerance = 1e-6;           // max sigma_z change on step halving
    std::size_t max_steps = std::size_t{1} << 24;
};

/// Builds the field envelope of `pulse` on a time grid (peak amplitude from
/// the pulse energy by numerical quadrature over time and the transverse
/// profile) and integrates the resonant two-level amplitude equations by
/// RK4. Decay is neglected. ConvergenceError if halving the step changes
/// sigma_z by more than options.tolerance.
BlochResult bloch_oracle(const Isotope& iso, const PulseSpec& pulse, const BlochOptions& options = {});

/// RK4 integration of i dc_g/dt = (W/2) c_e, i dc_e/dt = (W/2) c_g over a
/// Rabi-frequency sequence sampled every half step (2 n + 1 samples for n
/// steps of size h). Returns phi_effective and sigma_z.
BlochResult integrate_two_level(const std::vector<double>& rabi_half_steps, double h);

}  // namespace nucav

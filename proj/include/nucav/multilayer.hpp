#pragma once

#include "nucav/materials.hpp"

#include <complex>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace nucav {

using complex = std::complex<double>;

struct Layer {
    std::string material;
    std::optional<double> thickness_nm;  // nullopt marks a semi-infinite half-space

    bool semi_infinite() const { return !thickness_nm.has_value(); }
};

/// Stratified medium, top (incidence side) to bottom (substrate), with the
/// refractive index of every layer resolved at one photon energy.
///
/// z runs downward from the first interface (z = 0).
class CavityStack {
public:
    CavityStack(std::vector<Layer> layers, std::vector<complex> indices, double energy_keV,
                std::optional<std::size_t> resonant_layer = std::nullopt);

    /// Resolve indices from the database at `energy_keV`.
    static CavityStack resolve(std::vector<Layer> layers, const MaterialsDb& db, double energy_keV,
                               std::optional<std::size_t> resonant_layer = std::nullopt);

    const std::vector<Layer>& layers() const { return layers_; }
    const std::vector<complex>& indices() const { return indices_; }
    std::size_t size() const { return layers_.size(); }
    double energy_keV() const { return energy_keV_; }
    double wavelength_nm() const;
    double wavenumber() const;  // 2 pi / lambda, 1/nm
    std::optional<std::size_t> resonant_layer() const { return resonant_; }

    double thickness(std::size_t layer) const;  // 0 for the half-spaces
    double top(std::size_t layer) const { return tops_.at(layer); }
    double bottom(std::size_t layer) const { return tops_.at(layer) + thickness(layer); }
    double total_thickness() const { return tops_.back(); }

    /// Depth of the resonant layer's midplane.
    double resonant_depth() const;

    /// Same stack with the layer order reversed (substrate becomes the
    /// incidence medium).
    CavityStack reversed() const;

    /// Copy with one interior layer inserted before position `at`.
    CavityStack with_layer_inserted(std::size_t at, Layer layer, complex index) const;

    std::string summary() const;

private:
    std::vector<Layer> layers_;
    std::vector<complex> indices_;
    std::vector<double> tops_;
    double energy_keV_;
    std::optional<std::size_t> resonant_;
};

/// Plane-wave amplitudes in one layer for unit incident amplitude.
///
/// In layer j with boundaries [top, bottom]:
///   E(z) = down * exp(i kz (z - top)) + up * exp(i kz (bottom - z))
/// so each partial wave is referenced to the boundary it enters through and
/// neither factor grows inside the layer. In the incidence half-space
/// top = bottom = 0, giving E = exp(i kz z) + r exp(-i kz z).
struct LayerWave {
    complex kz;
    complex down;
    complex up;
    double top = 0.0;
    double bottom = 0.0;
};

struct PlaneWaveSolution {
    double incidence_angle = 0.0;  // grazing, rad
    double kx = 0.0;               // in-plane wavenumber, 1/nm
    std::vector<LayerWave> layers;
    complex r;
    complex t;

    /// Substrate flux over incident flux.
    double transmittance() const;
};

/// s-polarized field of a stratified medium (time dependence exp(-i w t),
/// Im kz >= 0 in every layer).
PlaneWaveSolution solve_planewave(const CavityStack& stack, double theta);

double reflectivity(const CavityStack& stack, double theta);

struct RockingPoint {
    double theta = 0.0;
    double reflectance = 0.0;
};

std::vector<RockingPoint> rocking_curve(const CavityStack& stack, std::span<const double> theta_grid);

/// Field amplitude at depth z (nm, downward from the first interface).
complex field_at_depth(const PlaneWaveSolution& sol, double z);

/// Vertical derivative dE/dz, 1/nm.
complex field_derivative_at_depth(const PlaneWaveSolution& sol, double z);

/// Evenly spaced grid from lo to hi inclusive.
std::vector<double> linspace(double lo, double hi, std::size_t n);

/// A cavity guided mode located on the plane-wave intensity curve
/// |E(theta, z_probe)|^2: its peak, full width at half maximum, and the
/// lowest reflectance inside that width.
struct ModeProfile {
    double theta = 0.0;
    double peak_intensity = 0.0;
    double fwhm = 0.0;
    double min_reflectance = 0.0;
    double theta_min_reflectance = 0.0;
};

/// Characterize the intensity peak at depth `z_probe` nearest to
/// `theta_guess` within [theta_lo, theta_hi], sampled on `points` angles
/// and refined by golden-section search.
ModeProfile characterize_mode(const CavityStack& stack, double z_probe, double theta_guess, double theta_lo,
                              double theta_hi, std::size_t points = 4001);

/// Lowest-angle local reflectance minimum in (theta_lo, theta_hi), refined;
/// nullopt when the curve has no interior minimum.
std::optional<RockingPoint> first_reflectance_minimum(const CavityStack& stack, double theta_lo, double theta_hi,
                                                      std::size_t points = 4001);

// ---------------------------------------------------------------------------
// Cavity geometry files
//
//   # comment
//   @theta_in_mrad 4.27     (optional illumination settings)
//   @z_focus_nm 8.6
//   vacuum inf
//   Pt 2.0
//   C 20
//   Fe 1 *                  ('*' marks the resonant layer)
//   C 20
//   Pt inf

struct CavityFile {
    std::vector<Layer> layers;
    std::optional<std::size_t> resonant_layer;
    std::optional<double> theta_in_mrad;
    std::optional<double> z_focus_nm;
};

CavityFile parse_cavity(std::string_view text, const std::string& source_name = "<memory>");
CavityFile read_cavity_file(const std::filesystem::path& path);
std::string format_cavity(const CavityFile& file);

}  // namespace nucav

#pragma once

#include "nucav/beam.hpp"
#include "nucav/multilayer.hpp"

#include <string>
#include <vector>

namespace nucav {

struct FieldOptions {
    int n_angles = 401;
    double cutoff_sigmas = 5.0;
    HorizonPolicy horizon = HorizonPolicy::clip;
};

/// A beam's angular spectrum paired with the stratified solution for every
/// component. Built once, then evaluated at any number of points; immutable
/// and safe to share across threads.
class CavityIllumination {
public:
    CavityIllumination(const CavityStack& stack, AngularSpectrum spectrum);
    CavityIllumination(const CavityStack& stack, const GaussianBeam& beam, const FieldOptions& options = {});

    std::complex<double> field(Point r) const;

    const AngularSpectrum& spectrum() const { return spectrum_; }
    const std::vector<PlaneWaveSolution>& solutions() const { return solutions_; }

private:
    AngularSpectrum spectrum_;
    std::vector<PlaneWaveSolution> solutions_;
};

/// Throws DomainError when the beam's wavelength does not match the
/// stack's photon energy.
void check_consistent(const CavityStack& stack, const GaussianBeam& beam);

std::complex<double> cavity_field(const CavityStack& stack, const GaussianBeam& beam, Point r,
                                  const FieldOptions& options = {});

/// |field| relative to the free-space focal amplitude of the same beam.
/// The free-space beam has unit amplitude at its focus, so this equals
/// |cavity_field|.
double enhancement_factor(const CavityStack& stack, const GaussianBeam& beam, Point r,
                          const FieldOptions& options = {});

/// Nuclear position used as the enhancement objective: the resonant-layer
/// midplane where the free-space beam axis crosses it.
Point resonant_point(const CavityStack& stack, const GaussianBeam& beam);

struct Range {
    double lo = 0.0;
    double hi = 0.0;
};

struct FieldMap {
    std::vector<double> x_grid;
    std::vector<double> z_grid;
    std::vector<double> values;  // |xi|^2, index [ix * z_grid.size() + iz]
    GaussianBeam beam;
    std::string stack_summary;
    double free_space_peak = nucav::free_space_peak;
    std::string normalization;

    double at(std::size_t ix, std::size_t iz) const { return values[ix * z_grid.size() + iz]; }
};

/// |xi|^2 on an nx x nz grid. `threads` = 0 uses the hardware concurrency.
FieldMap field_map(const CavityStack& stack, const GaussianBeam& beam, Range x, Range z, std::size_t nx,
                   std::size_t nz, const FieldOptions& options = {}, unsigned threads = 0);

/// Default map window: z from 150 nm above the surface to 50 nm into the
/// substrate, x spanning four projected footprints around the focus.
std::pair<Range, Range> default_map_window(const CavityStack& stack, const GaussianBeam& beam);

/// Long-format CSV "x_nm,z_nm,xi_sq".
std::string field_map_csv(const FieldMap& map);

}  // namespace nucav

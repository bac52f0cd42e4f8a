#include "nucav/fields.hpp"

#include "nucav/error.hpp"
#include "nucav/format.hpp"
#include "nucav/parallel.hpp"

#include <cmath>
#include <sstream>

namespace nucav {

CavityIllumination::CavityIllumination(const CavityStack& stack, AngularSpectrum spectrum)
    : spectrum_(std::move(spectrum)) {
    solutions_.reserve(spectrum_.samples.size());
    for (const auto& s : spectrum_.samples) solutions_.push_back(solve_planewave(stack, s.theta));
}

CavityIllumination::CavityIllumination(const CavityStack& stack, const GaussianBeam& beam, const FieldOptions& options)
    : CavityIllumination(stack, (check_consistent(stack, beam),
                                 angular_spectrum(beam, options.n_angles, options.cutoff_sigmas, options.horizon))) {}

std::complex<double> CavityIllumination::field(Point r) const {
    std::complex<double> e = 0.0;
    for (std::size_t j = 0; j < solutions_.size(); ++j) {
        const auto& sol = solutions_[j];
        e += spectrum_.samples[j].weight * std::polar(1.0, sol.kx * r.x) * field_at_depth(sol, r.z);
    }
    return e;
}

void check_consistent(const CavityStack& stack, const GaussianBeam& beam) {
    const double lam = stack.wavelength_nm();
    if (!(std::abs(beam.wavelength_nm - lam) <= 1e-9 * lam)) {
        throw DomainError("beam wavelength " + format_double(beam.wavelength_nm) + " nm does not match the stack (" +
                          format_double(lam) + " nm at " + format_double(stack.energy_keV()) + " keV)");
    }
}

std::complex<double> cavity_field(const CavityStack& stack, const GaussianBeam& beam, Point r,
                                  const FieldOptions& options) {
    return CavityIllumination(stack, beam, options).field(r);
}

double enhancement_factor(const CavityStack& stack, const GaussianBeam& beam, Point r, const FieldOptions& options) {
    return std::abs(cavity_field(stack, beam, r, options)) / free_space_peak;
}

Point resonant_point(const CavityStack& stack, const GaussianBeam& beam) {
    const double z = stack.resonant_depth();
    return {beam.focus.x + (z - beam.focus.z) / std::tan(beam.incidence_angle), z};
}

FieldMap field_map(const CavityStack& stack, const GaussianBeam& beam, Range x, Range z, std::size_t nx,
                   std::size_t nz, const FieldOptions& options, unsigned threads) {
    if (nx < 2 || nz < 2) throw DomainError("field map: need at least 2 points per axis");
    if (!(x.hi > x.lo) || !(z.hi > z.lo)) throw DomainError("field map: degenerate range");
    const CavityIllumination illum(stack, beam, options);

    FieldMap map;
    map.x_grid = linspace(x.lo, x.hi, nx);
    map.z_grid = linspace(z.lo, z.hi, nz);
    map.values.assign(nx * nz, 0.0);
    map.beam = beam;
    map.stack_summary = stack.summary();
    map.normalization = "xi_sq = |E|^2 / |E_free(focus)|^2; free-space beam has unit amplitude at its focus";

    parallel_for(nx, threads, [&](std::size_t ix) {
        for (std::size_t iz = 0; iz < nz; ++iz) {
            const double amp = std::abs(illum.field({map.x_grid[ix], map.z_grid[iz]})) / map.free_space_peak;
            map.values[ix * nz + iz] = amp * amp;
        }
    });
    return map;
}

std::pair<Range, Range> default_map_window(const CavityStack& stack, const GaussianBeam& beam) {
    const double footprint = beam.waist_nm / std::sin(beam.incidence_angle);
    return {Range{beam.focus.x - 4.0 * footprint, beam.focus.x + 4.0 * footprint},
            Range{-150.0, stack.total_thickness() + 50.0}};
}

std::string field_map_csv(const FieldMap& map) {
    std::ostringstream out;
    out << "x_nm,z_nm,xi_sq\n";
    for (std::size_t ix = 0; ix < map.x_grid.size(); ++ix) {
        for (std::size_t iz = 0; iz < map.z_grid.size(); ++iz) {
            out << format_double(map.x_grid[ix]) << ',' << format_double(map.z_grid[iz]) << ','
                << format_double(map.at(ix, iz)) << '\n';
        }
    }
    return out.str();
}

}  // namespace nucav

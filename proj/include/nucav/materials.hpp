#pragma once

#include <complex>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace nucav {

/// Nuclear transition data for one Mössbauer isotope.
struct Isotope {
    std::string name;
    double transition_energy_keV = 0.0;
    double natural_width_neV = 0.0;   // total width
    double internal_conversion = 0.0; // alpha
    std::string resonant_material;    // electronic host of the doped layer

    double radiative_width_neV() const { return natural_width_neV / (1.0 + internal_conversion); }
    /// Transition angular frequency in rad/s.
    double angular_frequency() const;
    /// Radiative decay rate in 1/s.
    double radiative_rate() const;
};

struct OpticalEntry {
    double energy_keV = 0.0;
    double delta = 0.0;
    double beta = 0.0;
};

struct Material {
    std::string name;
    std::vector<OpticalEntry> entries;
};

struct SourceParams {
    std::string name;
    double pulse_energy_uJ = 0.0;
    double relative_bandwidth = 0.0;

    /// sqrt(pulse energy / relative bandwidth) in sqrt(uJ).
    double chi_source() const;
};

void validate(const Isotope& iso);
void validate(const Material& mat);
void validate(const SourceParams& src);

// Energies closer than this are treated as the same tabulated line.
inline constexpr double energy_match_tolerance_keV = 1e-3;

inline constexpr std::string_view vacuum_material = "vacuum";

/// Immutable registry of isotopes, optical constants and sources.
///
/// Built once by parse()/load(); all accessors are const and safe for
/// concurrent use. Absent keys throw LookupError.
class MaterialsDb {
public:
    MaterialsDb() = default;

    static MaterialsDb parse(std::string_view text, const std::string& source_name = "<memory>");
    static MaterialsDb load(const std::filesystem::path& path);

    // Builders used by parse() and by tests that assemble a db in code.
    // Each validates the record and rejects duplicates.
    void add(Isotope iso);
    void add(Material mat);
    void add(SourceParams src);
    void add_optical_entry(const std::string& material, OpticalEntry entry);

    /// Referential integrity: every isotope's host material exists.
    void check_references() const;

    const Isotope& isotope(const std::string& name) const;
    const Material& material(const std::string& name) const;
    const SourceParams& source(const std::string& name) const;

    bool has_isotope(const std::string& name) const { return isotopes_.contains(name); }
    bool has_material(const std::string& name) const;
    bool has_source(const std::string& name) const { return sources_.contains(name); }

    const std::map<std::string, Isotope>& isotopes() const { return isotopes_; }
    const std::map<std::string, Material>& materials() const { return materials_; }
    const std::map<std::string, SourceParams>& sources() const { return sources_; }

    /// n = 1 - delta + i beta from the entry tabulated at `energy_keV`.
    std::complex<double> refractive_index(const std::string& material, double energy_keV) const;

    /// Text in the same format parse() reads; numbers at full precision.
    std::string serialize() const;

private:
    std::map<std::string, Isotope> isotopes_;
    std::map<std::string, Material> materials_;
    std::map<std::string, SourceParams> sources_;
};

/// lambda = hc / E, nm.
double wavelength_nm(double energy_keV);

/// Effective transition dipole |d| in C m from the radiative width:
/// |d| = sqrt(3 pi eps0 hbar c^3 Gamma_rad / omega^3).
double effective_dipole(const Isotope& iso);

/// Human-readable multi-line description of a record.
std::string describe(const Isotope& iso);
std::string describe(const Material& mat);
std::string describe(const SourceParams& src);

}  // namespace nucav

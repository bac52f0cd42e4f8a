#pragma once

#include "nucav/annealing.hpp"
#include "nucav/fields.hpp"
#include "nucav/materials.hpp"
#include "nucav/multilayer.hpp"

#include <optional>
#include <string>
#include <vector>

namespace nucav {

/// cladding (d1) / guide (d2) / resonant (fixed) / guide (d3) / cladding (inf)
struct CavityTemplate {
    std::vector<std::string> claddings{"Pt", "Pd"};
    std::string guide = "C";
    std::string resonant;               // host material of the isotope
    double resonant_thickness_nm = 1.0;
    Range thickness_nm{0.5, 50.0};      // bounds on d1, d2, d3
    double theta_lo_factor = 0.5;       // theta_in bounds as multiples of the
    double theta_hi_factor = 4.0;       // cladding critical angle
    double focus_above_nm = 100.0;      // z_focus in [-focus_above_nm, total depth]

    static CavityTemplate for_isotope(const Isotope& iso);
    void validate() const;
};

struct CavityParams {
    std::string cladding;
    double d1_nm = 0.0;
    double d2_nm = 0.0;
    double d3_nm = 0.0;
    double theta_in = 0.0;   // rad
    double z_focus_nm = 0.0; // free-space focus depth below the top surface

    double total_thickness() const;
};

/// Critical angle sqrt(2 delta) of a material at an energy.
double critical_angle(const MaterialsDb& db, const std::string& material, double energy_keV);

/// Search box for one cladding, in the order (d1, d2, d3, theta_in, u) where
/// z_focus = -focus_above + u (focus_above + d1 + d2 + d_res + d3).
struct SearchBox {
    std::vector<double> lower;
    std::vector<double> upper;
};
SearchBox search_box(const CavityTemplate& tpl, const MaterialsDb& db, const Isotope& iso, const std::string& cladding);

CavityParams params_from_vector(const CavityTemplate& tpl, const std::string& cladding, const std::vector<double>& v);
std::vector<double> vector_from_params(const CavityTemplate& tpl, const CavityParams& p);

CavityFile instantiate_file(const CavityTemplate& tpl, const CavityParams& p);
CavityStack instantiate(const CavityTemplate& tpl, const CavityParams& p, const MaterialsDb& db, const Isotope& iso);

/// Recovers template parameters from a cavity file of template shape with
/// illumination settings; nullopt when the file does not fit the template.
std::optional<CavityParams> params_from_cavity(const CavityTemplate& tpl, const CavityFile& file);

enum class ObjectivePoint {
    center,         // resonant-layer midplane on the beam axis
    layer_average,  // mean over the resonant layer thickness on the beam axis
};

struct EnhancementSettings {
    FieldOptions field;
    ObjectivePoint point = ObjectivePoint::center;
};

/// xi for a stack illuminated by a beam of waist w0 focused at (0, z_focus).
double evaluate_xi(const CavityStack& stack, double w0_nm, double theta_in, double z_focus_nm,
                   const EnhancementSettings& settings = {});

double evaluate_xi(const CavityTemplate& tpl, const CavityParams& p, const MaterialsDb& db, const Isotope& iso,
                   double w0_nm, const EnhancementSettings& settings = {});

struct CladdingRun {
    std::string cladding;
    CavityParams best;
    double best_xi = 0.0;
    double best_initial_xi = 0.0;
    std::size_t evaluations = 0;
    std::size_t restarts = 0;
    std::uint64_t seed = 0;
    std::vector<TracePoint> trace;  // best-so-far xi (non-decreasing)
};

struct OptimizationResult {
    CavityParams best_params;
    double best_xi = 0.0;
    std::size_t evaluations = 0;
    std::uint64_t seed = 0;
    std::size_t budget = 0;
    double w0_nm = 0.0;
    std::string isotope;
    CavityTemplate tpl;
    AnnealOptions anneal;
    EnhancementSettings settings;
    std::vector<CladdingRun> runs;
    std::vector<TracePoint> trace;  // runs concatenated in cladding order, best-so-far xi
};

struct OptimizeOptions {
    EnhancementSettings settings;
    AnnealOptions anneal;          // budget and seed are taken from the call
    std::vector<CavityParams> starts;  // extra initial candidates (matched by cladding)
    unsigned threads = 0;
};

/// Global search over the template, one annealing run per cladding with the
/// budget split evenly. Deterministic in (seed, budget, inputs).
OptimizationResult optimize_cavity(const CavityTemplate& tpl, const MaterialsDb& db, const Isotope& iso,
                                   double w0_nm, std::size_t budget, std::uint64_t seed,
                                   const OptimizeOptions& options = {});

// ---------------------------------------------------------------------------

struct ReferenceOptions {
    std::string cladding = "Pt";
    std::string guide = "C";
    double d2_nm = 20.0;
    double d3_nm = 20.0;
    Range d1_nm{0.5, 6.0};
    std::size_t d1_points = 56;
};

struct ReferenceCavity {
    CavityFile file;      // with theta_in at the reflectance minimum, focus at the nuclei
    double theta_min = 0.0;
    double min_reflectance = 0.0;
};

/// Critically coupled narrow-mode cavity: d1 chosen to minimize the first
/// reflectance dip above the guide's critical angle.
ReferenceCavity build_reference_cavity(const MaterialsDb& db, const Isotope& iso, const ReferenceOptions& options = {});

// ---------------------------------------------------------------------------

enum class ScanMode { per_spot, fixed };

struct ScanSpec {
    CavityTemplate tpl;  // resonant material is set per isotope
    std::vector<std::string> isotopes;
    std::vector<double> w0_grid_nm;
    ScanMode mode = ScanMode::per_spot;
    std::optional<CavityFile> fixed;   // fixed mode geometry with illumination
    std::vector<std::string> sources;
    std::size_t budget = 2000;
    std::uint64_t seed = 0;
    OptimizeOptions optimize;
    bool warm_start_from_fixed = true;  // per-spot mode: fixed geometry joins the initial samples
};

struct ScanRow {
    std::string isotope;
    double w0_nm = 0.0;
    double xi = 0.0;
    double chi_nec_free = 0.0;
    double chi_nec_cavity = 0.0;
    std::vector<double> sigma_z;  // per source, in ScanSpec::sources order
    double fluence = 0.0;          // uJ/(um^2 meV) at chi_nec_cavity
    CavityParams params;
    double theta_in_mrad = 0.0;    // as written to CSV
    std::uint64_t seed = 0;
    std::string diagnostic;        // empty when the row succeeded
};

struct ScanTable {
    std::vector<std::string> sources;
    std::vector<ScanRow> rows;
};

/// One row per (isotope, w0). A failing row carries NaN values and a
/// diagnostic instead of aborting the scan.
ScanTable spot_size_scan(const ScanSpec& spec, const MaterialsDb& db);

std::string scan_csv(const ScanTable& table);
ScanTable parse_scan_csv(std::string_view text);

/// n points from lo to hi, geometric or linear.
std::vector<double> spot_grid(double lo, double hi, std::size_t n, bool logarithmic = true);

}  // namespace nucav

#include "nucav/cli.hpp"

#include "nucav/error.hpp"
#include "nucav/excitation.hpp"
#include "nucav/fields.hpp"
#include "nucav/format.hpp"
#include "nucav/materials.hpp"
#include "nucav/multilayer.hpp"
#include "nucav/optimize.hpp"
#include "nucav/records.hpp"
#include "nucav/version.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <optional>
#include <sstream>

#ifndef NUCAV_DATA_DIR
#define NUCAV_DATA_DIR "data"
#endif

namespace nucav {

std::string default_data_path() {
    if (const char* env = std::getenv("NUCAV_DATA"); env && *env) return env;
    return std::string(NUCAV_DATA_DIR) + "/materials.db";
}

namespace {

struct Globals {
    std::string data;
    std::uint64_t seed = 0;
    unsigned threads = 0;
    std::string out;
};

std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::uint64_t fnv1a(const std::string& text) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream in(s);
    std::string item;
    while (std::getline(in, item, sep))
        if (!item.empty()) out.push_back(item);
    return out;
}

class Context {
public:
    Context(const Globals& g, std::ostream& out, std::ostream& err) : g_(g), out_(out), err_(err) {}

    const MaterialsDb& db() {
        if (!db_) {
            db_text_ = read_text(g_.data);
            db_ = MaterialsDb::parse(db_text_, g_.data);
            db_->check_references();
        }
        return *db_;
    }

    json data_record() {
        db();
        char hex[17];
        std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(fnv1a(db_text_)));
        return {{"path", g_.data}, {"fnv1a64", hex}};
    }

    // Writes `body` to --out (plus a .meta.json sidecar) or to stdout.
    void emit(const std::string& body, const std::string& command, json config, json extra = json::object()) {
        if (g_.out.empty()) {
            out_ << body;
            return;
        }
        write_file(g_.out, body);
        json meta = {{"tool", "nucav"},
                     {"version", version_string},
                     {"command", command},
                     {"config", std::move(config)},
                     {"data", data_record()},
                     {"output", g_.out}};
        for (auto& [k, v] : extra.items()) meta[k] = v;
        write_file(g_.out + ".meta.json", meta.dump(2) + "\n");
    }

    static void write_file(const std::string& path, const std::string& body) {
        std::ofstream f(path, std::ios::binary);
        if (!f) throw IoError("cannot write " + path);
        f << body;
        if (!f) throw IoError("write failed: " + path);
    }

    const Globals& globals() const { return g_; }
    std::ostream& err() { return err_; }

private:
    const Globals& g_;
    std::ostream& out_;
    std::ostream& err_;
    std::optional<MaterialsDb> db_;
    std::string db_text_;
};

// --- energy / geometry helpers ------------------------------------------------

struct EnergyArgs {
    std::string isotope;
    double energy_keV = 0.0;
};

double resolve_energy(Context& ctx, const EnergyArgs& e) {
    if (!e.isotope.empty()) return ctx.db().isotope(e.isotope).transition_energy_keV;
    if (e.energy_keV > 0.0) return e.energy_keV;
    throw CLI::ValidationError("--isotope or --energy-keV is required");
}

CavityFile load_geometry(const std::string& cavity, const std::string& layers) {
    if (!cavity.empty() && !layers.empty()) throw CLI::ValidationError("give either --cavity or --layers, not both");
    if (!cavity.empty()) return read_cavity_file(cavity);
    if (layers.empty()) throw CLI::ValidationError("--cavity or --layers is required");
    std::string text;
    for (const auto& item : split(layers, ',')) {
        std::string line = item;
        for (auto& c : line)
            if (c == ':') c = ' ';
        if (!line.empty() && line.back() == '*') line.insert(line.size() - 1, " ");
        text += line + "\n";
    }
    return parse_cavity(text, "--layers");
}

SourceParams resolve_source(Context& ctx, const std::string& spec) {
    if (ctx.db().has_source(spec)) return ctx.db().source(spec);
    const auto parts = split(spec, ',');
    if (parts.size() == 2) {
        try {
            std::size_t a = 0, b = 0;
            SourceParams s{spec, std::stod(parts[0], &a), std::stod(parts[1], &b)};
            if (a == parts[0].size() && b == parts[1].size()) {
                validate(s);
                return s;
            }
        } catch (const std::logic_error&) {
        }
    }
    throw LookupError("unknown source '" + spec + "' (expected a database name or E_uJ,b_r)");
}

json layers_json(const CavityFile& f) {
    json j = json::array();
    for (std::size_t i = 0; i < f.layers.size(); ++i) {
        const auto& l = f.layers[i];
        j.push_back({{"material", l.material},
                     {"thickness_nm", l.semi_infinite() ? json("inf") : json(*l.thickness_nm)},
                     {"resonant", f.resonant_layer && *f.resonant_layer == i}});
    }
    return j;
}

// --- subcommands -------------------------------------------------------------

void cmd_materials_list(Context& ctx) {
    const auto& db = ctx.db();
    std::ostringstream o;
    o << "# isotopes\n";
    for (const auto& [name, iso] : db.isotopes())
        o << name << " E_keV=" << format_double(iso.transition_energy_keV) << " gamma_neV="
          << format_double(iso.natural_width_neV) << " alpha=" << format_double(iso.internal_conversion)
          << " material=" << iso.resonant_material << "\n";
    o << "# materials\n";
    for (const auto& [name, m] : db.materials()) {
        o << name << " energies_keV=";
        for (std::size_t i = 0; i < m.entries.size(); ++i) o << (i ? "," : "") << format_double(m.entries[i].energy_keV);
        o << "\n";
    }
    o << "# sources\n";
    for (const auto& [name, s] : db.sources())
        o << name << " E_uJ=" << format_double(s.pulse_energy_uJ) << " b_r=" << format_double(s.relative_bandwidth)
          << "\n";
    ctx.emit(o.str(), "materials list", json::object());
}

void cmd_materials_show(Context& ctx, const std::string& name) {
    const auto& db = ctx.db();
    std::string text;
    if (db.has_isotope(name)) text += describe(db.isotope(name));
    if (db.has_material(name) && name != vacuum_material) text += describe(db.material(name));
    if (db.has_source(name)) text += describe(db.source(name));
    if (text.empty()) throw LookupError("no isotope, material or source named '" + name + "'");
    ctx.emit(text, "materials show", {{"name", name}});
}

struct RockingArgs {
    std::string cavity, layers;
    EnergyArgs energy;
    double theta_min_mrad = 0.5, theta_max_mrad = 10.0;
    std::size_t points = 2001;
};

void cmd_rocking(Context& ctx, const RockingArgs& a) {
    const auto file = load_geometry(a.cavity, a.layers);
    const double E = resolve_energy(ctx, a.energy);
    if (!(a.theta_min_mrad > 0.0 && a.theta_max_mrad > a.theta_min_mrad))
        throw CLI::ValidationError("need 0 < --theta-min-mrad < --theta-max-mrad");
    if (a.points < 2) throw CLI::ValidationError("--points must be >= 2");
    const auto stack = CavityStack::resolve(file.layers, ctx.db(), E, file.resonant_layer);
    std::ostringstream o;
    o << "theta_mrad,reflectance,transmittance\n";
    for (double t : linspace(a.theta_min_mrad, a.theta_max_mrad, a.points)) {
        const auto sol = solve_planewave(stack, t * 1e-3);
        o << format_double(t) << ',' << format_double(std::norm(sol.r)) << ',' << format_double(sol.transmittance())
          << '\n';
    }
    ctx.emit(o.str(), "rocking",
             {{"cavity", a.cavity},
              {"layers", layers_json(file)},
              {"energy_keV", E},
              {"isotope", a.energy.isotope},
              {"theta_min_mrad", a.theta_min_mrad},
              {"theta_max_mrad", a.theta_max_mrad},
              {"points", a.points}});
}

struct FieldmapArgs {
    std::string cavity, layers;
    EnergyArgs energy;
    double w0_nm = 0.0;
    std::optional<double> theta_mrad, z_focus_nm, x_min, x_max, z_min, z_max;
    std::size_t nx = 201, nz = 201;
    int angles = 401;
};

void cmd_fieldmap(Context& ctx, const FieldmapArgs& a) {
    const auto file = load_geometry(a.cavity, a.layers);
    const double E = resolve_energy(ctx, a.energy);
    const auto stack = CavityStack::resolve(file.layers, ctx.db(), E, file.resonant_layer);
    const auto theta_mrad = a.theta_mrad ? a.theta_mrad : file.theta_in_mrad;
    if (!theta_mrad) throw CLI::ValidationError("--theta-mrad is required (the geometry sets none)");
    double zf = 0.0;
    if (a.z_focus_nm) zf = *a.z_focus_nm;
    else if (file.z_focus_nm) zf = *file.z_focus_nm;
    else if (stack.resonant_layer()) zf = stack.resonant_depth();
    const auto beam = make_beam(stack.wavelength_nm(), a.w0_nm, *theta_mrad * 1e-3, {0.0, zf});
    auto [xr, zr] = default_map_window(stack, beam);
    if (a.x_min) xr.lo = *a.x_min;
    if (a.x_max) xr.hi = *a.x_max;
    if (a.z_min) zr.lo = *a.z_min;
    if (a.z_max) zr.hi = *a.z_max;
    FieldOptions fo;
    fo.n_angles = a.angles;
    const auto map = field_map(stack, beam, xr, zr, a.nx, a.nz, fo, ctx.globals().threads);
    ctx.emit(field_map_csv(map), "fieldmap",
             {{"cavity", a.cavity},
              {"layers", layers_json(file)},
              {"energy_keV", E},
              {"isotope", a.energy.isotope},
              {"w0_nm", a.w0_nm},
              {"theta_in_mrad", *theta_mrad},
              {"z_focus_nm", zf},
              {"x_range_nm", {xr.lo, xr.hi}},
              {"z_range_nm", {zr.lo, zr.hi}},
              {"nx", a.nx},
              {"nz", a.nz},
              {"field", to_json(fo)}},
             {{"stack", map.stack_summary},
              {"normalization", map.normalization},
              {"free_space_peak", map.free_space_peak},
              {"divergence_mrad", beam.divergence() * 1e3}});
}

struct ExciteArgs {
    std::string isotope, source;
    double w0_nm = 0.0, xi = 1.0;
    std::optional<double> theta_mrad;
    bool csv = false;
};

void cmd_excite(Context& ctx, const ExciteArgs& a) {
    const auto& iso = ctx.db().isotope(a.isotope);
    const auto src = resolve_source(ctx, a.source);
    const auto r = excite(iso, src, a.w0_nm, a.xi);
    std::optional<double> fluence;
    if (a.theta_mrad) fluence = fluence_per_bandwidth(src, iso, a.w0_nm, *a.theta_mrad * 1e-3);
    std::ostringstream o;
    const std::vector<std::pair<std::string, std::string>> fields{
        {"isotope", iso.name},
        {"source", src.name},
        {"w0_nm", format_double(a.w0_nm)},
        {"xi", format_double(a.xi)},
        {"pulse_area_rad", format_double(r.pulse_area)},
        {"sigma_z", format_double(r.sigma_z)},
        {"chi_sigma_nm_per_sqrt_uJ", format_double(r.chi_sigma)},
        {"chi_source_sqrt_uJ", format_double(r.chi_source)},
        {"chi_source_nec_sqrt_uJ", format_double(r.chi_source_nec)},
        {"fluence_uJ_um2_meV", fluence ? format_double(*fluence) : std::string("nan")}};
    if (a.csv) {
        for (std::size_t i = 0; i < fields.size(); ++i) o << (i ? "," : "") << fields[i].first;
        o << "\n";
        for (std::size_t i = 0; i < fields.size(); ++i) o << (i ? "," : "") << fields[i].second;
        o << "\n";
    } else {
        for (const auto& [k, v] : fields) o << k << "=" << v << "\n";
    }
    ctx.emit(o.str(), "excite",
             {{"isotope", a.isotope},
              {"source", {{"name", src.name}, {"E_uJ", src.pulse_energy_uJ}, {"b_r", src.relative_bandwidth}}},
              {"w0_nm", a.w0_nm},
              {"xi", a.xi},
              {"theta_in_mrad", a.theta_mrad ? json(*a.theta_mrad) : json(nullptr)}});
}

struct TemplateArgs {
    std::string claddings = "Pt,Pd";
    std::string guide = "C";
    std::string objective = "center";
    int angles = 401;
};

CavityTemplate make_template(const TemplateArgs& t, const Isotope& iso) {
    auto tpl = CavityTemplate::for_isotope(iso);
    tpl.claddings = split(t.claddings, ',');
    tpl.guide = t.guide;
    tpl.validate();
    return tpl;
}

OptimizeOptions make_optimize_options(const TemplateArgs& t, unsigned threads) {
    OptimizeOptions o;
    o.settings.field.n_angles = t.angles;
    o.settings.point = t.objective == "center" ? ObjectivePoint::center : ObjectivePoint::layer_average;
    o.threads = threads;
    return o;
}

struct OptimizeArgs {
    std::string isotope = "Fe57";
    double w0_nm = 0.0;
    std::size_t budget = 2000;
    TemplateArgs tpl;
    std::string geometry_out;
};

void cmd_optimize(Context& ctx, const OptimizeArgs& a) {
    const auto& db = ctx.db();
    const auto& iso = db.isotope(a.isotope);
    const auto tpl = make_template(a.tpl, iso);
    const auto opts = make_optimize_options(a.tpl, ctx.globals().threads);
    const auto r = optimize_cavity(tpl, db, iso, a.w0_nm, a.budget, ctx.globals().seed, opts);
    auto record = to_json(r, db);
    if (!a.geometry_out.empty()) {
        Context::write_file(a.geometry_out, "# optimized for " + iso.name + " at w0_nm " + format_double(a.w0_nm) +
                                                ", xi " + format_double(r.best_xi) + "\n" +
                                                format_cavity(instantiate_file(tpl, r.best_params)));
    }
    ctx.emit(record.dump(2) + "\n", "optimize",
             {{"isotope", a.isotope},
              {"w0_nm", a.w0_nm},
              {"budget", a.budget},
              {"seed", ctx.globals().seed},
              {"threads", ctx.globals().threads},
              {"claddings", tpl.claddings},
              {"guide", tpl.guide},
              {"objective", a.tpl.objective},
              {"field", to_json(opts.settings.field)},
              {"geometry_out", a.geometry_out}});
}

struct ScanArgs {
    std::string isotopes = "Fe57";
    double spot_min_nm = 20.0, spot_max_nm = 2000.0;
    std::size_t points = 8;
    std::string spacing = "log";
    std::string mode = "per-spot";
    std::string sources;
    std::string warm_start;
    std::size_t budget = 2000;
    TemplateArgs tpl;
};

CavityFile geometry_from_path(const std::string& path) {
    if (path.size() > 5 && path.substr(path.size() - 5) == ".json") {
        json j;
        try {
            j = json::parse(read_text(path));
        } catch (const json::parse_error& e) {
            throw ParseError(path, 0, e.what());
        }
        const auto r = optimization_from_json(j);
        return instantiate_file(r.tpl, r.best_params);
    }
    return read_cavity_file(path);
}

void cmd_scan(Context& ctx, const ScanArgs& a) {
    const auto& db = ctx.db();
    ScanSpec spec;
    spec.isotopes = split(a.isotopes, ',');
    if (spec.isotopes.empty()) throw CLI::ValidationError("--isotopes is empty");
    if (a.spacing != "log" && a.spacing != "linear") throw CLI::ValidationError("--spacing must be log or linear");
    spec.w0_grid_nm = spot_grid(a.spot_min_nm, a.spot_max_nm, a.points, a.spacing == "log");
    if (a.sources.empty()) {
        for (const auto& [name, s] : db.sources()) spec.sources.push_back(name);
    } else {
        spec.sources = split(a.sources, ',');
    }
    spec.budget = a.budget;
    spec.seed = ctx.globals().seed;
    spec.optimize = make_optimize_options(a.tpl, ctx.globals().threads);

    json fixed_record = nullptr;
    ScanTable table;
    auto run_one = [&](ScanSpec s) {
        s.tpl = make_template(a.tpl, db.isotope(s.isotopes.front()));
        auto t = spot_size_scan(s, db);
        table.sources = t.sources;
        for (auto& r : t.rows) table.rows.push_back(std::move(r));
    };

    if (a.mode == "per-spot") {
        spec.mode = ScanMode::per_spot;
        if (!a.warm_start.empty()) {
            spec.fixed = geometry_from_path(a.warm_start);
            fixed_record = {{"warm_start", a.warm_start}};
        }
        run_one(spec);
    } else if (a.mode.rfind("fixed:", 0) == 0) {
        spec.mode = ScanMode::fixed;
        spec.fixed = geometry_from_path(a.mode.substr(6));
        fixed_record = {{"geometry", a.mode.substr(6)}, {"layers", layers_json(*spec.fixed)}};
        run_one(spec);
    } else if (a.mode.rfind("fixed-at:", 0) == 0) {
        // Optimize once per isotope at the design spot size, then rescale the beam.
        double design = 0.0;
        try {
            std::size_t used = 0;
            design = std::stod(a.mode.substr(9), &used);
            if (used != a.mode.size() - 9) throw std::invalid_argument("trailing");
        } catch (const std::logic_error&) {
            throw CLI::ValidationError("--mode fixed-at:<w0_nm> needs a number");
        }
        fixed_record = json::array();
        for (std::size_t i = 0; i < spec.isotopes.size(); ++i) {
            const auto& iso = db.isotope(spec.isotopes[i]);
            const auto tpl = make_template(a.tpl, iso);
            const auto opt =
                optimize_cavity(tpl, db, iso, design, a.budget, sub_seed(spec.seed, 1000000 + i), spec.optimize);
            ScanSpec s = spec;
            s.isotopes = {iso.name};
            s.mode = ScanMode::fixed;
            s.fixed = instantiate_file(tpl, opt.best_params);
            fixed_record.push_back({{"isotope", iso.name},
                                    {"design_w0_nm", design},
                                    {"best_xi", opt.best_xi},
                                    {"best_params", to_json(opt.best_params)}});
            run_one(s);
        }
    } else {
        throw CLI::ValidationError("--mode must be per-spot, fixed:<file> or fixed-at:<w0_nm>");
    }

    json diagnostics = json::array();
    for (const auto& r : table.rows) {
        if (!r.diagnostic.empty())
            diagnostics.push_back({{"isotope", r.isotope}, {"w0_nm", r.w0_nm}, {"diagnostic", r.diagnostic}});
    }
    ctx.emit(scan_csv(table), "scan",
             {{"isotopes", spec.isotopes},
              {"w0_grid_nm", spec.w0_grid_nm},
              {"spacing", a.spacing},
              {"mode", a.mode},
              {"sources", spec.sources},
              {"budget", a.budget},
              {"seed", spec.seed},
              {"claddings", split(a.tpl.claddings, ',')},
              {"guide", a.tpl.guide},
              {"objective", a.tpl.objective},
              {"field", to_json(spec.optimize.settings.field)}},
             {{"fixed", fixed_record},
              {"diagnostics", diagnostics},
              {"z_focus_reference", "depth below the top surface (z = 0), positive into the cavity"}});
    for (const auto& d : diagnostics) {
        ctx.err() << "warning: row " << d["isotope"].get<std::string>() << " w0_nm "
                      << format_double(d["w0_nm"].get<double>()) << ": " << d["diagnostic"].get<std::string>() << "\n";
    }
}

struct ReferenceArgs {
    std::string isotope = "Fe57";
    ReferenceOptions opts;
};

void cmd_reference(Context& ctx, const ReferenceArgs& a) {
    const auto& iso = ctx.db().isotope(a.isotope);
    const auto ref = build_reference_cavity(ctx.db(), iso, a.opts);
    std::ostringstream o;
    o << "# critically coupled reference cavity for " << iso.name << "\n"
      << "# mode 1 at theta_mrad " << format_double(ref.theta_min * 1e3, 8) << ", reflectance "
      << format_double(ref.min_reflectance, 3) << "\n"
      << format_cavity(ref.file);
    ctx.emit(o.str(), "reference",
             {{"isotope", a.isotope},
              {"cladding", a.opts.cladding},
              {"guide", a.opts.guide},
              {"d2_nm", a.opts.d2_nm},
              {"d3_nm", a.opts.d3_nm},
              {"d1_range_nm", {a.opts.d1_nm.lo, a.opts.d1_nm.hi}},
              {"d1_points", a.opts.d1_points}});
}

std::string one_line(std::string s) {
    for (auto& c : s)
        if (c == '\n' || c == '\r') c = ' ';
    return s;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Nuclear excitation in thin-film x-ray cavities under focused pulses.", "nucav"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_version_flag("--version", std::string(version_string));

    Globals g;
    g.data = default_data_path();
    app.add_option("--data", g.data, "Materials database file")->capture_default_str();
    app.add_option("--seed", g.seed, "Random seed for stochastic searches")->capture_default_str();
    app.add_option("--threads", g.threads, "Worker threads (0 = hardware concurrency)")->capture_default_str();
    app.add_option("--out", g.out, "Output file (a .meta.json sidecar is written next to it); default stdout");

    auto* materials = app.add_subcommand("materials", "Inspect the materials database");
    materials->require_subcommand(1);
    auto* mlist = materials->add_subcommand("list", "List isotopes, materials and sources");
    std::string show_name;
    auto* mshow = materials->add_subcommand("show", "Describe one record");
    mshow->add_option("name", show_name, "Isotope, material or source name")->required();

    auto add_energy = [](CLI::App* c, EnergyArgs& e) {
        c->add_option("--isotope", e.isotope, "Isotope whose transition energy sets the photon energy");
        c->add_option("--energy-keV,--energy-kev", e.energy_keV, "Photon energy, keV")->check(CLI::PositiveNumber);
    };

    RockingArgs ra;
    auto* rocking = app.add_subcommand("rocking", "Plane-wave reflectance versus grazing angle (CSV)");
    rocking->add_option("--cavity", ra.cavity, "Cavity geometry file");
    rocking->add_option("--layers", ra.layers, "Inline geometry, e.g. vacuum:inf,Pt:2,C:20,Fe:1*,C:20,Pt:inf");
    add_energy(rocking, ra.energy);
    rocking->add_option("--theta-min-mrad", ra.theta_min_mrad, "First grazing angle, mrad")->capture_default_str();
    rocking->add_option("--theta-max-mrad", ra.theta_max_mrad, "Last grazing angle, mrad")->capture_default_str();
    rocking->add_option("--points", ra.points, "Number of angles")->capture_default_str();

    FieldmapArgs fa;
    auto* fieldmap = app.add_subcommand("fieldmap", "Map of |xi|^2 for a focused beam over the x-z plane (CSV)");
    fieldmap->add_option("--cavity", fa.cavity, "Cavity geometry file");
    fieldmap->add_option("--layers", fa.layers, "Inline geometry (see rocking)");
    add_energy(fieldmap, fa.energy);
    fieldmap->add_option("--spot-size-nm,--w0-nm", fa.w0_nm, "Beam waist w0, nm")->required()->check(CLI::PositiveNumber);
    fieldmap->add_option("--theta-mrad", fa.theta_mrad, "Grazing angle, mrad (default: @theta_in_mrad of the geometry)");
    fieldmap->add_option("--z-focus-nm", fa.z_focus_nm, "Focus depth below the surface, nm (default: geometry, else nuclei)");
    fieldmap->add_option("--x-min-nm", fa.x_min, "Map window, nm");
    fieldmap->add_option("--x-max-nm", fa.x_max, "Map window, nm");
    fieldmap->add_option("--z-min-nm", fa.z_min, "Map window, nm");
    fieldmap->add_option("--z-max-nm", fa.z_max, "Map window, nm");
    fieldmap->add_option("--nx", fa.nx, "Grid points along x")->capture_default_str();
    fieldmap->add_option("--nz", fa.nz, "Grid points along z")->capture_default_str();
    fieldmap->add_option("--angles", fa.angles, "Angular-spectrum samples")->capture_default_str();

    ExciteArgs ea;
    auto* excite_cmd = app.add_subcommand("excite", "Pulse area, excitation and source requirements");
    excite_cmd->add_option("--isotope", ea.isotope, "Isotope name")->required();
    excite_cmd->add_option("--source", ea.source, "Source name or E_uJ,b_r")->required();
    excite_cmd->add_option("--spot-size-nm,--w0-nm", ea.w0_nm, "Beam waist w0, nm")->required()->check(CLI::PositiveNumber);
    excite_cmd->add_option("--xi", ea.xi, "Field enhancement at the nuclei")->capture_default_str()->check(CLI::PositiveNumber);
    excite_cmd->add_option("--theta-mrad", ea.theta_mrad, "Grazing angle for the fluence metric, mrad");
    excite_cmd->add_flag("--csv", ea.csv, "Print a CSV header and row instead of key=value lines");

    auto add_template = [](CLI::App* c, TemplateArgs& t) {
        c->add_option("--claddings", t.claddings, "Cladding materials tried, comma separated")->capture_default_str();
        c->add_option("--guide", t.guide, "Guiding-layer material")->capture_default_str();
        c->add_option("--objective", t.objective, "Enhancement objective point")
            ->capture_default_str()
            ->check(CLI::IsMember({"center", "layer-average"}));
        c->add_option("--angles", t.angles, "Angular-spectrum samples per evaluation")->capture_default_str();
    };

    OptimizeArgs oa;
    auto* optimize = app.add_subcommand("optimize", "Search the cavity geometry maximizing xi (JSON record)");
    optimize->add_option("--isotope", oa.isotope, "Isotope name")->capture_default_str();
    optimize->add_option("--spot-size-nm,--w0-nm", oa.w0_nm, "Beam waist w0, nm")->required()->check(CLI::PositiveNumber);
    optimize->add_option("--budget", oa.budget, "Objective evaluations (>= 100)")->capture_default_str();
    optimize->add_option("--geometry-out", oa.geometry_out, "Also write the optimum as a cavity file");
    add_template(optimize, oa.tpl);

    ScanArgs sa;
    auto* scan = app.add_subcommand("scan", "Source requirements versus spot size (CSV)");
    scan->add_option("--isotopes", sa.isotopes, "Isotopes, comma separated")->capture_default_str();
    scan->add_option("--spot-min-nm", sa.spot_min_nm, "Smallest w0, nm")->capture_default_str();
    scan->add_option("--spot-max-nm", sa.spot_max_nm, "Largest w0, nm")->capture_default_str();
    scan->add_option("--points", sa.points, "Grid points")->capture_default_str();
    scan->add_option("--spacing", sa.spacing, "Grid spacing: log or linear")->capture_default_str();
    scan->add_option("--mode", sa.mode, "per-spot, fixed:<geometry file or optimize JSON>, fixed-at:<w0_nm>")
        ->capture_default_str();
    scan->add_option("--sources", sa.sources, "Source names, comma separated (default: all)");
    scan->add_option("--warm-start", sa.warm_start, "per-spot: geometry added to every search's initial samples");
    scan->add_option("--budget", sa.budget, "Evaluations per optimization")->capture_default_str();
    add_template(scan, sa.tpl);

    ReferenceArgs rfa;
    auto* reference = app.add_subcommand("reference", "Build a critically coupled narrow-mode cavity (geometry file)");
    reference->add_option("--isotope", rfa.isotope, "Isotope name")->capture_default_str();
    reference->add_option("--cladding", rfa.opts.cladding, "Cladding material")->capture_default_str();
    reference->add_option("--guide", rfa.opts.guide, "Guiding-layer material")->capture_default_str();
    reference->add_option("--d2-nm", rfa.opts.d2_nm, "Guide thickness above the nuclei, nm")->capture_default_str();
    reference->add_option("--d3-nm", rfa.opts.d3_nm, "Guide thickness below the nuclei, nm")->capture_default_str();

    std::vector<std::string> argv_store{"nucav"};
    argv_store.insert(argv_store.end(), args.begin(), args.end());
    std::vector<char*> argv;
    for (auto& s : argv_store) argv.push_back(s.data());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        app.exit(e, out, err);
        return exit_ok;
    } catch (const CLI::CallForAllHelp& e) {
        app.exit(e, out, err);
        return exit_ok;
    } catch (const CLI::CallForVersion&) {
        out << version_string << "\n";
        return exit_ok;
    } catch (const CLI::ParseError& e) {
        err << "error: usage: " << one_line(e.what()) << "\n";
        return exit_usage;
    }

    Context ctx(g, out, err);
    try {
        if (mlist->parsed()) cmd_materials_list(ctx);
        else if (mshow->parsed()) cmd_materials_show(ctx, show_name);
        else if (rocking->parsed()) cmd_rocking(ctx, ra);
        else if (fieldmap->parsed()) cmd_fieldmap(ctx, fa);
        else if (excite_cmd->parsed()) cmd_excite(ctx, ea);
        else if (optimize->parsed()) cmd_optimize(ctx, oa);
        else if (scan->parsed()) cmd_scan(ctx, sa);
        else if (reference->parsed()) cmd_reference(ctx, rfa);
    } catch (const CLI::ParseError& e) {
        err << "error: usage: " << one_line(e.what()) << "\n";
        return exit_usage;
    } catch (const Error& e) {
        err << "error: " << e.kind() << ": " << one_line(e.what()) << "\n";
        return exit_runtime;
    } catch (const std::exception& e) {
        err << "error: internal: " << one_line(e.what()) << "\n";
        return exit_runtime;
    }
    return exit_ok;
}

}  // namespace nucav

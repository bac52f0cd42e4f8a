#include "nucav/optimize.hpp"

#include "nucav/beam.hpp"
#include "nucav/error.hpp"
#include "nucav/excitation.hpp"
#include "nucav/format.hpp"
#include "nucav/parallel.hpp"

#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>

namespace nucav {

constexpr double nan_value = std::numeric_limits<double>::quiet_NaN();

CavityTemplate CavityTemplate::for_isotope(const Isotope& iso) {
    CavityTemplate t;
    t.resonant = iso.resonant_material;
    return t;
}

void CavityTemplate::validate() const {
    if (claddings.empty()) throw InvariantError("template: no cladding materials");
    for (const auto& c : claddings)
        if (c.empty()) throw InvariantError("template: empty cladding name");
    if (guide.empty()) throw InvariantError("template: empty guide material");
    if (resonant.empty()) throw InvariantError("template: resonant material not set");
    if (!(resonant_thickness_nm > 0.0 && std::isfinite(resonant_thickness_nm)))
        throw InvariantError("template: resonant thickness must be finite and > 0");
    if (!(thickness_nm.lo >= 0.0 && thickness_nm.lo < thickness_nm.hi && std::isfinite(thickness_nm.hi)))
        throw InvariantError("template: thickness bounds must satisfy 0 <= lo < hi < inf");
    if (!(theta_lo_factor > 0.0 && theta_lo_factor < theta_hi_factor && std::isfinite(theta_hi_factor)))
        throw InvariantError("template: angle factors must satisfy 0 < lo < hi < inf");
    if (!(focus_above_nm >= 0.0 && std::isfinite(focus_above_nm)))
        throw InvariantError("template: focus_above_nm must be finite and >= 0");
}

double CavityParams::total_thickness() const { return d1_nm + d2_nm + d3_nm; }

double critical_angle(const MaterialsDb& db, const std::string& material, double energy_keV) {
    const auto n = db.refractive_index(material, energy_keV);
    const double delta = 1.0 - n.real();
    if (!(delta > 0.0)) throw DomainError("critical angle: " + material + " has delta <= 0");
    return std::sqrt(2.0 * delta);
}

SearchBox search_box(const CavityTemplate& tpl, const MaterialsDb& db, const Isotope& iso,
                     const std::string& cladding) {
    const double tc = critical_angle(db, cladding, iso.transition_energy_keV);
    const auto& t = tpl.thickness_nm;
    return {{t.lo, t.lo, t.lo, tpl.theta_lo_factor * tc, 0.0}, {t.hi, t.hi, t.hi, tpl.theta_hi_factor * tc, 1.0}};
}

CavityParams params_from_vector(const CavityTemplate& tpl, const std::string& cladding, const std::vector<double>& v) {
    if (v.size() != 5) throw DomainError("template parameter vector must have 5 entries");
    CavityParams p{cladding, v[0], v[1], v[2], v[3], 0.0};
    const double depth = p.total_thickness() + tpl.resonant_thickness_nm;
    p.z_focus_nm = -tpl.focus_above_nm + v[4] * (tpl.focus_above_nm + depth);
    return p;
}

std::vector<double> vector_from_params(const CavityTemplate& tpl, const CavityParams& p) {
    const double depth = p.total_thickness() + tpl.resonant_thickness_nm;
    const double u = (p.z_focus_nm + tpl.focus_above_nm) / (tpl.focus_above_nm + depth);
    return {p.d1_nm, p.d2_nm, p.d3_nm, p.theta_in, u};
}

CavityFile instantiate_file(const CavityTemplate& tpl, const CavityParams& p) {
    CavityFile f;
    f.layers = {{std::string(vacuum_material), std::nullopt},
                {p.cladding, p.d1_nm},
                {tpl.guide, p.d2_nm},
                {tpl.resonant, tpl.resonant_thickness_nm},
                {tpl.guide, p.d3_nm},
                {p.cladding, std::nullopt}};
    f.resonant_layer = 3;
    f.theta_in_mrad = p.theta_in * 1e3;
    f.z_focus_nm = p.z_focus_nm;
    return f;
}

CavityStack instantiate(const CavityTemplate& tpl, const CavityParams& p, const MaterialsDb& db, const Isotope& iso) {
    auto f = instantiate_file(tpl, p);
    return CavityStack::resolve(std::move(f.layers), db, iso.transition_energy_keV, f.resonant_layer);
}

std::optional<CavityParams> params_from_cavity(const CavityTemplate& tpl, const CavityFile& f) {
    const auto& L = f.layers;
    if (L.size() != 6 || f.resonant_layer != std::size_t{3}) return std::nullopt;
    if (L[0].material != vacuum_material || !L[0].semi_infinite() || !L[5].semi_infinite()) return std::nullopt;
    if (L[1].material != L[5].material || L[2].material != tpl.guide || L[4].material != tpl.guide) return std::nullopt;
    if (L[3].material != tpl.resonant || std::abs(*L[3].thickness_nm - tpl.resonant_thickness_nm) > 1e-12)
        return std::nullopt;
    if (!f.theta_in_mrad || !f.z_focus_nm) return std::nullopt;
    return CavityParams{L[1].material, *L[1].thickness_nm, *L[2].thickness_nm, *L[4].thickness_nm,
                        *f.theta_in_mrad * 1e-3, *f.z_focus_nm};
}

double evaluate_xi(const CavityStack& stack, double w0_nm, double theta_in, double z_focus_nm,
                   const EnhancementSettings& settings) {
    const auto beam = make_beam(stack.wavelength_nm(), w0_nm, theta_in, {0.0, z_focus_nm});
    const CavityIllumination illum(stack, beam, settings.field);
    if (settings.point == ObjectivePoint::center) return std::abs(illum.field(resonant_point(stack, beam))) / free_space_peak;

    const auto res = stack.resonant_layer();
    if (!res) throw DomainError("layer-averaged objective needs a resonant layer");
    const double top = stack.top(*res), bottom = stack.bottom(*res);
    const auto gl = gauss_legendre(5);
    double sum = 0.0;
    for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
        const double z = 0.5 * (top + bottom) + 0.5 * (bottom - top) * gl.nodes[i];
        const Point p{beam.focus.x + (z - beam.focus.z) / std::tan(theta_in), z};
        sum += 0.5 * gl.weights[i] * std::abs(illum.field(p));
    }
    return sum / free_space_peak;
}

double evaluate_xi(const CavityTemplate& tpl, const CavityParams& p, const MaterialsDb& db, const Isotope& iso,
                   double w0_nm, const EnhancementSettings& settings) {
    return evaluate_xi(instantiate(tpl, p, db, iso), w0_nm, p.theta_in, p.z_focus_nm, settings);
}

namespace {

std::string describe_params(const CavityParams& p) {
    return "cladding=" + p.cladding + " d1_nm=" + format_double(p.d1_nm) + " d2_nm=" + format_double(p.d2_nm) +
           " d3_nm=" + format_double(p.d3_nm) + " theta_in_mrad=" + format_double(p.theta_in * 1e3) +
           " z_focus_nm=" + format_double(p.z_focus_nm);
}

}  // namespace

OptimizationResult optimize_cavity(const CavityTemplate& tpl, const MaterialsDb& db, const Isotope& iso, double w0_nm,
                                   std::size_t budget, std::uint64_t seed, const OptimizeOptions& options) {
    tpl.validate();
    validate(iso);
    if (budget < 100) throw DomainError("optimize: budget must be >= 100 evaluations");
    if (!(w0_nm > 0.0)) throw DomainError("optimize: w0 must be > 0");

    const std::size_t nc = tpl.claddings.size();
    std::vector<CladdingRun> runs(nc);
    parallel_for(nc, options.threads, [&](std::size_t i) {
        const std::string& clad = tpl.claddings[i];
        const auto box = search_box(tpl, db, iso, clad);
        AnnealOptions ao = options.anneal;
        ao.budget = budget / nc + (i < budget % nc ? 1 : 0);
        ao.seed = sub_seed(seed, i);

        const Objective f = [&](const std::vector<double>& v) {
            const auto p = params_from_vector(tpl, clad, v);
            try {
                return -evaluate_xi(tpl, p, db, iso, w0_nm, options.settings);
            } catch (const Error& e) {
                throw Error(e.kind(), std::string(e.what()) + " [" + describe_params(p) + "]");
            }
        };
        std::vector<std::vector<double>> starts;
        for (const auto& s : options.starts)
            if (s.cladding == clad) starts.push_back(vector_from_params(tpl, s));

        const auto ar = anneal(f, box.lower, box.upper, ao, starts);
        CladdingRun& run = runs[i];
        run.cladding = clad;
        run.best = params_from_vector(tpl, clad, ar.x);
        run.best_xi = -ar.fx;
        run.best_initial_xi = -ar.best_initial;
        run.evaluations = ar.evaluations;
        run.restarts = ar.restarts;
        run.seed = ao.seed;
        for (const auto& t : ar.trace) run.trace.push_back({t.evaluation, -t.best});
    });

    OptimizationResult r;
    r.seed = seed;
    r.budget = budget;
    r.w0_nm = w0_nm;
    r.isotope = iso.name;
    r.tpl = tpl;
    r.anneal = options.anneal;
    r.settings = options.settings;
    std::size_t best = 0, offset = 0;
    double running = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < nc; ++i) {
        if (runs[i].best_xi > runs[best].best_xi) best = i;
        for (const auto& t : runs[i].trace) {
            if (t.best > running) {
                running = t.best;
                r.trace.push_back({offset + t.evaluation, running});
            }
        }
        offset += runs[i].evaluations;
        r.evaluations += runs[i].evaluations;
    }
    r.best_params = runs[best].best;
    r.best_xi = evaluate_xi(tpl, r.best_params, db, iso, w0_nm, options.settings);
    r.runs = std::move(runs);
    return r;
}

// ---------------------------------------------------------------------------

ReferenceCavity build_reference_cavity(const MaterialsDb& db, const Isotope& iso, const ReferenceOptions& o) {
    if (!(o.d1_nm.lo > 0.0 && o.d1_nm.hi > o.d1_nm.lo) || o.d1_points < 3)
        throw DomainError("reference cavity: invalid d1 scan range");
    const double E = iso.transition_energy_keV;
    const double lo = critical_angle(db, o.guide, E), hi = critical_angle(db, o.cladding, E);
    auto layers = [&](double d1) {
        return std::vector<Layer>{{std::string(vacuum_material), std::nullopt},
                                  {o.cladding, d1},
                                  {o.guide, o.d2_nm},
                                  {iso.resonant_material, 1.0},
                                  {o.guide, o.d3_nm},
                                  {o.cladding, std::nullopt}};
    };
    auto dip = [&](double d1) {
        const auto stack = CavityStack::resolve(layers(d1), db, E, 3);
        auto m = first_reflectance_minimum(stack, lo, hi);
        return m ? *m : RockingPoint{0.0, 2.0};
    };

    const auto grid = linspace(o.d1_nm.lo, o.d1_nm.hi, o.d1_points);
    std::size_t best = 0;
    std::vector<double> values(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        values[i] = dip(grid[i]).reflectance;
        if (values[i] < values[best]) best = i;
    }
    // Golden-section refinement between the neighbours of the best grid point.
    double a = grid[best == 0 ? 0 : best - 1], b = grid[std::min(best + 1, grid.size() - 1)];
    const double g = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - g * (b - a), d = a + g * (b - a);
    double fc = dip(c).reflectance, fd = dip(d).reflectance;
    for (int it = 0; it < 60 && b - a > 1e-6; ++it) {
        if (fc < fd) {
            b = d, d = c, fd = fc;
            c = b - g * (b - a);
            fc = dip(c).reflectance;
        } else {
            a = c, c = d, fc = fd;
            d = a + g * (b - a);
            fd = dip(d).reflectance;
        }
    }
    // Keep the grid value if refinement did not improve on it.
    double d1 = 0.5 * (a + b);
    if (!(dip(d1).reflectance < values[best])) d1 = grid[best];
    // Round to 0.01 nm for a readable geometry while the dip stays deep.
    const double rounded = std::round(d1 * 100.0) / 100.0;
    if (dip(rounded).reflectance < 1e-3) d1 = rounded;

    const auto m = dip(d1);
    if (m.reflectance > 1.0) throw ConvergenceError("reference cavity: no reflectance minimum found");
    ReferenceCavity ref;
    ref.file.layers = layers(d1);
    ref.file.resonant_layer = 3;
    ref.theta_min = m.theta;
    ref.min_reflectance = m.reflectance;
    ref.file.theta_in_mrad = m.theta * 1e3;
    ref.file.z_focus_nm = CavityStack::resolve(layers(d1), db, E, 3).resonant_depth();
    return ref;
}

// ---------------------------------------------------------------------------

std::vector<double> spot_grid(double lo, double hi, std::size_t n, bool logarithmic) {
    if (!(lo > 0.0 && hi > lo)) throw DomainError("spot grid: need 0 < min < max");
    if (n < 2) throw DomainError("spot grid: need at least 2 points");
    if (!logarithmic) return linspace(lo, hi, n);
    std::vector<double> g(n);
    const double r = std::log(hi / lo);
    for (std::size_t i = 0; i < n; ++i) g[i] = lo * std::exp(r * static_cast<double>(i) / static_cast<double>(n - 1));
    g.front() = lo;
    g.back() = hi;
    return g;
}

ScanTable spot_size_scan(const ScanSpec& spec, const MaterialsDb& db) {
    if (spec.isotopes.empty()) throw DomainError("scan: no isotopes");
    if (spec.w0_grid_nm.empty()) throw DomainError("scan: empty spot-size grid");
    for (std::size_t i = 0; i < spec.w0_grid_nm.size(); ++i) {
        if (!(spec.w0_grid_nm[i] > 0.0) || (i > 0 && !(spec.w0_grid_nm[i] > spec.w0_grid_nm[i - 1])))
            throw DomainError("scan: spot-size grid must be positive and strictly increasing");
    }
    if (spec.mode == ScanMode::fixed) {
        if (!spec.fixed) throw DomainError("scan: fixed mode needs a geometry");
        if (!spec.fixed->theta_in_mrad || !spec.fixed->z_focus_nm)
            throw DomainError("scan: fixed geometry must set @theta_in_mrad and @z_focus_nm");
        if (!spec.fixed->resonant_layer) throw DomainError("scan: fixed geometry has no resonant layer");
    }
    std::vector<double> chi_src;
    for (const auto& s : spec.sources) chi_src.push_back(db.source(s).chi_source());
    for (const auto& name : spec.isotopes) db.isotope(name);

    const std::size_t nw = spec.w0_grid_nm.size();
    ScanTable table;
    table.sources = spec.sources;
    table.rows.resize(spec.isotopes.size() * nw);

    OptimizeOptions inner = spec.optimize;
    inner.threads = 1;
    parallel_for(table.rows.size(), spec.optimize.threads, [&](std::size_t k) {
        ScanRow& row = table.rows[k];
        const Isotope& iso = db.isotope(spec.isotopes[k / nw]);
        row.isotope = iso.name;
        row.w0_nm = spec.w0_grid_nm[k % nw];
        row.seed = spec.mode == ScanMode::per_spot ? sub_seed(spec.seed, k) : spec.seed;
        CavityTemplate tpl = spec.tpl;
        tpl.resonant = iso.resonant_material;
        try {
            if (spec.mode == ScanMode::per_spot) {
                OptimizeOptions opts = inner;
                if (spec.warm_start_from_fixed && spec.fixed) {
                    if (auto p = params_from_cavity(tpl, *spec.fixed)) opts.starts.push_back(*p);
                }
                const auto res = optimize_cavity(tpl, db, iso, row.w0_nm, spec.budget, row.seed, opts);
                row.xi = res.best_xi;
                row.params = res.best_params;
            } else {
                const CavityFile& f = *spec.fixed;
                const auto& res_layer = f.layers.at(*f.resonant_layer);
                if (res_layer.material != iso.resonant_material)
                    throw DomainError("fixed geometry resonant layer is " + res_layer.material + ", isotope " + iso.name +
                                      " needs " + iso.resonant_material);
                const auto stack = CavityStack::resolve(f.layers, db, iso.transition_energy_keV, f.resonant_layer);
                if (auto p = params_from_cavity(tpl, f)) {
                    row.params = *p;
                } else {
                    row.params = {f.layers.size() > 1 ? f.layers[1].material : "", nan_value, nan_value, nan_value,
                                  *f.theta_in_mrad * 1e-3, *f.z_focus_nm};
                }
                row.xi = evaluate_xi(stack, row.w0_nm, row.params.theta_in, row.params.z_focus_nm, inner.settings);
            }
            row.chi_nec_free = chi_source_nec(iso, row.w0_nm, 1.0);
            row.chi_nec_cavity = chi_source_nec(iso, row.w0_nm, row.xi);
            for (double c : chi_src) row.sigma_z.push_back(achievable_sigma_z(c, row.chi_nec_cavity));
            row.fluence = fluence_per_bandwidth(row.chi_nec_cavity, iso, row.w0_nm, row.params.theta_in);
            row.theta_in_mrad = row.params.theta_in * 1e3;
        } catch (const Error& e) {
            row.diagnostic = e.kind() + ": " + e.what();
        } catch (const std::exception& e) {
            row.diagnostic = std::string("internal: ") + e.what();
        }
        if (!row.diagnostic.empty()) {
            row.xi = row.chi_nec_free = row.chi_nec_cavity = row.fluence = nan_value;
            row.sigma_z.assign(chi_src.size(), nan_value);
            row.params = {"", nan_value, nan_value, nan_value, nan_value, nan_value};
            row.theta_in_mrad = nan_value;
        }
    });
    return table;
}

std::string scan_csv(const ScanTable& t) {
    std::ostringstream o;
    o << "isotope,w0_nm,xi,chi_nec_free,chi_nec_cavity";
    for (const auto& s : t.sources) o << ",sigma_z_" << s;
    o << ",fluence_uJ_um2_meV,theta_in_mrad,d1_nm,d2_nm,d3_nm,cladding,z_focus_nm,seed\n";
    for (const auto& r : t.rows) {
        o << r.isotope << ',' << format_double(r.w0_nm) << ',' << format_double(r.xi) << ','
          << format_double(r.chi_nec_free) << ',' << format_double(r.chi_nec_cavity);
        for (double s : r.sigma_z) o << ',' << format_double(s);
        o << ',' << format_double(r.fluence) << ',' << format_double(r.theta_in_mrad) << ','
          << format_double(r.params.d1_nm) << ',' << format_double(r.params.d2_nm) << ','
          << format_double(r.params.d3_nm) << ',' << r.params.cladding << ',' << format_double(r.params.z_focus_nm)
          << ',' << r.seed << '\n';
    }
    return o.str();
}

namespace {

std::vector<std::string> split_csv_line(std::string_view line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
        const auto pos = line.find(',', start);
        out.emplace_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

double parse_number(const std::string& s, int line) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) throw ParseError("scan csv", line, "bad number '" + s + "'");
    return v;
}

}  // namespace

ScanTable parse_scan_csv(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string line;
    int lineno = 0;
    if (!std::getline(in, line)) throw ParseError("scan csv", 1, "missing header");
    ++lineno;
    const auto header = split_csv_line(line);
    const std::size_t fixed_cols = 13;
    if (header.size() < fixed_cols || header[0] != "isotope" || header.back() != "seed")
        throw ParseError("scan csv", lineno, "unexpected header");
    ScanTable t;
    const std::size_t ns = header.size() - fixed_cols;
    for (std::size_t i = 0; i < ns; ++i) {
        const auto& h = header[5 + i];
        if (h.rfind("sigma_z_", 0) != 0) throw ParseError("scan csv", lineno, "unexpected column '" + h + "'");
        t.sources.push_back(h.substr(8));
    }
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto f = split_csv_line(line);
        if (f.size() != header.size()) throw ParseError("scan csv", lineno, "wrong column count");
        ScanRow r;
        std::size_t c = 0;
        r.isotope = f[c++];
        r.w0_nm = parse_number(f[c++], lineno);
        r.xi = parse_number(f[c++], lineno);
        r.chi_nec_free = parse_number(f[c++], lineno);
        r.chi_nec_cavity = parse_number(f[c++], lineno);
        for (std::size_t i = 0; i < ns; ++i) r.sigma_z.push_back(parse_number(f[c++], lineno));
        r.fluence = parse_number(f[c++], lineno);
        r.theta_in_mrad = parse_number(f[c++], lineno);
        r.params.theta_in = r.theta_in_mrad * 1e-3;
        r.params.d1_nm = parse_number(f[c++], lineno);
        r.params.d2_nm = parse_number(f[c++], lineno);
        r.params.d3_nm = parse_number(f[c++], lineno);
        r.params.cladding = f[c++];
        r.params.z_focus_nm = parse_number(f[c++], lineno);
        const auto& s = f[c++];
        const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), r.seed);
        if (ec != std::errc() || ptr != s.data() + s.size()) throw ParseError("scan csv", lineno, "bad seed '" + s + "'");
        t.rows.push_back(std::move(r));
    }
    return t;
}

}  // namespace nucav

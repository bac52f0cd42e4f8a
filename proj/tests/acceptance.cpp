// Acceptance run: one line per criterion with the measured quantities.
//
// Exit status is 0 when every failing criterion is listed in known_failures
// with the clause that is expected to miss; any other failure gives 1.

#include "nucav/beam.hpp"
#include "nucav/excitation.hpp"
#include "nucav/fields.hpp"
#include "nucav/format.hpp"
#include "nucav/multilayer.hpp"
#include "nucav/optimize.hpp"
#include "oracles.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

#include <unistd.h>

using namespace nucav;

namespace {

constexpr double pi = std::numbers::pi;

struct Verdict {
    bool pass = false;
    std::string detail;
    bool known_clause_only = false;  // failure confined to the documented clause
};

struct Criterion {
    int id;
    std::string title;
    double time_limit_s;  // 0: no runtime bound
    std::function<Verdict()> run;
};

// Criterion -> clause that is expected to fail with this model.
const std::map<int, std::string> known_failures{
    {10, "fixed-cavity xi non-increasing above the design spot"},
};

const MaterialsDb& db() {
    static const auto d = MaterialsDb::load(NUCAV_TEST_DATA "/materials.db");
    return d;
}

const Isotope& fe() { return db().isotope("Fe57"); }

std::string num(double v, int digits = 6) { return format_double(v, digits); }

CavityStack make_stack(const std::vector<complex>& n, const std::vector<double>& d, double energy) {
    std::vector<Layer> layers{{"top", std::nullopt}};
    for (std::size_t i = 0; i < d.size(); ++i) layers.push_back({"L" + std::to_string(i), d[i]});
    layers.push_back({"sub", std::nullopt});
    return CavityStack(layers, n, energy);
}

CavityStack random_stack(std::mt19937_64& g, bool lossless, int max_films) {
    std::uniform_real_distribution<double> delta(1e-6, 3e-5), beta(1e-8, 3e-6), thick(0.2, 40.0);
    std::uniform_int_distribution<int> count(1, max_films);
    const int nf = count(g);
    std::vector<complex> n{1.0};
    std::vector<double> d;
    for (int i = 0; i < nf; ++i) {
        n.emplace_back(1.0 - delta(g), lossless ? 0.0 : beta(g));
        d.push_back(thick(g));
    }
    n.emplace_back(1.0 - delta(g), lossless ? 0.0 : beta(g));
    return make_stack(n, d, fe().transition_energy_keV);
}

// ---------------------------------------------------------------------------

Verdict fresnel() {
    const double E = fe().transition_energy_keV;
    const complex n = db().refractive_index("Pt", E);
    const auto s = make_stack({1.0, n}, {}, E);
    double worst = 0.0;
    for (double t : linspace(1e-5, 0.1, 1000)) {
        const auto r = solve_planewave(s, t).r;
        const auto ref = oracle::fresnel_rs(n, t);
        const double rr = std::norm(r), rref = std::norm(ref);
        worst = std::max({worst, std::abs(rr - rref) / rref, std::abs(r - ref) / std::abs(ref)});
    }
    return {worst < 1e-10, "Pt at 1000 angles 0.01-100 mrad: max relative error " + num(worst, 3)};
}

Verdict energy() {
    std::mt19937_64 g(20240611);
    auto grid = linspace(1e-4, 0.05, 1000);
    for (double t : linspace(0.05, pi / 2 - 1e-3, 200)) grid.push_back(t);
    double worst = 0.0;
    for (int k = 0; k < 50; ++k) {
        const auto s = random_stack(g, true, 8);
        for (double t : grid) {
            const auto sol = solve_planewave(s, t);
            worst = std::max(worst, std::abs(std::norm(sol.r) + sol.transmittance() - 1.0));
        }
    }
    return {worst <= 1e-9, "50 lossless stacks x 1200 angles: max |R + T - 1| " + num(worst, 3)};
}

Verdict identities() {
    std::mt19937_64 g(77);
    double zero_worst = 0.0, cont_worst = 0.0;
    for (int k = 0; k < 30; ++k) {
        const auto s = random_stack(g, false, 6);
        const auto s2 = s.with_layer_inserted(1 + k % (s.size() - 1), {"zero", 0.0}, complex(1.0 - 2e-5, 4e-6));
        for (double t : linspace(1e-3, 0.03, 60)) {
            const auto a = solve_planewave(s, t), b = solve_planewave(s2, t);
            zero_worst = std::max({zero_worst, std::abs(a.r - b.r), std::abs(a.t - b.t) / std::max(1.0, std::abs(a.t))});
            for (double z : linspace(-20.0, s.total_thickness() + 20.0, 25)) {
                const auto ea = field_at_depth(a, z), eb = field_at_depth(b, z);
                zero_worst = std::max(zero_worst, std::abs(ea - eb) / std::max(1.0, std::abs(ea)));
            }
        }
        for (double t : {1e-3, 3e-3, 6e-3, 1.5e-2, 3e-2}) {
            const auto sol = solve_planewave(s, t);
            for (std::size_t j = 1; j < s.size(); ++j) {
                const double z = s.top(j), eps = 1e-9;
                const auto e1 = field_at_depth(sol, z - eps), e2 = field_at_depth(sol, z + eps);
                const auto d1 = field_derivative_at_depth(sol, z - eps), d2 = field_derivative_at_depth(sol, z + eps);
                cont_worst = std::max({cont_worst, std::abs(e1 - e2) / std::max(std::abs(e1), 1e-3),
                                       std::abs(d1 - d2) / std::max(std::abs(d1), 1e-3)});
            }
        }
    }
    const bool ok = zero_worst <= 1e-10 && cont_worst <= 1e-6;
    return {ok, "zero-thickness max deviation " + num(zero_worst, 3) + " (< 1e-10), interface jump " +
                    num(cont_worst, 3) + " (< 1e-6)"};
}

Verdict divergence() {
    const double lam = wavelength_nm(14.4125);
    const double div = divergence_from_waist(40.0, lam);
    const bool ok = std::abs(div - 0.685e-3) <= 0.01 * 0.685e-3;
    return {ok, "lambda " + num(lam, 8) + " nm, divergence " + num(div * 1e3, 6) + " mrad (0.685 +- 1%)"};
}

Verdict unity() {
    const double E = fe().transition_energy_keV;
    const auto stack = CavityStack::resolve(
        {{"vacuum", std::nullopt}, {"vacuum", 30.0}, {"vacuum", 1.0}, {"vacuum", 30.0}, {"vacuum", std::nullopt}}, db(), E,
        2);
    const auto beam = make_beam(stack.wavelength_nm(), 40.0, 4e-3, {0.0, 25.0});
    FieldOptions o;
    o.n_angles = 101;
    const double xi = enhancement_factor(stack, beam, beam.focus, o);
    o.n_angles = 202;
    const double xi2 = enhancement_factor(stack, beam, beam.focus, o);
    const bool ok = std::abs(xi - 1.0) <= 1e-3 && std::abs(xi2 - xi) < 1e-6;
    return {ok, "xi(101) = " + num(xi, 12) + ", |xi(202) - xi(101)| = " + num(std::abs(xi2 - xi), 3)};
}

Verdict area_theorem() {
    std::mt19937_64 g(31415);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<const Isotope*> isos;
    for (const auto& [name, iso] : db().isotopes()) isos.push_back(&iso);
    double worst = 0.0;
    for (int k = 0; k < 20; ++k) {
        const auto& iso = *isos[k % isos.size()];
        const double b = std::pow(10.0, -7.0 + 4.0 * u(g));
        const double w0 = 20.0 + 2000.0 * u(g) * u(g);
        const double xi = 0.5 + 3.0 * u(g);
        const double frac = std::pow(10.0, -2.0 + 2.6 * u(g));
        const double chi = frac * chi_source_nec(iso, w0, xi);
        const double energy = chi * chi * b;
        const double analytic = pulse_area(chi_sigma(iso), std::sqrt(energy / b), w0, xi);
        const auto r = bloch_oracle(iso, {energy, b, w0, xi});
        worst = std::max(worst, std::abs(r.phi_effective - analytic) / analytic);
    }
    const double b = 1e-4;
    const double chi_pi = chi_source_nec(fe(), 40.0, 1.0);
    const auto full = bloch_oracle(fe(), {chi_pi * chi_pi * b, b, 40.0, 1.0});
    const double dev = std::abs(full.sigma_z - 1.0);
    return {worst <= 1e-4 && dev <= 1e-6,
            "20 random pulses: max relative area error " + num(worst, 3) + "; pi pulse |sigma_z - 1| = " + num(dev, 3)};
}

Verdict identities_eq() {
    const auto& iso = fe();
    double lin = 0.0, prod = 0.0, quad = 0.0;
    const double slope = chi_source_nec(iso, 1.0, 1.0);
    for (double w0 : {5.0, 20.0, 40.0, 137.0, 1000.0, 12000.0})
        lin = std::max(lin, std::abs(chi_source_nec(iso, w0, 1.0) / (slope * w0) - 1.0));
    for (double w0 : {20.0, 40.0, 400.0})
        for (double xi : {0.3, 1.0, 1.83, 7.5}) {
            const double free = chi_source_nec(iso, w0, 1.0);
            prod = std::max(prod, std::abs(chi_source_nec(iso, w0, xi) * xi - free) / free);
        }
    // small-area inversion over sources of growing energy
    const double b = 1e-4;
    const double chi_pi = chi_source_nec(iso, 40.0, 1.0);
    for (double target : {1e-3, 3e-3, 1e-2, 3e-2, 5e-2}) {
        const double chi = target / pi * chi_pi;
        const auto r = excite(iso, {"s", chi * chi * b, b}, 40.0, 1.0);
        quad = std::max(quad, std::abs((1.0 + r.sigma_z) / (r.pulse_area * r.pulse_area) - 0.5) / 0.5);
    }
    const bool ok = lin <= 1e-12 && prod <= 1e-12 && quad <= 1e-3;
    return {ok, "linearity " + num(lin, 3) + ", cavity*xi vs free " + num(prod, 3) +
                    ", (1 + sigma_z)/Phi^2 relative to 1/2: " + num(quad, 3)};
}

struct Shared {
    ReferenceCavity ref;
    std::optional<CavityStack> stack;
    OptimizationResult opt;
    CavityTemplate tpl;
    EnhancementSettings fine;
};

Shared& shared() {
    static Shared s = [] {
        Shared x;
        x.ref = build_reference_cavity(db(), fe());
        x.stack = CavityStack::resolve(x.ref.file.layers, db(), fe().transition_energy_keV, x.ref.file.resonant_layer);
        x.tpl = CavityTemplate::for_isotope(fe());
        x.fine.field.n_angles = 1601;
        return x;
    }();
    return s;
}

const CavityStack& reference_stack() { return *shared().stack; }

Verdict degradation() {
    auto& s = shared();
    const double lam = reference_stack().wavelength_nm();
    const double theta = *s.ref.file.theta_in_mrad * 1e-3, zf = *s.ref.file.z_focus_nm;
    std::vector<double> xi;
    std::string detail = "reference R_min " + num(s.ref.min_reflectance, 3) + " at " + num(theta * 1e3, 6) + " mrad; xi";
    for (double div : {0.3e-3, 0.685e-3, 2.0e-3}) {
        const double w0 = lam / (pi * div);
        xi.push_back(evaluate_xi(reference_stack(), w0, theta, zf, s.fine));
        detail += " " + num(div * 1e3, 4) + ":" + num(xi.back(), 6);
    }
    const bool ok = s.ref.min_reflectance < 0.05 && xi[0] > xi[1] && xi[1] > xi[2] && xi[2] < 1.0;
    return {ok, detail};
}

Verdict superiority() {
    auto& s = shared();
    s.opt = optimize_cavity(s.tpl, db(), fe(), 40.0, 2000, 1);
    const auto& p = s.opt.best_params;
    const auto stack = instantiate(s.tpl, p, db(), fe());
    const double xi_opt = s.opt.best_xi;
    const double xi_opt_fine = evaluate_xi(stack, 40.0, p.theta_in, p.z_focus_nm, s.fine);
    const double xi_ref = evaluate_xi(reference_stack(), 40.0, *s.ref.file.theta_in_mrad * 1e-3, *s.ref.file.z_focus_nm, s.fine);

    const double tcc = critical_angle(db(), s.tpl.guide, fe().transition_energy_keV);
    const auto mr = characterize_mode(reference_stack(), reference_stack().resonant_depth(), s.ref.theta_min, tcc, 0.004);
    const auto mo = characterize_mode(stack, stack.resonant_depth(), p.theta_in, 0.25 * p.theta_in, 2.0 * p.theta_in);

    const bool ok = xi_opt > 1.0 && xi_opt_fine > xi_ref && mo.fwhm > mr.fwhm &&
                    mo.min_reflectance > mr.min_reflectance;
    std::ostringstream d;
    d << "optimum " << p.cladding << " d=" << num(p.d1_nm, 4) << "/" << num(p.d2_nm, 4) << "/" << num(p.d3_nm, 4)
      << " theta " << num(p.theta_in * 1e3, 5) << " mrad: xi " << num(xi_opt, 6) << " (1601 angles " << num(xi_opt_fine, 6)
      << ") vs reference " << num(xi_ref, 6) << "; FWHM " << num(mo.fwhm * 1e3, 4) << " vs " << num(mr.fwhm * 1e3, 4)
      << " mrad; R_min " << num(mo.min_reflectance, 4) << " vs " << num(mr.min_reflectance, 3);
    return {ok, d.str()};
}

Verdict dominance() {
    auto& s = shared();
    if (s.opt.best_xi == 0.0) s.opt = optimize_cavity(s.tpl, db(), fe(), 40.0, 2000, 1);
    ScanSpec spec;
    spec.tpl = s.tpl;
    spec.isotopes = {"Fe57"};
    spec.w0_grid_nm = spot_grid(20.0, 2560.0, 8);
    spec.fixed = instantiate_file(s.tpl, s.opt.best_params);
    spec.budget = 2000;
    spec.seed = 1;
    spec.mode = ScanMode::fixed;
    const auto fixed = spot_size_scan(spec, db());
    spec.mode = ScanMode::per_spot;
    const auto per = spot_size_scan(spec, db());

    bool dominated = true, monotone = true;
    std::ostringstream d;
    d << "w0:fixed/per-spot";
    for (std::size_t k = 0; k < spec.w0_grid_nm.size(); ++k) {
        const double w0 = spec.w0_grid_nm[k], xf = fixed.rows[k].xi, xp = per.rows[k].xi;
        if (!(xp >= xf)) dominated = false;
        if (w0 > 40.0 && k > 0 && spec.w0_grid_nm[k - 1] >= 40.0 && !(xf <= fixed.rows[k - 1].xi)) monotone = false;
        d << " " << num(w0, 4) << ":" << num(xf, 4) << "/" << num(xp, 4);
    }
    d << "; dominance " << (dominated ? "holds" : "violated") << ", non-increasing above 40 nm "
      << (monotone ? "holds" : "violated");
    Verdict v{dominated && monotone, d.str()};
    v.known_clause_only = dominated && !monotone;
    return v;
}

Verdict determinism() {
    const std::string cli = NUCAV_CLI_PATH;
    const auto dir = std::filesystem::temp_directory_path() / ("nucav_acceptance_" + std::to_string(::getpid()));
    std::filesystem::create_directories(dir);
    auto run = [&](const std::string& name, const std::string& threads) {
        const auto out = dir / name;
        const std::string cmd = "\"" + cli + "\" --data \"" NUCAV_TEST_DATA "/materials.db\" --seed 17 --threads " +
                                threads + " scan --isotopes Fe57 --spot-min-nm 30 --spot-max-nm 240 --points 4" +
                                " --budget 300 > \"" + out.string() + "\"";
        const int rc = std::system(cmd.c_str());
        std::ifstream f(out, std::ios::binary);
        std::ostringstream s;
        s << f.rdbuf();
        return std::make_pair(rc, s.str());
    };
    const auto a = run("a.csv", "4"), b = run("b.csv", "4"), c = run("c.csv", "1");
    std::filesystem::remove_all(dir);
    const bool ok = a.first == 0 && b.first == 0 && !a.second.empty() && a.second == b.second;
    return {ok, "two identical scans: " + std::string(a.second == b.second ? "byte-identical" : "differ") + " (" +
                    std::to_string(a.second.size()) + " bytes); single-threaded run " +
                    (c.second == a.second ? "identical" : "differs")};
}

}  // namespace

int main() {
    const std::vector<Criterion> criteria{
        {1, "Fresnel oracle", 1.0, fresnel},
        {2, "energy conservation", 10.0, energy},
        {3, "zero-thickness and continuity", 0.0, identities},
        {4, "beam divergence anchor", 0.0, divergence},
        {5, "free-space unity", 0.0, unity},
        {6, "area theorem vs Bloch integration", 60.0, area_theorem},
        {7, "source threshold identities", 0.0, identities_eq},
        {8, "focusing degrades a narrow-mode cavity", 60.0, degradation},
        {9, "optimizer beats the reference", 600.0, superiority},
        {10, "scan dominance and fixed-cavity trend", 3600.0, dominance},
        {11, "scan determinism", 0.0, determinism},
    };
    int unexpected = 0, known = 0, passed = 0;
    for (const auto& c : criteria) {
        Verdict v;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            v = c.run();
        } catch (const std::exception& e) {
            v = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        bool time_ok = c.time_limit_s == 0.0 || secs < c.time_limit_s;
        const bool pass = v.pass && time_ok;
        std::string tag = pass ? "PASS" : "FAIL";
        const auto kf = known_failures.find(c.id);
        if (pass) {
            ++passed;
            if (kf != known_failures.end()) tag += " (listed as a known failure; now passing)";
        } else if (kf != known_failures.end() && v.known_clause_only && time_ok) {
            ++known;
            tag += " (known: " + kf->second + ")";
        } else {
            ++unexpected;
        }
        std::cout << "criterion " << c.id << " [" << c.title << "]: " << tag << " | " << v.detail << " | "
                  << num(secs, 3) << " s" << (time_ok ? "" : " (over the " + num(c.time_limit_s, 4) + " s limit)")
                  << std::endl;
    }
    std::cout << passed << " passed, " << known << " known failure(s), " << unexpected << " unexpected failure(s)"
              << std::endl;
    return unexpected == 0 ? 0 : 1;
}

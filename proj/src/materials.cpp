#include "nucav/materials.hpp"

#include "nucav/constants.hpp"
#include "nucav/error.hpp"
#include "nucav/format.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>

namespace nucav {

namespace {

constexpr double optical_bound = 1e-3;

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

double parse_number(std::string_view text, const std::string& source, int line, std::string_view key) {
    double v = 0.0;
    const auto* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc() || ptr != end) {
        throw ParseError(source, line, "invalid number '" + std::string(text) + "' for key '" +
                                           std::string(key) + "'");
    }
    return v;
}

// Accumulates key/value pairs of one [section] until the next header.
struct Section {
    std::string kind;
    int line = 0;
    std::map<std::string, std::pair<std::string, int>> values;

    const std::pair<std::string, int>* find(const std::string& key) const {
        auto it = values.find(key);
        return it == values.end() ? nullptr : &it->second;
    }
};

}  // namespace

double Isotope::angular_frequency() const {
    return transition_energy_keV * 1e3 / constants::hbar_eVs;
}

double Isotope::radiative_rate() const {
    return radiative_width_neV() * 1e-9 / constants::hbar_eVs;
}

double SourceParams::chi_source() const {
    return std::sqrt(pulse_energy_uJ / relative_bandwidth);
}

void validate(const Isotope& iso) {
    const std::string who = "isotope '" + iso.name + "'";
    if (iso.name.empty()) throw InvariantError("isotope with empty name");
    if (!(iso.transition_energy_keV > 0.0))
        throw InvariantError(who + ": energy_keV must be > 0");
    if (!(iso.natural_width_neV > 0.0))
        throw InvariantError(who + ": gamma_neV must be > 0");
    if (!(iso.internal_conversion >= 0.0))
        throw InvariantError(who + ": alpha must be >= 0");
    if (iso.resonant_material.empty())
        throw InvariantError(who + ": material must name the resonant-layer host");
}

void validate(const Material& mat) {
    const std::string who = "material '" + mat.name + "'";
    if (mat.name.empty()) throw InvariantError("material with empty name");
    for (const auto& e : mat.entries) {
        const std::string at = who + " at " + format_double(e.energy_keV) + " keV";
        if (!(e.energy_keV > 0.0)) throw InvariantError(at + ": energy_keV must be > 0");
        if (!(e.beta >= 0.0)) throw InvariantError(at + ": beta = " + format_double(e.beta) + " must be >= 0");
        if (!(std::abs(e.delta) < optical_bound))
            throw InvariantError(at + ": |delta| = " + format_double(e.delta) + " exceeds 1e-3");
        if (!(e.beta < optical_bound))
            throw InvariantError(at + ": beta = " + format_double(e.beta) + " exceeds 1e-3");
    }
}

void validate(const SourceParams& src) {
    const std::string who = "source '" + src.name + "'";
    if (src.name.empty()) throw InvariantError("source with empty name");
    if (!(src.pulse_energy_uJ > 0.0)) throw InvariantError(who + ": pulse_energy_uJ must be > 0");
    if (!(src.relative_bandwidth > 0.0 && src.relative_bandwidth < 1.0))
        throw InvariantError(who + ": bandwidth_rel must lie in (0, 1)");
}

void MaterialsDb::add(Isotope iso) {
    validate(iso);
    if (isotopes_.contains(iso.name)) throw InvariantError("duplicate isotope '" + iso.name + "'");
    isotopes_.emplace(iso.name, std::move(iso));
}

void MaterialsDb::add(Material mat) {
    if (mat.name == vacuum_material) throw InvariantError("material name 'vacuum' is reserved");
    validate(mat);
    if (materials_.contains(mat.name)) throw InvariantError("duplicate material '" + mat.name + "'");
    auto entries = std::move(mat.entries);
    mat.entries.clear();
    const std::string name = mat.name;
    materials_.emplace(name, std::move(mat));
    for (const auto& e : entries) add_optical_entry(name, e);
}

void MaterialsDb::add(SourceParams src) {
    validate(src);
    if (sources_.contains(src.name)) throw InvariantError("duplicate source '" + src.name + "'");
    sources_.emplace(src.name, std::move(src));
}

void MaterialsDb::add_optical_entry(const std::string& material, OpticalEntry entry) {
    if (material == vacuum_material) throw InvariantError("material name 'vacuum' is reserved");
    validate(Material{material, {entry}});
    auto& mat = materials_[material];
    mat.name = material;
    for (const auto& e : mat.entries) {
        if (std::abs(e.energy_keV - entry.energy_keV) < energy_match_tolerance_keV) {
            throw InvariantError("duplicate material '" + material + "' entry at " +
                                 format_double(entry.energy_keV) + " keV");
        }
    }
    mat.entries.push_back(entry);
}

void MaterialsDb::check_references() const {
    for (const auto& [name, iso] : isotopes_) {
        if (!has_material(iso.resonant_material)) {
            throw LookupError("isotope '" + name + "' references undefined material '" +
                              iso.resonant_material + "'");
        }
    }
}

const Isotope& MaterialsDb::isotope(const std::string& name) const {
    auto it = isotopes_.find(name);
    if (it == isotopes_.end()) throw LookupError("unknown isotope '" + name + "'");
    return it->second;
}

const Material& MaterialsDb::material(const std::string& name) const {
    auto it = materials_.find(name);
    if (it == materials_.end()) throw LookupError("unknown material '" + name + "'");
    return it->second;
}

const SourceParams& MaterialsDb::source(const std::string& name) const {
    auto it = sources_.find(name);
    if (it == sources_.end()) throw LookupError("unknown source '" + name + "'");
    return it->second;
}

bool MaterialsDb::has_material(const std::string& name) const {
    return name == vacuum_material || materials_.contains(name);
}

std::complex<double> MaterialsDb::refractive_index(const std::string& material_name, double energy_keV) const {
    if (material_name == vacuum_material) return {1.0, 0.0};
    const auto& mat = material(material_name);
    for (const auto& e : mat.entries) {
        if (std::abs(e.energy_keV - energy_keV) < energy_match_tolerance_keV) {
            return {1.0 - e.delta, e.beta};
        }
    }
    throw MissingDataError("material '" + material_name + "' has no optical constants within 1 eV of " +
                           format_double(energy_keV) + " keV");
}

MaterialsDb MaterialsDb::parse(std::string_view text, const std::string& source) {
    MaterialsDb db;
    std::optional<Section> current;

    auto require = [&](const Section& s, const std::string& key) -> const std::pair<std::string, int>& {
        const auto* v = s.find(key);
        if (!v) throw ParseError(source, s.line, "[" + s.kind + "] missing key '" + key + "'");
        return *v;
    };
    auto number = [&](const Section& s, const std::string& key) {
        const auto& [value, line] = require(s, key);
        return parse_number(value, source, line, key);
    };

    auto flush = [&]() {
        if (!current) return;
        const Section& s = *current;
        try {
            if (s.kind == "isotope") {
                Isotope iso;
                iso.name = require(s, "name").first;
                iso.transition_energy_keV = number(s, "energy_keV");
                iso.natural_width_neV = number(s, "gamma_neV");
                iso.internal_conversion = number(s, "alpha");
                iso.resonant_material = require(s, "material").first;
                db.add(std::move(iso));
            } else if (s.kind == "material") {
                const std::string name = require(s, "name").first;
                db.add_optical_entry(name, {number(s, "energy_keV"), number(s, "delta"), number(s, "beta")});
            } else {
                SourceParams src;
                src.name = require(s, "name").first;
                src.pulse_energy_uJ = number(s, "pulse_energy_uJ");
                src.relative_bandwidth = number(s, "bandwidth_rel");
                db.add(std::move(src));
            }
        } catch (const InvariantError& e) {
            throw InvariantError(source + ":" + std::to_string(s.line) + ": " + e.what());
        }
        current.reset();
    };

    static const std::map<std::string, std::vector<std::string>, std::less<>> allowed = {
        {"isotope", {"name", "energy_keV", "gamma_neV", "alpha", "material"}},
        {"material", {"name", "energy_keV", "delta", "beta"}},
        {"source", {"name", "pulse_energy_uJ", "bandwidth_rel"}},
    };

    std::size_t pos = 0;
    int line_no = 0;
    while (pos <= text.size()) {
        auto nl = text.find('\n', pos);
        if (nl == std::string_view::npos) nl = text.size();
        std::string_view line = text.substr(pos, nl - pos);
        pos = nl + 1;
        ++line_no;

        if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;

        if (line.front() == '[') {
            if (line.back() != ']') throw ParseError(source, line_no, "malformed section header");
            const std::string kind(trim(line.substr(1, line.size() - 2)));
            if (!allowed.contains(kind)) throw ParseError(source, line_no, "unknown section [" + kind + "]");
            flush();
            current = Section{kind, line_no, {}};
            continue;
        }

        const auto eq = line.find('=');
        if (eq == std::string_view::npos) throw ParseError(source, line_no, "expected key=value");
        if (!current) throw ParseError(source, line_no, "key outside of a section");
        const std::string key(trim(line.substr(0, eq)));
        const std::string value(trim(line.substr(eq + 1)));
        const auto& keys = allowed.find(current->kind)->second;
        if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
            throw ParseError(source, line_no, "unknown key '" + key + "' in [" + current->kind + "]");
        }
        if (current->values.contains(key)) throw ParseError(source, line_no, "repeated key '" + key + "'");
        if (value.empty()) throw ParseError(source, line_no, "empty value for key '" + key + "'");
        current->values.emplace(key, std::make_pair(value, line_no));
    }
    flush();
    db.check_references();
    return db;
}

MaterialsDb MaterialsDb::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open materials database '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str(), path.string());
}

std::string MaterialsDb::serialize() const {
    std::ostringstream out;
    for (const auto& [name, iso] : isotopes_) {
        out << "[isotope]\nname=" << name << "\nenergy_keV=" << format_double(iso.transition_energy_keV)
            << "\ngamma_neV=" << format_double(iso.natural_width_neV)
            << "\nalpha=" << format_double(iso.internal_conversion) << "\nmaterial=" << iso.resonant_material
            << "\n\n";
    }
    for (const auto& [name, mat] : materials_) {
        for (const auto& e : mat.entries) {
            out << "[material]\nname=" << name << "\nenergy_keV=" << format_double(e.energy_keV)
                << "\ndelta=" << format_double(e.delta) << "\nbeta=" << format_double(e.beta) << "\n\n";
        }
    }
    for (const auto& [name, src] : sources_) {
        out << "[source]\nname=" << name << "\npulse_energy_uJ=" << format_double(src.pulse_energy_uJ)
            << "\nbandwidth_rel=" << format_double(src.relative_bandwidth) << "\n\n";
    }
    return out.str();
}

double wavelength_nm(double energy_keV) {
    if (!(energy_keV > 0.0)) throw DomainError("wavelength: energy must be > 0");
    return constants::hc_keV_nm / energy_keV;
}

double effective_dipole(const Isotope& iso) {
    validate(iso);
    using namespace constants;
    const double omega = iso.angular_frequency();
    const double c3 = speed_of_light * speed_of_light * speed_of_light;
    return std::sqrt(3.0 * pi * epsilon0 * hbar * c3 * iso.radiative_rate() / (omega * omega * omega));
}

std::string describe(const Isotope& iso) {
    std::ostringstream o;
    o << "isotope " << iso.name << "\n"
      << "  energy_keV=" << format_double(iso.transition_energy_keV) << "\n"
      << "  gamma_neV=" << format_double(iso.natural_width_neV) << "\n"
      << "  alpha=" << format_double(iso.internal_conversion) << "\n"
      << "  gamma_rad_neV=" << format_double(iso.radiative_width_neV(), 6) << "\n"
      << "  wavelength_nm=" << format_double(wavelength_nm(iso.transition_energy_keV), 7) << "\n"
      << "  dipole_Cm=" << format_double(effective_dipole(iso), 6) << "\n"
      << "  material=" << iso.resonant_material << "\n";
    return o.str();
}

std::string describe(const Material& mat) {
    std::ostringstream o;
    o << "material " << mat.name << "\n";
    for (const auto& e : mat.entries) {
        o << "  energy_keV=" << format_double(e.energy_keV) << " delta=" << format_double(e.delta)
          << " beta=" << format_double(e.beta) << "\n";
    }
    return o.str();
}

std::string describe(const SourceParams& src) {
    std::ostringstream o;
    o << "source " << src.name << "\n"
      << "  pulse_energy_uJ=" << format_double(src.pulse_energy_uJ) << "\n"
      << "  bandwidth_rel=" << format_double(src.relative_bandwidth) << "\n"
      << "  chi_source_sqrt_uJ=" << format_double(src.chi_source(), 6) << "\n";
    return o.str();
}

}  // namespace nucav

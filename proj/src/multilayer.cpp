#include "nucav/multilayer.hpp"

#include "nucav/constants.hpp"
#include "nucav/error.hpp"
#include "nucav/format.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace nucav {

namespace {

// Square root on the branch Im >= 0 (Re >= 0 when Im == 0).
complex outgoing_sqrt(complex v) {
    complex s = std::sqrt(v);
    if (s.imag() < 0.0 || (s.imag() == 0.0 && s.real() < 0.0)) s = -s;
    return s;
}

double golden_section_max(auto&& f, double lo, double hi, int iterations = 80) {
    const double g = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo, b = hi;
    double c = b - g * (b - a), d = a + g * (b - a);
    double fc = f(c), fd = f(d);
    for (int i = 0; i < iterations && (b - a) > 1e-15 * (std::abs(a) + std::abs(b)); ++i) {
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    return fc > fd ? c : d;
}

double bisect_crossing(auto&& f, double level, double inside, double outside, int iterations = 80) {
    // f(inside) >= level > f(outside)
    for (int i = 0; i < iterations; ++i) {
        const double mid = 0.5 * (inside + outside);
        if (f(mid) >= level) {
            inside = mid;
        } else {
            outside = mid;
        }
    }
    return 0.5 * (inside + outside);
}

}  // namespace

CavityStack::CavityStack(std::vector<Layer> layers, std::vector<complex> indices, double energy_keV,
                         std::optional<std::size_t> resonant_layer)
    : layers_(std::move(layers)), indices_(std::move(indices)), energy_keV_(energy_keV), resonant_(resonant_layer) {
    if (layers_.size() < 2) throw InvariantError("stack needs at least two half-spaces");
    if (indices_.size() != layers_.size()) throw InvariantError("stack: one refractive index per layer required");
    if (!(energy_keV_ > 0.0)) throw InvariantError("stack: energy must be > 0");
    if (!layers_.front().semi_infinite() || !layers_.back().semi_infinite())
        throw InvariantError("stack: first and last layers must be semi-infinite");
    for (std::size_t j = 1; j + 1 < layers_.size(); ++j) {
        const auto& l = layers_[j];
        if (l.semi_infinite())
            throw InvariantError("stack: interior layer " + std::to_string(j) + " (" + l.material +
                                 ") must have finite thickness");
        if (!(std::isfinite(*l.thickness_nm) && *l.thickness_nm >= 0.0))
            throw InvariantError("stack: layer " + std::to_string(j) + " (" + l.material +
                                 ") thickness must be finite and >= 0");
    }
    for (std::size_t j = 0; j < indices_.size(); ++j) {
        if (!(indices_[j].imag() >= 0.0))
            throw InvariantError("stack: layer " + std::to_string(j) + " has gain (Im n < 0)");
    }
    if (indices_.front().imag() != 0.0 || !(indices_.front().real() > 0.0))
        throw InvariantError("stack: incidence medium must be lossless");
    if (resonant_) {
        const std::size_t r = *resonant_;
        if (r == 0 || r + 1 >= layers_.size())
            throw InvariantError("stack: resonant layer must be an interior layer");
        if (!(*layers_[r].thickness_nm > 0.0)) throw InvariantError("stack: resonant layer must have thickness > 0");
    }
    tops_.resize(layers_.size());
    double z = 0.0;
    tops_[0] = 0.0;
    for (std::size_t j = 1; j < layers_.size(); ++j) {
        tops_[j] = z;
        z += thickness(j);
    }
}

CavityStack CavityStack::resolve(std::vector<Layer> layers, const MaterialsDb& db, double energy_keV,
                                 std::optional<std::size_t> resonant_layer) {
    std::vector<complex> n;
    n.reserve(layers.size());
    for (const auto& l : layers) n.push_back(db.refractive_index(l.material, energy_keV));
    return CavityStack(std::move(layers), std::move(n), energy_keV, resonant_layer);
}

double CavityStack::wavelength_nm() const { return nucav::wavelength_nm(energy_keV_); }

double CavityStack::wavenumber() const { return 2.0 * constants::pi / wavelength_nm(); }

double CavityStack::thickness(std::size_t layer) const {
    const auto& l = layers_.at(layer);
    return l.semi_infinite() ? 0.0 : *l.thickness_nm;
}

double CavityStack::resonant_depth() const {
    if (!resonant_) throw DomainError("stack has no resonant layer");
    return top(*resonant_) + 0.5 * thickness(*resonant_);
}

CavityStack CavityStack::reversed() const {
    std::vector<Layer> l(layers_.rbegin(), layers_.rend());
    std::vector<complex> n(indices_.rbegin(), indices_.rend());
    std::optional<std::size_t> r;
    if (resonant_) r = layers_.size() - 1 - *resonant_;
    return CavityStack(std::move(l), std::move(n), energy_keV_, r);
}

CavityStack CavityStack::with_layer_inserted(std::size_t at, Layer layer, complex index) const {
    if (at == 0 || at >= layers_.size()) throw DomainError("insertion point must be between the half-spaces");
    auto l = layers_;
    auto n = indices_;
    l.insert(l.begin() + static_cast<std::ptrdiff_t>(at), std::move(layer));
    n.insert(n.begin() + static_cast<std::ptrdiff_t>(at), index);
    std::optional<std::size_t> r = resonant_;
    if (r && *r >= at) ++*r;
    return CavityStack(std::move(l), std::move(n), energy_keV_, r);
}

std::string CavityStack::summary() const {
    std::string s;
    for (std::size_t j = 0; j < layers_.size(); ++j) {
        if (j) s += " / ";
        s += layers_[j].material;
        s += layers_[j].semi_infinite() ? " (inf)" : " (" + format_double(*layers_[j].thickness_nm) + " nm)";
        if (resonant_ && *resonant_ == j) s += "*";
    }
    return s;
}

double PlaneWaveSolution::transmittance() const {
    const auto& top = layers.front();
    const auto& sub = layers.back();
    return sub.kz.real() / top.kz.real() * std::norm(t);
}

PlaneWaveSolution solve_planewave(const CavityStack& stack, double theta) {
    if (!(theta > 0.0 && theta < constants::pi / 2.0))
        throw DomainError("incidence angle must lie in (0, pi/2), got " + format_double(theta));

    const std::size_t n_layers = stack.size();
    const double k = stack.wavenumber();
    const double n0 = stack.indices().front().real();
    const double cos_t = n0 * std::cos(theta);
    const double sin2 = n0 * n0 * std::sin(theta) * std::sin(theta);

    PlaneWaveSolution sol;
    sol.incidence_angle = theta;
    sol.kx = k * cos_t;
    sol.layers.resize(n_layers);

    std::vector<complex> phase(n_layers);
    for (std::size_t j = 0; j < n_layers; ++j) {
        const complex n = stack.indices()[j];
        auto& lw = sol.layers[j];
        // n^2 - n0^2 cos^2 written without the cancellation near grazing incidence
        lw.kz = k * outgoing_sqrt((n - n0) * (n + n0) + sin2);
        lw.top = stack.top(j);
        lw.bottom = stack.bottom(j);
        phase[j] = std::exp(complex(0.0, 1.0) * lw.kz * stack.thickness(j));
    }

    auto interface_r = [&](std::size_t j) {
        const complex a = sol.layers[j].kz, b = sol.layers[j + 1].kz;
        const complex sum = a + b;
        return sum == complex(0.0) ? complex(0.0) : (a - b) / sum;
    };

    // Up/down ratio at the bottom of each layer, from the substrate upward.
    std::vector<complex> ratio(n_layers, complex(0.0));
    for (std::size_t j = n_layers - 1; j-- > 0;) {
        const complex r = interface_r(j);
        const complex x = ratio[j + 1] * phase[j + 1] * phase[j + 1];
        ratio[j] = (r + x) / (1.0 + r * x);
    }

    sol.layers[0].down = 1.0;
    sol.layers[0].up = ratio[0];
    for (std::size_t j = 0; j + 1 < n_layers; ++j) {
        const complex r = interface_r(j);
        const complex x = ratio[j + 1] * phase[j + 1] * phase[j + 1];
        const complex down_next = sol.layers[j].down * phase[j] * (1.0 + r) / (1.0 + r * x);
        sol.layers[j + 1].down = down_next;
        sol.layers[j + 1].up = ratio[j + 1] * down_next * phase[j + 1];
    }
    sol.layers.back().up = 0.0;
    sol.r = sol.layers[0].up;
    sol.t = sol.layers.back().down;
    return sol;
}

double reflectivity(const CavityStack& stack, double theta) {
    return std::norm(solve_planewave(stack, theta).r);
}

std::vector<RockingPoint> rocking_curve(const CavityStack& stack, std::span<const double> theta_grid) {
    if (theta_grid.empty()) throw DomainError("rocking curve: empty angle grid");
    for (std::size_t i = 1; i < theta_grid.size(); ++i) {
        if (!(theta_grid[i] > theta_grid[i - 1])) throw DomainError("rocking curve: grid must be strictly increasing");
    }
    std::vector<RockingPoint> out;
    out.reserve(theta_grid.size());
    for (double th : theta_grid) out.push_back({th, reflectivity(stack, th)});
    return out;
}

namespace {

const LayerWave& containing_layer(const PlaneWaveSolution& sol, double z) {
    if (z <= 0.0) return sol.layers.front();
    for (std::size_t j = 1; j + 1 < sol.layers.size(); ++j) {
        if (z <= sol.layers[j].bottom) return sol.layers[j];
    }
    return sol.layers.back();
}

}  // namespace

complex field_at_depth(const PlaneWaveSolution& sol, double z) {
    const auto& lw = containing_layer(sol, z);
    const complex i(0.0, 1.0);
    complex e = lw.down * std::exp(i * lw.kz * (z - lw.top));
    if (lw.up != complex(0.0)) e += lw.up * std::exp(i * lw.kz * (lw.bottom - z));
    return e;
}

complex field_derivative_at_depth(const PlaneWaveSolution& sol, double z) {
    const auto& lw = containing_layer(sol, z);
    const complex i(0.0, 1.0);
    complex d = lw.down * std::exp(i * lw.kz * (z - lw.top));
    if (lw.up != complex(0.0)) d -= lw.up * std::exp(i * lw.kz * (lw.bottom - z));
    return i * lw.kz * d;
}

std::vector<double> linspace(double lo, double hi, std::size_t n) {
    std::vector<double> v(n);
    if (n == 1) {
        v[0] = lo;
        return v;
    }
    for (std::size_t i = 0; i < n; ++i) v[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    return v;
}

ModeProfile characterize_mode(const CavityStack& stack, double z_probe, double theta_guess, double theta_lo,
                              double theta_hi, std::size_t points) {
    if (!(theta_lo > 0.0 && theta_hi > theta_lo && points >= 3)) throw DomainError("characterize_mode: bad window");
    auto intensity = [&](double th) { return std::norm(field_at_depth(solve_planewave(stack, th), z_probe)); };

    const auto grid = linspace(theta_lo, theta_hi, points);
    std::vector<double> val(points);
    for (std::size_t i = 0; i < points; ++i) val[i] = intensity(grid[i]);

    std::size_t best = points;
    for (std::size_t i = 1; i + 1 < points; ++i) {
        if (val[i] >= val[i - 1] && val[i] > val[i + 1]) {
            if (best == points || std::abs(grid[i] - theta_guess) < std::abs(grid[best] - theta_guess)) best = i;
        }
    }
    if (best == points) throw DomainError("characterize_mode: no intensity peak inside the window");

    ModeProfile mp;
    mp.theta = golden_section_max(intensity, grid[best - 1], grid[best + 1]);
    mp.peak_intensity = intensity(mp.theta);
    const double half = 0.5 * mp.peak_intensity;

    std::size_t left = best;
    while (left > 0 && val[left] >= half) --left;
    std::size_t right = best;
    while (right + 1 < points && val[right] >= half) ++right;
    const double th_left = val[left] < half ? bisect_crossing(intensity, half, grid[left + 1], grid[left]) : grid[0];
    const double th_right =
        val[right] < half ? bisect_crossing(intensity, half, grid[right - 1], grid[right]) : grid.back();
    mp.fwhm = th_right - th_left;

    auto neg_reflectance = [&](double th) { return -reflectivity(stack, th); };
    const auto sub = linspace(th_left, th_right, 401);
    std::size_t imin = 0;
    std::vector<double> rv(sub.size());
    for (std::size_t i = 0; i < sub.size(); ++i) {
        rv[i] = -neg_reflectance(sub[i]);
        if (rv[i] < rv[imin]) imin = i;
    }
    double th_min = sub[imin];
    if (imin > 0 && imin + 1 < sub.size()) th_min = golden_section_max(neg_reflectance, sub[imin - 1], sub[imin + 1]);
    mp.theta_min_reflectance = th_min;
    mp.min_reflectance = reflectivity(stack, th_min);
    return mp;
}

std::optional<RockingPoint> first_reflectance_minimum(const CavityStack& stack, double theta_lo, double theta_hi,
                                                      std::size_t points) {
    const auto grid = linspace(theta_lo, theta_hi, points);
    const auto curve = rocking_curve(stack, grid);
    for (std::size_t i = 1; i + 1 < curve.size(); ++i) {
        if (curve[i].reflectance < curve[i - 1].reflectance && curve[i].reflectance <= curve[i + 1].reflectance) {
            auto neg = [&](double th) { return -reflectivity(stack, th); };
            const double th = golden_section_max(neg, grid[i - 1], grid[i + 1]);
            return RockingPoint{th, reflectivity(stack, th)};
        }
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------

namespace {

std::string_view strip(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::vector<std::string> split_ws(std::string_view s) {
    std::vector<std::string> out;
    std::istringstream in{std::string(s)};
    std::string tok;
    while (in >> tok) out.push_back(tok);
    return out;
}

double to_number(const std::string& tok, const std::string& source, int line) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || ptr != tok.data() + tok.size())
        throw ParseError(source, line, "invalid number '" + tok + "'");
    return v;
}

}  // namespace

CavityFile parse_cavity(std::string_view text, const std::string& source) {
    CavityFile cf;
    std::istringstream in{std::string(text)};
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string_view line = raw;
        if (auto h = line.find('#'); h != std::string_view::npos) line = line.substr(0, h);
        line = strip(line);
        if (line.empty()) continue;
        const auto tok = split_ws(line);
        if (tok[0].front() == '@') {
            if (tok.size() != 2) throw ParseError(source, line_no, "directive needs exactly one value");
            const double v = to_number(tok[1], source, line_no);
            if (tok[0] == "@theta_in_mrad") {
                cf.theta_in_mrad = v;
            } else if (tok[0] == "@z_focus_nm") {
                cf.z_focus_nm = v;
            } else {
                throw ParseError(source, line_no, "unknown directive '" + tok[0] + "'");
            }
            continue;
        }
        if (tok.size() < 2 || tok.size() > 3) throw ParseError(source, line_no, "expected 'material thickness_nm [*]'");
        Layer layer{tok[0], std::nullopt};
        if (tok[1] != "inf") {
            const double d = to_number(tok[1], source, line_no);
            if (!(d >= 0.0)) throw ParseError(source, line_no, "thickness must be >= 0");
            layer.thickness_nm = d;
        }
        if (tok.size() == 3) {
            if (tok[2] != "*") throw ParseError(source, line_no, "unexpected token '" + tok[2] + "'");
            if (cf.resonant_layer) throw ParseError(source, line_no, "more than one resonant layer marked");
            cf.resonant_layer = cf.layers.size();
        }
        cf.layers.push_back(std::move(layer));
    }
    if (cf.layers.size() < 2) throw ParseError(source, line_no, "cavity needs at least two layers");
    if (!cf.layers.front().semi_infinite() || !cf.layers.back().semi_infinite())
        throw ParseError(source, line_no, "first and last layers must be 'inf'");
    for (std::size_t j = 1; j + 1 < cf.layers.size(); ++j) {
        if (cf.layers[j].semi_infinite())
            throw ParseError(source, line_no, "only the first and last layers may be 'inf'");
    }
    return cf;
}

CavityFile read_cavity_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open cavity file '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_cavity(ss.str(), path.string());
}

std::string format_cavity(const CavityFile& cf) {
    std::ostringstream out;
    if (cf.theta_in_mrad) out << "@theta_in_mrad " << format_double(*cf.theta_in_mrad) << "\n";
    if (cf.z_focus_nm) out << "@z_focus_nm " << format_double(*cf.z_focus_nm) << "\n";
    for (std::size_t j = 0; j < cf.layers.size(); ++j) {
        const auto& l = cf.layers[j];
        out << l.material << " " << (l.semi_infinite() ? std::string("inf") : format_double(*l.thickness_nm));
        if (cf.resonant_layer && *cf.resonant_layer == j) out << " *";
        out << "\n";
    }
    return out.str();
}

}  // namespace nucav

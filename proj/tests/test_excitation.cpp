#include "nucav/error.hpp"
#include "nucav/excitation.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace nucav;

namespace {
const Isotope fe{"Fe57", 14.4125, 4.641, 8.21, "Fe"};
const double pi = std::numbers::pi;
}  // namespace

TEST_CASE("pulse area agrees with the cross-section form") {
    for (const auto& [E, b, w0] : std::vector<std::tuple<double, double, double>>{
             {2000.0, 1e-3, 40.0}, {500.0, 1e-4, 120.0}, {20.0, 1e-7, 40.0}, {1.0, 1e-5, 2000.0}}) {
        const SourceParams src{"s", E, b};
        const double ref = oracle::pulse_area_cross_section(14.4125, fe.radiative_width_neV(), E, b, w0);
        CHECK(pulse_area(fe, src, w0, 1.0) == doctest::Approx(ref).epsilon(1e-12));
    }
}

TEST_CASE("chi_sigma scaling") {
    Isotope four = fe;
    four.natural_width_neV *= 4.0;  // d doubles
    CHECK(chi_sigma(four) == doctest::Approx(2.0 * chi_sigma(fe)).epsilon(1e-14));
    Isotope hot = fe;
    hot.transition_energy_keV *= 2.0;
    CHECK(chi_sigma(hot) < chi_sigma(fe));
    CHECK(chi_sigma(fe) > 0.0);
}

TEST_CASE("pulse area and inversion") {
    const SourceParams src{"s", 100.0, 1e-4};
    CHECK(pulse_area(fe, src, 40.0, 0.0) == 0.0);
    const SourceParams dbl{"s", 200.0, 1e-4};
    CHECK(pulse_area(fe, dbl, 40.0, 1.3) == doctest::Approx(std::sqrt(2.0) * pulse_area(fe, src, 40.0, 1.3)));
    CHECK(pulse_area(fe, src, 40.0, 2.6) == doctest::Approx(2.0 * pulse_area(fe, src, 40.0, 1.3)));
    const double phi = pulse_area(fe, src, 70.0, 1.7);
    CHECK(phi == doctest::Approx(pi * src.chi_source() / chi_source_nec(fe, 70.0, 1.7)).epsilon(1e-13));
    CHECK(sigma_z(0.0) == -1.0);
    CHECK(sigma_z(pi) == 1.0);
    CHECK(std::abs(sigma_z(pi / 2)) < 1e-16);
    const auto r = excite(fe, src, 40.0, 1.5);
    CHECK(r.sigma_z == -std::cos(r.pulse_area));
    CHECK(pulse_area(r.chi_sigma, r.chi_source, r.w0_nm, r.xi) == doctest::Approx(r.pulse_area).epsilon(1e-12));
}

TEST_CASE("necessary source characteristic") {
    CHECK(chi_source_nec(fe, 40.0, 2.0) == doctest::Approx(chi_source_nec(fe, 40.0, 1.0) / 2.0).epsilon(1e-15));
    CHECK(chi_source_nec(fe, 80.0, 1.3) == doctest::Approx(2.0 * chi_source_nec(fe, 40.0, 1.3)).epsilon(1e-15));
    CHECK_THROWS_AS(chi_source_nec(fe, 40.0, 0.0), SingularError);
    const double free = chi_source_nec(fe, 55.0, 1.0), cav = chi_source_nec(fe, 55.0, 1.83);
    CHECK(std::abs(cav * 1.83 - free) <= 1e-12 * free);
    CHECK(achievable_sigma_z(2.0, 1.0) == 1.0);
    CHECK(achievable_sigma_z(0.5, 1.0) == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("small pulse areas excite quadratically") {
    for (double phi : {1e-3, 1e-2, 0.05, 0.1}) CHECK((1.0 + sigma_z(phi)) / (phi * phi) == doctest::Approx(0.5).epsilon(1e-3));
}

TEST_CASE("fluence metric") {
    const SourceParams src{"s", 100.0, 1e-4}, dbl{"s", 200.0, 1e-4};
    const double f = fluence_per_bandwidth(src, fe, 40.0, 0.004);
    CHECK(fluence_per_bandwidth(dbl, fe, 40.0, 0.004) == doctest::Approx(2.0 * f));
    const double t2 = std::asin(std::sin(0.004) / 2.0);
    CHECK(fluence_per_bandwidth(src, fe, 40.0, t2) == doctest::Approx(f / 2.0));
    // uJ / (pi w0^2 / sin t [um^2]) / (b_r E [meV])
    const double hand = 100.0 / (pi * 0.04 * 0.04 / std::sin(0.004)) / (1e-4 * 14.4125e6);
    CHECK(f == doctest::Approx(hand).epsilon(1e-13));
    // log-log slope against w0 at a fixed source is -2
    const double slope = std::log(fluence_per_bandwidth(src, fe, 400.0, 0.004) / f) / std::log(10.0);
    CHECK(slope == doctest::Approx(-2.0).epsilon(1e-12));
    // constant fluence in the (w0, chi) plane: chi grows linearly with w0
    CHECK(fluence_per_bandwidth(30.0, fe, 40.0, 0.004) == doctest::Approx(fluence_per_bandwidth(300.0, fe, 400.0, 0.004)));
}

TEST_CASE("Bloch oracle basics") {
    const auto dark = bloch_oracle(fe, {0.0, 1e-4, 40.0, 1.0});
    CHECK(dark.sigma_z == doctest::Approx(-1.0).epsilon(1e-15));
    CHECK(dark.phi_effective == 0.0);
    // Energy giving Phi = pi by the closed form.
    const double chi_needed = chi_source_nec(fe, 40.0, 1.0);
    const double b = 1e-4;
    const auto full = bloch_oracle(fe, {chi_needed * chi_needed * b, b, 40.0, 1.0});
    CHECK(std::abs(full.sigma_z - 1.0) < 1e-6);
    CHECK(full.phi_effective == doctest::Approx(pi).epsilon(1e-6));
    CHECK_THROWS_AS(bloch_oracle(fe, {1.0, 0.0, 40.0, 1.0}), DomainError);
}

TEST_CASE("Bloch integration converges under step halving") {
    const double b = 1e-4;
    const double chi = chi_source_nec(fe, 40.0, 1.0) * 0.37;
    const PulseSpec p{chi * chi * b, b, 40.0, 1.0};
    BlochOptions o;
    o.min_steps = 4000;
    const auto phi = pulse_area(chi_sigma(fe), chi, 40.0, 1.0);
    auto run = [&](std::size_t n) {
        const double h = 16.0 / static_cast<double>(n);
        std::vector<double> w(2 * n + 1);
        for (std::size_t k = 0; k < w.size(); ++k) {
            const double s = -8.0 + 0.5 * h * static_cast<double>(k);
            w[k] = phi / std::sqrt(2.0 * pi) * std::exp(-0.5 * s * s);
        }
        return integrate_two_level(w, h);
    };
    CHECK(std::abs(run(4000).sigma_z - run(8000).sigma_z) < 1e-8);
    CHECK(run(8000).phi_effective == doctest::Approx(phi).epsilon(1e-9));
    CHECK(bloch_oracle(fe, p, o).phi_effective == doctest::Approx(phi).epsilon(1e-4));
}

TEST_CASE("Bloch oracle tracks the area theorem over random pulses") {
    std::mt19937_64 g(2024);
    const std::vector<Isotope> isos{fe, {"Sn119", 23.8795, 25.3, 5.12, "Sn"}, {"Tm169", 8.41017, 111.5, 285, "Tm"}};
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int k = 0; k < 8; ++k) {
        const auto& iso = isos[k % isos.size()];
        const double b = std::pow(10.0, -7.0 + 4.0 * u(g));
        const double w0 = 20.0 + 500.0 * u(g);
        // energy spanning a wide range, capped at Phi ~ 12
        const double chi_nec = chi_source_nec(iso, w0, 1.0);
        const double frac = std::pow(10.0, -2.0 + 2.6 * u(g));
        const double energy = std::pow(frac * chi_nec, 2.0) * b;
        const double analytic = pulse_area(chi_sigma(iso), std::sqrt(energy / b), w0, 1.0);
        const auto r = bloch_oracle(iso, {energy, b, w0, 1.0});
        CHECK(r.phi_effective == doctest::Approx(analytic).epsilon(1e-4));
        CHECK(r.sigma_z >= -1.0 - 1e-12);
        CHECK(r.sigma_z <= 1.0 + 1e-12);
    }
}

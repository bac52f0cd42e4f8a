#pragma once

#include <numbers>

// CODATA 2018 values (exact where the SI fixes them).
namespace nucav::constants {

inline constexpr double pi = std::numbers::pi;
inline constexpr double speed_of_light = 299792458.0;          // m/s
inline constexpr double elementary_charge = 1.602176634e-19;   // C
inline constexpr double planck = 6.62607015e-34;               // J s
inline constexpr double hbar = planck / (2.0 * pi);            // J s
inline constexpr double hbar_eVs = hbar / elementary_charge;   // eV s
inline constexpr double epsilon0 = 8.8541878128e-12;           // F/m
// h c in keV nm
inline constexpr double hc_keV_nm = planck * speed_of_light / elementary_charge * 1e6;

}  // namespace nucav::constants

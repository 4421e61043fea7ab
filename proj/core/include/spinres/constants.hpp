#pragma once

#include <numbers>

namespace spinres::constants
{
// CODATA 2018 exact / recommended values, SI units.
inline constexpr double planck = 6.62607015e-34;           // J s
inline constexpr double hbar = planck / (2.0 * std::numbers::pi);
inline constexpr double bohr_magneton = 9.2740100783e-24;  // J/T
inline constexpr double mu0 = 1.25663706212e-6;            // N/A^2
inline constexpr double boltzmann = 1.380649e-23;          // J/K
inline constexpr double avogadro = 6.02214076e23;          // 1/mol

inline constexpr double two_pi = 2.0 * std::numbers::pi;

// Free-spin gyromagnetic ratio per unit g-factor, Hz/T.
inline constexpr double bohr_frequency_per_tesla = bohr_magneton / planck;

// Carbon atom number density of diamond, 1/m^3.
inline constexpr double diamond_carbon_density = 1.77e29;

// Default electron g-factors (literature values).
inline constexpr double g_p1 = 2.0024;
inline constexpr double g_dpph = 2.0036;

// 14N hyperfine constants of the P1 centre, Hz.
inline constexpr double p1_hyperfine_perp_hz = 114.03e6;
inline constexpr double p1_hyperfine_par_hz = 81.33e6;
} // namespace spinres::constants

#pragma once

// Synthetic data sets at the reference parameter values, shared by the unit
// and acceptance tests.

#include <spinres/cavity_qed.hpp>
#include <spinres/constants.hpp>
#include <spinres/pulse_sim.hpp>
#include <spinres/spectra.hpp>
#include <spinres/sweep.hpp>

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace synth
{
using spinres::cqed::cplx;

inline constexpr double omega_r = 5.534e9;

/// Q_int = 2.30e4 and kappa_tot = 1.7 MHz.
inline spinres::cqed::ResonatorParams resonator(double kappa_tot = 1.7e6)
{
    const double kappa_int = omega_r / 2.30e4;
    return {omega_r, kappa_int, kappa_tot - kappa_int, 0.4, 0.9, 0.0};
}

inline spinres::cqed::EnsembleParams ensemble(double g, double gamma, double detuning = 0.0)
{
    spinres::cqed::EnsembleParams e;
    e.g_ens_hz = g;
    e.omega_s_hz = omega_r + detuning;
    e.gamma_hz = gamma;
    return e;
}

inline spinres::ComplexTrace bare_trace(const spinres::cqed::ResonatorParams &r, double half_span, std::size_t n,
                                        double sigma = 0.0, std::uint64_t seed = 0)
{
    spinres::ComplexTrace t;
    t.frequency_hz = spinres::linspace(r.omega_r_hz - half_span, r.omega_r_hz + half_span, n);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, sigma > 0.0 ? sigma : 1.0);
    for (double f : t.frequency_hz)
        t.s11.push_back(spinres::cqed::reflection_bare(f, r) +
                        (sigma > 0.0 ? cplx(noise(rng), noise(rng)) : cplx(0.0, 0.0)));
    return t;
}

inline spinres::ComplexTrace coupled_trace(const spinres::cqed::ResonatorParams &r,
                                           const spinres::cqed::EnsembleParams &e, double half_span, std::size_t n,
                                           double sigma = 0.0, std::uint64_t seed = 0)
{
    spinres::ComplexTrace t;
    t.frequency_hz = spinres::linspace(r.omega_r_hz - half_span, r.omega_r_hz + half_span, n);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, sigma > 0.0 ? sigma : 1.0);
    for (double f : t.frequency_hz)
        t.s11.push_back(spinres::cqed::reflection_coupled(f, r, e) +
                        (sigma > 0.0 ? cplx(noise(rng), noise(rng)) : cplx(0.0, 0.0)));
    return t;
}

/// Free-electron (DPPH) map across the crossing at 5.534 GHz.
inline spinres::FieldSweepMap dpph_map(double g = 7.8e6, double gamma = 9.6e6, double sigma = 0.0,
                                       std::size_t rows = 121)
{
    spinres::cqed::SweepSpec spec;
    spec.system = spinres::spin::SpinSystem::free_electron(spinres::constants::g_dpph);
    spec.field_t = spinres::linspace(0.1955, 0.1992, rows);
    spec.frequency_hz = spinres::linspace(omega_r - 40e6, omega_r + 40e6, 801);
    spinres::cqed::SweepCoupling c;
    c.default_g_ens_hz = g;
    c.gamma_hz = gamma;
    c.scale_by_matrix_element = false;
    return spinres::cqed::simulate_field_sweep(spec, resonator(), c, {sigma, 1});
}

/// P1 map over the three nuclear-manifold crossings (B along [001]).
inline spinres::FieldSweepMap p1_map(double g_plus = 9.2e6, double g_zero = 9.3e6, double g_minus = 8.5e6,
                                     std::size_t rows = 151)
{
    spinres::cqed::SweepSpec spec;
    spec.system = spinres::spin::SpinSystem::p1_center();
    spec.field_t = spinres::linspace(0.1905, 0.2045, rows);
    spec.frequency_hz = spinres::linspace(omega_r - 30e6, omega_r + 30e6, 801);
    spinres::cqed::SweepCoupling c;
    c.g_ens_by_label = {{"m_I=+1", g_plus}, {"m_I=0", g_zero}, {"m_I=-1", g_minus}};
    c.gamma_hz = 1.0e6;
    c.scale_by_matrix_element = false;
    return spinres::cqed::simulate_field_sweep(spec, resonator(1.9e6), c);
}

inline std::vector<double> recovery_times()
{
    std::vector<double> t;
    for (int k = 0; k < 40; ++k)
        t.push_back(0.5e-3 * (k + 1));
    return t;
}

inline std::vector<double> echo_times()
{
    std::vector<double> t;
    for (int k = 0; k < 40; ++k)
        t.push_back(8e-6 * (k + 1));
    return t;
}

/// Model curve with additive Gaussian noise of `rel_noise` times the amplitude.
template <class Fn>
std::vector<double> noisy(const std::vector<double> &x, Fn fn, double rel_noise, double amplitude, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n(0.0, rel_noise * amplitude);
    std::vector<double> y;
    for (double v : x)
        y.push_back(fn(v) + (rel_noise > 0.0 ? n(rng) : 0.0));
    return y;
}
} // namespace synth

#pragma once

// Model-specific fitters built on least_squares: resonator reflection,
// coupled spectra, relaxation curves and Lorentzian densities.

#include <spinres/cavity_qed.hpp>
#include <spinres/least_squares.hpp>
#include <spinres/spectra.hpp>

#include <optional>
#include <span>
#include <vector>

namespace spinres::fit
{
enum class CouplingHint
{
    Auto, // complex traces only: decided from the phase at resonance
    Under,
    Over
};

struct ResonatorFitOptions
{
    /// Forces |S11| fitting even when the trace carries phase.
    bool magnitude_only = false;
    /// Magnitude data cannot tell kappa_ext < kappa_int from kappa_ext > kappa_int.
    CouplingHint coupling = CouplingHint::Auto;
    bool fit_delay = false;
    std::optional<cqed::ResonatorParams> initial;
    std::optional<double> noise_sigma; // linear |S11| units
    LeastSquaresOptions solver;
};

struct ResonatorFit
{
    FitResult result;
    cqed::ResonatorParams params;
    bool magnitude_only = false;
    double noise_sigma = 0.0;
    double kappa_tot_hz = 0.0;
    double kappa_tot_sigma_hz = 0.0;
    double q_int = 0.0;
    double q_int_sigma = 0.0;
};

/// Edge noise: standard deviation of |S| over the first and last 5% of samples
/// about a straight line through each edge.
double edge_noise_sigma(std::span<const double> magnitude);

/// Throws NotFoundError when the trace shows no dip above 3 sigma.
ResonatorFit fit_resonator(const ComplexTrace &trace, const ResonatorFitOptions &options = {});

/// Starting point derived from the dip location, 3 dB width and depth.
cqed::ResonatorParams guess_resonator(const ComplexTrace &trace, CouplingHint coupling, bool use_phase);

struct CoupledFitOptions
{
    bool magnitude_only = false;
    std::optional<cqed::EnsembleParams> initial;
    bool fix_g = false;
    bool fix_omega_s = false;
    bool fix_gamma = false;
    LeastSquaresOptions solver;
};

struct CoupledFit
{
    FitResult result;
    cqed::EnsembleParams ensemble;
    cqed::Cooperativity cooperativity;
    bool magnitude_only = false;
};

/// Fits (g_ens, omega_s, Gamma) of a Lorentzian ensemble with the resonator held fixed.
CoupledFit fit_coupled_spectrum(const ComplexTrace &trace, const cqed::ResonatorParams &resonator,
                                const CoupledFitOptions &options = {});

struct CurveFitOptions
{
    std::vector<double> sigma; // per point; empty for uniform weighting
    std::optional<std::vector<double>> initial;
    LeastSquaresOptions solver;
};

/// A (1 - exp(-t/T1)). Parameters: amplitude, t1 (s).
FitResult fit_t1(std::span<const double> recovery_time_s, std::span<const double> signal,
                 const CurveFitOptions &options = {});

/// A exp(-(2tau/T2)^p). Parameters: amplitude, t2 (s), p. `two_tau_s` is the echo time 2tau.
FitResult fit_t2(std::span<const double> two_tau_s, std::span<const double> echo_amplitude,
                 const CurveFitOptions &options = {});

/// area * (fwhm/2pi) / ((f - center)^2 + (fwhm/2)^2). Parameters: center (Hz), fwhm (Hz), area.
FitResult fit_lorentzian_density(std::span<const double> frequency_hz, std::span<const double> density,
                                 const CurveFitOptions &options = {});
} // namespace spinres::fit

#pragma once

// Input-output model of a single-port resonator, optionally coupled to one
// or more inhomogeneously broadened spin ensembles.
//
// Every rate and frequency is an ordinary frequency in Hz (the "/2pi"
// values). Evaluators convert to angular units internally where needed.

#include <spinres/spectra.hpp>

#include <complex>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace spinres::cqed
{
using cplx = std::complex<double>;

struct ResonatorParams
{
    double omega_r_hz = 0.0;
    double kappa_int_hz = 0.0;
    double kappa_ext_hz = 0.0;
    double phase_offset_rad = 0.0;
    double amplitude_scale = 1.0;
    double electrical_delay_s = 0.0; // optional linear phase, referenced to omega_r

    double kappa_tot_hz() const { return kappa_int_hz + kappa_ext_hz; }
    double q_int() const { return omega_r_hz / kappa_int_hz; }
    double q_ext() const { return omega_r_hz / kappa_ext_hz; }
    double q_loaded() const { return omega_r_hz / kappa_tot_hz(); }

    /// kappa_int = omega_r / Q_int.
    static ResonatorParams from_q_int(double omega_r_hz, double q_int, double kappa_ext_hz);

    void validate() const;
};

enum class Lineshape
{
    Lorentzian,
    Gaussian,
    Tabulated
};

std::string to_string(Lineshape shape);
Lineshape lineshape_from_string(const std::string &name);

/// Piecewise-linear spin density, zero outside the sampled range.
struct TabulatedDensity
{
    std::vector<double> frequency_hz;
    std::vector<double> density; // 1/Hz

    double operator()(double omega_hz) const;
    double integral() const;

    /// Rescales `density` so that the integral is one.
    static TabulatedDensity normalized(std::vector<double> frequency_hz, std::vector<double> density);

    void validate() const;
};

struct EnsembleParams
{
    double g_ens_hz = 0.0;
    double omega_s_hz = 0.0;
    double gamma_hz = 1.0; // inhomogeneous FWHM
    Lineshape lineshape = Lineshape::Lorentzian;
    TabulatedDensity table;  // used when lineshape == Tabulated
    double gamma_hom_hz = 0.0;

    /// Normalised spin density rho(omega), 1/Hz.
    double density(double omega_hz) const;

    void validate() const;
};

/// a e^{i phi} e^{-i 2pi (omega - omega_r) tau}.
cplx background(double omega_hz, const ResonatorParams &res);

cplx reflection_bare(double omega_hz, const ResonatorParams &res);

/// W(omega) = g^2 Int rho(w') / (i(omega - w') + gamma_hom/2) dw'.
/// Closed form for Lorentzian densities, exact piecewise-linear integration
/// for tabulated ones, adaptive quadrature otherwise.
cplx ensemble_susceptibility(double omega_hz, const EnsembleParams &ens);

struct QuadratureOptions
{
    double relative_tolerance = 1e-8;
    unsigned max_depth = 18;
};

/// Quadrature evaluation of W for any lineshape (including Lorentzian).
cplx ensemble_susceptibility_numeric(double omega_hz, const EnsembleParams &ens,
                                     const QuadratureOptions &options = {});

cplx reflection_coupled(double omega_hz, const ResonatorParams &res, const EnsembleParams &ens);

/// Several independent spin lines coupled to the same mode; W adds.
cplx reflection_coupled(double omega_hz, const ResonatorParams &res, std::span<const EnsembleParams> ensembles);

/// d|S11|^2/domega for Lorentzian ensembles, analytic.
double reflection_power_slope(double omega_hz, const ResonatorParams &res, std::span<const EnsembleParams> ensembles);

struct DressedPair
{
    double omega_plus_hz = 0.0;
    double omega_minus_hz = 0.0;

    double splitting_hz() const { return omega_plus_hz - omega_minus_hz; }
};

DressedPair dressed_frequencies(double omega_r_hz, double omega_s_hz, double g_ens_hz);

enum class CouplingRegime
{
    Weak,
    HighCooperativity,
    Strong
};

std::string to_string(CouplingRegime regime);

struct Cooperativity
{
    double value = 0.0;
    CouplingRegime regime = CouplingRegime::Weak;
};

/// C = g^2 / (kappa_tot Gamma).
Cooperativity cooperativity(double g_ens_hz, double kappa_tot_hz, double gamma_hz);

struct DensityEstimate
{
    std::vector<double> frequency_hz;
    std::vector<double> density;     // clipped at zero, 1/Hz
    std::vector<double> raw;         // Re W / pi before normalisation, Hz
    std::vector<bool> masked;        // |1 - S/bg| too small to invert
    std::size_t masked_count = 0;
    double normalization = 0.0;      // Int Re W / pi, Hz^2 (estimates g^2)
    double g_ens_estimate_hz = 0.0;
    double clipped_mass = 0.0;       // Int of the negative part removed by clipping
    std::vector<double> sigma;       // 1-sigma of density from S11 noise; empty without a noise level
};

/// Deducts the bare resonator response from a coupled trace. With `g_ens_hz`
/// the density is Re W / (pi g^2); without it the raw curve is normalised to
/// unit area and g_ens is estimated from the normalisation. A positive
/// `s11_noise_sigma` (per quadrature) is propagated into `sigma`; the noise
/// grows roughly as the squared detuning, so weighted fits need it.
DensityEstimate invert_spin_distribution(const ComplexTrace &trace, const ResonatorParams &res,
                                         std::optional<double> g_ens_hz = std::nullopt,
                                         double s11_noise_sigma = 0.0);
} // namespace spinres::cqed

#pragma once

// Resonator/spin design arithmetic: zero-point field, couplings, spin
// counting and the internal-Q loss budget.

#include <limits>
#include <string>
#include <vector>

namespace spinres::design
{
/// B_vac = sqrt(mu0 h f / (2 V)).
double vacuum_field(double frequency_hz, double mode_volume_m3);
double mode_volume(double frequency_hz, double b_vac_t);

/// (g mu_B / h) B_vac / 2.
double single_spin_coupling(double b_vac_t, double g_factor);

/// g_single sqrt(N p).
double ensemble_coupling(double g_single_hz, double n_spins, double polarization = 1.0);
/// N = (g_ens / g_single)^2 / p.
double implied_spin_count(double g_single_hz, double g_ens_hz, double polarization = 1.0);

/// tanh(h f / 2 k T); 1 at T = 0.
double thermal_polarization(double frequency_hz, double temperature_k);

enum class Species
{
    P1,
    DPPH
};

std::string to_string(Species s);
Species species_from_string(const std::string &name);

struct SampleSpec
{
    Species species = Species::P1;
    double concentration_ppm = 0.0;   // P1: relative to host atoms
    double sample_volume_m3 = 0.0;    // P1
    double host_density_m3 = 1.77e29; // diamond carbon
    double spins_per_molecule = 1.0;  // DPPH
    double molar_mass_g_mol = 394.32; // DPPH
    double mass_g = 0.0;              // DPPH

    void validate() const;
};

double spin_count(const SampleSpec &spec);

struct DesignParams
{
    double frequency_hz = 0.0;
    double b_vac_t = 0.0;       // 0 when derived from mode_volume
    double mode_volume_m3 = 0.0; // 0 when derived from b_vac
    double epsilon_perp = 130.0;
    double epsilon_par = 255.0;
    double tan_delta = 0.0;
    double electric_filling = 1.0;
    double magnetic_filling = 0.37; // metadata
    double q_radiation = std::numeric_limits<double>::infinity();
    double q_conductor = std::numeric_limits<double>::infinity();

    /// Fills whichever of b_vac / mode_volume is zero from the other.
    DesignParams resolved() const;
    void validate() const;
};

struct LossChannel
{
    std::string name;
    double inverse_q = 0.0;
    double fraction = 0.0;
};

struct LossBudget
{
    double q_int = 0.0;
    double inverse_q_int = 0.0;
    std::vector<LossChannel> channels; // dielectric, conductor, radiation
    std::string dominant;
};

/// 1/Q_int = p_e tan(delta) + 1/Q_cond + 1/Q_rad.
LossBudget loss_budget(const DesignParams &params);
} // namespace spinres::design

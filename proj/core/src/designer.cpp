#include <spinres/constants.hpp>
#include <spinres/designer.hpp>
#include <spinres/error.hpp>

#include <cmath>

namespace spinres::design
{
namespace c = spinres::constants;

namespace
{
void require_positive(double v, const char *what)
{
    if (!(v > 0.0) || !std::isfinite(v))
        throw DomainError(std::string(what) + " must be positive and finite");
}

void require_non_negative(double v, const char *what)
{
    if (!(v >= 0.0) || !std::isfinite(v))
        throw DomainError(std::string(what) + " must be non-negative and finite");
}
} // namespace

double vacuum_field(double frequency_hz, double mode_volume_m3)
{
    require_positive(frequency_hz, "frequency");
    require_positive(mode_volume_m3, "mode volume");
    return std::sqrt(c::mu0 * c::planck * frequency_hz / (2.0 * mode_volume_m3));
}

double mode_volume(double frequency_hz, double b_vac_t)
{
    require_positive(frequency_hz, "frequency");
    require_positive(b_vac_t, "vacuum field");
    return c::mu0 * c::planck * frequency_hz / (2.0 * b_vac_t * b_vac_t);
}

double single_spin_coupling(double b_vac_t, double g_factor)
{
    require_non_negative(b_vac_t, "vacuum field");
    require_positive(g_factor, "g-factor");
    return g_factor * c::bohr_frequency_per_tesla * b_vac_t / 2.0;
}

double ensemble_coupling(double g_single_hz, double n_spins, double polarization)
{
    require_non_negative(g_single_hz, "single-spin coupling");
    require_non_negative(n_spins, "spin count");
    if (!(polarization >= 0.0 && polarization <= 1.0))
        throw DomainError("polarization must lie in [0, 1]");
    return g_single_hz * std::sqrt(n_spins * polarization);
}

double implied_spin_count(double g_single_hz, double g_ens_hz, double polarization)
{
    require_positive(g_single_hz, "single-spin coupling");
    require_non_negative(g_ens_hz, "ensemble coupling");
    if (!(polarization > 0.0 && polarization <= 1.0))
        throw DomainError("polarization must lie in (0, 1]");
    const double ratio = g_ens_hz / g_single_hz;
    return ratio * ratio / polarization;
}

double thermal_polarization(double frequency_hz, double temperature_k)
{
    require_positive(frequency_hz, "frequency");
    require_non_negative(temperature_k, "temperature");
    if (temperature_k == 0.0)
        return 1.0;
    return std::tanh(c::planck * frequency_hz / (2.0 * c::boltzmann * temperature_k));
}

std::string to_string(Species s) { return s == Species::P1 ? "P1" : "DPPH"; }

Species species_from_string(const std::string &name)
{
    if (name == "P1" || name == "p1")
        return Species::P1;
    if (name == "DPPH" || name == "dpph")
        return Species::DPPH;
    throw DomainError("unknown species '" + name + "' (expected P1 or DPPH)");
}

void SampleSpec::validate() const
{
    if (species == Species::P1)
    {
        require_non_negative(concentration_ppm, "concentration");
        if (concentration_ppm > 1e6)
            throw DomainError("concentration cannot exceed 1e6 ppm");
        require_non_negative(sample_volume_m3, "sample volume");
        require_positive(host_density_m3, "host density");
    }
    else
    {
        require_non_negative(mass_g, "sample mass");
        require_positive(molar_mass_g_mol, "molar mass");
        require_positive(spins_per_molecule, "spins per molecule");
    }
}

double spin_count(const SampleSpec &spec)
{
    spec.validate();
    if (spec.species == Species::P1)
        return spec.concentration_ppm * 1e-6 * spec.host_density_m3 * spec.sample_volume_m3;
    return spec.mass_g / spec.molar_mass_g_mol * c::avogadro * spec.spins_per_molecule;
}

DesignParams DesignParams::resolved() const
{
    DesignParams p = *this;
    require_positive(frequency_hz, "frequency");
    if (b_vac_t > 0.0 && mode_volume_m3 > 0.0)
        throw DomainError("give either b_vac or mode_volume, not both");
    if (b_vac_t > 0.0)
        p.mode_volume_m3 = mode_volume(frequency_hz, b_vac_t);
    else if (mode_volume_m3 > 0.0)
        p.b_vac_t = vacuum_field(frequency_hz, mode_volume_m3);
    return p;
}

void DesignParams::validate() const
{
    require_positive(frequency_hz, "frequency");
    require_positive(epsilon_perp, "epsilon_perp");
    require_positive(epsilon_par, "epsilon_par");
    require_non_negative(tan_delta, "tan_delta");
    if (!(electric_filling >= 0.0 && electric_filling <= 1.0))
        throw DomainError("electric_filling must lie in [0, 1]");
    if (!(magnetic_filling >= 0.0 && magnetic_filling <= 1.0))
        throw DomainError("magnetic_filling must lie in [0, 1]");
    if (!(q_radiation > 0.0) || !(q_conductor > 0.0))
        throw DomainError("quality factors must be positive");
}

LossBudget loss_budget(const DesignParams &params)
{
    params.validate();
    LossBudget b;
    b.channels = {
        {"dielectric", params.electric_filling * params.tan_delta, 0.0},
        {"conductor", 1.0 / params.q_conductor, 0.0},
        {"radiation", 1.0 / params.q_radiation, 0.0},
    };
    for (const auto &ch : b.channels)
        b.inverse_q_int += ch.inverse_q;
    if (!(b.inverse_q_int > 0.0))
        throw DomainError("loss budget has no finite loss channel");
    b.q_int = 1.0 / b.inverse_q_int;
    double largest = -1.0;
    for (auto &ch : b.channels)
    {
        ch.fraction = ch.inverse_q / b.inverse_q_int;
        if (ch.fraction > largest)
        {
            largest = ch.fraction;
            b.dominant = ch.name;
        }
    }
    return b;
}
} // namespace spinres::design

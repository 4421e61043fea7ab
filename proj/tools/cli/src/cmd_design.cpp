#include "common.hpp"

#include <spinres/designer.hpp>
#include <spinres_cli/io.hpp>

#include <cmath>

namespace spinres::cli::detail
{
namespace
{
std::optional<design::SampleSpec> read_sample(Config &cfg)
{
    if (!cfg.has("sample"))
        return std::nullopt;
    design::SampleSpec s;
    s.species = design::species_from_string(cfg.string("sample.species"));
    if (s.species == design::Species::P1)
    {
        s.concentration_ppm = cfg.number("sample.concentration_ppm");
        s.sample_volume_m3 = cfg.number("sample.volume_m3");
        s.host_density_m3 = cfg.number("sample.host_density_m3", s.host_density_m3);
    }
    else
    {
        s.mass_g = cfg.number("sample.mass_g");
        s.molar_mass_g_mol = cfg.number("sample.molar_mass_g_mol", s.molar_mass_g_mol);
        s.spins_per_molecule = cfg.number("sample.spins_per_molecule", s.spins_per_molecule);
    }
    s.validate();
    return s;
}
} // namespace

Report run_design(Run &run)
{
    Config &cfg = run.config();
    const auto freq = cfg.optional_number("frequency_hz");
    auto b_vac = cfg.optional_number("b_vac_t");
    auto volume = cfg.optional_number("mode_volume_m3");
    if (b_vac && volume)
        throw UsageError("give either b_vac_t or mode_volume_m3, not both");
    const auto sample = read_sample(cfg);
    const double default_g =
        sample && sample->species == design::Species::DPPH ? constants::g_dpph : constants::g_p1;
    const double g_factor = cfg.number("g_factor", default_g);
    auto n_spins = cfg.optional_number("n_spins");
    if (n_spins && sample)
        throw UsageError("give either n_spins or sample, not both");
    const auto temperature = cfg.optional_number("temperature_k");
    const auto target_g = cfg.optional_number("g_ens_hz");

    const bool want_loss = cfg.has("loss");
    design::DesignParams dp;
    if (want_loss)
    {
        dp.tan_delta = cfg.number("loss.tan_delta", dp.tan_delta);
        dp.electric_filling = cfg.number("loss.electric_filling", dp.electric_filling);
        dp.magnetic_filling = cfg.number("loss.magnetic_filling", dp.magnetic_filling);
        dp.epsilon_perp = cfg.number("loss.epsilon_perp", dp.epsilon_perp);
        dp.epsilon_par = cfg.number("loss.epsilon_par", dp.epsilon_par);
        dp.q_radiation = cfg.number("loss.q_radiation", dp.q_radiation);
        dp.q_conductor = cfg.number("loss.q_conductor", dp.q_conductor);
    }
    cfg.reject_unknown();

    auto need_frequency = [&](const char *what) {
        if (!freq)
            throw UsageError(std::string("frequency_hz is required to ") + what);
        return *freq;
    };

    Report report("resonator-design");
    if (b_vac && freq)
        volume = design::mode_volume(*freq, *b_vac);
    else if (volume)
        b_vac = design::vacuum_field(need_frequency("convert mode_volume_m3 to b_vac_t"), *volume);

    std::optional<double> g_single;
    if (b_vac)
    {
        g_single = design::single_spin_coupling(*b_vac, g_factor);
        report.add("b_vac", *b_vac, std::nullopt, "T");
        report.add("g_single", *g_single, std::nullopt, "Hz");
        report.add("g_factor", g_factor);
    }
    if (volume)
        report.add("mode_volume", *volume, std::nullopt, "m^3");

    double polarization = 1.0;
    if (temperature)
        polarization = design::thermal_polarization(need_frequency("compute a thermal polarization"), *temperature);
    cfg.record("polarization", polarization);
    if (temperature)
        report.add("polarization", polarization);

    if (sample)
        n_spins = design::spin_count(*sample);
    if (n_spins)
        report.add("n_spins", *n_spins);
    if (n_spins && g_single)
        report.add("g_ens", design::ensemble_coupling(*g_single, *n_spins, polarization), std::nullopt, "Hz");
    if (target_g && g_single)
        report.add("implied_spin_count", design::implied_spin_count(*g_single, *target_g, polarization));

    if (want_loss)
    {
        dp.frequency_hz = need_frequency("compute a loss budget");
        const auto budget = design::loss_budget(dp);
        report.add("q_int", budget.q_int);
        report.add("kappa_int", dp.frequency_hz / budget.q_int, std::nullopt, "Hz");
        std::vector<double> index, inv_q, fraction;
        for (std::size_t i = 0; i < budget.channels.size(); ++i)
        {
            const auto &ch = budget.channels[i];
            report.add("inverse_q_" + ch.name, ch.inverse_q);
            report.add("loss_fraction_" + ch.name, ch.fraction);
            index.push_back(static_cast<double>(i));
            inv_q.push_back(ch.inverse_q);
            fraction.push_back(ch.fraction);
        }
        report.note("dominant_loss", budget.dominant);
        report.note("channel_order", "0 dielectric, 1 conductor, 2 radiation");
        run.write("loss_budget.dat", serialize_columns({"channel", "inverse_q", "fraction"}, {index, inv_q, fraction}));
    }

    if (g_single)
    {
        // Collective coupling against spin number, for sizing a sample.
        std::vector<double> n, g;
        for (int k = 0; k <= 40; ++k)
        {
            n.push_back(std::pow(10.0, 10.0 + 0.25 * k));
            g.push_back(design::ensemble_coupling(*g_single, n.back(), polarization));
        }
        run.write("coupling.dat", serialize_columns({"n_spins", "g_ens_hz"}, {n, g}));
    }

    if (report.parameters().empty())
        throw UsageError("design needs b_vac_t, mode_volume_m3 (with frequency_hz) or a loss section");
    return report;
}
} // namespace spinres::cli::detail

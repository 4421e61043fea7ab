#include "common.hpp"

#include <spinres/error.hpp>
#include <spinres_cli/commands.hpp>
#include <spinres_cli/io.hpp>

#include <CLI11.hpp>

#include <functional>
#include <map>
#include <optional>

namespace spinres::cli
{
namespace
{
using Handler = std::function<Report(Run &)>;

const std::map<std::string, std::pair<Handler, std::string>> &handlers()
{
    static const std::map<std::string, std::pair<Handler, std::string>> h = {
        {"fit-resonator", {detail::run_fit_resonator, "Fit a bare resonator reflection trace"}},
        {"fit-coupled", {detail::run_fit_coupled, "Fit a spin ensemble to a coupled reflection trace"}},
        {"fit-crossing", {detail::run_fit_crossing, "Fit coupling constants to an avoided-crossing field map"}},
        {"invert-density", {detail::run_invert_density, "Recover the spin density from a coupled trace"}},
        {"simulate-sweep", {detail::run_simulate_sweep, "Forward-model a field-swept reflection map"}},
        {"pulse-sim", {detail::run_pulse_sim, "Simulate Bloch dynamics, Hahn echoes and relaxation curves"}},
        {"fit-t1", {detail::run_fit_t1, "Fit a saturation-recovery curve"}},
        {"fit-t2", {detail::run_fit_t2, "Fit a stretched echo-decay curve"}},
        {"design", {detail::run_design, "Resonator and sample design arithmetic"}},
    };
    return h;
}

struct DesignFlags
{
    std::optional<double> bvac, gfactor, frequency, volume, tan_delta, q_rad, q_cond, electric_filling, temperature,
        n_spins;
};

json design_overrides(const DesignFlags &f)
{
    json o = json::object();
    auto put = [&](const char *key, const std::optional<double> &v) {
        if (v)
            o[json::json_pointer(key)] = *v;
    };
    put("/b_vac_t", f.bvac);
    put("/g_factor", f.gfactor);
    put("/frequency_hz", f.frequency);
    put("/mode_volume_m3", f.volume);
    put("/loss/tan_delta", f.tan_delta);
    put("/loss/q_radiation", f.q_rad);
    put("/loss/q_conductor", f.q_cond);
    put("/loss/electric_filling", f.electric_filling);
    put("/temperature_k", f.temperature);
    put("/n_spins", f.n_spins);
    return o;
}

int execute(const std::string &command, const std::string &config_path, const std::optional<std::string> &out_flag,
            const std::optional<std::uint64_t> &seed_flag, const json &overrides, std::ostream &out)
{
    Config cfg;
    std::string config_name = "(none)";
    std::string config_text;
    if (!config_path.empty())
    {
        cfg = Config::load(config_path);
        config_name = std::filesystem::path(config_path).filename().string();
        config_text = read_file(config_path);
    }
    else if (command != "design")
        throw UsageError(command + " requires --config");

    if (!overrides.empty())
    {
        json merged = json::parse(config_text.empty() ? "{}" : config_text);
        merged.merge_patch(overrides);
        cfg = Config(std::move(merged), cfg.base_dir());
    }

    std::filesystem::path out_dir = "spinres-out";
    if (cfg.has("output"))
    {
        out_dir = cfg.string("output");
        if (out_dir.is_relative())
            out_dir = cfg.base_dir() / out_dir;
    }
    else
        cfg.string("output", "spinres-out");
    if (out_flag)
        out_dir = *out_flag;
    std::uint64_t seed = cfg.unsigned_integer("seed", 0);
    if (seed_flag)
        seed = *seed_flag;

    Run run(command, std::move(cfg), out_dir, seed, config_name, config_text);
    run.set_overrides(overrides);
    const Report report = handlers().at(command).first(run);
    const json doc = run.finish(report);
    out << command << ": " << doc.at("convergence").get<std::string>() << ", wrote "
        << (run.out_dir() / "report.json").string() << "\n";
    return exit_ok;
}
} // namespace

const std::vector<std::string> &subcommands()
{
    static const std::vector<std::string> names = [] {
        std::vector<std::string> v;
        for (const auto &[name, _] : handlers())
            v.push_back(name);
        return v;
    }();
    return names;
}

int run_main(int argc, const char *const *argv, std::ostream &out, std::ostream &err)
{
    CLI::App app{"Spin-ensemble / resonator spectroscopy analysis", "spinres"};
    app.require_subcommand(1);
    app.set_version_flag("--version", version());

    std::string config_path;
    std::optional<std::string> out_dir;
    std::optional<std::uint64_t> seed;
    DesignFlags flags;
    for (const auto &[name, entry] : handlers())
    {
        auto *sub = app.add_subcommand(name, entry.second);
        auto *config_opt = sub->add_option("--config,-c", config_path, "Analysis configuration (JSON)");
        if (name != "design")
            config_opt->required();
        sub->add_option("--out,-o", out_dir, "Output directory");
        sub->add_option("--seed", seed, "Seed for stochastic simulation (default 0)");
        if (name == "design")
        {
            sub->add_option("--bvac", flags.bvac, "Vacuum magnetic field, T");
            sub->add_option("--gfactor", flags.gfactor, "Electron g-factor");
            sub->add_option("--frequency", flags.frequency, "Resonator frequency, Hz");
            sub->add_option("--volume", flags.volume, "Magnetic mode volume, m^3");
            sub->add_option("--tan-delta", flags.tan_delta, "Dielectric loss tangent");
            sub->add_option("--q-rad", flags.q_rad, "Radiation-limited Q");
            sub->add_option("--q-cond", flags.q_cond, "Conductor-limited Q");
            sub->add_option("--electric-filling", flags.electric_filling, "Electric filling factor");
            sub->add_option("--temperature", flags.temperature, "Spin temperature, K");
            sub->add_option("--n-spins", flags.n_spins, "Number of spins");
        }
    }

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::CallForHelp &e)
    {
        return app.exit(e, out, err);
    }
    catch (const CLI::CallForAllHelp &e)
    {
        return app.exit(e, out, err);
    }
    catch (const CLI::CallForVersion &e)
    {
        return app.exit(e, out, err);
    }
    catch (const CLI::ParseError &e)
    {
        app.exit(e, out, err);
        return exit_usage;
    }

    const std::string command = app.get_subcommands().front()->get_name();
    try
    {
        return execute(command, config_path, out_dir, seed, command == "design" ? design_overrides(flags) : json::object(),
                       out);
    }
    catch (const UsageError &e)
    {
        err << "spinres " << command << ": " << e.what() << "\n";
        return exit_usage;
    }
    catch (const ParseError &e)
    {
        err << "spinres " << command << ": parse error: " << e.what() << "\n";
        return exit_parse_failure;
    }
    catch (const json::exception &e)
    {
        err << "spinres " << command << ": parse error: " << e.what() << "\n";
        return exit_parse_failure;
    }
    catch (const std::exception &e)
    {
        err << "spinres " << command << ": " << e.what() << "\n";
        return exit_fit_failure;
    }
}

int run_main(const std::vector<std::string> &args, std::ostream &out, std::ostream &err)
{
    std::vector<const char *> argv{"spinres"};
    for (const auto &a : args)
        argv.push_back(a.c_str());
    return run_main(static_cast<int>(argv.size()), argv.data(), out, err);
}
} // namespace spinres::cli

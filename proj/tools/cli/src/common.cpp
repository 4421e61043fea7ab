#include "common.hpp"

#include <spinres/error.hpp>
#include <spinres_cli/io.hpp>

#include <cmath>

namespace spinres::cli::detail
{
spin::Vec3 read_direction(Config &cfg, const std::string &key, const spin::Vec3 &fallback)
{
    const auto v = cfg.numbers(key, {fallback.x(), fallback.y(), fallback.z()});
    if (v.size() != 3)
        throw UsageError("config key '" + key + "' must have three components");
    const spin::Vec3 d(v[0], v[1], v[2]);
    if (!(d.norm() > 0.0))
        throw UsageError("config key '" + key + "' must be a non-zero vector");
    return d.normalized();
}

spin::SpinSystem read_spin_system(Config &cfg, const std::string &key)
{
    const std::string type = cfg.string(key + ".type");
    spin::SpinSystem s;
    if (type == "p1")
    {
        s = spin::SpinSystem::p1_center(read_direction(cfg, key + ".axis", spin::Vec3(1.0, 1.0, 1.0)),
                                        cfg.number(key + ".g_factor", constants::g_p1));
        s.hyperfine_perp_hz = cfg.number(key + ".hyperfine_perp_hz", constants::p1_hyperfine_perp_hz);
        s.hyperfine_par_hz = cfg.number(key + ".hyperfine_par_hz", constants::p1_hyperfine_par_hz);
    }
    else if (type == "dpph" || type == "free-electron")
        s = spin::SpinSystem::free_electron(cfg.number(key + ".g_factor", constants::g_dpph));
    else if (type == "custom")
    {
        s.g_factor = cfg.number(key + ".g_factor");
        s.nuclear_spin = cfg.number(key + ".nuclear_spin", 0.0);
        s.hyperfine_perp_hz = cfg.number(key + ".hyperfine_perp_hz", 0.0);
        s.hyperfine_par_hz = cfg.number(key + ".hyperfine_par_hz", 0.0);
        s.symmetry_axis = read_direction(cfg, key + ".axis", spin::Vec3::UnitZ());
    }
    else
        throw UsageError("unknown spin_system.type '" + type + "' (p1, dpph, free-electron, custom)");
    s.validate();
    return s;
}

cqed::ResonatorParams read_resonator_section(Config &cfg, const std::string &key)
{
    cqed::ResonatorParams r;
    r.omega_r_hz = cfg.number(key + ".omega_r_hz");
    if (cfg.has(key + ".q_int") && cfg.has(key + ".kappa_int_hz"))
        throw UsageError("give either " + key + ".q_int or " + key + ".kappa_int_hz, not both");
    if (cfg.has(key + ".q_int"))
    {
        const double q = cfg.number(key + ".q_int");
        if (!(q > 0.0))
            throw UsageError(key + ".q_int must be positive");
        r.kappa_int_hz = r.omega_r_hz / q;
        cfg.record(key + ".kappa_int_hz", r.kappa_int_hz);
    }
    else
        r.kappa_int_hz = cfg.number(key + ".kappa_int_hz");
    r.kappa_ext_hz = cfg.number(key + ".kappa_ext_hz");
    r.phase_offset_rad = cfg.number(key + ".phase_offset_rad", 0.0);
    r.amplitude_scale = cfg.number(key + ".amplitude_scale", 1.0);
    r.electrical_delay_s = cfg.number(key + ".electrical_delay_s", 0.0);
    r.validate();
    return r;
}

cqed::ResonatorParams read_resonator(Run &run)
{
    Config &cfg = run.config();
    const bool inline_params = cfg.has("resonator");
    const bool from_report = cfg.has("resonator_report");
    if (inline_params == from_report)
        throw UsageError("give exactly one of 'resonator' or 'resonator_report'");
    if (inline_params)
        return read_resonator_section(cfg, "resonator");

    const auto path = run.input("resonator_report");
    const json doc = json::parse(read_file(path));
    if (doc.value("model", "") != fit::to_string(fit::ModelKind::BareReflection))
        throw UsageError("resonator_report must be a fit-resonator report");
    const auto &p = doc.at("parameters");
    auto value = [&](const char *name) { return p.at(name).at("value").get<double>(); };
    cqed::ResonatorParams r;
    r.omega_r_hz = value("omega_r");
    r.kappa_int_hz = value("kappa_int");
    r.kappa_ext_hz = value("kappa_ext");
    r.amplitude_scale = value("amplitude");
    r.phase_offset_rad = value("phase_offset");
    r.electrical_delay_s = value("electrical_delay");
    cfg.record("resonator.omega_r_hz", r.omega_r_hz);
    cfg.record("resonator.kappa_int_hz", r.kappa_int_hz);
    cfg.record("resonator.kappa_ext_hz", r.kappa_ext_hz);
    cfg.record("resonator.amplitude_scale", r.amplitude_scale);
    cfg.record("resonator.phase_offset_rad", r.phase_offset_rad);
    cfg.record("resonator.electrical_delay_s", r.electrical_delay_s);
    r.validate();
    return r;
}

fit::LeastSquaresOptions read_solver(Config &cfg)
{
    fit::LeastSquaresOptions o;
    o.max_iterations = cfg.unsigned_integer("solver.max_iterations", o.max_iterations);
    o.step_tolerance = cfg.number("solver.step_tolerance", o.step_tolerance);
    o.cost_tolerance = cfg.number("solver.cost_tolerance", o.cost_tolerance);
    o.relative_fd_step = cfg.number("solver.relative_fd_step", o.relative_fd_step);
    o.initial_damping = cfg.number("solver.initial_damping", o.initial_damping);
    if (o.max_iterations == 0 || !(o.step_tolerance > 0.0) || !(o.cost_tolerance > 0.0) ||
        !(o.relative_fd_step > 0.0) || !(o.initial_damping > 0.0))
        throw UsageError("solver settings must be positive");
    return o;
}

ComplexTrace read_trace(Run &run, const std::string &key)
{
    Config &cfg = run.config();
    const auto path = run.input(key);
    const auto format = trace_format_from_string(cfg.string("format", "auto"));
    TraceFile tf = load_trace(path, format);
    run.describe_input(key, {{"format", to_string(tf.format)},
                             {"rows", tf.trace.size()},
                             {"skipped_rows", tf.skipped_rows},
                             {"comment_lines", tf.comment_lines},
                             {"frequency_multiplier", tf.frequency_multiplier}});
    tf.trace.metadata.source = cfg.resolved().at(json::json_pointer("/" + key)).get<std::string>();
    return tf.trace;
}

std::vector<double> read_grid(Config &cfg, const std::string &key)
{
    if (cfg.keys(key).empty())
    {
        auto v = cfg.numbers(key);
        for (std::size_t i = 1; i < v.size(); ++i)
            if (!(v[i] > v[i - 1]))
                throw UsageError("config key '" + key + "' must be strictly increasing");
        return v;
    }
    const double start = cfg.number(key + ".start");
    const double stop = cfg.number(key + ".stop");
    const auto points = cfg.unsigned_integer(key + ".points", 0);
    if (points < 2 || !(stop > start))
        throw UsageError("config key '" + key + "' needs start < stop and at least two points");
    return linspace(start, stop, points);
}
} // namespace spinres::cli::detail

#include "common.hpp"

#include <spinres/error.hpp>
#include <spinres/pulse_sim.hpp>
#include <spinres/sweep.hpp>
#include <spinres_cli/io.hpp>

#include <cmath>
#include <numbers>
#include <random>

namespace spinres::cli::detail
{
namespace
{
pulse::RelaxationParams read_relaxation(Config &cfg)
{
    pulse::RelaxationParams r;
    r.t1_s = cfg.number("relaxation.t1_s", r.t1_s);
    r.t2_s = cfg.number("relaxation.t2_s", r.t2_s);
    r.stretch_p = cfg.number("relaxation.stretch_p", r.stretch_p);
    r.equilibrium_mz = cfg.number("relaxation.equilibrium_mz", r.equilibrium_mz);
    r.validate();
    return r;
}

pulse::DetuningShape read_shape(Config &cfg)
{
    const std::string s = cfg.string("shape", "lorentzian");
    if (s == "lorentzian")
        return pulse::DetuningShape::Lorentzian;
    if (s == "gaussian")
        return pulse::DetuningShape::Gaussian;
    throw UsageError("shape must be lorentzian or gaussian");
}

pulse::HahnEchoOptions read_echo_options(Config &cfg)
{
    pulse::HahnEchoOptions o;
    o.n_spins = cfg.unsigned_integer("n_spins", o.n_spins);
    o.samples = cfg.unsigned_integer("samples", o.samples);
    o.half_window_s = cfg.number("half_window_s", o.half_window_s);
    o.shape = read_shape(cfg);
    o.pulse_duration_s = cfg.number("pulse_duration_s", o.pulse_duration_s);
    return o;
}

// Additive Gaussian noise from an explicitly seeded generator.
class Noise
{
public:
    Noise(double sigma, std::uint64_t seed) : sigma_(sigma), rng_(seed)
    {
        if (!(sigma >= 0.0))
            throw UsageError("noise_sigma must be non-negative");
    }
    double operator()() { return sigma_ > 0.0 ? sigma_ * normal_(rng_) : 0.0; }

private:
    double sigma_;
    std::mt19937_64 rng_;
    std::normal_distribution<double> normal_;
};

std::string curve_csv(const char *xname, const char *yname, const std::vector<double> &x, const std::vector<double> &y)
{
    std::string out = std::string(xname) + "," + yname + "\n";
    for (std::size_t i = 0; i < x.size(); ++i)
        out += format_number(x[i]) + "," + format_number(y[i]) + "\n";
    return out;
}

Report pulse_sequence(Run &run, const pulse::RelaxationParams &relax)
{
    Config &cfg = run.config();
    pulse::PulseSequence seq;
    const std::size_t n = cfg.array_size("segments");
    if (n == 0)
        throw UsageError("sequence mode needs a non-empty 'segments' array");
    for (std::size_t i = 0; i < n; ++i)
    {
        const std::string k = "segments." + std::to_string(i);
        const std::string type = cfg.string(k + ".type");
        const double phase = cfg.number(k + ".phase_deg", 0.0) * std::numbers::pi / 180.0;
        if (type == "pulse")
            seq.pulse(cfg.number(k + ".duration_s"), cfg.number(k + ".rabi_hz"), phase);
        else if (type == "rotate")
            seq.rotate(cfg.number(k + ".flip_angle_deg") * std::numbers::pi / 180.0, phase);
        else if (type == "delay")
            seq.delay(cfg.number(k + ".duration_s"));
        else
            throw UsageError("segment type must be pulse, rotate or delay");
    }
    if (cfg.has("acquire"))
        seq.acquire(cfg.number("acquire.start_s"), cfg.number("acquire.length_s"),
                    cfg.unsigned_integer("acquire.samples", 101));
    const double detuning = cfg.number("detuning_hz", 0.0);
    const auto m0 = read_direction(cfg, "initial", pulse::Vec3::UnitZ()) * relax.equilibrium_mz;
    cfg.record("initial", std::vector<double>{m0.x(), m0.y(), m0.z()});
    cfg.reject_unknown();

    seq.validate();
    const auto traj = pulse::propagate_bloch(seq, relax, detuning, m0);
    auto columns = [](const std::vector<pulse::TrajectoryPoint> &pts) {
        std::vector<std::vector<double>> c(4);
        for (const auto &p : pts)
        {
            c[0].push_back(p.time_s);
            c[1].push_back(p.m.x());
            c[2].push_back(p.m.y());
            c[3].push_back(p.m.z());
        }
        return c;
    };
    run.write("trajectory.dat", serialize_columns({"time_s", "mx", "my", "mz"}, columns(traj.points)));
    if (!traj.acquisition.empty())
        run.write("acquisition.dat", serialize_columns({"time_s", "mx", "my", "mz"}, columns(traj.acquisition)));

    Report report("bloch-sequence");
    const auto &last = traj.points.back();
    report.add("duration", seq.duration(), std::nullopt, "s");
    report.add("final_mx", last.m.x());
    report.add("final_my", last.m.y());
    report.add("final_mz", last.m.z());
    if (!traj.acquisition.empty())
    {
        double peak = 0.0, at = 0.0;
        for (const auto &p : traj.acquisition)
            if (std::hypot(p.m.x(), p.m.y()) > peak)
            {
                peak = std::hypot(p.m.x(), p.m.y());
                at = p.time_s;
            }
        report.add("acquisition_peak", peak);
        report.add("acquisition_peak_time", at, std::nullopt, "s");
    }
    return report;
}
} // namespace

Report run_simulate_sweep(Run &run)
{
    Config &cfg = run.config();
    cqed::SweepSpec spec;
    spec.system = read_spin_system(cfg, "spin_system");
    spec.field_direction = read_direction(cfg, "field_direction", spin::Vec3::UnitZ());
    spec.drive_axis = read_direction(cfg, "drive_axis", spin::Vec3::UnitX());
    spec.field_t = read_grid(cfg, "field_t");
    spec.frequency_hz = read_grid(cfg, "frequency_hz");
    const cqed::ResonatorParams res = read_resonator(run);

    cqed::SweepCoupling coupling;
    coupling.default_g_ens_hz = cfg.number("coupling.g_ens_hz", 0.0);
    const auto labels = spin::manifold_labels(spec.system);
    for (const auto &name : cfg.keys("coupling.g_ens_by_label"))
    {
        const bool known = std::any_of(labels.begin(), labels.end(), [&](const auto &l) { return l.str() == name; });
        if (!known)
            throw UsageError("coupling.g_ens_by_label: '" + name + "' is not a manifold of this spin system");
        coupling.g_ens_by_label[name] = cfg.number("coupling.g_ens_by_label." + name);
    }
    coupling.gamma_hz = cfg.number("coupling.gamma_hz", coupling.gamma_hz);
    coupling.scale_by_matrix_element = cfg.boolean("coupling.scale_by_matrix_element", coupling.scale_by_matrix_element);
    cqed::SweepNoise noise;
    noise.sigma = cfg.number("noise_sigma", 0.0);
    noise.seed = run.seed();
    cfg.reject_unknown();

    const FieldSweepMap map = cqed::simulate_field_sweep(spec, res, coupling, noise);
    run.write("map.csv", serialize_field_map(map));

    Report report("field-sweep");
    report.add("rows", static_cast<double>(map.rows()));
    report.add("columns", static_cast<double>(map.cols()));
    const double max_field = std::max(2.0, 2.0 * spec.field_t.back());
    std::vector<std::string> names{"field_t", "omega_r_hz"};
    std::vector<std::vector<double>> cols{spec.field_t, std::vector<double>(map.rows(), res.omega_r_hz)};
    for (const auto &label : labels)
    {
        const std::string l = label.str();
        report.add("g_ens_" + l, coupling.g_for(label), std::nullopt, "Hz");
        try
        {
            report.add("crossing_field_" + l,
                       spin::resonance_field(spec.system, res.omega_r_hz, spec.field_direction, label, max_field),
                       std::nullopt, "T");
        }
        catch (const NotFoundError &)
        {
            report.warn("no crossing with the resonator for " + l + " below " + format_number(max_field) + " T");
        }
        names.push_back("spin_" + l + "_hz");
        cols.emplace_back();
        for (double b : spec.field_t)
            cols.back().push_back(spin::manifold_frequency(spec.system, {b, spec.field_direction}, label));
    }
    run.write("crossings.dat", serialize_columns(names, cols));
    return report;
}

Report run_pulse_sim(Run &run)
{
    Config &cfg = run.config();
    const std::string mode = cfg.string("mode");
    const pulse::RelaxationParams relax = read_relaxation(cfg);
    Report report("pulse-sim");

    if (mode == "sequence")
        report = pulse_sequence(run, relax);
    else if (mode == "hahn-echo")
    {
        const double tau = cfg.number("tau_s");
        const double fwhm = cfg.number("ensemble_fwhm_hz");
        const auto opts = read_echo_options(cfg);
        cfg.reject_unknown();
        const pulse::EchoTrace echo = pulse::simulate_hahn_echo(tau, fwhm, relax, opts);
        std::vector<double> mx, my, mag;
        for (const auto &m : echo.magnetization)
        {
            mx.push_back(m.real());
            my.push_back(m.imag());
            mag.push_back(std::abs(m));
        }
        run.write("echo.dat", serialize_columns({"time_s", "mx", "my", "abs_m"}, {echo.time_s, mx, my, mag}));
        report = Report("hahn-echo");
        report.add("echo_time", 2.0 * tau, std::nullopt, "s");
        report.add("peak_time", echo.peak_time(), std::nullopt, "s");
        report.add("peak_amplitude", echo.peak_amplitude());
        report.add("amplitude_at_echo", echo.amplitude_at(2.0 * tau));
        report.add("envelope", pulse::echo_decay_model(2.0 * tau, relax.t2_s, relax.stretch_p, relax.equilibrium_mz));
        for (const auto &d : echo.diagnostics)
            report.warn(d);
    }
    else if (mode == "echo-decay")
    {
        const auto taus = read_grid(cfg, "tau_s");
        const double fwhm = cfg.number("ensemble_fwhm_hz");
        const double amplitude = cfg.number("amplitude", 1.0);
        auto opts = read_echo_options(cfg);
        Noise noise(cfg.number("noise_sigma", 0.0), run.seed());
        cfg.reject_unknown();
        std::vector<double> two_tau, signal, model, resid;
        for (double tau : taus)
        {
            const auto echo = pulse::simulate_hahn_echo(tau, fwhm, relax, opts);
            two_tau.push_back(2.0 * tau);
            signal.push_back(amplitude * echo.amplitude_at(2.0 * tau) / relax.equilibrium_mz + noise());
            model.push_back(pulse::echo_decay_model(2.0 * tau, relax.t2_s, relax.stretch_p, amplitude));
            resid.push_back(signal.back() - model.back());
        }
        run.write("curve.csv", curve_csv("two_tau_s", "echo", two_tau, signal));
        run.write("echo_decay.dat",
                  serialize_columns({"two_tau_s", "signal", "model", "residual"}, {two_tau, signal, model, resid}));
        report = Report("echo-decay");
        report.add("points", static_cast<double>(taus.size()));
        report.add("t2", relax.t2_s, std::nullopt, "s");
        report.add("p", relax.stretch_p);
        report.add("amplitude", amplitude);
    }
    else if (mode == "saturation-recovery")
    {
        const auto times = read_grid(cfg, "recovery_s");
        const double amplitude = cfg.number("amplitude", 1.0);
        Noise noise(cfg.number("noise_sigma", 0.0), run.seed());
        cfg.reject_unknown();
        std::vector<double> signal, model, resid;
        for (double t : times)
        {
            pulse::PulseSequence seq;
            seq.delay(t);
            const auto traj = pulse::propagate_bloch(seq, relax, 0.0, pulse::Vec3::Zero());
            signal.push_back(amplitude * traj.points.back().m.z() / relax.equilibrium_mz + noise());
            model.push_back(pulse::saturation_recovery_model(t, relax.t1_s, amplitude));
            resid.push_back(signal.back() - model.back());
        }
        run.write("curve.csv", curve_csv("time_s", "signal", times, signal));
        run.write("recovery.dat", serialize_columns({"time_s", "signal", "model", "residual"}, {times, signal, model, resid}));
        report = Report("saturation-recovery");
        report.add("points", static_cast<double>(times.size()));
        report.add("t1", relax.t1_s, std::nullopt, "s");
        report.add("amplitude", amplitude);
    }
    else
        throw UsageError("pulse-sim mode must be hahn-echo, echo-decay, saturation-recovery or sequence");

    for (const auto &w : relax.warnings())
        report.warn(w);
    return report;
}
} // namespace spinres::cli::detail

#include "common.hpp"

#include <spinres/crossing_fit.hpp>
#include <spinres/error.hpp>
#include <spinres/fit_models.hpp>
#include <spinres/pulse_sim.hpp>
#include <spinres_cli/io.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace spinres::cli::detail
{
namespace
{
const double nan = std::numeric_limits<double>::quiet_NaN();

fit::CouplingHint coupling_hint(const std::string &name)
{
    if (name == "auto")
        return fit::CouplingHint::Auto;
    if (name == "under")
        return fit::CouplingHint::Under;
    if (name == "over")
        return fit::CouplingHint::Over;
    throw UsageError("coupling must be auto, under or over");
}

// Data, model and residual columns for a trace and a model evaluator.
template <class Model>
std::string trace_overlay(const ComplexTrace &trace, bool magnitude_only, Model model)
{
    const std::size_t n = trace.size();
    std::vector<double> dm(n), mm(n), rm(n);
    std::vector<double> dre(n), dim(n), mre(n), mim(n), rre(n), rim(n);
    for (std::size_t i = 0; i < n; ++i)
    {
        const auto d = trace.s11[i];
        const auto m = model(trace.frequency_hz[i]);
        dm[i] = std::abs(d);
        mm[i] = std::abs(m);
        rm[i] = dm[i] - mm[i];
        dre[i] = d.real();
        dim[i] = d.imag();
        mre[i] = m.real();
        mim[i] = m.imag();
        rre[i] = dre[i] - mre[i];
        rim[i] = dim[i] - mim[i];
    }
    if (magnitude_only)
        return serialize_columns({"freq_hz", "data_mag", "model_mag", "residual_mag"},
                                 {trace.frequency_hz, dm, mm, rm});
    return serialize_columns({"freq_hz", "data_re", "data_im", "model_re", "model_im", "residual_re", "residual_im",
                              "data_mag", "model_mag"},
                             {trace.frequency_hz, dre, dim, mre, mim, rre, rim, dm, mm});
}

struct Curve
{
    std::vector<double> x, y, sigma;
};

Curve read_curve(Run &run)
{
    const auto path = run.input("data");
    CurveFile c = load_curve(path);
    run.describe_input("data", {{"rows", c.x.size()},
                                {"skipped_rows", c.skipped_rows},
                                {"has_sigma", !c.sigma.empty()},
                                {"time_multiplier", c.columns.empty() ? 1.0 : unit_multiplier(c.columns.front())}});
    return {std::move(c.x), std::move(c.y), std::move(c.sigma)};
}

template <class Model>
std::string curve_overlay(const Curve &c, const char *xname, Model model)
{
    std::vector<double> m(c.x.size()), r(c.x.size());
    for (std::size_t i = 0; i < c.x.size(); ++i)
    {
        m[i] = model(c.x[i]);
        r[i] = c.y[i] - m[i];
    }
    return serialize_columns({xname, "data", "model", "residual"}, {c.x, c.y, m, r});
}
} // namespace

Report run_fit_resonator(Run &run)
{
    Config &cfg = run.config();
    const ComplexTrace trace = read_trace(run, "trace");
    fit::ResonatorFitOptions opts;
    opts.magnitude_only = cfg.boolean("magnitude_only", false);
    opts.coupling = coupling_hint(cfg.string("coupling", "auto"));
    opts.fit_delay = cfg.boolean("fit_delay", false);
    if (cfg.has("initial"))
        opts.initial = read_resonator_section(cfg, "initial");
    opts.noise_sigma = cfg.optional_number("noise_sigma");
    opts.solver = read_solver(cfg);
    cfg.reject_unknown();

    const fit::ResonatorFit rf = fit::fit_resonator(trace, opts);
    Report report(fit::to_string(rf.result.model));
    report.add_fit(rf.result);
    const auto &r = rf.result;
    const double w = rf.params.omega_r_hz, ki = rf.params.kappa_int_hz, ke = rf.params.kappa_ext_hz;
    const double kt = ki + ke;
    report.add("kappa_tot", rf.kappa_tot_hz, rf.kappa_tot_sigma_hz, "Hz");
    report.add("q_int", rf.q_int, rf.q_int_sigma);
    report.add("q_ext", w / ke, propagated_sigma(r, {{"omega_r", 1.0 / ke}, {"kappa_ext", -w / (ke * ke)}}));
    report.add("q_loaded", w / kt,
               propagated_sigma(r, {{"omega_r", 1.0 / kt}, {"kappa_int", -w / (kt * kt)}, {"kappa_ext", -w / (kt * kt)}}));
    report.add("noise_sigma", rf.noise_sigma);
    report.note("fit_mode", rf.magnitude_only ? "magnitude" : "complex");
    report.note("coupling", ke > ki ? "over" : "under");

    const auto params = rf.params;
    run.write("fit.dat", trace_overlay(trace, rf.magnitude_only,
                                       [&](double f) { return cqed::reflection_bare(f, params); }));
    return report;
}

Report run_fit_coupled(Run &run)
{
    Config &cfg = run.config();
    const ComplexTrace trace = read_trace(run, "trace");
    const cqed::ResonatorParams res = read_resonator(run);
    fit::CoupledFitOptions opts;
    opts.magnitude_only = cfg.boolean("magnitude_only", false);
    if (cfg.has("initial"))
    {
        cqed::EnsembleParams e;
        e.g_ens_hz = cfg.number("initial.g_ens_hz");
        e.omega_s_hz = cfg.number("initial.omega_s_hz");
        e.gamma_hz = cfg.number("initial.gamma_hz");
        opts.initial = e;
    }
    opts.fix_g = cfg.boolean("fix.g_ens", false);
    opts.fix_omega_s = cfg.boolean("fix.omega_s", false);
    opts.fix_gamma = cfg.boolean("fix.gamma", false);
    opts.solver = read_solver(cfg);
    cfg.reject_unknown();

    const fit::CoupledFit cf = fit::fit_coupled_spectrum(trace, res, opts);
    Report report(fit::to_string(cf.result.model));
    report.add_fit(cf.result);
    const double g = cf.ensemble.g_ens_hz, gam = cf.ensemble.gamma_hz, c = cf.cooperativity.value;
    report.add("cooperativity", c, propagated_sigma(cf.result, {{"g_ens", 2.0 * c / g}, {"gamma", -c / gam}}));
    report.add("kappa_tot", res.kappa_tot_hz(), std::nullopt, "Hz");
    report.note("coupling_regime", cqed::to_string(cf.cooperativity.regime));
    report.note("fit_mode", cf.magnitude_only || !trace.has_phase ? "magnitude" : "complex");

    const auto ens = cf.ensemble;
    run.write("fit.dat", trace_overlay(trace, cf.magnitude_only || !trace.has_phase,
                                       [&](double f) { return cqed::reflection_coupled(f, res, ens); }));
    return report;
}

Report run_fit_crossing(Run &run)
{
    Config &cfg = run.config();
    const auto map_path = run.input("map");
    const std::string scale_name = cfg.string("scale", "dB");
    if (scale_name != "dB" && scale_name != "linear")
        throw UsageError("scale must be dB or linear");
    const FieldSweepMap map =
        load_field_map(map_path, scale_name == "dB" ? MagnitudeScale::Decibel : MagnitudeScale::Linear);
    run.describe_input("map", {{"fields", map.rows()}, {"frequencies", map.cols()}, {"degenerate", map.degenerate}});

    fit::CrossingModel model;
    model.resonator = read_resonator(run);
    const auto system = read_spin_system(cfg, "spin_system");
    const auto direction = read_direction(cfg, "field_direction", spin::Vec3::UnitZ());
    model.manifolds = fit::spin_manifolds(system, direction);
    model.gamma_hz = cfg.number("gamma_hz", model.gamma_hz);
    model.branch_model = fit::branch_model_from_string(cfg.string("branch_model", fit::to_string(model.branch_model)));

    fit::CrossingFitOptions opts;
    opts.initial_g_hz = cfg.numbers("initial_g_hz", {});
    opts.fit_field_offset = cfg.boolean("fit_field_offset", false);
    opts.initial_field_offset_t = cfg.number("initial_field_offset_t", 0.0);
    opts.min_prominence = cfg.number("min_prominence", 0.0);
    opts.reassign_rounds = static_cast<unsigned>(cfg.unsigned_integer("reassign_rounds", opts.reassign_rounds));
    opts.solver = read_solver(cfg);
    cfg.reject_unknown();

    const fit::CrossingFit cf = fit::fit_avoided_crossing(map, model, opts);
    Report report(fit::to_string(cf.result.model));
    report.add_fit(cf.result);
    for (const auto &d : cf.diagnostics)
        report.warn(d);
    for (std::size_t k = 0; k < model.manifolds.size(); ++k)
        report.add("min_splitting_" + model.manifolds[k].name, cf.min_splitting_hz(k), 2.0 * cf.g_sigma_hz[k], "Hz");
    report.add("usable_rows", static_cast<double>(cf.usable_rows));
    report.add("dip_count", static_cast<double>(cf.dips.size()));
    report.note("branch_model", fit::to_string(model.branch_model));
    if (map.degenerate)
        report.warn("field map has a single row");

    // Dips with the model frequency each was compared with.
    const std::size_t nm = model.manifolds.size();
    auto spins_at = [&](double field) {
        std::vector<double> v(nm);
        for (std::size_t k = 0; k < nm; ++k)
            v[k] = model.manifolds[k].frequency_hz(field + cf.field_offset_t);
        return v;
    };
    std::vector<double> field, data, prediction, residual, prominence, branch;
    for (const auto &d : cf.dips)
    {
        const auto spins = spins_at(d.field_t);
        double m = nan;
        if (model.branch_model == fit::BranchModel::Dressed)
        {
            if (d.branch >= 0)
                m = fit::dressed_branches(model.resonator.omega_r_hz, spins, cf.g_ens_hz)[static_cast<std::size_t>(d.branch)];
        }
        else
            m = fit::predicted_dip(d.frequency_hz, model.resonator, spins, cf.g_ens_hz, model.gamma_hz);
        field.push_back(d.field_t);
        data.push_back(d.frequency_hz);
        prediction.push_back(m);
        residual.push_back(d.frequency_hz - m);
        prominence.push_back(d.prominence);
        branch.push_back(d.branch);
    }
    run.write("dips.dat", serialize_columns({"field_t", "dip_hz", "model_hz", "residual_hz", "prominence", "branch"},
                                            {field, data, prediction, residual, prominence, branch}));

    // Dressed branches and bare spin lines over the map's field axis.
    std::vector<std::string> names{"field_t"};
    std::vector<std::vector<double>> cols(1, map.field_t);
    for (std::size_t b = 0; b <= nm; ++b)
    {
        names.push_back("branch_" + std::to_string(b) + "_hz");
        cols.emplace_back();
    }
    for (std::size_t k = 0; k < nm; ++k)
    {
        names.push_back("spin_" + model.manifolds[k].name + "_hz");
        cols.emplace_back();
    }
    for (double b : map.field_t)
    {
        const auto spins = spins_at(b);
        const auto br = fit::dressed_branches(model.resonator.omega_r_hz, spins, cf.g_ens_hz);
        for (std::size_t i = 0; i <= nm; ++i)
            cols[1 + i].push_back(br[i]);
        for (std::size_t k = 0; k < nm; ++k)
            cols[2 + nm + k].push_back(spins[k]);
    }
    run.write("branches.dat", serialize_columns(names, cols));
    return report;
}

Report run_invert_density(Run &run)
{
    Config &cfg = run.config();
    const ComplexTrace trace = read_trace(run, "trace");
    const cqed::ResonatorParams res = read_resonator(run);
    const auto g = cfg.optional_number("g_ens_hz");
    const bool fit_lorentzian = cfg.boolean("fit_lorentzian", true);
    auto noise = cfg.optional_number("noise_sigma");
    const auto solver = read_solver(cfg);
    cfg.reject_unknown();
    if (!trace.has_phase)
        throw UsageError("invert-density needs a complex (re/im or magnitude/phase) trace");

    // Per-quadrature S11 noise; estimated from second differences unless given.
    const bool estimated = !noise;
    if (estimated)
    {
        std::vector<double> re, im;
        for (const auto &s : trace.s11)
        {
            re.push_back(s.real());
            im.push_back(s.imag());
        }
        noise = 0.5 * (fit::difference_noise_sigma(re) + fit::difference_noise_sigma(im));
        cfg.record("noise_sigma", *noise);
    }
    const cqed::DensityEstimate est = cqed::invert_spin_distribution(trace, res, g, *noise);
    std::optional<fit::FitResult> lf;
    if (fit_lorentzian)
    {
        std::vector<double> f, rho, sigma;
        fit::CurveFitOptions o;
        for (std::size_t i = 0; i < est.frequency_hz.size(); ++i)
            if (!est.masked[i])
            {
                f.push_back(est.frequency_hz[i]);
                rho.push_back(est.density[i]);
                if (!est.sigma.empty())
                    o.sigma.push_back(est.sigma[i]);
            }
        o.solver = solver;
        lf = fit::fit_lorentzian_density(f, rho, o);
    }

    Report report(lf ? fit::to_string(lf->model) : "spin-density-inversion");
    if (lf)
        report.add_fit(*lf);
    report.add("normalization", est.normalization, std::nullopt, "Hz^2");
    report.add("g_ens_estimate", est.g_ens_estimate_hz, std::nullopt, "Hz");
    report.add("masked_count", static_cast<double>(est.masked_count));
    report.add("clipped_mass", est.clipped_mass);
    report.add("noise_sigma", *noise);
    report.note("noise_sigma_source", estimated ? "second-difference estimate" : "config");
    report.note("weighting", est.sigma.empty() ? "uniform" : "propagated S11 noise");
    double integral = 0.0;
    for (std::size_t i = 1; i < est.frequency_hz.size(); ++i)
        integral += 0.5 * (est.density[i] + est.density[i - 1]) * (est.frequency_hz[i] - est.frequency_hz[i - 1]);
    report.add("density_integral", integral);

    std::vector<double> model(est.frequency_hz.size(), nan), resid(est.frequency_hz.size(), nan), masked;
    for (std::size_t i = 0; i < est.frequency_hz.size(); ++i)
    {
        masked.push_back(est.masked[i] ? 1.0 : 0.0);
        if (lf)
        {
            const double c = lf->value("center"), w = lf->value("fwhm"), a = lf->value("area");
            const double d = est.frequency_hz[i] - c;
            model[i] = a * (w / (2.0 * std::numbers::pi)) / (d * d + 0.25 * w * w);
            resid[i] = est.density[i] - model[i];
        }
    }
    std::vector<double> sigma = est.sigma;
    sigma.resize(est.frequency_hz.size(), nan);
    run.write("density.dat", serialize_columns({"freq_hz", "density", "sigma", "model", "residual", "raw", "masked"},
                                               {est.frequency_hz, est.density, sigma, model, resid, est.raw, masked}));
    return report;
}

Report run_fit_t1(Run &run)
{
    Config &cfg = run.config();
    const Curve c = read_curve(run);
    fit::CurveFitOptions o;
    o.sigma = c.sigma;
    if (cfg.has("initial"))
        o.initial = std::vector<double>{cfg.number("initial.amplitude"), cfg.number("initial.t1_s")};
    o.solver = read_solver(cfg);
    cfg.reject_unknown();

    const fit::FitResult r = fit::fit_t1(c.x, c.y, o);
    Report report(fit::to_string(r.model));
    report.add_fit(r);
    const double a = r.value("amplitude"), t1 = r.value("t1");
    run.write("fit.dat", curve_overlay(c, "time_s", [&](double t) { return pulse::saturation_recovery_model(t, t1, a); }));
    return report;
}

Report run_fit_t2(Run &run)
{
    Config &cfg = run.config();
    const Curve c = read_curve(run);
    fit::CurveFitOptions o;
    o.sigma = c.sigma;
    if (cfg.has("initial"))
        o.initial = std::vector<double>{cfg.number("initial.amplitude"), cfg.number("initial.t2_s"),
                                        cfg.number("initial.p")};
    o.solver = read_solver(cfg);
    cfg.reject_unknown();

    const fit::FitResult r = fit::fit_t2(c.x, c.y, o);
    Report report(fit::to_string(r.model));
    report.add_fit(r);
    const double a = r.value("amplitude"), t2 = r.value("t2"), p = r.value("p");
    run.write("fit.dat", curve_overlay(c, "two_tau_s", [&](double t) { return pulse::echo_decay_model(t, t2, p, a); }));
    return report;
}
} // namespace spinres::cli::detail

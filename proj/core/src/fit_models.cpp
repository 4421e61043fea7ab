#include <spinres/crossing_fit.hpp>
#include <spinres/error.hpp>
#include <spinres/fit_models.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace spinres::fit
{
namespace
{
using cqed::cplx;

constexpr double kPi = 3.14159265358979323846;

std::size_t edge_count(std::size_t n) { return std::max<std::size_t>(2, n / 20); }

double std_about_line(std::span<const double> y)
{
    const std::size_t n = y.size();
    if (n < 3)
        return 0.0;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i)
    {
        const double x = static_cast<double>(i);
        sx += x;
        sy += y[i];
        sxx += x * x;
        sxy += x * y[i];
    }
    const double dn = static_cast<double>(n);
    const double slope = (dn * sxy - sx * sy) / (dn * sxx - sx * sx);
    const double icept = (sy - slope * sx) / dn;
    double ss = 0;
    for (std::size_t i = 0; i < n; ++i)
    {
        const double r = y[i] - (icept + slope * static_cast<double>(i));
        ss += r * r;
    }
    return std::sqrt(ss / (dn - 2.0));
}

// Width of the dip in p = |S|^2 at the level halfway between the dip floor and the baseline.
double half_depth_width(std::span<const double> f, std::span<const double> p, std::size_t i_min, double baseline)
{
    const double level = 0.5 * (baseline + p[i_min]);
    auto cross = [&](std::size_t a, std::size_t b) {
        const double t = (level - p[a]) / (p[b] - p[a]);
        return f[a] + t * (f[b] - f[a]);
    };
    std::optional<double> left, right;
    for (std::size_t i = i_min; i > 0; --i)
        if (p[i - 1] >= level)
        {
            left = cross(i, i - 1);
            break;
        }
    for (std::size_t i = i_min; i + 1 < p.size(); ++i)
        if (p[i + 1] >= level)
        {
            right = cross(i, i + 1);
            break;
        }
    if (left && right)
        return *right - *left;
    if (left)
        return 2.0 * (f[i_min] - *left);
    if (right)
        return 2.0 * (*right - f[i_min]);
    return 0.25 * (f.back() - f.front());
}

cqed::ResonatorParams resonator_from(std::span<const double> x)
{
    cqed::ResonatorParams r;
    r.omega_r_hz = x[0];
    r.kappa_int_hz = x[1];
    r.kappa_ext_hz = x[2];
    r.amplitude_scale = x[3];
    r.phase_offset_rad = x[4];
    r.electrical_delay_s = x[5];
    return r;
}

void check_curve(std::span<const double> t, std::span<const double> y, const CurveFitOptions &options,
                 std::size_t min_points)
{
    if (t.size() != y.size())
        throw DomainError("time and signal arrays differ in length");
    if (t.size() < min_points)
        throw InsufficientDataError("need at least " + std::to_string(min_points) + " points");
    if (!options.sigma.empty() && options.sigma.size() != t.size())
        throw DomainError("sigma must have one entry per point");
}

// Least-squares slope/intercept of y = a + b x.
std::optional<std::pair<double, double>> line_fit(const std::vector<double> &x, const std::vector<double> &y)
{
    if (x.size() < 2)
        return std::nullopt;
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i)
    {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (sxx <= 0.0)
        return std::nullopt;
    const double b = sxy / sxx;
    return std::make_pair(my - b * mx, b);
}

std::vector<double> moving_average(const std::vector<double> &y, std::size_t window)
{
    const std::size_t half = window / 2;
    std::vector<double> out(y.size());
    for (std::size_t i = 0; i < y.size(); ++i)
    {
        const std::size_t a = i >= half ? i - half : 0, b = std::min(y.size(), i + half + 1);
        out[i] = std::accumulate(y.begin() + static_cast<std::ptrdiff_t>(a), y.begin() + static_cast<std::ptrdiff_t>(b),
                                 0.0) /
                 static_cast<double>(b - a);
    }
    return out;
}

double median_of(std::vector<double> v)
{
    std::sort(v.begin(), v.end());
    return v[v.size() / 2];
}
} // namespace

double edge_noise_sigma(std::span<const double> magnitude)
{
    const std::size_t k = edge_count(magnitude.size());
    if (magnitude.size() < 2 * k)
        return 0.0;
    const double a = std_about_line(magnitude.first(k));
    const double b = std_about_line(magnitude.last(k));
    return std::sqrt(0.5 * (a * a + b * b));
}

cqed::ResonatorParams guess_resonator(const ComplexTrace &trace, CouplingHint coupling, bool use_phase)
{
    const auto mag = trace.magnitude();
    const std::size_t n = mag.size();
    const std::size_t k = edge_count(n);

    double amp = 0.0;
    cplx edge_mean = 0.0;
    for (std::size_t i = 0; i < k; ++i)
    {
        amp += mag[i] + mag[n - 1 - i];
        edge_mean += trace.s11[i] + trace.s11[n - 1 - i];
    }
    amp /= static_cast<double>(2 * k);

    const std::size_t i_min = static_cast<std::size_t>(std::min_element(mag.begin(), mag.end()) - mag.begin());
    std::vector<double> p(n);
    for (std::size_t i = 0; i < n; ++i)
        p[i] = mag[i] * mag[i] / (amp * amp);
    const double kappa = std::max(half_depth_width(trace.frequency_hz, p, i_min, 1.0),
                                  2.0 * (trace.frequency_hz[1] - trace.frequency_hz[0]));

    cqed::ResonatorParams r;
    r.omega_r_hz = trace.frequency_hz[i_min];
    r.amplitude_scale = amp;
    r.phase_offset_rad = use_phase ? std::arg(edge_mean) : 0.0;

    double ext_fraction = 0.5;
    if (use_phase && coupling == CouplingHint::Auto)
    {
        const cplx s = trace.s11[i_min] / std::polar(amp, r.phase_offset_rad);
        ext_fraction = 0.5 * (1.0 - std::clamp(s.real(), -1.0, 1.0));
    }
    else
    {
        const double m = std::sqrt(std::clamp(p[i_min], 0.0, 1.0));
        ext_fraction = coupling == CouplingHint::Over ? 0.5 * (1.0 + m) : 0.5 * (1.0 - m);
    }
    ext_fraction = std::clamp(ext_fraction, 0.02, 0.98);
    r.kappa_ext_hz = ext_fraction * kappa;
    r.kappa_int_hz = kappa - r.kappa_ext_hz;
    return r;
}

ResonatorFit fit_resonator(const ComplexTrace &trace, const ResonatorFitOptions &options)
{
    trace.validate();
    const bool mag_only = options.magnitude_only || !trace.has_phase;
    const auto mag = trace.magnitude();
    const double sigma = options.noise_sigma.value_or(edge_noise_sigma(mag));
    // Depth is judged on a moving average so that single noise excursions do
    // not count as a dip.
    const auto smooth = moving_average(mag, std::max<std::size_t>(5, mag.size() / 50) | 1);
    const auto [lo, hi] = std::minmax_element(smooth.begin(), smooth.end());
    if (*hi - *lo <= 3.0 * sigma || *hi - *lo <= 1e-9 * *hi)
        throw NotFoundError("no resonance dip found: depth " + std::to_string(*hi - *lo) +
                            " does not exceed 3x the noise level " + std::to_string(sigma));

    const cqed::ResonatorParams g0 = options.initial.value_or(guess_resonator(trace, options.coupling, !mag_only));
    const double kappa0 = g0.kappa_tot_hz();
    const double span = trace.frequency_hz.back() - trace.frequency_hz.front();

    FitProblem problem;
    problem.model = ModelKind::BareReflection;
    problem.options = options.solver;
    const double floor = 1e-6 * kappa0;
    problem.parameters = {
        {"omega_r", g0.omega_r_hz, trace.frequency_hz.front(), trace.frequency_hz.back(), false, "Hz", 1e-4 * kappa0},
        {"kappa_int", std::max(g0.kappa_int_hz, floor), floor, 1e3 * span, false, "Hz", 1e-5 * kappa0},
        {"kappa_ext", std::max(g0.kappa_ext_hz, floor), floor, 1e3 * span, false, "Hz", 1e-5 * kappa0},
        {"amplitude", g0.amplitude_scale, 0.0, std::numeric_limits<double>::infinity(), false, "", 0.0},
        {"phase_offset", mag_only ? 0.0 : g0.phase_offset_rad, -std::numeric_limits<double>::infinity(),
         std::numeric_limits<double>::infinity(), mag_only, "rad", 1e-6},
        {"electrical_delay", mag_only ? 0.0 : g0.electrical_delay_s, -std::numeric_limits<double>::infinity(),
         std::numeric_limits<double>::infinity(), mag_only || !options.fit_delay, "s", 1e-6 / span},
    };
    const auto &f = trace.frequency_hz;
    const auto &s = trace.s11;
    if (mag_only)
    {
        problem.residual_count = f.size();
        problem.residuals = [&](std::span<const double> x, std::span<double> r) {
            const auto res = resonator_from(x);
            for (std::size_t i = 0; i < f.size(); ++i)
                r[i] = std::abs(cqed::reflection_bare(f[i], res)) - mag[i];
        };
    }
    else
    {
        problem.residual_count = 2 * f.size();
        problem.residuals = [&](std::span<const double> x, std::span<double> r) {
            const auto res = resonator_from(x);
            for (std::size_t i = 0; i < f.size(); ++i)
            {
                const cplx d = cqed::reflection_bare(f[i], res) - s[i];
                r[2 * i] = d.real();
                r[2 * i + 1] = d.imag();
            }
        };
    }

    ResonatorFit out;
    out.result = least_squares(problem);
    out.magnitude_only = mag_only;
    out.noise_sigma = sigma;
    out.params = resonator_from(out.result.values);
    const auto &res = out.result;
    out.kappa_tot_hz = out.params.kappa_tot_hz();
    out.kappa_tot_sigma_hz = std::sqrt(std::max(
        0.0, res.cov("kappa_int", "kappa_int") + res.cov("kappa_ext", "kappa_ext") + 2.0 * res.cov("kappa_int", "kappa_ext")));
    out.q_int = out.params.q_int();
    const double w = out.params.omega_r_hz, ki = out.params.kappa_int_hz;
    const double rel2 = res.cov("omega_r", "omega_r") / (w * w) + res.cov("kappa_int", "kappa_int") / (ki * ki) -
                        2.0 * res.cov("omega_r", "kappa_int") / (w * ki);
    out.q_int_sigma = out.q_int * std::sqrt(std::max(0.0, rel2));
    return out;
}

CoupledFit fit_coupled_spectrum(const ComplexTrace &trace, const cqed::ResonatorParams &resonator,
                                const CoupledFitOptions &options)
{
    trace.validate();
    resonator.validate();
    const bool mag_only = options.magnitude_only || !trace.has_phase;
    const auto mag = trace.magnitude();
    const auto &f = trace.frequency_hz;
    const double kappa = resonator.kappa_tot_hz();
    const double span = f.back() - f.front();

    cqed::EnsembleParams init;
    if (options.initial)
        init = *options.initial;
    else
    {
        const double noise = edge_noise_sigma(mag);
        auto dips = find_dips(f, mag, std::max(5.0 * noise, 1e-3 * resonator.amplitude_scale));
        std::sort(dips.begin(), dips.end(), [](const Dip &a, const Dip &b) { return a.prominence > b.prominence; });
        if (dips.size() >= 2)
        {
            const double f1 = std::min(dips[0].frequency_hz, dips[1].frequency_hz);
            const double f2 = std::max(dips[0].frequency_hz, dips[1].frequency_hz);
            init.g_ens_hz = 0.5 * (f2 - f1);
            init.omega_s_hz = f1 + f2 - resonator.omega_r_hz;
            const double w = std::min(dips[0].width_hz, dips[1].width_hz);
            init.gamma_hz = std::clamp(2.0 * w - kappa, 0.1 * kappa, 4.0 * init.g_ens_hz);
        }
        else
        {
            init.g_ens_hz = 0.5 * kappa;
            init.omega_s_hz = resonator.omega_r_hz;
            init.gamma_hz = kappa;
        }
    }
    const double scale = std::max({init.g_ens_hz, init.gamma_hz, kappa});

    FitProblem problem;
    problem.model = ModelKind::CoupledReflection;
    problem.options = options.solver;
    problem.parameters = {
        {"g_ens", init.g_ens_hz, 0.0, 1e3 * span, options.fix_g, "Hz", 1e-6 * scale},
        {"omega_s", init.omega_s_hz, f.front() - span, f.back() + span, options.fix_omega_s, "Hz", 1e-6 * scale},
        {"gamma", std::max(init.gamma_hz, 1e-6 * kappa), 1e-6 * kappa, 1e3 * span, options.fix_gamma, "Hz",
         1e-6 * scale},
    };
    auto ensemble_from = [&](std::span<const double> x) {
        cqed::EnsembleParams e;
        e.g_ens_hz = x[0];
        e.omega_s_hz = x[1];
        e.gamma_hz = x[2];
        return e;
    };
    if (mag_only)
    {
        problem.residual_count = f.size();
        problem.residuals = [&](std::span<const double> x, std::span<double> r) {
            const auto e = ensemble_from(x);
            for (std::size_t i = 0; i < f.size(); ++i)
                r[i] = std::abs(cqed::reflection_coupled(f[i], resonator, e)) - mag[i];
        };
    }
    else
    {
        problem.residual_count = 2 * f.size();
        problem.residuals = [&](std::span<const double> x, std::span<double> r) {
            const auto e = ensemble_from(x);
            for (std::size_t i = 0; i < f.size(); ++i)
            {
                const cplx d = cqed::reflection_coupled(f[i], resonator, e) - trace.s11[i];
                r[2 * i] = d.real();
                r[2 * i + 1] = d.imag();
            }
        };
    }

    CoupledFit out;
    out.result = least_squares(problem);
    out.ensemble = ensemble_from(out.result.values);
    out.magnitude_only = mag_only;
    out.cooperativity = cqed::cooperativity(out.ensemble.g_ens_hz, kappa, out.ensemble.gamma_hz);
    return out;
}

FitResult fit_t1(std::span<const double> t, std::span<const double> y, const CurveFitOptions &options)
{
    check_curve(t, y, options, 3);
    double amp = *std::max_element(y.begin(), y.end());
    double t1 = median_of({t.begin(), t.end()});
    if (options.initial && options.initial->size() == 2)
    {
        amp = (*options.initial)[0];
        t1 = (*options.initial)[1];
    }
    else
    {
        // ln(1 - y/A) = -t/T1 on the points that are clearly unsaturated
        std::vector<double> xs, ys;
        for (std::size_t i = 0; i < t.size(); ++i)
        {
            const double u = y[i] / amp;
            if (u > 0.05 && u < 0.9 && t[i] > 0.0)
            {
                xs.push_back(t[i]);
                ys.push_back(std::log(1.0 - u));
            }
        }
        if (const auto line = line_fit(xs, ys); line && line->second < 0.0)
            t1 = -1.0 / line->second;
    }
    const double tmax = *std::max_element(t.begin(), t.end());

    FitProblem problem;
    problem.model = ModelKind::T1Recovery;
    problem.options = options.solver;
    problem.sigma = options.sigma;
    problem.parameters = {
        {"amplitude", amp, -std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(), false,
         "", 0.0},
        {"t1", t1, 1e-9 * tmax, 1e6 * tmax, false, "s", 0.0},
    };
    problem.residual_count = t.size();
    problem.residuals = [&](std::span<const double> x, std::span<double> r) {
        for (std::size_t i = 0; i < t.size(); ++i)
            r[i] = x[0] * -std::expm1(-t[i] / x[1]) - y[i];
    };
    return least_squares(problem);
}

FitResult fit_t2(std::span<const double> t, std::span<const double> y, const CurveFitOptions &options)
{
    check_curve(t, y, options, 4);
    double amp = *std::max_element(y.begin(), y.end());
    double t2 = median_of({t.begin(), t.end()});
    double p = 1.5;
    if (options.initial && options.initial->size() == 3)
    {
        amp = (*options.initial)[0];
        t2 = (*options.initial)[1];
        p = (*options.initial)[2];
    }
    else
    {
        // ln(-ln(y/A)) = p ln t - p ln T2
        std::vector<double> xs, ys;
        for (std::size_t i = 0; i < t.size(); ++i)
        {
            const double u = y[i] / amp;
            if (u > 0.05 && u < 0.95 && t[i] > 0.0)
            {
                xs.push_back(std::log(t[i]));
                ys.push_back(std::log(-std::log(u)));
            }
        }
        if (const auto line = line_fit(xs, ys); line && line->second > 0.0)
        {
            p = std::clamp(line->second, 0.5, 3.0);
            t2 = std::exp(-line->first / line->second);
        }
    }
    const double tmax = *std::max_element(t.begin(), t.end());

    FitProblem problem;
    problem.model = ModelKind::T2Stretched;
    problem.options = options.solver;
    problem.sigma = options.sigma;
    problem.parameters = {
        {"amplitude", amp, -std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(), false,
         "", 0.0},
        {"t2", t2, 1e-9 * tmax, 1e6 * tmax, false, "s", 0.0},
        {"p", p, 0.5, 3.0, false, "", 0.0},
    };
    problem.residual_count = t.size();
    problem.residuals = [&](std::span<const double> x, std::span<double> r) {
        for (std::size_t i = 0; i < t.size(); ++i)
            r[i] = x[0] * std::exp(-std::pow(t[i] / x[1], x[2])) - y[i];
    };
    return least_squares(problem);
}

FitResult fit_lorentzian_density(std::span<const double> f, std::span<const double> rho,
                                 const CurveFitOptions &options)
{
    check_curve(f, rho, options, 4);
    // With per-point sigma the peak guess is the largest lower bound rho - 2 sigma,
    // so isolated noise spikes in poorly determined regions cannot seed the fit.
    std::size_t i_max = 0;
    for (std::size_t i = 1; i < rho.size(); ++i)
    {
        const double lo_i = options.sigma.empty() ? rho[i] : rho[i] - 2.0 * options.sigma[i];
        const double lo_m = options.sigma.empty() ? rho[i_max] : rho[i_max] - 2.0 * options.sigma[i_max];
        if (lo_i > lo_m)
            i_max = i;
    }
    double center = f[i_max];
    double area = 0.0;
    for (std::size_t i = 1; i < f.size(); ++i)
        area += 0.5 * (rho[i] + rho[i - 1]) * (f[i] - f[i - 1]);
    std::vector<double> neg(rho.size());
    for (std::size_t i = 0; i < rho.size(); ++i)
        neg[i] = -rho[i];
    double fwhm = half_depth_width(f, neg, i_max, 0.0);
    if (!options.sigma.empty())
        area = kPi * rho[i_max] * 0.5 * fwhm;
    if (options.initial && options.initial->size() == 3)
    {
        center = (*options.initial)[0];
        fwhm = (*options.initial)[1];
        area = (*options.initial)[2];
    }
    const double span = f.back() - f.front();

    FitProblem problem;
    problem.model = ModelKind::LorentzianDensity;
    problem.options = options.solver;
    problem.sigma = options.sigma;
    problem.parameters = {
        {"center", center, f.front(), f.back(), false, "Hz", 1e-6 * fwhm},
        {"fwhm", fwhm, 1e-9 * span, 1e3 * span, false, "Hz", 0.0},
        {"area", area, -std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(), false, "",
         0.0},
    };
    problem.residual_count = f.size();
    problem.residuals = [&](std::span<const double> x, std::span<double> r) {
        const double hw = 0.5 * x[1];
        for (std::size_t i = 0; i < f.size(); ++i)
        {
            const double d = f[i] - x[0];
            r[i] = x[2] * hw / (kPi * (d * d + hw * hw)) - rho[i];
        }
    };
    return least_squares(problem);
}
} // namespace spinres::fit

#include <spinres/cavity_qed.hpp>
#include <spinres/constants.hpp>
#include <spinres/error.hpp>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace spinres::cqed
{
namespace
{
constexpr cplx I{0.0, 1.0};
constexpr double kFwhmToSigma = 0.42466090014400953; // 1 / (2 sqrt(2 ln 2))

double lorentzian(double x, double center, double fwhm)
{
    const double hw = 0.5 * fwhm;
    return hw / (std::numbers::pi * ((x - center) * (x - center) + hw * hw));
}

double gaussian(double x, double center, double fwhm)
{
    const double sigma = fwhm * kFwhmToSigma;
    const double u = (x - center) / sigma;
    return std::exp(-0.5 * u * u) / (sigma * std::sqrt(2.0 * std::numbers::pi));
}

// Centre and width scale of the density, used to place quadrature breakpoints.
std::pair<double, double> support(const EnsembleParams &ens)
{
    if (ens.lineshape != Lineshape::Tabulated)
        return {ens.omega_s_hz, ens.gamma_hz};
    const auto &f = ens.table.frequency_hz;
    double mean = 0.0, step = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < f.size(); ++i)
    {
        mean += 0.5 * (f[i] + f[i - 1]) * 0.5 * (ens.table.density[i] + ens.table.density[i - 1]) * (f[i] - f[i - 1]);
        step = std::min(step, f[i] - f[i - 1]);
    }
    return {mean, std::max(step, 1e-12 * std::abs(mean))};
}

// Exact integral of the piecewise-linear density against the kernel.
cplx tabulated_integral(double omega, const TabulatedDensity &table, double eps)
{
    const auto &f = table.frequency_hz;
    const auto &r = table.density;
    auto log_term = [eps](double u) -> cplx {
        if (u == 0.0 && eps == 0.0)
            return 0.0; // cancels between adjacent segments
        return std::log(cplx(u, eps));
    };
    cplx total = 0.0;
    for (std::size_t k = 1; k < f.size(); ++k)
    {
        const double u0 = f[k - 1] - omega, u1 = f[k] - omega;
        const double slope = (r[k] - r[k - 1]) / (f[k] - f[k - 1]);
        const double at_omega = r[k - 1] - slope * u0; // rho line evaluated at omega
        const cplx coef = at_omega - I * eps * slope;
        total += I * (slope * (u1 - u0) + coef * (log_term(u1) - log_term(u0)));
    }
    return total;
}
} // namespace

ResonatorParams ResonatorParams::from_q_int(double omega_r_hz, double q_int, double kappa_ext_hz)
{
    ResonatorParams r;
    r.omega_r_hz = omega_r_hz;
    r.kappa_int_hz = omega_r_hz / q_int;
    r.kappa_ext_hz = kappa_ext_hz;
    return r;
}

void ResonatorParams::validate() const
{
    if (!(omega_r_hz > 0.0))
        throw DomainError("omega_r must be positive");
    if (!(kappa_int_hz > 0.0))
        throw DomainError("kappa_int must be positive");
    if (!(kappa_ext_hz > 0.0))
        throw DomainError("kappa_ext must be positive");
    if (!(amplitude_scale > 0.0))
        throw DomainError("amplitude_scale must be positive");
}

std::string to_string(Lineshape shape)
{
    switch (shape)
    {
    case Lineshape::Lorentzian:
        return "lorentzian";
    case Lineshape::Gaussian:
        return "gaussian";
    case Lineshape::Tabulated:
        return "tabulated";
    }
    return "unknown";
}

Lineshape lineshape_from_string(const std::string &name)
{
    if (name == "lorentzian")
        return Lineshape::Lorentzian;
    if (name == "gaussian")
        return Lineshape::Gaussian;
    if (name == "tabulated")
        return Lineshape::Tabulated;
    throw DomainError("unknown lineshape '" + name + "'");
}

double TabulatedDensity::operator()(double omega_hz) const
{
    if (frequency_hz.empty() || omega_hz < frequency_hz.front() || omega_hz > frequency_hz.back())
        return 0.0;
    const auto it = std::upper_bound(frequency_hz.begin(), frequency_hz.end(), omega_hz);
    if (it == frequency_hz.end())
        return density.back();
    const std::size_t k = static_cast<std::size_t>(it - frequency_hz.begin());
    const double t = (omega_hz - frequency_hz[k - 1]) / (frequency_hz[k] - frequency_hz[k - 1]);
    return density[k - 1] + t * (density[k] - density[k - 1]);
}

double TabulatedDensity::integral() const
{
    double sum = 0.0;
    for (std::size_t k = 1; k < frequency_hz.size(); ++k)
        sum += 0.5 * (density[k] + density[k - 1]) * (frequency_hz[k] - frequency_hz[k - 1]);
    return sum;
}

TabulatedDensity TabulatedDensity::normalized(std::vector<double> frequency_hz, std::vector<double> density)
{
    TabulatedDensity t{std::move(frequency_hz), std::move(density)};
    const double area = t.integral();
    if (!(area > 0.0))
        throw DomainError("tabulated density has no positive area");
    for (double &v : t.density)
        v /= area;
    return t;
}

void TabulatedDensity::validate() const
{
    if (frequency_hz.size() != density.size() || frequency_hz.size() < 2)
        throw DomainError("tabulated density needs matching axes with at least two samples");
    for (std::size_t k = 0; k < density.size(); ++k)
    {
        if (!(density[k] >= 0.0))
            throw DomainError("tabulated density must be non-negative");
        if (k > 0 && !(frequency_hz[k] > frequency_hz[k - 1]))
            throw DomainError("tabulated density frequencies must be strictly increasing");
    }
    if (std::abs(integral() - 1.0) > 1e-6)
        throw DomainError("tabulated density must integrate to one");
}

double EnsembleParams::density(double omega_hz) const
{
    switch (lineshape)
    {
    case Lineshape::Lorentzian:
        return lorentzian(omega_hz, omega_s_hz, gamma_hz);
    case Lineshape::Gaussian:
        return gaussian(omega_hz, omega_s_hz, gamma_hz);
    case Lineshape::Tabulated:
        return table(omega_hz);
    }
    return 0.0;
}

void EnsembleParams::validate() const
{
    if (!(g_ens_hz >= 0.0))
        throw DomainError("g_ens must be non-negative");
    if (!(gamma_hom_hz >= 0.0))
        throw DomainError("gamma_hom must be non-negative");
    if (lineshape == Lineshape::Tabulated)
        table.validate();
    else if (!(gamma_hz > 0.0))
        throw DomainError("inhomogeneous width must be positive");
}

cplx background(double omega_hz, const ResonatorParams &res)
{
    const double phase = res.phase_offset_rad - constants::two_pi * (omega_hz - res.omega_r_hz) * res.electrical_delay_s;
    return std::polar(res.amplitude_scale, phase);
}

cplx reflection_bare(double omega_hz, const ResonatorParams &res)
{
    const cplx denom = I * (omega_hz - res.omega_r_hz) + 0.5 * res.kappa_tot_hz();
    return background(omega_hz, res) * (1.0 - res.kappa_ext_hz / denom);
}

cplx ensemble_susceptibility(double omega_hz, const EnsembleParams &ens)
{
    if (ens.g_ens_hz == 0.0)
        return 0.0;
    const double g2 = ens.g_ens_hz * ens.g_ens_hz;
    switch (ens.lineshape)
    {
    case Lineshape::Lorentzian:
        return g2 / (I * (omega_hz - ens.omega_s_hz) + 0.5 * (ens.gamma_hz + ens.gamma_hom_hz));
    case Lineshape::Tabulated:
        return g2 * tabulated_integral(omega_hz, ens.table, 0.5 * ens.gamma_hom_hz);
    case Lineshape::Gaussian:
        break;
    }
    return ensemble_susceptibility_numeric(omega_hz, ens);
}

cplx ensemble_susceptibility_numeric(double omega_hz, const EnsembleParams &ens, const QuadratureOptions &options)
{
    if (ens.g_ens_hz == 0.0)
        return 0.0;
    const double eps = 0.5 * ens.gamma_hom_hz;
    const auto [center, width] = support(ens);
    auto rho = [&](double w) { return ens.density(w); };

    // Fold onto s = |omega - w'| >= 0 so the principal value is regular at s = 0.
    auto imag_integrand = [&](double s) {
        const double odd = rho(omega_hz - s) - rho(omega_hz + s);
        return -odd * s / (s * s + eps * eps);
    };
    auto real_integrand = [&](double s) {
        return (rho(omega_hz - s) + rho(omega_hz + s)) * eps / (s * s + eps * eps);
    };

    std::vector<double> breaks{0.0};
    const double offset = std::abs(omega_hz - center);
    for (double b : {offset - 5.0 * width, offset - width, offset, offset + width, offset + 5.0 * width,
                     offset + 50.0 * width, eps, 10.0 * eps})
        if (b > 0.0)
            breaks.push_back(b);
    if (ens.lineshape == Lineshape::Tabulated)
    {
        for (double f : ens.table.frequency_hz)
            if (std::abs(f - omega_hz) > 0.0)
                breaks.push_back(std::abs(f - omega_hz));
    }
    std::sort(breaks.begin(), breaks.end());
    breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());

    using Quad = boost::math::quadrature::gauss_kronrod<double, 31>;
    const double tol = 1e-2 * options.relative_tolerance;
    double re = 0.0, im = 0.0, err = 0.0, scale = 0.0;
    auto accumulate = [&](auto &&fn, double a, double b, double &sum) {
        double e = 0.0, l1 = 0.0;
        sum += Quad::integrate(fn, a, b, options.max_depth, tol, &e, &l1);
        err += e;
        scale += l1;
    };
    for (std::size_t k = 1; k < breaks.size(); ++k)
    {
        accumulate(imag_integrand, breaks[k - 1], breaks[k], im);
        if (eps > 0.0)
            accumulate(real_integrand, breaks[k - 1], breaks[k], re);
    }
    // Tail [a, inf) through s = a / v, which keeps the natural scale of the
    // problem (Boost's own infinite-range map assumes unit scale).
    const double a = breaks.back();
    auto tail = [a](auto &fn) { return [a, &fn](double v) { return v > 0.0 ? fn(a / v) * a / (v * v) : 0.0; }; };
    accumulate(tail(imag_integrand), 0.0, 1.0, im);
    if (eps > 0.0)
        accumulate(tail(real_integrand), 0.0, 1.0, re);
    if (eps == 0.0)
    {
        re = std::numbers::pi * rho(omega_hz);
        scale += re;
    }
    // Absolute floor relative to the peak density scale, for far tails.
    const double floor = 1e-12 / width;
    if (!std::isfinite(re) || !std::isfinite(im) || err > options.relative_tolerance * scale + floor)
    {
        std::ostringstream os;
        os << "susceptibility quadrature did not converge at omega=" << omega_hz << " Hz: error estimate " << err
           << " vs scale " << scale;
        throw NumericError(os.str());
    }
    return ens.g_ens_hz * ens.g_ens_hz * cplx(re, im);
}

cplx reflection_coupled(double omega_hz, const ResonatorParams &res, const EnsembleParams &ens)
{
    return reflection_coupled(omega_hz, res, std::span<const EnsembleParams>(&ens, 1));
}

cplx reflection_coupled(double omega_hz, const ResonatorParams &res, std::span<const EnsembleParams> ensembles)
{
    cplx denom = I * (omega_hz - res.omega_r_hz) + 0.5 * res.kappa_tot_hz();
    for (const auto &ens : ensembles)
        denom += ensemble_susceptibility(omega_hz, ens);
    return background(omega_hz, res) * (1.0 - res.kappa_ext_hz / denom);
}

double reflection_power_slope(double omega_hz, const ResonatorParams &res, std::span<const EnsembleParams> ensembles)
{
    cplx denom = I * (omega_hz - res.omega_r_hz) + 0.5 * res.kappa_tot_hz();
    cplx d_denom = I;
    for (const auto &ens : ensembles)
    {
        if (ens.lineshape != Lineshape::Lorentzian)
            throw DomainError("reflection_power_slope requires Lorentzian ensembles");
        const cplx pole = I * (omega_hz - ens.omega_s_hz) + 0.5 * (ens.gamma_hz + ens.gamma_hom_hz);
        const double g2 = ens.g_ens_hz * ens.g_ens_hz;
        denom += g2 / pole;
        d_denom -= I * g2 / (pole * pole);
    }
    const cplx s = 1.0 - res.kappa_ext_hz / denom;
    const cplx ds = res.kappa_ext_hz * d_denom / (denom * denom);
    return res.amplitude_scale * res.amplitude_scale * 2.0 * std::real(std::conj(s) * ds);
}

DressedPair dressed_frequencies(double omega_r_hz, double omega_s_hz, double g_ens_hz)
{
    if (!(g_ens_hz >= 0.0))
        throw DomainError("g_ens must be non-negative");
    const double mean = 0.5 * (omega_r_hz + omega_s_hz);
    const double half_detuning = 0.5 * (omega_r_hz - omega_s_hz);
    const double radius = std::hypot(g_ens_hz, half_detuning);
    return {mean + radius, mean - radius};
}

std::string to_string(CouplingRegime regime)
{
    switch (regime)
    {
    case CouplingRegime::Weak:
        return "weak";
    case CouplingRegime::HighCooperativity:
        return "high cooperativity";
    case CouplingRegime::Strong:
        return "strong coupling";
    }
    return "unknown";
}

Cooperativity cooperativity(double g_ens_hz, double kappa_tot_hz, double gamma_hz)
{
    if (!(kappa_tot_hz > 0.0) || !(gamma_hz > 0.0))
        throw DomainError("cooperativity needs positive kappa_tot and Gamma");
    Cooperativity c;
    c.value = g_ens_hz * g_ens_hz / (kappa_tot_hz * gamma_hz);
    if (g_ens_hz > kappa_tot_hz && g_ens_hz > gamma_hz)
        c.regime = CouplingRegime::Strong;
    else if (c.value > 1.0)
        c.regime = CouplingRegime::HighCooperativity;
    return c;
}

DensityEstimate invert_spin_distribution(const ComplexTrace &trace, const ResonatorParams &res,
                                         std::optional<double> g_ens_hz, double s11_noise_sigma)
{
    trace.validate();
    res.validate();
    if (!trace.has_phase)
        throw DomainError("density inversion needs complex (phase-resolved) S11 data");
    if (g_ens_hz && !(*g_ens_hz > 0.0))
        throw DomainError("g_ens must be positive when supplied");
    if (!(s11_noise_sigma >= 0.0) || !std::isfinite(s11_noise_sigma))
        throw DomainError("S11 noise sigma must be non-negative and finite");

    const std::size_t n = trace.size();
    DensityEstimate out;
    out.frequency_hz = trace.frequency_hz;
    out.raw.assign(n, 0.0);
    out.density.assign(n, 0.0);
    out.masked.assign(n, false);
    std::vector<double> raw_sigma(n, std::numeric_limits<double>::infinity());

    for (std::size_t i = 0; i < n; ++i)
    {
        const double w = trace.frequency_hz[i];
        const cplx gap = 1.0 - trace.s11[i] / background(w, res);
        if (std::abs(gap) < 1e-6)
        {
            out.masked[i] = true;
            ++out.masked_count;
            continue;
        }
        const cplx suscept = res.kappa_ext_hz / gap - I * (w - res.omega_r_hz) - 0.5 * res.kappa_tot_hz();
        out.raw[i] = suscept.real() / std::numbers::pi;
        // d(suscept)/dS = -kappa_ext / (gap^2 bg); each quadrature carries sigma.
        raw_sigma[i] = res.kappa_ext_hz * s11_noise_sigma / (std::norm(gap) * std::abs(background(w, res))) /
                       std::numbers::pi;
    }

    // Trapezoid over unmasked neighbours.
    auto integrate = [&](auto &&value) {
        double sum = 0.0;
        for (std::size_t i = 1; i < n; ++i)
            if (!out.masked[i] && !out.masked[i - 1])
                sum += 0.5 * (value(i) + value(i - 1)) * (out.frequency_hz[i] - out.frequency_hz[i - 1]);
        return sum;
    };
    out.normalization = integrate([&](std::size_t i) { return out.raw[i]; });
    out.g_ens_estimate_hz = std::sqrt(std::max(0.0, out.normalization));

    const double divisor = g_ens_hz ? (*g_ens_hz) * (*g_ens_hz) : out.normalization;
    if (!(divisor > 0.0))
        return out; // nothing to deduct: density stays zero
    std::vector<double> negative(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
    {
        const double v = out.raw[i] / divisor;
        out.density[i] = std::max(0.0, v);
        negative[i] = std::max(0.0, -v);
    }
    out.clipped_mass = integrate([&](std::size_t i) { return negative[i]; });
    if (s11_noise_sigma > 0.0)
        for (double v : raw_sigma)
            out.sigma.push_back(v / divisor);
    return out;
}
} // namespace spinres::cqed

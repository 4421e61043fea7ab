#include "../common/approx.hpp"
#include "../oracles/dawson.hpp"
#include "../oracles/hilbert.hpp"

#include <doctest.h>

#include <spinres/cavity_qed.hpp>
#include <spinres/error.hpp>
#include <spinres/crossing_fit.hpp>
#include <spinres/fit_models.hpp>
#include <spinres/sweep.hpp>

#include <cmath>
#include <random>

using namespace spinres;
using namespace spinres::cqed;

namespace
{
constexpr double pi = 3.14159265358979323846;

ResonatorParams reference_resonator()
{
    return ResonatorParams::from_q_int(5.534e9, 2.30e4, 1.4594e6);
}

EnsembleParams dpph(double detuning = 0.0)
{
    EnsembleParams e;
    e.g_ens_hz = 7.8e6;
    e.omega_s_hz = 5.534e9 + detuning;
    e.gamma_hz = 9.6e6;
    return e;
}

ComplexTrace forward_trace(const ResonatorParams &res, const EnsembleParams &ens, double half_span, std::size_t n)
{
    ComplexTrace t;
    t.frequency_hz = linspace(res.omega_r_hz - half_span, res.omega_r_hz + half_span, n);
    for (double f : t.frequency_hz)
        t.s11.push_back(reflection_coupled(f, res, ens));
    return t;
}
} // namespace

TEST_SUITE("cavity-qed")
{
    TEST_CASE("resonator parameter identities")
    {
        const auto r = reference_resonator();
        CHECK(r.kappa_int_hz == spinres_test::rel(240.6e3).epsilon(0.1e3 / 240.6e3));
        CHECK(r.q_int() == spinres_test::rel(2.30e4));
        CHECK(r.kappa_tot_hz() == spinres_test::rel(r.kappa_int_hz + r.kappa_ext_hz));
        ResonatorParams bad = r;
        bad.kappa_ext_hz = 0.0;
        CHECK_THROWS_AS(bad.validate(), DomainError);
    }

    TEST_CASE("bare reflection limits")
    {
        ResonatorParams r{5.5e9, 1e6, 1e6, 0.3, 0.8, 0.0};
        CHECK(std::abs(reflection_bare(5.5e9, r)) < 1e-15);
        CHECK(std::abs(reflection_bare(5.5e9 + 1e12, r)) == spinres_test::rel(0.8).epsilon(1e-6));
        r.kappa_ext_hz = 0.5e6;
        CHECK(std::abs(reflection_bare(5.5e9, r)) < 0.8);
    }

    TEST_CASE("passivity")
    {
        std::mt19937_64 rng(11);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        for (int k = 0; k < 200; ++k)
        {
            ResonatorParams r{5e9, 1e4 + 1e7 * u(rng), 1e4 + 1e7 * u(rng), 6.0 * u(rng), 0.5 + u(rng), 0.0};
            EnsembleParams e;
            e.g_ens_hz = 2e7 * u(rng);
            e.omega_s_hz = 5e9 + 4e7 * (u(rng) - 0.5);
            e.gamma_hz = 1e5 + 2e7 * u(rng);
            const double w = 5e9 + 1e8 * (u(rng) - 0.5);
            CHECK(std::abs(reflection_bare(w, r)) / r.amplitude_scale <= 1.0 + 1e-9);
            CHECK(std::abs(reflection_coupled(w, r, e)) / r.amplitude_scale <= 1.0 + 1e-9);
        }
    }

    TEST_CASE("decoupled ensemble leaves the bare response untouched")
    {
        const auto r = reference_resonator();
        auto e = dpph();
        e.g_ens_hz = 0.0;
        for (double f : linspace(5.5e9, 5.57e9, 101))
        {
            CHECK(reflection_coupled(f, r, e) == reflection_bare(f, r));
            CHECK(ensemble_susceptibility(f, e) == cplx(0.0, 0.0));
        }
    }

    TEST_CASE("Lorentzian susceptibility is real on resonance")
    {
        const auto e = dpph();
        const cplx w = ensemble_susceptibility(e.omega_s_hz, e);
        CHECK(w.real() == spinres_test::rel(2.0 * e.g_ens_hz * e.g_ens_hz / e.gamma_hz));
        CHECK(w.imag() == 0.0);
    }

    TEST_CASE("Lorentzian closed form agrees with quadrature over +-10 Gamma")
    {
        const auto e = dpph();
        double worst = 0.0;
        for (double d : linspace(-10.0 * e.gamma_hz, 10.0 * e.gamma_hz, 161))
        {
            const cplx a = ensemble_susceptibility(e.omega_s_hz + d, e);
            const cplx b = ensemble_susceptibility_numeric(e.omega_s_hz + d, e);
            worst = std::max(worst, std::abs(a - b) / std::abs(a));
        }
        CHECK(worst < 1e-6);
    }

    TEST_CASE("Gaussian susceptibility matches the Dawson-function closed form")
    {
        EnsembleParams e = dpph();
        e.lineshape = Lineshape::Gaussian;
        const double sigma = e.gamma_hz / (2.0 * std::sqrt(2.0 * std::log(2.0)));
        const double g2 = e.g_ens_hz * e.g_ens_hz;
        for (double d : linspace(-5.0 * e.gamma_hz, 5.0 * e.gamma_hz, 41))
        {
            const double u = d / (std::sqrt(2.0) * sigma);
            const double rho = std::exp(-0.5 * d * d / (sigma * sigma)) / (std::sqrt(2.0 * pi) * sigma);
            const cplx expected(g2 * pi * rho, -g2 * std::sqrt(2.0) * oracle::dawson(u) / sigma);
            const cplx got = ensemble_susceptibility(e.omega_s_hz + d, e);
            CHECK(std::abs(got - expected) <= 1e-7 * std::abs(expected));
        }
    }

    TEST_CASE("tabulated density reproduces the Lorentzian it samples")
    {
        EnsembleParams lor = dpph();
        std::vector<double> f, rho;
        for (double d : linspace(-400.0 * lor.gamma_hz, 400.0 * lor.gamma_hz, 64001))
        {
            f.push_back(lor.omega_s_hz + d);
            rho.push_back(lor.density(lor.omega_s_hz + d));
        }
        EnsembleParams tab = lor;
        tab.lineshape = Lineshape::Tabulated;
        tab.table = TabulatedDensity::normalized(f, rho);
        for (double d : {-20e6, -4.8e6, 0.0, 3e6, 15e6})
        {
            const cplx a = ensemble_susceptibility(lor.omega_s_hz + d, lor);
            const cplx b = ensemble_susceptibility(lor.omega_s_hz + d, tab);
            CHECK(std::abs(a - b) < 3e-3 * std::abs(a));
        }
        TabulatedDensity bad{{1.0, 2.0}, {0.5, 0.5}};
        bad.density = {2.0, 2.0};
        CHECK_THROWS_AS(bad.validate(), DomainError);
    }

    TEST_CASE("Kramers-Kronig consistency of the Lorentzian susceptibility")
    {
        const auto e = dpph();
        const double h = e.gamma_hz / 20.0;
        const long half = 4000;
        std::vector<double> re, im;
        for (long i = -half; i <= half; ++i)
        {
            const cplx w = ensemble_susceptibility(e.omega_s_hz + h * static_cast<double>(i), e);
            re.push_back(w.real());
            im.push_back(w.imag());
        }
        const auto hre = oracle::hilbert(re);
        double num = 0.0, den = 0.0;
        const long window = static_cast<long>(10.0 * e.gamma_hz / h);
        for (long i = half - window; i <= half + window; ++i)
        {
            num += std::pow(-hre[i] - im[i], 2);
            den += im[i] * im[i];
        }
        CHECK(std::sqrt(num / den) < 0.01);
    }

    TEST_CASE("dressed frequencies")
    {
        auto p = dressed_frequencies(5e9, 5e9, 7.8e6);
        CHECK(p.omega_plus_hz == spinres_test::rel(5e9 + 7.8e6));
        CHECK(p.omega_minus_hz == spinres_test::rel(5e9 - 7.8e6));
        CHECK(p.splitting_hz() == spinres_test::rel(15.6e6));
        p = dressed_frequencies(5e9, 5.1e9, 0.0);
        CHECK(p.omega_minus_hz == 5e9);
        CHECK(p.omega_plus_hz == 5.1e9);
        CHECK_THROWS_AS(dressed_frequencies(5e9, 5e9, -1.0), DomainError);

        std::mt19937_64 rng(5);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        for (int k = 0; k < 100; ++k)
        {
            const double wr = 5e9 + 1e8 * u(rng), ws = 5e9 + 1e8 * u(rng), g = 1e7 * (1.0 + u(rng));
            const auto d = dressed_frequencies(wr, ws, g);
            CHECK(d.omega_plus_hz >= d.omega_minus_hz);
            CHECK(d.omega_plus_hz + d.omega_minus_hz == spinres_test::rel(wr + ws).epsilon(1e-15));
        }
        const double g = 5e6, delta = 100.0 * g;
        const auto far = dressed_frequencies(5e9, 5e9 + delta, g);
        CHECK(std::abs(far.omega_plus_hz - (5e9 + delta)) <= g * g / delta);
        CHECK(std::abs(far.omega_minus_hz - 5e9) <= g * g / delta);
    }

    TEST_CASE("cooperativity")
    {
        const auto c = cooperativity(7.8e6, 1.7e6, 9.6e6);
        CHECK(c.value == spinres_test::rel(3.73).epsilon(0.01 / 3.73));
        CHECK(c.regime == CouplingRegime::HighCooperativity);
        CHECK(to_string(c.regime) == "high cooperativity");
        const auto p1 = cooperativity(9.3e6, 1.9e6, 1.0e6);
        CHECK(p1.value == spinres_test::rel(45.5).epsilon(0.01));
        CHECK(to_string(p1.regime) == "strong coupling");
        const auto zero = cooperativity(0.0, 1.9e6, 1.0e6);
        CHECK(zero.value == 0.0);
        CHECK(to_string(zero.regime) == "weak");
        CHECK_THROWS_AS(cooperativity(1.0, 0.0, 1.0), DomainError);
        CHECK_THROWS_AS(cooperativity(1.0, 1.0, -1.0), DomainError);
    }

    TEST_CASE("strong coupling splits the dip by two g")
    {
        ResonatorParams r = reference_resonator();
        EnsembleParams e;
        e.g_ens_hz = 9.3e6;
        e.omega_s_hz = r.omega_r_hz;
        e.gamma_hz = 1.0e6;
        const auto t = forward_trace(r, e, 40e6, 8001);
        auto dips = fit::find_dips(t.frequency_hz, t.magnitude(), 1e-3);
        REQUIRE(dips.size() == 2);
        CHECK(std::abs((dips[1].frequency_hz - dips[0].frequency_hz) - 2.0 * e.g_ens_hz) < 0.05 * 2.0 * e.g_ens_hz);

        // DPPH numbers: two resolved dips, closer than 2g
        const auto d = forward_trace(r, dpph(), 40e6, 8001);
        dips = fit::find_dips(d.frequency_hz, d.magnitude(), 1e-3);
        REQUIRE(dips.size() == 2);
        CHECK(dips[1].frequency_hz - dips[0].frequency_hz < 15.6e6);
    }

    TEST_CASE("reflection slope matches a finite difference of |S|^2")
    {
        const auto r = reference_resonator();
        const std::vector<EnsembleParams> lines{dpph(3e6)};
        for (double d : {-20e6, -5e6, 0.0, 1e6, 12e6})
        {
            const double w = r.omega_r_hz + d, h = 10.0;
            const double fd = (std::norm(reflection_coupled(w + h, r, lines)) -
                               std::norm(reflection_coupled(w - h, r, lines))) /
                              (2.0 * h);
            CHECK(reflection_power_slope(w, r, lines) == spinres_test::rel(fd).epsilon(1e-5).scale(1e-12));
        }
    }

    TEST_CASE("inversion of a Lorentzian line")
    {
        const auto r = reference_resonator();
        const auto e = dpph();
        const auto t = forward_trace(r, e, 10.0 * e.gamma_hz, 2001);
        const auto est = invert_spin_distribution(t, r, e.g_ens_hz);
        CHECK(est.masked_count == 0);
        double l1 = 0.0;
        for (std::size_t i = 0; i < t.size(); ++i)
            l1 = std::max(l1, std::abs(est.density[i] - e.density(t.frequency_hz[i])) / e.density(e.omega_s_hz));
        CHECK(l1 < 1e-6);
        const auto fit = fit::fit_lorentzian_density(est.frequency_hz, est.density);
        CHECK(fit.value("fwhm") == spinres_test::rel(e.gamma_hz).epsilon(0.02));
        CHECK(fit.value("area") == spinres_test::rel(1.0).epsilon(0.01));

        const auto unnorm = invert_spin_distribution(t, r);
        CHECK(std::sqrt(unnorm.normalization) == spinres_test::rel(e.g_ens_hz).epsilon(0.05));
    }

    TEST_CASE("inversion of a bimodal tabulated density")
    {
        const auto r = reference_resonator();
        std::vector<double> f, rho;
        for (double d : linspace(-60e6, 60e6, 4001))
        {
            f.push_back(r.omega_r_hz + d);
            rho.push_back(std::exp(-0.5 * std::pow((d + 12e6) / 4e6, 2)) +
                          0.6 * std::exp(-0.5 * std::pow((d - 10e6) / 3e6, 2)));
        }
        EnsembleParams e;
        e.g_ens_hz = 6e6;
        e.omega_s_hz = r.omega_r_hz;
        e.lineshape = Lineshape::Tabulated;
        e.table = TabulatedDensity::normalized(f, rho);
        const auto t = forward_trace(r, e, 40e6, 2001);
        const auto est = invert_spin_distribution(t, r, e.g_ens_hz);
        const double peak = *std::max_element(e.table.density.begin(), e.table.density.end());
        for (std::size_t i = 100; i + 100 < t.size(); ++i)
        {
            const double truth = e.density(t.frequency_hz[i]);
            CHECK(std::abs(est.density[i] - truth) < 0.01 * std::max(truth, 0.05 * peak));
        }
    }

    TEST_CASE("inversion of a bare trace gives zero density")
    {
        const auto r = reference_resonator();
        auto e = dpph();
        e.g_ens_hz = 0.0;
        auto t = forward_trace(r, e, 30e6, 2001);
        std::mt19937_64 rng(1);
        std::normal_distribution<double> n(0.0, 1e-4);
        for (auto &s : t.s11)
            s += cplx(n(rng), n(rng));
        const auto est = invert_spin_distribution(t, r, 7.8e6);
        const double lorentz_peak = dpph().density(dpph().omega_s_hz);
        for (double v : est.density)
            CHECK(v < 0.05 * lorentz_peak);
    }

    TEST_CASE("inversion masks samples where S equals the background")
    {
        const auto r = reference_resonator();
        ComplexTrace t;
        t.frequency_hz = {r.omega_r_hz - 1e6, r.omega_r_hz, r.omega_r_hz + 1e6};
        t.s11 = {reflection_bare(t.frequency_hz[0], r), background(r.omega_r_hz, r),
                 reflection_bare(t.frequency_hz[2], r)};
        const auto est = invert_spin_distribution(t, r, 1e6);
        CHECK(est.masked_count == 1);
        CHECK(est.masked[1]);
        t.has_phase = false;
        CHECK_THROWS_AS(invert_spin_distribution(t, r, 1e6), DomainError);
    }

    TEST_CASE("field sweep is deterministic and seeded")
    {
        SweepSpec spec;
        spec.system = spin::SpinSystem::free_electron(2.0036);
        spec.field_t = linspace(0.196, 0.1985, 11);
        spec.frequency_hz = linspace(5.50e9, 5.57e9, 201);
        SweepCoupling c;
        c.default_g_ens_hz = 7.8e6;
        c.gamma_hz = 9.6e6;
        const auto r = reference_resonator();
        const auto a = simulate_field_sweep(spec, r, c, {1e-3, 42});
        const auto b = simulate_field_sweep(spec, r, c, {1e-3, 42});
        const auto d = simulate_field_sweep(spec, r, c, {1e-3, 43});
        CHECK(a.values == b.values);
        CHECK(a.values != d.values);
        CHECK(a.rows() == 11);
        CHECK(a.cols() == 201);
        CHECK_NOTHROW(a.validate());
    }
}

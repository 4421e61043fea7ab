#include "../common/approx.hpp"
#include <doctest.h>

#include <spinres/error.hpp>
#include <spinres/fit_models.hpp>
#include <spinres/pulse_sim.hpp>

#include <cmath>
#include <random>

using namespace spinres;
using namespace spinres::pulse;

namespace
{
constexpr double pi = 3.14159265358979323846;

RelaxationParams frozen()
{
    return {1e6, 1e6, 1.0, 1.0};
}
} // namespace

TEST_SUITE("pulse-sim")
{
    TEST_CASE("ideal pi/2 and pi rotations")
    {
        PulseSequence s;
        s.pulse(0.25e-6, 1e6); // quarter Rabi cycle
        auto m = propagate_bloch(s, frozen(), 0.0).points.back().m;
        CHECK(std::abs(m.z()) < 1e-9);
        CHECK(std::abs(std::abs(m.y()) - 1.0) < 1e-9);
        CHECK(std::abs(m.x()) < 1e-9);

        PulseSequence p;
        p.pulse(0.5e-6, 1e6);
        m = propagate_bloch(p, frozen(), 0.0).points.back().m;
        CHECK(m.z() == spinres_test::rel(-1.0).epsilon(1e-9));

        PulseSequence inst;
        inst.rotate(pi);
        m = propagate_bloch(inst, frozen(), 0.0).points.back().m;
        CHECK(m.z() == spinres_test::rel(-1.0).epsilon(1e-12));
    }

    TEST_CASE("free decay of the transverse magnetization")
    {
        const RelaxationParams relax{1e-3, 50e-6, 1.0, 1.0};
        PulseSequence s;
        s.delay(50e-6);
        const auto tr = propagate_bloch(s, relax, 0.0, Vec3(1.0, 0.0, 0.0));
        const auto m = tr.points.back().m;
        CHECK(std::hypot(m.x(), m.y()) == spinres_test::rel(std::exp(-1.0)).epsilon(1e-9));
        CHECK(m.z() == spinres_test::rel(1.0 - std::exp(-50e-6 / 1e-3)).epsilon(1e-9));
    }

    TEST_CASE("norm never exceeds one")
    {
        std::mt19937_64 rng(9);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        for (int k = 0; k < 20; ++k)
        {
            PulseSequence s;
            s.pulse(1e-6 * (0.1 + u(rng)), 1e6 * u(rng), 6.0 * u(rng))
                .delay(1e-5 * u(rng) + 1e-9)
                .pulse(2e-6 * (0.1 + u(rng)), 2e6 * u(rng))
                .delay(1e-5 * u(rng) + 1e-9)
                .acquire(0.0, 1e-6, 50);
            const RelaxationParams relax{1e-5 * (0.1 + u(rng)), 1e-6 * (0.1 + u(rng)), 1.0, 1.0};
            const auto tr = propagate_bloch(s, relax, 1e6 * (u(rng) - 0.5));
            for (const auto &p : tr.points)
                CHECK(p.m.norm() <= 1.0 + 1e-9);
            for (const auto &p : tr.acquisition)
                CHECK(p.m.norm() <= 1.0 + 1e-9);
        }
    }

    TEST_CASE("sequence validation")
    {
        PulseSequence s;
        s.delay(-1.0);
        CHECK_THROWS_AS(s.validate(), DomainError);
        PulseSequence w;
        w.delay(1e-6).acquire(0.5e-6, 1e-6, 10);
        CHECK_THROWS_AS(w.validate(), DomainError);
        RelaxationParams r{1.0, 1.0, 4.0, 1.0};
        CHECK_THROWS_AS(r.validate(), DomainError);
        RelaxationParams odd{1.0, 3.0, 1.0, 1.0};
        CHECK_NOTHROW(odd.validate());
        CHECK_FALSE(odd.warnings().empty());
    }

    TEST_CASE("stratified detunings are deterministic and symmetric")
    {
        const auto d = stratified_detunings(101, 2e6);
        CHECK(d == stratified_detunings(101, 2e6));
        for (std::size_t i = 0; i < d.size(); ++i)
            CHECK(d[i] == spinres_test::rel(-d[d.size() - 1 - i]).scale(1.0));
        // quartiles of a Lorentzian sit at +-FWHM/2
        const auto q = stratified_detunings(4, 2e6);
        CHECK(std::abs(q[1]) < 1e6);
        CHECK(std::abs(q[3]) > 1e6);
    }

    TEST_CASE("Hahn echo refocuses fully without decoherence")
    {
        for (double fwhm : {0.1e6, 1e6, 10e6, 100e6})
            for (auto shape : {DetuningShape::Lorentzian, DetuningShape::Gaussian})
            {
                HahnEchoOptions o;
                o.n_spins = 1001;
                o.shape = shape;
                const double tau = 20e-6;
                const auto e = simulate_hahn_echo(tau, fwhm, frozen(), o);
                const double dt = e.time_s[1] - e.time_s[0];
                CHECK(std::abs(e.peak_time() - 2.0 * tau) <= dt);
                CHECK(e.amplitude_at(2.0 * tau) == spinres_test::rel(1.0).epsilon(0.01));
            }
    }

    TEST_CASE("echo timing does not depend on T2")
    {
        HahnEchoOptions o;
        o.n_spins = 501;
        double t_ref = -1.0;
        for (double t2 : {50e-6, 117.3e-6, 1e-3})
        {
            const auto e = simulate_hahn_echo(30e-6, 5e6, {1.0, t2, 2.1, 1.0}, o);
            if (t_ref < 0)
                t_ref = e.peak_time();
            CHECK(e.peak_time() == t_ref);
        }
    }

    TEST_CASE("echo envelope at the inset delays")
    {
        const RelaxationParams relax{5.54e-3, 117.3e-6, 2.1, 1.0};
        HahnEchoOptions o;
        o.n_spins = 401;
        // exp[-(2tau/T2)^2.1] worked by hand: 0.9103, 0.2502, 3e-11
        const double expected[] = {0.9103, 0.2502, 0.0};
        const double two_tau[] = {38e-6, 137e-6, 527e-6};
        for (int k = 0; k < 3; ++k)
        {
            const auto e = simulate_hahn_echo(two_tau[k] / 2.0, 5e6, relax, o);
            const double a = e.amplitude_at(two_tau[k]);
            CHECK(a == spinres_test::rel(echo_decay_model(two_tau[k], 117.3e-6, 2.1, 1.0)).epsilon(0.01).scale(1e-6));
            CHECK(std::abs(a - expected[k]) < 0.01);
        }
    }

    TEST_CASE("tau = 0 gives unit amplitude at t = 0")
    {
        const auto e = simulate_hahn_echo(0.0, 5e6, frozen());
        CHECK(e.time_s.front() == 0.0);
        CHECK(e.amplitude_at(0.0) == spinres_test::rel(1.0).epsilon(1e-9));
    }

    TEST_CASE("small ensembles are flagged")
    {
        HahnEchoOptions o;
        o.n_spins = 20;
        const auto e = simulate_hahn_echo(10e-6, 1e6, frozen(), o);
        CHECK_FALSE(e.diagnostics.empty());
    }

    TEST_CASE("finite pulses still refocus at 2 tau")
    {
        HahnEchoOptions o;
        o.n_spins = 401;
        o.pulse_duration_s = 20e-9;
        o.shape = DetuningShape::Gaussian;
        const double tau = 5e-6;
        const auto e = simulate_hahn_echo(tau, 2e6, frozen(), o);
        const double dt = e.time_s[1] - e.time_s[0];
        CHECK(std::abs(e.peak_time() - 2.0 * tau) <= dt);
        CHECK(e.peak_amplitude() > 0.95);
    }

    TEST_CASE("relaxation models")
    {
        CHECK(saturation_recovery_model(0.0, 5.54e-3, 2.0) == 0.0);
        CHECK(saturation_recovery_model(1e3, 5.54e-3, 2.0) == spinres_test::rel(2.0));
        CHECK(saturation_recovery_model(5.54e-3, 5.54e-3, 1.0) == spinres_test::rel(0.632).epsilon(1e-3));
        CHECK(echo_decay_model(0.0, 117.3e-6, 2.1, 3.0) == 3.0);
        for (double p : {0.5, 1.0, 2.1, 3.0})
            CHECK(echo_decay_model(117.3e-6, 117.3e-6, p, 1.0) == spinres_test::rel(std::exp(-1.0)));
        CHECK(echo_decay_model(137e-6, 117.3e-6, 2.1, 1.0) == spinres_test::rel(0.2502).epsilon(0.005));
        double prev_s = -1.0, prev_e = 2.0;
        for (double t = 0.0; t < 50e-3; t += 1e-3)
        {
            const double s = saturation_recovery_model(t, 5.54e-3, 1.0);
            const double e = echo_decay_model(t * 0.02, 117.3e-6, 2.1, 1.0);
            CHECK(s > prev_s);
            CHECK(e < prev_e);
            prev_s = s;
            prev_e = e;
        }
    }

    TEST_CASE("simulated echo amplitudes fit back to T2 and p")
    {
        const RelaxationParams relax{5.54e-3, 117.3e-6, 2.1, 1.0};
        HahnEchoOptions o;
        o.n_spins = 201;
        std::vector<double> t, a;
        for (double two_tau = 20e-6; two_tau <= 240e-6; two_tau += 20e-6)
        {
            t.push_back(two_tau);
            a.push_back(simulate_hahn_echo(two_tau / 2.0, 2e6, relax, o).amplitude_at(two_tau));
        }
        const auto fit = fit::fit_t2(t, a);
        CHECK(fit.value("t2") == spinres_test::rel(117.3e-6).epsilon(0.02));
        CHECK(fit.value("p") == spinres_test::rel(2.1).epsilon(0.02));
    }
}

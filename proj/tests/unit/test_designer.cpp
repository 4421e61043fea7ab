#include "../common/approx.hpp"
#include <doctest.h>

#include <spinres/constants.hpp>
#include <spinres/designer.hpp>
#include <spinres/error.hpp>

#include <cmath>
#include <limits>

using namespace spinres::design;

TEST_SUITE("designer")
{
    TEST_CASE("vacuum field and mode volume are inverse")
    {
        const double v = mode_volume(5.534e9, 5.0e-12);
        CHECK(v == spinres_test::rel(9.2e-8).epsilon(0.01));
        CHECK(vacuum_field(5.534e9, v) == spinres_test::rel(5.0e-12).epsilon(1e-12));
        CHECK(vacuum_field(5.534e9, 4.0 * v) == spinres_test::rel(2.5e-12).epsilon(1e-12));
        CHECK(vacuum_field(2.0 * 5.534e9, v) == spinres_test::rel(5.0e-12 * std::sqrt(2.0)).epsilon(1e-12));
        for (double b : {1e-13, 3e-12, 7e-10})
            CHECK(vacuum_field(4e9, mode_volume(4e9, b)) == spinres_test::rel(b).epsilon(1e-12));
        CHECK_THROWS_AS(vacuum_field(0.0, 1.0), spinres::DomainError);
    }

    TEST_CASE("single-spin coupling convention")
    {
        CHECK(std::abs(single_spin_coupling(5.0e-12, 2.0) - 0.070) < 0.002);
        CHECK(single_spin_coupling(0.0, 2.0) == 0.0);
        CHECK(single_spin_coupling(10e-12, 2.0) == spinres_test::rel(2.0 * single_spin_coupling(5e-12, 2.0)));
        CHECK(std::abs(single_spin_coupling(10e-12, 2.0) - 0.140) < 0.004);
    }

    TEST_CASE("ensemble coupling and spin counts")
    {
        CHECK(ensemble_coupling(0.07, 0.0) == 0.0);
        CHECK(ensemble_coupling(0.07, 4e16) == spinres_test::rel(2.0 * ensemble_coupling(0.07, 1e16)));
        CHECK(implied_spin_count(0.07, 9.2e6) == spinres_test::rel(1.7e16).epsilon(0.02));
        CHECK(ensemble_coupling(0.07, implied_spin_count(0.07, 9.2e6)) == spinres_test::rel(9.2e6));
        double prev = -1.0;
        for (double n = 0.0; n < 1e17; n += 1e16)
        {
            const double g = ensemble_coupling(0.07, n);
            CHECK(g > prev);
            prev = g;
        }
        CHECK_THROWS_AS(ensemble_coupling(0.07, 1.0, 1.5), spinres::DomainError);
    }

    TEST_CASE("thermal polarization")
    {
        CHECK(thermal_polarization(5.5e9, 0.0) == 1.0);
        CHECK(thermal_polarization(5.5e9, 0.01) > 0.999);
        CHECK(thermal_polarization(5.5e9, 300.0) < 1e-3);
    }

    TEST_CASE("P1 and DPPH spin counts")
    {
        SampleSpec p1;
        p1.concentration_ppm = 106.0;
        p1.sample_volume_m3 = 1e-9;
        CHECK(spin_count(p1) == spinres_test::rel(1.88e16).epsilon(0.005));
        SampleSpec doubled = p1;
        doubled.sample_volume_m3 *= 2.0;
        CHECK(spin_count(doubled) == spinres_test::rel(2.0 * spin_count(p1)));
        doubled = p1;
        doubled.concentration_ppm *= 3.0;
        CHECK(spin_count(doubled) == spinres_test::rel(3.0 * spin_count(p1)));
        p1.concentration_ppm = 0.0;
        CHECK(spin_count(p1) == 0.0);
        p1.concentration_ppm = 2e6;
        CHECK_THROWS_AS(spin_count(p1), spinres::DomainError);

        SampleSpec dpph;
        dpph.species = Species::DPPH;
        dpph.mass_g = 394.32e-6;
        CHECK(spin_count(dpph) == spinres_test::rel(spinres::constants::avogadro * 1e-6));
    }

    TEST_CASE("loss budget")
    {
        DesignParams p;
        p.frequency_hz = 5.534e9;
        p.q_radiation = 2.33e4;
        p.tan_delta = 1e-6;
        p.electric_filling = 1.0;
        p.q_conductor = 1e7;
        auto b = loss_budget(p);
        CHECK(b.q_int == spinres_test::rel(2.28e4).epsilon(0.005));
        CHECK(b.dominant == "radiation");
        CHECK(b.channels[2].fraction > 0.97);
        double sum = 0.0, inv = 0.0;
        for (const auto &c : b.channels)
        {
            sum += c.fraction;
            inv += c.inverse_q;
        }
        CHECK(std::abs(sum - 1.0) < 1e-12);
        CHECK(inv == b.inverse_q_int);

        p.q_radiation = std::numeric_limits<double>::infinity();
        p.q_conductor = std::numeric_limits<double>::infinity();
        b = loss_budget(p);
        CHECK(b.q_int == spinres_test::rel(1e6));
        CHECK(b.dominant == "dielectric");

        p.tan_delta = 0.0;
        p.q_conductor = 3.3e5;
        CHECK(loss_budget(p).q_int == spinres_test::rel(3.3e5));
        p.q_conductor = std::numeric_limits<double>::infinity();
        CHECK_THROWS_AS(loss_budget(p), spinres::DomainError);
    }

    TEST_CASE("design params resolve one of b_vac and mode volume")
    {
        DesignParams p;
        p.frequency_hz = 5.534e9;
        p.b_vac_t = 5e-12;
        const auto r = p.resolved();
        CHECK(r.mode_volume_m3 == spinres_test::rel(mode_volume(5.534e9, 5e-12)));
        p.mode_volume_m3 = 1e-7;
        CHECK_THROWS_AS(p.resolved(), spinres::DomainError);
        p.electric_filling = 1.2;
        CHECK_THROWS_AS(p.validate(), spinres::DomainError);
    }
}

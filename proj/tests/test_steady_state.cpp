#include "lambda_beam/errors.hpp"
#include "lambda_beam/steady_state.hpp"
#include "support/oracles.hpp"

#include <doctest.h>

#include <random>

using namespace lambda_beam;
using doctest::Approx;

TEST_SUITE("steady_state")
{
    TEST_CASE("default point matches the frozen Liouvillian values")
    {
        const ParameterSet p = default_rb87_d1();
        const SteadyState c = steady_closed(p.atom, p.drive);
        CHECK(c.source == SteadySource::closed_form);
        CHECK(c.rho11 == Approx(0.44567711994309012).epsilon(1e-12));
        CHECK(c.rho33 == Approx(0.19420567237743577).epsilon(1e-12));
        CHECK(c.rho23.real() == 0.0);
        CHECK(c.rho23.imag() == Approx(-0.11559861451037842).epsilon(1e-12));

        const SteadyState n = steady_numeric(p.atom, p.drive);
        CHECK(std::abs(n.rho11 - c.rho11) < 1e-10);
        CHECK(std::abs(n.rho33 - c.rho33) < 1e-10);
        CHECK(std::abs(n.rho23 - c.rho23) < 1e-10);
    }

    TEST_CASE("Liouvillian steady state agrees with direct time integration")
    {
        const ParameterSet p = default_rb87_d1();
        AtomSystem atom = p.atom;
        DriveConfig drive = p.drive;
        // Work in units of Gamma31 so the time step is well conditioned.
        const double g = atom.gamma31;
        atom.gamma31 /= g;
        atom.gamma32 /= g;
        atom.gamma41 /= g;
        atom.gamma42 /= g;
        atom.gamma21 /= g;
        drive.omega_c /= g;
        drive.pump_p /= g;
        const Eigen::Matrix4cd relaxed = oracle::relax_to_steady(atom, drive, 400.0, 40000);
        const SteadyState n = steady_numeric(atom, drive);
        CHECK((relaxed - n.matrix).cwiseAbs().maxCoeff() < 1e-8);
    }

    TEST_CASE("closed form and Liouvillian null vector agree over 1000 random draws")
    {
        std::mt19937_64 rng(20240611);
        double worst = 0.0, worst_trace = 0.0, worst_herm = 0.0, worst_imag = 0.0;
        for (int i = 0; i < 1000; ++i) {
            const oracle::Draw d = oracle::random_draw(rng);
            const SteadyState c = steady_closed(d.atom, d.drive);
            const SteadyState n = steady_numeric(d.atom, d.drive);
            worst = std::max({worst, std::abs(c.rho11 - n.rho11), std::abs(c.rho33 - n.rho33),
                              std::abs(c.rho23 - n.rho23)});
            worst_trace = std::max(worst_trace, std::abs(n.matrix.trace() - 1.0));
            worst_herm = std::max(worst_herm, (n.matrix - n.matrix.adjoint()).cwiseAbs().maxCoeff());
            worst_imag = std::max(worst_imag, std::abs(n.rho23.real()));
            for (int k = 0; k < 4; ++k) {
                CHECK(n.matrix(k, k).real() >= -1e-12);
                CHECK(n.matrix(k, k).real() <= 1.0 + 1e-12);
            }
        }
        CHECK(worst <= 1e-9);
        CHECK(worst_trace <= 1e-10);
        CHECK(worst_herm <= 1e-10);
        CHECK(worst_imag <= 1e-10);
    }

    TEST_CASE("without the pump every atom stays in level 1")
    {
        ParameterSet p = default_rb87_d1();
        p.drive.pump_p = 0.0;
        const SteadyState c = steady_closed(p.atom, p.drive);
        CHECK(c.rho11 == 1.0);
        CHECK(c.rho33 == 0.0);
        CHECK(c.rho23 == std::complex<double>{});
        const SteadyState n = steady_numeric(p.atom, p.drive);
        CHECK(n.rho11 == Approx(1.0).epsilon(1e-12));
        CHECK(std::abs(n.rho23) < 1e-12);
    }

    TEST_CASE("strong control drive approaches the saturated populations")
    {
        ParameterSet p = default_rb87_d1();
        const AtomSystem& a = p.atom;
        const double pp = p.drive.pump_p;
        p.drive.omega_c = 1e6 * a.gamma31;
        const SteadyState c = steady_closed(p.atom, p.drive);
        const double limit = a.gamma31 * (pp + a.gamma4()) / (2.0 * pp * (a.gamma31 + a.gamma42) + a.gamma31 * a.gamma4());
        CHECK(c.rho11 == Approx(limit).epsilon(1e-9));
        CHECK(std::abs(c.rho23) < 1e-5);
    }

    TEST_CASE("without control the numeric solver leaves level 3 empty")
    {
        ParameterSet p = default_rb87_d1();
        p.drive.omega_c = 0.0;
        const SteadyState n = steady_numeric(p.atom, p.drive);
        CHECK(std::abs(n.rho33) < 1e-12);
        CHECK(std::abs(n.rho23) < 1e-12);
        CHECK(n.rho11 + n.rho22 + n.rho44 == Approx(1.0).epsilon(1e-12));
        CHECK_THROWS_AS(steady_closed(p.atom, p.drive), PhysicsError);
        // The dispatcher falls back to the numeric route.
        CHECK(steady_state(p.atom, p.drive).source == SteadySource::numeric);
    }

    TEST_CASE("closed form refuses a detuned control field")
    {
        ParameterSet p = default_rb87_d1();
        p.drive.delta_c = 1e6;
        CHECK_THROWS_AS(steady_closed(p.atom, p.drive), PhysicsError);
        const SteadyState n = steady_state(p.atom, p.drive);
        CHECK(n.source == SteadySource::numeric);
        CHECK(n.matrix.trace().real() == Approx(1.0).epsilon(1e-10));
    }

    TEST_CASE("a degenerate steady state is reported")
    {
        AtomSystem atom;
        atom.lambda_p = 795e-9;
        DriveConfig drive;  // nothing couples or relaxes anything
        CHECK_THROWS_AS(steady_numeric(atom, drive), NumericalError);
    }

    TEST_CASE("populations move monotonically with the pump rate")
    {
        ParameterSet p = default_rb87_d1();
        double prev11 = 2.0, prev33 = -1.0, prev23 = -1.0;
        for (int i = 0; i < 50; ++i) {
            p.drive.pump_p = 2.0 * p.atom.gamma31 * i / 49.0;
            const SteadyState s = steady_state(p.atom, p.drive);
            CHECK(s.rho11 < prev11);
            CHECK(s.rho33 > prev33);
            CHECK(std::abs(s.rho23) > prev23);
            prev11 = s.rho11;
            prev33 = s.rho33;
            prev23 = std::abs(s.rho23);
        }
    }
}

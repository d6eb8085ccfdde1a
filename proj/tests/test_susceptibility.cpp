#include "lambda_beam/constants.hpp"
#include "lambda_beam/errors.hpp"
#include "lambda_beam/susceptibility.hpp"
#include "support/oracles.hpp"

#include <doctest.h>

using namespace lambda_beam;
using doctest::Approx;

namespace {

ChiModel default_model()
{
    const ParameterSet p = default_rb87_d1();
    return optimal_detuning(p.atom, p.vapor, p.drive).model;
}

double rel(std::complex<double> a, std::complex<double> b) { return std::abs(a - b) / std::abs(b); }

}  // namespace

TEST_SUITE("susceptibility")
{
    TEST_CASE("kernel quadrature matches the brute-force Riemann sum")
    {
        const ParameterSet p = default_rb87_d1();
        const double delta = optimal_detuning(p.atom, p.vapor, p.drive).delta;
        const DriveConfig d = p.drive.with_two_photon_detuning(delta);
        const Kernel31 k = kernel31(p.atom, p.vapor, d);
        const auto oracle_g = oracle::riemann_g31(p.atom, p.vapor, d);
        CHECK(rel(k.g31, oracle_g) <= 1e-7);
        // Frozen from the oracle.
        CHECK(k.g31.real() == Approx(-1.5346953079622593e-12).epsilon(1e-7));
        CHECK(k.g31.imag() == Approx(-8.9197736060660223e-10).epsilon(1e-7));
        CHECK(k.g31.imag() < 0.0);
        const std::complex<double> i(0.0, 1.0);
        CHECK(k.k31 == i * k.g31 / (1.0 - i * p.vapor.gamma_c * k.g31));
        CHECK(k.k31_real == k.k31.real());
    }

    TEST_CASE("kernel at other detunings and temperatures matches the oracle")
    {
        ParameterSet p = default_rb87_d1();
        for (double dp : {-3e8, -2e7, 1e6, 5e7, 4e8}) {
            for (double v : {50.0, 240.0, 600.0}) {
                p.vapor.v_th = v;
                p.vapor.temperature.reset();
                DriveConfig d = p.drive;
                d.delta_p = dp;
                const Kernel31 k = kernel31(p.atom, p.vapor, d);
                CHECK(rel(k.g31, oracle::riemann_g31(p.atom, p.vapor, d)) <= 1e-7);
                CHECK(k.g31.imag() < 0.0);
            }
        }
    }

    TEST_CASE("resonant kernel has no real part")
    {
        ParameterSet p = default_rb87_d1();
        p.drive.delta_p = 0.0;
        const Kernel31 k = kernel31(p.atom, p.vapor, p.drive);
        CHECK(std::abs(k.g31.real()) <= 1e-12 * std::abs(k.g31));
    }

    TEST_CASE("stationary atoms use the bare Lorentzian")
    {
        ParameterSet p = default_rb87_d1();
        p.vapor.v_th = 0.0;
        p.drive.delta_p = 1e6;
        const Kernel31 k = kernel31(p.atom, p.vapor, p.drive);
        const double width = p.drive.pump_p / 2.0 + p.atom.gamma3() / 2.0 + p.vapor.gamma_c;
        CHECK(k.g31 == 1.0 / std::complex<double>(1e6, width));
    }

    TEST_CASE("chi at zero transverse momentum equals c0; the far tail is i alpha times the inversion")
    {
        const ChiModel m = default_model();
        const Expansion e = expansion(m);
        CHECK(chi(0.0, m) == e.c0);
        const std::complex<double> i(0.0, 1.0);
        CHECK(rel(chi(1e30, m), i * m.alpha * m.steady.inversion()) < 1e-12);
        CHECK(m.gamma_cap_1 == m.gamma_cap_c + m.pump_p / 2.0 + m.gamma21);
        CHECK(m.alpha.real() > 0.0);
    }

    TEST_CASE("expansion coefficients are frozen and consistent with finite differences")
    {
        const ChiModel m = default_model();
        const Expansion e = expansion(m);
        CHECK(e.c0.real() == Approx(-5.947994913654743e-05).epsilon(1e-9));
        CHECK(e.c0.imag() == Approx(-1.8729475775017664e-07).epsilon(1e-9));
        CHECK(e.c1.real() == Approx(6.1942030619542923e-05).epsilon(1e-9));
        CHECK(std::abs(e.c1.imag()) <= 1e-6 * std::abs(e.c1));
        CHECK(e.k1 == Approx(62086.888997287744).epsilon(1e-12));
        CHECK(e.k1 == std::sqrt(m.gamma_cap_1.real() * m.gamma_c1) / m.v_th);

        // Central second difference in k^2 gives c1 / k1^2.
        const double h = 1e-4 * e.k1 * e.k1;
        const auto slope = (chi(h, m) - chi(-h, m)) / (2.0 * h);
        CHECK(rel(slope * e.k1 * e.k1, e.c1) < 1e-6);
    }

    TEST_CASE("expansion remainder shrinks like the fourth power of k")
    {
        const ChiModel m = default_model();
        const Expansion e = expansion(m);
        for (double frac : {0.01, 0.02, 0.05}) {
            const double k2 = frac * frac * e.k1 * e.k1;
            const auto quad = e.c1 * k2 / (e.k1 * e.k1);
            const double remainder = std::abs(chi(k2, m) - e.c0 - quad) / std::abs(quad);
            CHECK(remainder <= frac * frac * 10.0);
        }
    }

    TEST_CASE("diffusion-free detuning zeroes the imaginary part of c1")
    {
        const ParameterSet p = default_rb87_d1();
        const DetuningSolution sol = optimal_detuning(p.atom, p.vapor, p.drive);
        const Expansion e = expansion(sol.model);
        CHECK(sol.delta < 0.0);
        CHECK(std::abs(e.c1.imag()) / std::abs(e.c1) <= 1e-6);
        CHECK(sol.delta / p.atom.gamma31 == Approx(-0.32891366027239527).epsilon(1e-9));

        // Independent route: sign change of Im c1 on a 1e4-point grid.
        const double root = oracle::bracket_root(
            [&](double x) {
                return expansion(build_chi_model(p.atom, p.vapor, p.drive.with_two_photon_detuning(x))).c1.imag();
            },
            -p.atom.gamma31, -0.01 * p.atom.gamma31);
        CHECK(root == Approx(sol.delta).epsilon(1e-8));
    }

    TEST_CASE("diffusion-free detuning follows its closed form in the model's rates")
    {
        const ChiModel m = default_model();
        const double g1 = m.gamma_cap_1.real();
        const double ratio = m.gamma_c1 / g1;
        CHECK(diffusion_free_detuning(m) == Approx(-g1 * std::sqrt(ratio / (ratio + 2.0))).epsilon(1e-15));
        // gamma_c1 >> Gamma1 pushes it to -Gamma1.
        ChiModel wide = m;
        wide.gamma_c1 = 1e9 * g1;
        CHECK(diffusion_free_detuning(wide) == Approx(-g1).epsilon(1e-8));
    }

    TEST_CASE("complex kernel option still finds a root of Im c1")
    {
        const ParameterSet p = default_rb87_d1();
        const DetuningSolution sol = optimal_detuning(p.atom, p.vapor, p.drive, ChiOptions{true});
        const Expansion e = expansion(sol.model);
        CHECK(std::abs(e.c1.imag()) / std::abs(e.c1) <= 1e-6);
    }

    TEST_CASE("without the pump chi reduces to the pump-free form")
    {
        ParameterSet p = default_rb87_d1();
        p.drive.pump_p = 0.0;
        const ChiModel m = build_chi_model(p.atom, p.vapor, p.drive.with_two_photon_detuning(-0.2 * p.atom.gamma31));
        for (int i = 0; i < 20; ++i) {
            const double k2 = std::pow(10.0, 2.0 + 0.4 * i);
            CHECK(rel(chi(k2, m), chi_no_pump(k2, m)) <= 1e-12);
        }
        const Expansion e = expansion(m);
        REQUIRE(e.k0.has_value());
        REQUIRE(e.gamma0.has_value());
        CHECK(*e.k0 == std::sqrt(*e.gamma0 * m.gamma_c) / m.v_th);
    }

    TEST_CASE("pump-free expansion at Delta = -Gamma0 reduces to its compact form")
    {
        ParameterSet p = default_rb87_d1();
        p.drive.pump_p = 0.0;
        p.atom.gamma21 = 0.0;
        p.drive.omega_c = 0.05 * p.atom.gamma31;  // gamma_c / Gamma0 > 1e3
        const ChiModel probe = build_chi_model(p.atom, p.vapor, p.drive);
        const double gamma0 = probe.gamma_cap_c.real() + probe.gamma21;
        REQUIRE(p.vapor.gamma_c / gamma0 >= 1e3);
        const ChiModel m = build_chi_model(p.atom, p.vapor, p.drive.with_two_photon_detuning(-gamma0));
        const Expansion e = expansion(m);
        const NoPumpExpansion np = no_pump_expansion(m);
        CHECK(rel(e.c0, np.constant) < 1e-12);
        CHECK(rel(e.c1 / (e.k1 * e.k1), np.quadratic / (np.k0 * np.k0)) < 0.01);
    }

    TEST_CASE("pump-free cancellation reproduces 1/k_p^2 = alpha Gamma_c / (2 Gamma0 k0^2)")
    {
        ParameterSet p = default_rb87_d1();
        p.drive.pump_p = 0.0;
        p.atom.gamma21 = 0.0;
        const ChiModel probe = build_chi_model(p.atom, p.vapor, p.drive);
        const double gamma0 = probe.gamma_cap_c.real();
        const ChiModel m = build_chi_model(p.atom, p.vapor, p.drive.with_two_photon_detuning(-gamma0));
        const NoPumpExpansion np = no_pump_expansion(m);
        const Cancellation c = cancellation_density(m, expansion(m));
        // At n0* the pump-free condition holds with the compact coefficients.
        const double scale = c.n0_required / m.n0;
        const double lhs = 1.0 / (m.k_p * m.k_p);
        const double rhs = scale * np.quadratic.real() / (np.k0 * np.k0);
        CHECK(rhs == Approx(lhs).epsilon(0.01));
    }

    TEST_CASE("no control field means no transverse-momentum dependence")
    {
        ParameterSet p = default_rb87_d1();
        p.drive.omega_c = 0.0;
        const ChiModel m = build_chi_model(p.atom, p.vapor, p.drive);
        const Expansion e = expansion(m);
        CHECK(std::abs(e.c1) == 0.0);
        CHECK_THROWS_AS(cancellation_density(m, e), PhysicsError);
    }

    TEST_CASE("cancellation density at the default point is near the configured density")
    {
        const ChiModel m = default_model();
        const Cancellation c = cancellation_density(m, expansion(m));
        CHECK(std::abs(c.residual) <= 0.3);
        CHECK(c.residual == Approx(0.0037166299576942841).epsilon(1e-6));
        CHECK(c.n0_required == Approx(1.4944456983473748e18).epsilon(1e-9));
        CHECK(c.n0_required / 1.5e18 < 1.35);
        CHECK(1.5e18 / c.n0_required < 1.35);
    }

    TEST_CASE("required density scales as 1/(k_p^2 Re c1 per atom)")
    {
        ParameterSet p = default_rb87_d1();
        const ChiModel a = default_model();
        p.atom.lambda_p *= 2.0;
        const ChiModel b = build_chi_model(p.atom, p.vapor, p.drive.with_two_photon_detuning(a.delta));
        const Expansion ea = expansion(a), eb = expansion(b);
        const double ratio = cancellation_density(b, eb).n0_required / cancellation_density(a, ea).n0_required;
        const double expected = (a.k_p * a.k_p * ea.c1.real() / (ea.k1 * ea.k1)) /
                                (b.k_p * b.k_p * eb.c1.real() / (eb.k1 * eb.k1));
        CHECK(ratio == Approx(expected).epsilon(1e-12));
    }

    TEST_CASE("no dragging term means no cancellation density")
    {
        ChiModel m = default_model();
        m.alpha = -m.alpha;
        const Expansion e = expansion(m);
        REQUIRE(e.c1.real() < 0.0);
        CHECK_THROWS_AS(cancellation_density(m, e), PhysicsError);
    }

    TEST_CASE("phase law is linear and reaches pi near 0.168 z_R")
    {
        const ParameterSet p = default_rb87_d1();
        const ChiModel m = default_model();
        const Expansion e = expansion(m);
        const double z_r = p.beam.rayleigh_length(p.atom.lambda_p);
        CHECK(phase_law(m, e, 0.0) == 0.0);
        CHECK(phase_law(m, e, 2.0 * z_r) == Approx(2.0 * phase_law(m, e, z_r)).epsilon(1e-15));
        CHECK(std::abs(phase_law(m, e, 0.168 * z_r)) == Approx(constants::pi).epsilon(0.05));
    }

    TEST_CASE("the default point amplifies weakly")
    {
        const Expansion e = expansion(default_model());
        CHECK(e.c0.imag() < 0.0);
    }
}

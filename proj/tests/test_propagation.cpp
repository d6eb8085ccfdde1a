#include "lambda_beam/constants.hpp"
#include "lambda_beam/errors.hpp"
#include "lambda_beam/params.hpp"
#include "lambda_beam/propagation.hpp"

#include <doctest.h>

#include <cmath>

using namespace lambda_beam;
using doctest::Approx;

namespace {

struct Setup {
    ParameterSet p = default_rb87_d1();
    ChiModel model;
    double z_r = 0.0;

    Setup()
    {
        model = optimal_detuning(p.atom, p.vapor, p.drive).model;
        z_r = p.beam.rayleigh_length(p.atom.lambda_p);
    }

    TransverseField input(int n = 256) const { return gaussian(p.beam, model.k_p, n, 16.0 * p.beam.w_p); }
};

const Setup& setup()
{
    static const Setup s;
    return s;
}

// Largest pointwise difference relative to the peak amplitude of b.
double max_diff(const TransverseField& a, const TransverseField& b)
{
    double err = 0.0, peak = 0.0;
    for (std::size_t k = 0; k < a.data.size(); ++k) {
        err = std::max(err, std::abs(a.data[k] - b.data[k]));
        peak = std::max(peak, std::abs(b.data[k]));
    }
    return err / peak;
}

}  // namespace

TEST_SUITE("propagation")
{
    TEST_CASE("free space conserves power and spreads as sqrt(1 + (z/z_R)^2)")
    {
        const Setup& s = setup();
        const Trajectory t = propagate_linear(s.input(), FreeSpace{}, s.p.beam, 2.0 * s.z_r, 64);
        REQUIRE(t.samples.size() == 65u);
        for (const auto& smp : t.samples) {
            CHECK(std::abs(smp.diagnostics.power - 1.0) <= 1e-12);
            const double expected = s.p.beam.w_p * std::sqrt(1.0 + std::pow(smp.z / s.z_r, 2));
            CHECK(smp.diagnostics.width == Approx(expected).epsilon(5e-3));
        }
        CHECK(t.samples[32].diagnostics.width == Approx(std::sqrt(2.0) * s.p.beam.w_p).epsilon(0.01));
        CHECK(t.warnings.empty());
    }

    TEST_CASE("a k-independent medium multiplies the free-space field by exp(i k_p chi z / 2)")
    {
        const Setup& s = setup();
        const Complex x(3e-6, -2e-7);
        const double z = 0.3 * s.z_r;
        const TransverseField f = s.input(128);
        const Trajectory free = propagate_linear(f, FreeSpace{}, s.p.beam, z, 64);
        const Trajectory med = propagate_linear(f, UniformMedium{x}, s.p.beam, z, 64);
        const Complex factor = std::exp(Complex(0.0, 0.5 * s.model.k_p * z) * x);
        TransverseField expected = free.final;
        for (auto& v : expected.data)
            v *= factor;
        CHECK(max_diff(med.final, expected) < 1e-12);
        CHECK(med.samples.back().diagnostics.power ==
              Approx(std::exp(-s.model.k_p * x.imag() * z)).epsilon(1e-12));
    }

    TEST_CASE("propagation composes: 0 -> z1 -> z2 equals 0 -> z2")
    {
        const Setup& s = setup();
        const TransverseField f = s.input(128);
        const ThermalVapor v{s.model};
        const double z1 = 0.37 * s.z_r, z2 = 0.81 * s.z_r;
        const Trajectory a = propagate_linear(f, v, s.p.beam, z1, 64, SampleMode::axis);
        const Trajectory b = propagate_linear(a.final, v, s.p.beam, z2 - z1, 64, SampleMode::axis);
        const Trajectory c = propagate_linear(f, v, s.p.beam, z2, 64, SampleMode::axis);
        CHECK(b.final.z == Approx(z2).epsilon(1e-14));
        CHECK(max_diff(b.final, c.final) < 1e-12);
    }

    TEST_CASE("axis sampling reproduces the full diagnostics it keeps")
    {
        const Setup& s = setup();
        const TransverseField f = s.input(128);
        const ThermalVapor v{s.model};
        const Trajectory full = propagate_linear(f, v, s.p.beam, s.z_r, 128, SampleMode::full);
        const Trajectory axis = propagate_linear(f, v, s.p.beam, s.z_r, 128, SampleMode::axis);
        REQUIRE(full.samples.size() == axis.samples.size());
        for (std::size_t k = 0; k < full.samples.size(); ++k) {
            const auto& a = full.samples[k].diagnostics;
            const auto& b = axis.samples[k].diagnostics;
            CHECK(std::abs(a.power - b.power) < 1e-12);
            CHECK(std::abs(a.axis_phase - b.axis_phase) < 1e-10);
        }
        CHECK(std::isnan(axis.samples[5].diagnostics.width));
        CHECK(axis.samples.back().diagnostics.width == full.samples.back().diagnostics.width);
        CHECK(max_diff(full.final, axis.final) == 0.0);
    }

    TEST_CASE("vapor at the cancellation point holds the beam and follows the uniform phase law")
    {
        const Setup& s = setup();
        const Trajectory t = propagate_linear(s.input(), ThermalVapor{s.model}, s.p.beam, s.z_r, 256, SampleMode::axis);
        const BeamDiagnostics& end = t.samples.back().diagnostics;
        const AnalyticPrediction a = analytic_reference(s.model, s.z_r);
        CHECK(std::abs(end.axis_phase - a.phase) <= 0.05 * std::abs(a.phase));
        CHECK(std::abs(end.power - a.power) <= 0.05 * a.power);
        CHECK(std::abs(std::log(end.power)) <= 0.15);
        CHECK(std::abs(end.width / s.p.beam.w_p - 1.0) < 0.05);
    }

    TEST_CASE("analytic reference")
    {
        const Setup& s = setup();
        const AnalyticPrediction zero = analytic_reference(s.model, 0.0);
        CHECK(zero.power == 1.0);
        CHECK(zero.phase == 0.0);
        ChiModel dense = s.model;
        dense.alpha *= 1.5;
        CHECK_THROWS_AS(analytic_reference(dense, s.z_r), PhysicsError);
    }

    TEST_CASE("split-step with zero nonlinearity is free-space propagation")
    {
        const Setup& s = setup();
        const TransverseField f = s.input(128);
        const TransverseField a = split_step_kerr(f, 0.0, 0.5 * s.z_r, 50);
        const TransverseField b = propagate_linear(f, FreeSpace{}, s.p.beam, 0.5 * s.z_r, 64).final;
        CHECK(max_diff(a, b) < 1e-10);
    }

    TEST_CASE("wide beam in a Kerr medium gains the plane-wave nonlinear phase")
    {
        const Setup& s = setup();
        BeamConfig wide = s.p.beam;
        wide.w_p = 1e-3;
        wide.omega_p0 = 1e6;
        const double z_r = wide.rayleigh_length(s.p.atom.lambda_p);
        const double z = 1e-3 * z_r;
        const double target = 1.0;  // rad
        const double chi3 = target / (0.5 * s.model.k_p * wide.omega_p0 * wide.omega_p0 * z);
        const TransverseField f = gaussian(wide, s.model.k_p, 128, 16.0 * wide.w_p);
        const TransverseField g = split_step_kerr(f, chi3, z, 200);
        const double phase = std::arg(g.at(64, 64));
        const double gouy = -std::atan(z / z_r);
        CHECK(phase == Approx(target + gouy).epsilon(5e-3));
    }

    TEST_CASE("split-step error falls as the square of the step")
    {
        const Setup& s = setup();
        const TransverseField f = s.input(128);
        const double chi3 = 3.0 / (0.5 * s.model.k_p * std::pow(s.p.beam.omega_p0, 2) * 0.2 * s.z_r);
        const double z = 0.2 * s.z_r;
        const TransverseField ref = split_step_kerr(f, chi3, z, 4096);
        const double e1 = max_diff(split_step_kerr(f, chi3, z, 64), ref);
        const double e2 = max_diff(split_step_kerr(f, chi3, z, 128), ref);
        const double order = std::log2(e1 / e2);
        CHECK(order == Approx(2.0).epsilon(0.1));
    }

    TEST_CASE("Kerr phase is strongly non-uniform across the beam")
    {
        const Setup& s = setup();
        const double z = 0.168 * s.z_r;
        const Trajectory t = propagate_kerr(s.input(), s.p.run.kerr_chi3, s.p.beam, z, 420, 84);
        REQUIRE(t.samples.size() == 85u);
        const BeamDiagnostics& d = t.samples.back().diagnostics;
        CHECK(d.uniformity > 0.5);
        CHECK(d.axis_phase == Approx(0.13 * constants::pi).epsilon(0.02));
        CHECK(d.power == Approx(1.0).epsilon(1e-10));
    }

    TEST_CASE("under-resolved Kerr step count is reported")
    {
        const Setup& s = setup();
        const double z = 0.168 * s.z_r;
        CHECK_THROWS_AS(propagate_kerr(s.input(128), 40.0 * s.p.run.kerr_chi3, s.p.beam, z, 4, 4), NumericalError);
    }

    TEST_CASE("configuration errors")
    {
        const Setup& s = setup();
        const TransverseField f = s.input(64);
        CHECK_THROWS_AS(propagate_linear(f, KerrMedium{1e-18}, s.p.beam, 0.01, 64), ConfigError);
        CHECK_THROWS_AS(propagate_linear(f, FreeSpace{}, s.p.beam, 0.01, 63), ConfigError);
        CHECK_THROWS_AS(propagate_linear(f, FreeSpace{}, s.p.beam, -1.0, 64), ConfigError);
        CHECK_THROWS_AS(propagate_kerr(f, 1e-18, s.p.beam, 0.01, 10, 11), ConfigError);
    }

    TEST_CASE("an aliased input is rejected")
    {
        const Setup& s = setup();
        TransverseField f = s.input(64);
        std::fill(f.data.begin(), f.data.end(), Complex{});
        f.at(32, 32) = 1.0;
        CHECK_THROWS_AS(propagate_linear(f, FreeSpace{}, s.p.beam, 0.01, 64), NumericalError);
    }

    TEST_CASE("trajectory CSV layout")
    {
        const Setup& s = setup();
        const Trajectory t = propagate_linear(s.input(64), FreeSpace{}, s.p.beam, 0.1 * s.z_r, 64);
        const std::string csv = trajectory_csv(t, s.z_r, s.p.beam.w_p);
        CHECK(csv.rfind("z_over_zR,power_rel,width_over_wp,axis_phase_over_pi,uniformity\n", 0) == 0);
        CHECK(std::count(csv.begin(), csv.end(), '\n') == 66);
    }
}

#include "lambda_beam/params.hpp"

#include "lambda_beam/constants.hpp"
#include "lambda_beam/errors.hpp"

#include <cmath>
#include <fmt/core.h>
#include <limits>

namespace lambda_beam {

namespace {

// Calibrated so the on-axis Kerr phase at z_f = 0.168 z_R is 0.13*pi for the
// Kerr comparison input (Omega_p0 = 0.1 Omega_c). See calibrate_kerr_chi3().
constexpr double calibrated_kerr_chi3 = 6.874949194530397e-18;

void require_finite(double value, const char* field)
{
    if (!std::isfinite(value))
        throw ConfigError(fmt::format("{} must be finite (got {})", field, value));
}

void require_non_negative(double value, const char* field)
{
    require_finite(value, field);
    if (value < 0.0)
        throw ConfigError(fmt::format("{} must be >= 0 (got {})", field, value));
}

void require_positive(double value, const char* field)
{
    require_finite(value, field);
    if (value <= 0.0)
        throw ConfigError(fmt::format("{} must be > 0 (got {})", field, value));
}

}  // namespace

double AtomSystem::k_p() const { return constants::two_pi / lambda_p; }

VaporEnv::VaporEnv() : mass(constants::rb87_mass) {}

RunConfig::RunConfig() : kerr_chi3(calibrated_kerr_chi3) {}

DriveConfig DriveConfig::with_two_photon_detuning(double delta) const
{
    DriveConfig out = *this;
    out.delta_p = delta + delta_c;
    return out;
}

double BeamConfig::rayleigh_length(double lambda_p) const
{
    return constants::two_pi * w_p * w_p / lambda_p;
}

double thermal_speed(double temperature, double mass)
{
    return std::sqrt(2.0 * constants::boltzmann * temperature / mass);
}

void check(const AtomSystem& atom)
{
    require_positive(atom.lambda_p, "atom.lambda_p");
    require_non_negative(atom.gamma31, "atom.Gamma31");
    require_non_negative(atom.gamma32, "atom.Gamma32");
    require_non_negative(atom.gamma41, "atom.Gamma41");
    require_non_negative(atom.gamma42, "atom.Gamma42");
    require_non_negative(atom.gamma21, "atom.gamma21");
}

void check(const VaporEnv& vapor)
{
    require_positive(vapor.v_th, "vapor.v_th");
    require_non_negative(vapor.gamma_c, "vapor.gamma_c");
    require_positive(vapor.n0, "vapor.n0");
    require_non_negative(vapor.delta_k, "vapor.delta_k");
    require_positive(vapor.mass, "vapor.mass");
    if (vapor.temperature) {
        require_non_negative(*vapor.temperature, "vapor.T");
        const double expected = thermal_speed(*vapor.temperature, vapor.mass);
        if (std::abs(vapor.v_th - expected) > 0.01 * expected)
            throw ConfigError(fmt::format(
                "vapor.v_th = {} m/s inconsistent with vapor.T = {} K (expected {} m/s within 1%)",
                vapor.v_th, *vapor.temperature, expected));
    }
}

void check(const DriveConfig& drive)
{
    require_non_negative(drive.omega_c, "drive.omega_c");
    require_non_negative(drive.pump_p, "drive.pump_p");
    require_finite(drive.delta_c, "drive.delta_c");
    require_finite(drive.delta_p, "drive.delta_p");
}

void check(const BeamConfig& beam)
{
    require_positive(beam.w_p, "beam.w_p");
    require_non_negative(beam.omega_p0, "beam.omega_p0");
}

void check(const GridConfig& grid)
{
    if (grid.n < 64 || (grid.n & (grid.n - 1)) != 0)
        throw ConfigError(fmt::format("grid.n must be a power of two >= 64 (got {})", grid.n));
    require_finite(grid.window_over_wp, "grid.window_over_wp");
    if (grid.window_over_wp < 8.0)
        throw ConfigError(
            fmt::format("grid.window_over_wp must be >= 8 (got {})", grid.window_over_wp));
}

void check(const RunConfig& run)
{
    require_positive(run.z_end_over_zr, "run.z_end_over_zR");
    if (run.samples < 64)
        throw ConfigError(fmt::format("run.samples must be >= 64 (got {})", run.samples));
    require_finite(run.kerr_chi3, "run.kerr_chi3");
    if (run.kerr_steps < 1)
        throw ConfigError(fmt::format("run.kerr_steps must be >= 1 (got {})", run.kerr_steps));
}

void check(const ParameterSet& params)
{
    check(params.atom);
    check(params.vapor);
    check(params.drive);
    check(params.beam);
    check(params.grid);
    check(params.run);
}

ValidityReport validate(const AtomSystem& atom, const VaporEnv& vapor, const DriveConfig& drive)
{
    check(atom);
    check(vapor);
    check(drive);

    ValidityReport report;
    const double doppler = vapor.delta_k * vapor.v_th;
    const double narrowing = drive.pump_p / 2.0 + vapor.gamma_c;
    if (doppler == 0.0)
        report.dicke_ratio = 0.0;
    else if (narrowing == 0.0)
        report.dicke_ratio = std::numeric_limits<double>::infinity();
    else
        report.dicke_ratio = doppler / narrowing;
    report.dicke_ok = report.dicke_ratio < dicke_threshold;
    if (!report.dicke_ok)
        report.warnings.push_back(fmt::format(
            "Dicke limit not satisfied: dk*v_th/(p/2+gamma_c) = {:.3g} >= {}", report.dicke_ratio,
            dicke_threshold));

    const double width = drive.pump_p / 2.0 + atom.gamma3() / 2.0 + vapor.gamma_c;
    report.resonance_ratio = width > 0.0 ? std::abs(drive.delta_p) / width
                                         : (drive.delta_p == 0.0 ? 0.0
                                                                 : std::numeric_limits<double>::infinity());
    report.resonance_ok = report.resonance_ratio < resonance_threshold;
    if (!report.resonance_ok)
        report.warnings.push_back(fmt::format(
            "probe far from one-photon resonance: |Delta_p|/(p/2+Gamma3/2+gamma_c) = {:.3g}; "
            "treating K31 as real is questionable",
            report.resonance_ratio));
    return report;
}

ParameterSet default_rb87_d1()
{
    ParameterSet params;
    const double gamma = constants::two_pi * 5.75e6;

    params.atom.lambda_p = 795e-9;
    params.atom.gamma31 = gamma / 4.0;
    params.atom.gamma32 = gamma / 6.0;
    params.atom.gamma41 = gamma / 12.0;
    params.atom.gamma42 = gamma / 2.0;
    params.atom.gamma21 = 0.001 * params.atom.gamma31;

    // 22.8 m^-1 is the hyperfine splitting over c (a cyclic wavenumber); the
    // angular mismatch is 2*pi times that.
    params.vapor.temperature = 300.0;
    params.vapor.v_th = 240.0;
    params.vapor.delta_k = constants::two_pi * 22.8;
    params.vapor.gamma_c = 2000.0 * params.vapor.delta_k * params.vapor.v_th;
    params.vapor.n0 = 1.5e12 * 1e6;

    params.drive.omega_c = 1.4 * params.atom.gamma31;
    params.drive.pump_p = 0.65 * params.atom.gamma31;
    params.drive.delta_c = 0.0;
    params.drive.delta_p = 0.0;

    params.beam.w_p = 100e-6;
    params.beam.omega_p0 = 0.1 * params.drive.omega_c;

    params.run.detuning = DetuningMode::optimal;
    return params;
}

}  // namespace lambda_beam

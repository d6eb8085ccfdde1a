#pragma once

// Physical parameter sets for the four-level double-Lambda vapor model.
//
// Unit convention: every rate, detuning and Rabi frequency is angular (rad/s).
// Lengths are SI metres, densities m^-3, wavenumbers rad/m.

#include <optional>
#include <string>
#include <vector>

namespace lambda_beam {

/// Level structure |1>,|2> (ground) and |3>,|4> (excited). Probe drives
/// |1>-|3>, control drives |2>-|3>, the incoherent pump couples |1>-|4>.
struct AtomSystem {
    double lambda_p = 0.0;  // probe wavelength (m)
    double gamma31 = 0.0;   // spontaneous decay |3> -> |1>
    double gamma32 = 0.0;
    double gamma41 = 0.0;
    double gamma42 = 0.0;
    double gamma21 = 0.0;   // ground-state dephasing

    double gamma3() const { return gamma31 + gamma32; }
    double gamma4() const { return gamma41 + gamma42; }
    double k_p() const;
};

struct VaporEnv {
    std::optional<double> temperature;  // K; when set, must agree with v_th
    double v_th = 0.0;                  // most probable thermal speed (m/s)
    double gamma_c = 0.0;               // velocity-changing collision rate
    double n0 = 0.0;                    // atomic number density (m^-3)
    double delta_k = 0.0;               // probe-control wavevector mismatch (rad/m)
    double mass;                        // kg, used for the T <-> v_th check

    VaporEnv();
};

struct DriveConfig {
    double omega_c = 0.0;  // control Rabi frequency
    double pump_p = 0.0;   // two-way incoherent pump rate
    double delta_c = 0.0;  // control detuning
    double delta_p = 0.0;  // probe detuning

    /// Two-photon (Raman) detuning.
    double delta() const { return delta_p - delta_c; }

    /// Returns a copy with the two-photon detuning set, keeping delta_c.
    DriveConfig with_two_photon_detuning(double delta) const;
};

struct BeamConfig {
    double w_p = 0.0;       // e^(-1/2) amplitude radius of the Gaussian input (m)
    double omega_p0 = 0.0;  // peak probe Rabi frequency

    /// 2*pi*w_p^2/lambda_p for the exp(-r^2/(2 w_p^2)) envelope.
    double rayleigh_length(double lambda_p) const;
};

struct GridConfig {
    int n = 512;                  // points per axis, power of two
    double window_over_wp = 16.0; // full window side length in units of w_p
};

enum class DetuningMode { fixed, optimal };

struct RunConfig {
    double z_end_over_zr = 1.0;
    int samples = 512;
    DetuningMode detuning = DetuningMode::optimal;
    bool complex_k31 = false;
    bool retune_delta = true;
    double kerr_chi3;  // s^2, so that (k_p/2) chi3 |Omega|^2 is rad/m
    int kerr_steps = 420;

    RunConfig();
};

struct ParameterSet {
    AtomSystem atom;
    VaporEnv vapor;
    DriveConfig drive;
    BeamConfig beam;
    GridConfig grid;
    RunConfig run;
};

struct ValidityReport {
    double dicke_ratio = 0.0;      // dk*v_th / (p/2 + gamma_c)
    bool dicke_ok = true;
    double resonance_ratio = 0.0;  // |Delta_p| / (p/2 + Gamma3/2 + gamma_c)
    bool resonance_ok = true;
    std::vector<std::string> warnings;
};

inline constexpr double dicke_threshold = 0.1;
inline constexpr double resonance_threshold = 0.1;

/// Most probable speed sqrt(2 k_B T / m).
double thermal_speed(double temperature, double mass);

void check(const AtomSystem& atom);
void check(const VaporEnv& vapor);
void check(const DriveConfig& drive);
void check(const BeamConfig& beam);
void check(const GridConfig& grid);
void check(const RunConfig& run);
void check(const ParameterSet& params);

/// Validates the individual types (throws ConfigError naming the offending
/// field) and reports the Dicke-limit and near-resonance ratios. Ratios above
/// threshold are warnings, not errors.
ValidityReport validate(const AtomSystem& atom, const VaporEnv& vapor, const DriveConfig& drive);

/// The 87Rb D1 operating point used throughout the phase-modulation study.
ParameterSet default_rb87_d1();

}  // namespace lambda_beam

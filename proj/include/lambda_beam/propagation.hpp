#pragma once

// Paraxial propagation of the transverse probe envelope: exact per-mode
// evolution for k-diagonal linear media and symmetric split-step for Kerr.

#include "lambda_beam/field.hpp"
#include "lambda_beam/susceptibility.hpp"

#include <filesystem>
#include <string>
#include <variant>
#include <vector>

namespace lambda_beam {

struct FreeSpace {};

struct ThermalVapor {
    ChiModel model;
};

/// k-independent susceptibility; a test medium for the uniform-evolution limit.
struct UniformMedium {
    Complex chi;
};

struct KerrMedium {
    double chi3 = 0.0;  // (k_p/2) chi3 |Omega|^2 is rad/m
};

using MediumSpec = std::variant<FreeSpace, ThermalVapor, UniformMedium, KerrMedium>;

struct TrajectorySample {
    double z = 0.0;
    BeamDiagnostics diagnostics;
};

struct Trajectory {
    std::vector<TrajectorySample> samples;  // z = 0 first, strictly increasing
    TransverseField final;
    std::vector<std::string> warnings;
};

enum class SampleMode {
    full,  // every sample is fully diagnosed
    axis,  // intermediate samples carry only power and axis phase (width and
           // uniformity are NaN); the final sample is fully diagnosed
};

/// Each spectral mode evolves by exp{[-i k^2/(2 k_p) + i (k_p/2) chi(k^2)] dz}
/// over each of the n_samples intervals. Requires a linear medium and
/// n_samples >= 64. Power in the diagnostics is relative to the input field.
/// A thermal-vapor run warns when more than 1e-6 of the spectral energy lies
/// above k1 and fails with NumericalError when more than 1e-3 lies in the
/// outer half of the grid band.
Trajectory propagate_linear(const TransverseField& f, const MediumSpec& medium, const BeamConfig& beam,
                            double z_end, int n_samples, SampleMode mode = SampleMode::full);

/// Symmetric split-step for
///   dz Omega = (i / 2k_p) laplacian Omega + i (k_p/2) chi3 |Omega|^2 Omega.
/// Runs a second pass at 2*steps and throws NumericalError if the final power,
/// width or axis phase differ by 0.1% or more.
Trajectory propagate_kerr(const TransverseField& f, double chi3, const BeamConfig& beam, double z_end,
                          int steps, int n_samples = 64);

/// The split-step integrator without the convergence check; returns the final field.
TransverseField split_step_kerr(const TransverseField& f, double chi3, double z_end, int steps);

struct AnalyticPrediction {
    double power = 1.0;  // relative
    double phase = 0.0;  // rad
};

/// Uniform evolution exp(i k_p c0 z / 2) under exact cancellation. Throws
/// PhysicsError if |cancellation residual| >= 1e-2.
AnalyticPrediction analytic_reference(const ChiModel& model, double z);

/// CSV with columns z_over_zR, power_rel, width_over_wp, axis_phase_over_pi, uniformity.
void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& t, double z_r, double w_p);
std::string trajectory_csv(const Trajectory& t, double z_r, double w_p);

}  // namespace lambda_beam

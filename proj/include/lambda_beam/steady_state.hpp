#pragma once

// Probe-free steady state of the four-level atom under the control field and
// the two-way incoherent pump.

#include "lambda_beam/params.hpp"

#include <Eigen/Dense>
#include <complex>

namespace lambda_beam {

enum class SteadySource { closed_form, numeric };

struct SteadyState {
    double rho11 = 0.0;
    double rho22 = 0.0;
    double rho33 = 0.0;
    double rho44 = 0.0;
    std::complex<double> rho23{};
    SteadySource source = SteadySource::numeric;
    /// Full density matrix, levels ordered |1>,|2>,|3>,|4>. Always filled from
    /// the Liouvillian solution.
    Eigen::Matrix4cd matrix = Eigen::Matrix4cd::Zero();

    double inversion() const { return rho11 - rho33; }
};

/// Closed-form populations and coherence for a resonant control field.
/// rho22 and rho44 are taken from steady_numeric(). Throws PhysicsError for
/// delta_c != 0 or for the dark configuration omega_c == 0 with p > 0.
SteadyState steady_closed(const AtomSystem& atom, const DriveConfig& drive);

/// Null vector of the 16x16 Lindblad Liouvillian, normalized to unit trace.
/// Throws NumericalError if the steady state is not unique (rank tolerance
/// 1e-9 relative to the largest singular value).
SteadyState steady_numeric(const AtomSystem& atom, const DriveConfig& drive);

/// steady_closed() where it applies, steady_numeric() otherwise.
SteadyState steady_state(const AtomSystem& atom, const DriveConfig& drive);

/// The Liouvillian in units of the scale rate (row-major vec(rho) basis,
/// index 4*i + j for rho_ij). Exposed for the property tests.
Eigen::Matrix<std::complex<double>, 16, 16> liouvillian(const AtomSystem& atom,
                                                        const DriveConfig& drive, double scale);

}  // namespace lambda_beam

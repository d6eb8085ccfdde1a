#pragma once

// Momentum-space linear susceptibility of the thermal double-Lambda vapor in
// the Dicke limit, its small-k expansion and the derived operating-point
// conditions (diffusion-free detuning, diffraction cancellation).

#include "lambda_beam/params.hpp"
#include "lambda_beam/steady_state.hpp"

#include <complex>
#include <optional>

namespace lambda_beam {

using Complex = std::complex<double>;

/// Velocity-averaged single-photon response.
struct Kernel31 {
    Complex g31;         // int F(v) / (Delta_p - k_p v + i(p/2 + Gamma3/2 + gamma_c)) dv  (s)
    Complex k31;         // i g31 / (1 - i gamma_c g31)  (s)
    double k31_real = 0; // Re k31
};

/// Doppler-broadened kernel by adaptive Gauss-Kronrod quadrature over
/// [-8 v_th, 8 v_th]; v_th == 0 takes the stationary-atom branch. Throws
/// NumericalError if the quadrature error estimate exceeds 1e-8 relative.
Kernel31 kernel31(const AtomSystem& atom, const VaporEnv& vapor, const DriveConfig& drive);

struct ChiOptions {
    bool complex_k31 = false;  // default: K31 replaced by its real part
};

struct ChiModel {
    Complex alpha;        // 3 lambda^3 Gamma31 K31 n0 / (8 pi^2)
    Complex gamma_cap_c;  // power broadening K31 Omega_c^2
    Complex gamma_cap_1;  // Gamma_c + p/2 + gamma21
    Complex diffusion;    // v_th^2 / (gamma_c + p/2 + gamma21 - i Delta); only D k^2 is physical
    SteadyState steady;
    Kernel31 kernel;

    double omega_c = 0.0;
    double pump_p = 0.0;
    double delta = 0.0;     // two-photon detuning
    double gamma_c = 0.0;
    double gamma21 = 0.0;
    double gamma_c1 = 0.0;  // gamma_c + p/2 + gamma21
    double v_th = 0.0;
    double k_p = 0.0;
    double n0 = 0.0;

    /// Gamma_c (rho11 - rho33) + i Omega_c rho23.
    Complex source() const;
};

ChiModel build_chi_model(const AtomSystem& atom, const VaporEnv& vapor, const DriveConfig& drive,
                         const SteadyState& steady, ChiOptions options = {});

/// Uses steady_state() for the populations.
ChiModel build_chi_model(const AtomSystem& atom, const VaporEnv& vapor, const DriveConfig& drive,
                         ChiOptions options = {});

/// chi(k_perp) = i alpha (rho11 - rho33 + source / (i Delta - Gamma1 - D k^2)).
Complex chi(double kperp2, const ChiModel& model);

/// The pump-free form i alpha (1 + Gamma_c / (i Delta - Gamma0 - D0 k^2)) with
/// Gamma0 = Gamma_c + gamma21 and D0 = v_th^2 / (gamma_c + gamma21 - i Delta).
Complex chi_no_pump(double kperp2, const ChiModel& model);

struct Expansion {
    Complex c0;
    Complex c1;
    double k1 = 0.0;        // sqrt(Gamma1 gamma_c1) / v_th
    double gamma_c1 = 0.0;
    std::optional<double> k0;      // sqrt(Gamma0 gamma_c) / v_th, only for p == 0
    std::optional<double> gamma0;  // Gamma_c + gamma21, only for p == 0
};

/// chi(k) = c0 + c1 k^2/k1^2 + O(k^4).
Expansion expansion(const ChiModel& model);

/// Coefficients of the pump-free expansion evaluated at Delta = -Gamma0:
/// chi ~ constant + quadratic * k^2/k0^2.
struct NoPumpExpansion {
    Complex constant;
    Complex quadratic;
    double k0 = 0.0;
};
NoPumpExpansion no_pump_expansion(const ChiModel& model);

/// -sqrt(gamma_c1 / (gamma_c1 + 2 Gamma1)) Gamma1 for the model's current
/// Gamma1; the root of Im[c1] for real K31.
double diffusion_free_detuning(const ChiModel& model);

struct DetuningSolution {
    double delta = 0.0;
    ChiModel model;
    int iterations = 0;
};

/// Self-consistent diffusion-free two-photon detuning: K31 is re-evaluated at
/// Delta_p = Delta + Delta_c until |dDelta| < 1e-9 Gamma31. With complex K31 a
/// secant refinement drives Im[c1] to zero afterwards. Throws NumericalError
/// after 100 iterations.
DetuningSolution optimal_detuning(const AtomSystem& atom, const VaporEnv& vapor,
                                  const DriveConfig& drive, ChiOptions options = {});

struct Cancellation {
    double n0_required = 0.0;  // density at which k_p^2 Re[c1] / k1^2 = 1
    double residual = 0.0;     // k_p^2 Re[c1] / k1^2 - 1 at the configured density
};

/// Throws PhysicsError when Re[c1] <= 0 (no diffraction dragging).
Cancellation cancellation_density(const ChiModel& model, const Expansion& exp);

/// Uniform phase (k_p / 2) Re[c0] z accumulated under exact cancellation.
double phase_law(const ChiModel& model, const Expansion& exp, double z);

}  // namespace lambda_beam

#include "lambda_beam/susceptibility.hpp"

#include "lambda_beam/constants.hpp"
#include "lambda_beam/errors.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <fmt/core.h>

namespace lambda_beam {

namespace {

constexpr Complex I{0.0, 1.0};
constexpr double quadrature_tolerance = 1e-10;
constexpr double quadrature_failure = 1e-8;
constexpr double velocity_cutoff = 8.0;  // in units of v_th
constexpr int max_fixed_point_iterations = 100;

Complex alpha_prefactor(const AtomSystem& atom, Complex k31, double n0)
{
    const double l = atom.lambda_p;
    return 3.0 * l * l * l * atom.gamma31 * k31 * n0 / (8.0 * constants::pi * constants::pi);
}

}  // namespace

Kernel31 kernel31(const AtomSystem& atom, const VaporEnv& vapor, const DriveConfig& drive)
{
    const double width = drive.pump_p / 2.0 + atom.gamma3() / 2.0 + vapor.gamma_c;
    Kernel31 out;

    if (vapor.v_th == 0.0) {
        out.g31 = 1.0 / Complex(drive.delta_p, width);
    } else {
        // Dimensionless velocity u = v / v_th; F(v) dv = exp(-u^2) du / sqrt(pi).
        const double doppler = atom.k_p() * vapor.v_th;
        auto integrand = [&](double u) -> Complex {
            return std::exp(-u * u) / (std::sqrt(constants::pi) * Complex(drive.delta_p - doppler * u, width));
        };
        using Quadrature = boost::math::quadrature::gauss_kronrod<double, 15>;
        auto integrate = [&](double a, double b, double& err) {
            double e = 0.0;
            const Complex r = Quadrature::integrate(integrand, a, b, 30, quadrature_tolerance, &e);
            err += e;
            return r;
        };

        double error = 0.0;
        // Split at the Doppler-resonant velocity so both pieces are smooth on
        // the scale of the subintervals.
        const double resonance = drive.delta_p / doppler;
        if (std::abs(resonance) < velocity_cutoff && resonance != 0.0)
            out.g31 = integrate(-velocity_cutoff, resonance, error) + integrate(resonance, velocity_cutoff, error);
        else
            out.g31 = integrate(-velocity_cutoff, velocity_cutoff, error);

        if (!(error <= quadrature_failure * std::abs(out.g31)))
            throw NumericalError(fmt::format(
                "G31 quadrature did not converge: error estimate {:.3e} relative", error / std::abs(out.g31)));
    }

    out.k31 = I * out.g31 / (1.0 - I * vapor.gamma_c * out.g31);
    out.k31_real = out.k31.real();
    return out;
}

Complex ChiModel::source() const
{
    return gamma_cap_c * steady.inversion() + I * omega_c * steady.rho23;
}

ChiModel build_chi_model(const AtomSystem& atom, const VaporEnv& vapor, const DriveConfig& drive,
                         const SteadyState& steady, ChiOptions options)
{
    ChiModel m;
    m.kernel = kernel31(atom, vapor, drive);
    const Complex k31 = options.complex_k31 ? m.kernel.k31 : Complex(m.kernel.k31_real, 0.0);

    m.steady = steady;
    m.omega_c = drive.omega_c;
    m.pump_p = drive.pump_p;
    m.delta = drive.delta();
    m.gamma_c = vapor.gamma_c;
    m.gamma21 = atom.gamma21;
    m.gamma_c1 = vapor.gamma_c + drive.pump_p / 2.0 + atom.gamma21;
    m.v_th = vapor.v_th;
    m.k_p = atom.k_p();
    m.n0 = vapor.n0;

    m.alpha = alpha_prefactor(atom, k31, vapor.n0);
    m.gamma_cap_c = k31 * drive.omega_c * drive.omega_c;
    m.gamma_cap_1 = m.gamma_cap_c + drive.pump_p / 2.0 + atom.gamma21;
    m.diffusion = vapor.v_th * vapor.v_th / Complex(m.gamma_c1, -m.delta);
    return m;
}

ChiModel build_chi_model(const AtomSystem& atom, const VaporEnv& vapor, const DriveConfig& drive,
                         ChiOptions options)
{
    return build_chi_model(atom, vapor, drive, steady_state(atom, drive), options);
}

Complex chi(double kperp2, const ChiModel& m)
{
    const Complex denom = I * m.delta - m.gamma_cap_1 - m.diffusion * kperp2;
    return I * m.alpha * (m.steady.inversion() + m.source() / denom);
}

Complex chi_no_pump(double kperp2, const ChiModel& m)
{
    const Complex gamma0 = m.gamma_cap_c + m.gamma21;
    const Complex d0 = m.v_th * m.v_th / Complex(m.gamma_c + m.gamma21, -m.delta);
    return I * m.alpha * (1.0 + m.gamma_cap_c / (I * m.delta - gamma0 - d0 * kperp2));
}

Expansion expansion(const ChiModel& m)
{
    Expansion e;
    const Complex pole = I * m.delta - m.gamma_cap_1;
    const Complex src = m.source();
    e.gamma_c1 = m.gamma_c1;
    e.c0 = I * m.alpha * (m.steady.inversion() + src / pole);
    e.c1 = I * m.alpha * m.gamma_cap_1 * m.gamma_c1 * src / (Complex(m.gamma_c1, -m.delta) * pole * pole);
    e.k1 = std::sqrt(m.gamma_cap_1.real() * m.gamma_c1) / m.v_th;
    if (m.pump_p == 0.0) {
        const double g0 = m.gamma_cap_c.real() + m.gamma21;
        e.gamma0 = g0;
        e.k0 = std::sqrt(g0 * m.gamma_c) / m.v_th;
    }
    return e;
}

NoPumpExpansion no_pump_expansion(const ChiModel& m)
{
    NoPumpExpansion out;
    const Complex gamma0 = m.gamma_cap_c + m.gamma21;
    const Complex ratio = m.gamma_cap_c / (2.0 * gamma0);
    out.constant = I * m.alpha * (1.0 - ratio) - m.alpha * ratio;
    out.quadratic = m.alpha * ratio;
    out.k0 = std::sqrt(gamma0.real() * m.gamma_c) / m.v_th;
    return out;
}

double diffusion_free_detuning(const ChiModel& m)
{
    const double g1 = m.gamma_cap_1.real();
    return -std::sqrt(m.gamma_c1 / (m.gamma_c1 + 2.0 * g1)) * g1;
}

DetuningSolution optimal_detuning(const AtomSystem& atom, const VaporEnv& vapor,
                                  const DriveConfig& drive, ChiOptions options)
{
    // The probe-free steady state does not depend on the two-photon detuning.
    const SteadyState steady = steady_state(atom, drive);

    auto model_at = [&](double delta) {
        return build_chi_model(atom, vapor, drive.with_two_photon_detuning(delta), steady, options);
    };

    const double tolerance = 1e-9 * (atom.gamma31 > 0.0 ? atom.gamma31 : 1.0);
    DetuningSolution sol;
    double delta = drive.delta();
    ChiModel model = model_at(delta);
    bool converged = false;
    for (int it = 1; it <= max_fixed_point_iterations; ++it) {
        const double next = diffusion_free_detuning(model);
        model = model_at(next);
        sol.iterations = it;
        const double step = next - delta;
        delta = next;
        if (std::abs(step) < tolerance) {
            converged = true;
            break;
        }
    }
    if (!converged)
        throw NumericalError("diffusion-free detuning: fixed-point iteration did not converge in 100 steps");

    if (options.complex_k31) {
        // Im[c1] no longer vanishes exactly at the closed-form detuning; secant on it.
        auto im_c1 = [&](double d) { return expansion(model_at(d)).c1.imag(); };
        double x0 = delta, x1 = delta * (1.0 + 1e-4);
        double f0 = im_c1(x0), f1 = im_c1(x1);
        for (int it = 0; it < max_fixed_point_iterations && f1 != f0; ++it) {
            const double x2 = x1 - f1 * (x1 - x0) / (f1 - f0);
            x0 = x1;
            f0 = f1;
            x1 = x2;
            f1 = im_c1(x1);
            if (std::abs(x1 - x0) < tolerance)
                break;
        }
        delta = x1;
        model = model_at(delta);
    }

    sol.delta = delta;
    sol.model = model;
    return sol;
}

Cancellation cancellation_density(const ChiModel& m, const Expansion& e)
{
    const double balance = m.k_p * m.k_p * e.c1.real() / (e.k1 * e.k1);
    if (!(e.c1.real() > 0.0))
        throw PhysicsError(fmt::format(
            "Re[c1] = {:.3e} <= 0: no diffraction dragging, cancellation impossible (check the sign of Delta)",
            e.c1.real()));
    Cancellation c;
    c.residual = balance - 1.0;
    c.n0_required = m.n0 / balance;
    return c;
}

double phase_law(const ChiModel& m, const Expansion& e, double z)
{
    return 0.5 * m.k_p * e.c0.real() * z;
}

}  // namespace lambda_beam

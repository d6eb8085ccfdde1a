#include "lambda_beam/propagation.hpp"

#include "lambda_beam/constants.hpp"
#include "lambda_beam/errors.hpp"

#include <cmath>
#include <fmt/core.h>
#include <fstream>
#include <functional>
#include <limits>

namespace lambda_beam {

namespace {

constexpr Complex I{0.0, 1.0};
constexpr double expansion_support_limit = 1e-6;
constexpr double outer_band_limit = 1e-3;
constexpr double kerr_step_tolerance = 1e-3;

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

// chi(k^2) for the linear media; the Kerr medium is rejected by the caller.
std::function<Complex(double)> linear_chi(const MediumSpec& medium)
{
    return std::visit(
        Overloaded{
            [](const FreeSpace&) -> std::function<Complex(double)> { return [](double) { return Complex{}; }; },
            [](const ThermalVapor& v) -> std::function<Complex(double)> {
                return [model = v.model](double k2) { return chi(k2, model); };
            },
            [](const UniformMedium& u) -> std::function<Complex(double)> {
                return [c = u.chi](double) { return c; };
            },
            [](const KerrMedium&) -> std::function<Complex(double)> {
                throw ConfigError("propagate_linear: the Kerr medium is not linear; use propagate_kerr");
            },
        },
        medium);
}

Complex spectral_center(const SpectralField& s)
{
    // Inverse unitary transform evaluated at the centre pixel only.
    Complex sum{};
    for (int a = 0; a < s.n; ++a) {
        Complex row{};
        const Complex* p = &s.data[static_cast<std::size_t>(a) * s.n];
        for (int b = 0; b < s.n; b += 2)
            row += p[b] - p[b + 1];
        sum += (a % 2 == 0) ? row : -row;
    }
    return sum / static_cast<double>(s.n);
}

double spectral_power(const SpectralField& s, double dx)
{
    double sum = 0.0;
    for (const auto& v : s.data)
        sum += std::norm(v);
    return sum * dx * dx;
}

void check_outer_band(const SpectralField& s, double z)
{
    const double frac = outer_band_fraction(s);
    if (frac > outer_band_limit)
        throw NumericalError(fmt::format(
            "spectral support: {:.3e} of the energy lies beyond half the grid Nyquist at z = {:.6g} m "
            "(refine the grid)",
            frac, z));
}

void check_sampling(const TransverseField& f, double z_end, int n_samples)
{
    if (f.n < 2 || f.data.size() != static_cast<std::size_t>(f.n) * f.n)
        throw ConfigError("field data does not match its grid size");
    if (!(z_end > 0.0) || !std::isfinite(z_end))
        throw ConfigError(fmt::format("z_end must be positive (got {})", z_end));
    if (n_samples < 1)
        throw ConfigError("sample count must be positive");
}

}  // namespace

Trajectory propagate_linear(const TransverseField& f, const MediumSpec& medium, const BeamConfig& beam,
                            double z_end, int n_samples, SampleMode mode)
{
    check_sampling(f, z_end, n_samples);
    if (n_samples < 64)
        throw ConfigError(fmt::format("propagate_linear needs at least 64 samples for phase unwrapping (got {})",
                                      n_samples));
    const auto chi_of = linear_chi(medium);

    Trajectory t;
    SpectralField s = to_spectrum(f);
    check_outer_band(s, f.z);
    if (const auto* vapor = std::get_if<ThermalVapor>(&medium)) {
        const double k1 = expansion(vapor->model).k1;
        const double frac = spectral_fraction_above(s, k1);
        if (frac > expansion_support_limit)
            t.warnings.push_back(fmt::format(
                "{:.3e} of the input spectral energy lies above k1 = {:.4g} rad/m; the small-k "
                "expansion picture does not apply to that part",
                frac, k1));
    }

    const double k_p = f.k_p;
    const double dz = z_end / n_samples;
    std::vector<Complex> step(s.data.size());
    for (int a = 0; a < s.n; ++a)
        for (int b = 0; b < s.n; ++b) {
            const double k2 = s.kperp2(a, b);
            const Complex rate = -I * k2 / (2.0 * k_p) + I * (k_p / 2.0) * chi_of(k2);
            step[static_cast<std::size_t>(a) * s.n + b] = std::exp(rate * dz);
        }

    const double reference = field_power(f);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    double phase = std::arg(f.at(f.n / 2, f.n / 2));
    t.samples.push_back({f.z, diagnose(f, beam, phase, reference)});
    phase = t.samples.back().diagnostics.axis_phase;

    for (int k = 1; k <= n_samples; ++k) {
        for (std::size_t m = 0; m < step.size(); ++m)
            s.data[m] *= step[m];
        const double z = f.z + z_end * k / n_samples;
        BeamDiagnostics d;
        if (mode == SampleMode::full || k == n_samples) {
            TransverseField g = from_spectrum(s, f.dx, z, k_p);
            d = diagnose(g, beam, phase, reference);
            if (k == n_samples)
                t.final = std::move(g);
        } else {
            d.power_abs = spectral_power(s, f.dx);
            d.power = d.power_abs / reference;
            d.width = d.width_moment = d.uniformity = nan;
            d.axis_phase = unwrap_phase(phase, spectral_center(s), z);
        }
        phase = d.axis_phase;
        t.samples.push_back({z, d});
    }
    check_outer_band(s, t.final.z);
    return t;
}

namespace {

// Advances `s` by `steps` symmetric split steps of size dz; `observe(k)` runs
// after step k with `s` holding the spectrum at that point.
template <class Observer>
void split_step_loop(SpectralField& s, double k_p, double chi3, double dz, int steps,
                     Observer&& observe)
{
    std::vector<Complex> half(s.data.size());
    for (int a = 0; a < s.n; ++a)
        for (int b = 0; b < s.n; ++b)
            half[static_cast<std::size_t>(a) * s.n + b] = std::exp(-I * s.kperp2(a, b) * dz / (4.0 * k_p));

    const double nl = 0.5 * k_p * chi3 * dz;
    std::vector<Complex> g(s.data.size());
    for (int k = 1; k <= steps; ++k) {
        for (std::size_t m = 0; m < g.size(); ++m)
            g[m] = s.data[m] * half[m];
        fft_inverse(g, s.n);
        if (chi3 != 0.0)
            for (auto& v : g)
                v *= std::polar(1.0, nl * std::norm(v));
        fft_forward(g, s.n);
        for (std::size_t m = 0; m < g.size(); ++m)
            s.data[m] = g[m] * half[m];
        observe(k);
    }
}

}  // namespace

TransverseField split_step_kerr(const TransverseField& f, double chi3, double z_end, int steps)
{
    check_sampling(f, z_end, steps);
    if (!std::isfinite(chi3))
        throw ConfigError("chi3 must be finite");
    SpectralField s = to_spectrum(f);
    split_step_loop(s, f.k_p, chi3, z_end / steps, steps, [](int) {});
    return from_spectrum(s, f.dx, f.z + z_end, f.k_p);
}

Trajectory propagate_kerr(const TransverseField& f, double chi3, const BeamConfig& beam, double z_end,
                          int steps, int n_samples)
{
    check_sampling(f, z_end, steps);
    if (!std::isfinite(chi3))
        throw ConfigError("chi3 must be finite");
    if (n_samples < 1 || n_samples > steps)
        throw ConfigError(fmt::format("Kerr sample count must lie in [1, steps] (got {})", n_samples));

    Trajectory t;
    const double reference = field_power(f);
    double phase = std::arg(f.at(f.n / 2, f.n / 2));
    t.samples.push_back({f.z, diagnose(f, beam, phase, reference)});
    phase = t.samples.back().diagnostics.axis_phase;

    SpectralField s = to_spectrum(f);
    check_outer_band(s, f.z);
    auto record = [&](int k) {
        // Record whenever k crosses the next of n_samples evenly spaced marks.
        const long long mark = static_cast<long long>(k) * n_samples / steps;
        const long long prev = static_cast<long long>(k - 1) * n_samples / steps;
        if (mark == prev)
            return;
        const double z = f.z + z_end * k / steps;
        TransverseField g = from_spectrum(s, f.dx, z, f.k_p);
        const BeamDiagnostics d = diagnose(g, beam, phase, reference);
        phase = d.axis_phase;
        t.samples.push_back({z, d});
        if (k == steps)
            t.final = std::move(g);
    };
    split_step_loop(s, f.k_p, chi3, z_end / steps, steps, record);
    check_outer_band(s, t.final.z);

    // Step-halving check on the final diagnostics.
    const TransverseField fine = split_step_kerr(f, chi3, z_end, 2 * steps);
    const BeamDiagnostics& coarse = t.samples.back().diagnostics;
    const BeamDiagnostics check = diagnose(fine, beam, coarse.axis_phase, reference);
    auto close = [](double a, double b) { return std::abs(a - b) <= kerr_step_tolerance * std::abs(b) + 1e-12; };
    if (!close(coarse.power, check.power) || !close(coarse.width, check.width) ||
        !close(coarse.axis_phase, check.axis_phase))
        throw NumericalError(fmt::format(
            "Kerr split-step not converged with {} steps: halving the step moves power {:.6g} -> {:.6g}, "
            "width {:.6g} -> {:.6g}, axis phase {:.6g} -> {:.6g}",
            steps, coarse.power, check.power, coarse.width, check.width, coarse.axis_phase, check.axis_phase));
    return t;
}

AnalyticPrediction analytic_reference(const ChiModel& model, double z)
{
    const Expansion e = expansion(model);
    const Cancellation c = cancellation_density(model, e);
    if (!(std::abs(c.residual) < 1e-2))
        throw PhysicsError(fmt::format(
            "analytic reference needs exact diffraction cancellation; residual is {:.3e} (n0* = {:.4g} m^-3)",
            c.residual, c.n0_required));
    AnalyticPrediction p;
    p.power = std::exp(-model.k_p * e.c0.imag() * z);
    p.phase = phase_law(model, e, z);
    return p;
}

std::string trajectory_csv(const Trajectory& t, double z_r, double w_p)
{
    std::string out = "z_over_zR,power_rel,width_over_wp,axis_phase_over_pi,uniformity\n";
    for (const auto& s : t.samples) {
        const auto& d = s.diagnostics;
        out += fmt::format("{:.17g},{:.17g},{:.17g},{:.17g},{:.17g}\n", s.z / z_r, d.power, d.width / w_p,
                           d.axis_phase / constants::pi, d.uniformity);
    }
    return out;
}

void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& t, double z_r, double w_p)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw ConfigError(fmt::format("cannot write {}", path.string()));
    out << trajectory_csv(t, z_r, w_p);
}

}  // namespace lambda_beam

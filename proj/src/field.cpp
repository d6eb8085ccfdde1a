#include "lambda_beam/field.hpp"

#include "lambda_beam/constants.hpp"
#include "lambda_beam/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fftw3.h>
#include <fmt/core.h>
#include <fmt/os.h>
#include <map>
#include <mutex>

namespace lambda_beam {

namespace {

// FFTW planning is not thread-safe; execution through the new-array API is.
// Plans are made once per (n, sign) and kept for the process lifetime.
class PlanCache {
public:
    fftw_plan get(int n, int sign)
    {
        std::lock_guard lock(mutex_);
        auto& plan = plans_[{n, sign}];
        if (!plan) {
            auto* buf = fftw_alloc_complex(static_cast<std::size_t>(n) * n);
            plan = fftw_plan_dft_2d(n, n, buf, buf, sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
            fftw_free(buf);
        }
        return plan;
    }

    ~PlanCache()
    {
        for (auto& [key, plan] : plans_)
            fftw_destroy_plan(plan);
    }

private:
    std::mutex mutex_;
    std::map<std::pair<int, int>, fftw_plan> plans_;
};

PlanCache& plan_cache()
{
    static PlanCache cache;
    return cache;
}

void transform(std::span<Complex> data, int n, int sign)
{
    auto* ptr = reinterpret_cast<fftw_complex*>(data.data());
    fftw_execute_dft(plan_cache().get(n, sign), ptr, ptr);
    const double scale = 1.0 / n;
    for (auto& v : data)
        v *= scale;
}

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

}  // namespace

void fft_forward(std::span<Complex> data, int n) { transform(data, n, FFTW_FORWARD); }
void fft_inverse(std::span<Complex> data, int n) { transform(data, n, FFTW_BACKWARD); }

TransverseField gaussian(const BeamConfig& beam, double k_p, int n, double window)
{
    if (n < 64 || !is_power_of_two(n))
        throw ConfigError(fmt::format("grid size must be a power of two >= 64 (got {})", n));
    if (!(window >= 8.0 * beam.w_p))
        throw ConfigError(fmt::format("window {} m is smaller than 8 w_p = {} m", window, 8.0 * beam.w_p));

    TransverseField f;
    f.n = n;
    f.dx = window / n;
    f.k_p = k_p;
    f.data.resize(static_cast<std::size_t>(n) * n);
    const double inv = 1.0 / (2.0 * beam.w_p * beam.w_p);
    for (int i = 0; i < n; ++i) {
        const double x = f.coord(i);
        for (int j = 0; j < n; ++j) {
            const double y = f.coord(j);
            f.at(i, j) = beam.omega_p0 * std::exp(-(x * x + y * y) * inv);
        }
    }
    return f;
}

SpectralField to_spectrum(const TransverseField& f)
{
    SpectralField s;
    s.n = f.n;
    s.dk = constants::two_pi / f.window();
    s.data = f.data;
    fft_forward(s.data, s.n);
    return s;
}

TransverseField from_spectrum(const SpectralField& s, double dx, double z, double k_p)
{
    TransverseField f;
    f.n = s.n;
    f.dx = dx;
    f.z = z;
    f.k_p = k_p;
    f.data = s.data;
    fft_inverse(f.data, f.n);
    return f;
}

double field_power(const TransverseField& f)
{
    // Trapezoid rule on the periodic grid reduces to the plain sum.
    double sum = 0.0;
    for (const auto& v : f.data)
        sum += std::norm(v);
    return sum * f.dx * f.dx;
}

double fit_gaussian_width(const TransverseField& f)
{
    const int row = f.n / 2;
    std::vector<double> xs(f.n), amp(f.n);
    double m0 = 0.0, m2 = 0.0, peak = 0.0;
    for (int i = 0; i < f.n; ++i) {
        xs[i] = f.coord(i);
        amp[i] = std::abs(f.at(i, row));
        m0 += amp[i] * amp[i];
        m2 += xs[i] * xs[i] * amp[i] * amp[i];
        peak = std::max(peak, amp[i]);
    }
    if (peak == 0.0)
        throw NumericalError("Gaussian width fit: field vanishes on the central row");

    // Levenberg-Marquardt on A exp(-x^2 / (2 w^2)).
    double a = peak;
    double w = std::sqrt(2.0 * m2 / m0);
    double lambda = 1e-3;
    auto cost = [&](double aa, double ww) {
        double c = 0.0;
        for (int i = 0; i < f.n; ++i) {
            const double r = aa * std::exp(-xs[i] * xs[i] / (2.0 * ww * ww)) - amp[i];
            c += r * r;
        }
        return c;
    };
    double current = cost(a, w);
    for (int it = 0; it < 500; ++it) {
        double jaa = 0.0, jaw = 0.0, jww = 0.0, ga = 0.0, gw = 0.0;
        for (int i = 0; i < f.n; ++i) {
            const double e = std::exp(-xs[i] * xs[i] / (2.0 * w * w));
            const double r = a * e - amp[i];
            const double da = e;
            const double dw = a * e * xs[i] * xs[i] / (w * w * w);
            jaa += da * da;
            jaw += da * dw;
            jww += dw * dw;
            ga += da * r;
            gw += dw * r;
        }
        const double m11 = jaa * (1.0 + lambda), m22 = jww * (1.0 + lambda);
        const double det = m11 * m22 - jaw * jaw;
        if (det == 0.0)
            break;
        const double step_a = -(m22 * ga - jaw * gw) / det;
        const double step_w = -(m11 * gw - jaw * ga) / det;
        const double trial = cost(a + step_a, w + step_w);
        if (trial <= current && w + step_w > 0.0) {
            a += step_a;
            w += step_w;
            const bool done = (std::abs(step_w) <= 1e-10 * w && std::abs(step_a) <= 1e-10 * a) ||
                              current - trial <= 1e-14 * current;
            current = trial;
            lambda = std::max(lambda * 0.1, 1e-12);
            if (done)
                return w;
        } else {
            lambda *= 10.0;
            if (lambda > 1e12)
                return w;  // no further descent possible at double precision
        }
    }
    throw NumericalError("Gaussian width fit did not converge");
}

Complex sample(const TransverseField& f, double x, double y)
{
    const double u = x / f.dx + f.n / 2;
    const double v = y / f.dx + f.n / 2;
    const int i0 = static_cast<int>(std::floor(u));
    const int j0 = static_cast<int>(std::floor(v));
    if (i0 < 0 || j0 < 0 || i0 + 1 >= f.n || j0 + 1 >= f.n)
        throw ConfigError(fmt::format("sample point ({}, {}) outside the grid", x, y));
    const double fu = u - i0, fv = v - j0;
    return (1 - fu) * (1 - fv) * f.at(i0, j0) + fu * (1 - fv) * f.at(i0 + 1, j0) +
           (1 - fu) * fv * f.at(i0, j0 + 1) + fu * fv * f.at(i0 + 1, j0 + 1);
}

double phase_at(const TransverseField& f, double axis_phase, double x, double y)
{
    const Complex center = f.at(f.n / 2, f.n / 2);
    return axis_phase + std::arg(sample(f, x, y) * std::conj(center));
}

double uniformity_ratio(double center_phase, double edge_phase)
{
    if (std::abs(center_phase) < 1e-9 && std::abs(edge_phase) < 1e-9)
        return 0.0;
    return (center_phase - edge_phase) / (center_phase + edge_phase);
}

double unwrap_phase(double prev_phase, Complex value, double z)
{
    const double step = std::arg(value * std::polar(1.0, -prev_phase));
    if (std::abs(step) >= constants::pi / 2.0)
        throw NumericalError(fmt::format(
            "axis phase unwrap violation at z = {:.6g} m: step {:.3f} rad >= pi/2 (sample z more densely)",
            z, step));
    return prev_phase + step;
}

BeamDiagnostics diagnose(const TransverseField& f, const BeamConfig& beam, double prev_phase,
                         std::optional<double> reference_power)
{
    BeamDiagnostics d;
    d.power_abs = field_power(f);
    const double reference =
        reference_power ? *reference_power : constants::pi * beam.w_p * beam.w_p * beam.omega_p0 * beam.omega_p0;
    d.power = d.power_abs / reference;

    d.axis_phase = unwrap_phase(prev_phase, f.at(f.n / 2, f.n / 2), f.z);

    d.width = fit_gaussian_width(f);
    {
        const int row = f.n / 2;
        double m0 = 0.0, m2 = 0.0;
        for (int i = 0; i < f.n; ++i) {
            const double a2 = std::norm(f.at(i, row));
            m0 += a2;
            m2 += f.coord(i) * f.coord(i) * a2;
        }
        d.width_moment = std::sqrt(2.0 * m2 / m0);
    }

    const double edge = phase_at(f, d.axis_phase, beam.w_p, beam.w_p);
    d.uniformity = uniformity_ratio(d.axis_phase, edge);
    return d;
}

double spectral_fraction_above(const SpectralField& s, double k_cut)
{
    double total = 0.0, above = 0.0;
    for (int i = 0; i < s.n; ++i)
        for (int j = 0; j < s.n; ++j) {
            const double e = std::norm(s.data[static_cast<std::size_t>(i) * s.n + j]);
            total += e;
            if (s.kperp2(i, j) > k_cut * k_cut)
                above += e;
        }
    return total > 0.0 ? above / total : 0.0;
}

double spectral_fraction_above(const TransverseField& f, double k_cut)
{
    return spectral_fraction_above(to_spectrum(f), k_cut);
}

double outer_band_fraction(const SpectralField& s)
{
    const double k_half = 0.25 * s.n * s.dk;  // half the Nyquist wavenumber
    double total = 0.0, outer = 0.0;
    for (int i = 0; i < s.n; ++i)
        for (int j = 0; j < s.n; ++j) {
            const double e = std::norm(s.data[static_cast<std::size_t>(i) * s.n + j]);
            total += e;
            if (std::max(std::abs(s.k(i)), std::abs(s.k(j))) > k_half)
                outer += e;
        }
    return total > 0.0 ? outer / total : 0.0;
}

double outer_band_fraction(const TransverseField& f) { return outer_band_fraction(to_spectrum(f)); }

void write_field_csv(const std::filesystem::path& path, const TransverseField& f)
{
    auto out = fmt::output_file(path.string());
    out.print("x,y,re,im\n");
    for (int i = 0; i < f.n; ++i)
        for (int j = 0; j < f.n; ++j)
            out.print("{:.17g},{:.17g},{:.17g},{:.17g}\n", f.coord(i), f.coord(j), f.at(i, j).real(),
                      f.at(i, j).imag());
}

void write_phase_map_csv(const std::filesystem::path& path, const TransverseField& f,
                         double axis_phase, double w_p, double half_width, int stride)
{
    auto out = fmt::output_file(path.string());
    out.print("x_over_wp,y_over_wp,phase_over_pi\n");
    const Complex center = f.at(f.n / 2, f.n / 2);
    const int c = f.n / 2;
    const int reach = std::min(c - 1, static_cast<int>(std::floor(half_width / f.dx)));
    const int start = -(reach / stride) * stride;
    for (int di = start; di <= reach; di += stride)
        for (int dj = start; dj <= reach; dj += stride) {
            const double phase = axis_phase + std::arg(f.at(c + di, c + dj) * std::conj(center));
            out.print("{:.17g},{:.17g},{:.17g}\n", di * f.dx / w_p, dj * f.dx / w_p,
                      phase / constants::pi);
        }
}

}  // namespace lambda_beam

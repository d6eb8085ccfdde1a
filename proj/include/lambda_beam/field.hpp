#pragma once

// Transverse complex field grids, unitary 2-D transforms and beam diagnostics.

#include "lambda_beam/params.hpp"

#include <complex>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

namespace lambda_beam {

using Complex = std::complex<double>;

/// Complex envelope on an n x n grid. Element (i, j) sits at
/// x = (i - n/2) dx, y = (j - n/2) dx, so the centre pixel is (n/2, n/2).
struct TransverseField {
    int n = 0;
    double dx = 0.0;
    double z = 0.0;
    double k_p = 0.0;
    std::vector<Complex> data;  // row-major, index i*n + j

    Complex& at(int i, int j) { return data[static_cast<std::size_t>(i) * n + j]; }
    const Complex& at(int i, int j) const { return data[static_cast<std::size_t>(i) * n + j]; }
    double coord(int i) const { return (i - n / 2) * dx; }
    double window() const { return n * dx; }
};

/// Spectrum in FFT ordering: index i carries k = dk * (i < n/2 ? i : i - n).
struct SpectralField {
    int n = 0;
    double dk = 0.0;
    std::vector<Complex> data;

    double k(int i) const { return dk * (i < n / 2 ? i : i - n); }
    double kperp2(int i, int j) const { return k(i) * k(i) + k(j) * k(j); }
};

/// Samples Omega_p0 exp(-(x^2+y^2)/(2 w_p^2)) centred on the grid at z = 0.
/// Throws ConfigError for window < 8 w_p, n < 64 or n not a power of two.
TransverseField gaussian(const BeamConfig& beam, double k_p, int n, double window);

/// Unitary forward / inverse 2-D DFT (both scaled by 1/n).
SpectralField to_spectrum(const TransverseField& f);
TransverseField from_spectrum(const SpectralField& s, double dx, double z, double k_p);

/// In-place unitary transforms on raw n*n buffers.
void fft_forward(std::span<Complex> data, int n);
void fft_inverse(std::span<Complex> data, int n);

struct BeamDiagnostics {
    double power = 0.0;         // relative to the reference power
    double power_abs = 0.0;     // trapezoid integral of |Omega|^2 dx dy
    double width = 0.0;         // least-squares Gaussian fit to |Omega(x, 0)| (m)
    double width_moment = 0.0;  // sqrt(2 <x^2>) of |Omega(x, 0)|^2 (m)
    double axis_phase = 0.0;    // unwrapped phase at the centre pixel (rad)
    double uniformity = 0.0;    // (phi(0,0) - phi(w_p,w_p)) / (phi(0,0) + phi(w_p,w_p))
};

/// Power relative to `reference_power`, or to pi w_p^2 Omega_p0^2 (the input
/// Gaussian) when not given. The axis phase is unwrapped against
/// `prev_phase`; a step of pi/2 or more throws NumericalError.
BeamDiagnostics diagnose(const TransverseField& f, const BeamConfig& beam, double prev_phase = 0.0,
                         std::optional<double> reference_power = {});

double field_power(const TransverseField& f);
double fit_gaussian_width(const TransverseField& f);

/// Bilinear interpolation of the complex field at (x, y).
Complex sample(const TransverseField& f, double x, double y);

/// Phase at (x, y), continued from the unwrapped centre phase `axis_phase`.
double phase_at(const TransverseField& f, double axis_phase, double x, double y);

double uniformity_ratio(double center_phase, double edge_phase);

/// prev_phase + arg(value e^{-i prev_phase}); throws NumericalError when that
/// step reaches pi/2. `z` only labels the error.
double unwrap_phase(double prev_phase, Complex value, double z);

/// Fraction of spectral energy with |k_perp| > k_cut.
double spectral_fraction_above(const TransverseField& f, double k_cut);
double spectral_fraction_above(const SpectralField& s, double k_cut);

/// Fraction of spectral energy with max(|k_x|, |k_y|) above half the grid
/// Nyquist wavenumber; an aliasing proxy.
double outer_band_fraction(const TransverseField& f);
double outer_band_fraction(const SpectralField& s);

/// CSV with columns x, y, re, im.
void write_field_csv(const std::filesystem::path& path, const TransverseField& f);

/// CSV with columns x_over_wp, y_over_wp, phase_over_pi for |x|,|y| <= half_width,
/// every `stride`-th grid point.
void write_phase_map_csv(const std::filesystem::path& path, const TransverseField& f,
                         double axis_phase, double w_p, double half_width, int stride = 1);

}  // namespace lambda_beam

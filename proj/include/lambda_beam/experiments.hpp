#pragma once

// Scan harness and figure drivers. Every driver writes CSV files plus a
// manifest.json and config.ini into its output directory.

#include "lambda_beam/params.hpp"
#include "lambda_beam/propagation.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace lambda_beam {

inline constexpr const char* tool_version = "0.1.0";

enum class ScanVariable { omega_c, pump_p, z };

std::string_view to_string(ScanVariable v);

/// lo/hi are rad/s for omega_c and pump_p and units of z_R for z.
struct ScanAxis {
    ScanVariable variable = ScanVariable::omega_c;
    double lo = 0.0;
    double hi = 0.0;
    int points = 2;

    double value(int i) const;
};

struct ScanSpec {
    std::vector<ScanAxis> axes;  // one or two; with two the second varies fastest
    ParameterSet base;
    std::filesystem::path output_dir;
    int samples = 128;           // propagation samples per point (unwrap density only)
    bool retune_delta = true;    // re-solve the diffusion-free detuning at every point
};

void check(const ScanSpec& spec);

/// Operating-point outcome of one propagation.
struct PointResult {
    bool ok = false;
    std::string error;
    double delta = 0.0;      // two-photon detuning used (rad/s)
    double z = 0.0;          // propagation distance (m)
    double phase = 0.0;      // unwrapped axis phase at z (rad)
    double ln_power = 0.0;   // ln(P(z)/P(0))
    double width_ratio = 0.0;
    double rho11 = 0.0;
    double rho33 = 0.0;
    double im_rho23 = 0.0;
};

struct ScanPoint {
    std::vector<double> coords;  // axis values in the units of ScanAxis
    PointResult result;
};

struct ScanResult {
    std::vector<ScanPoint> points;  // row-major in axis order
    std::string csv;
};

/// Diffusion-free detuning of `params` (self-consistent in K31).
double base_detuning(const ParameterSet& params);

/// Propagates the configured Gaussian to z with the given two-photon detuning.
/// Failures are caught and reported in the result.
PointResult evaluate_point(const ParameterSet& params, double delta, double z, int samples);

/// Runs every point (in parallel, see worker_count()) and assembles the CSV
/// in index order. Does not touch the file system.
ScanResult run_scan(const ScanSpec& spec);

/// run_scan plus scan.csv, config.ini and manifest.json in spec.output_dir.
ScanResult run_scan_to_disk(const ScanSpec& spec);

/// min(LAMBDA_BEAM_THREADS or hardware concurrency, tasks), at least 1.
int worker_count(std::size_t tasks);

/// Parses a configuration file that carries an additional [scan] section:
///   variable = omega_c | pump_p | z | "omega_c, pump_p" ...
///   omega_c = lo, hi, points   (same unit suffixes as the config)
///   output = DIR, samples = N, retune_delta = true|false
ScanSpec parse_scan_spec(std::string_view text);
ScanSpec load_scan_spec(const std::filesystem::path& path);

/// Config snapshot plus a [scan] section; what the manifest hashes.
std::string serialize_scan_spec(const ScanSpec& spec);

struct RunManifest {
    std::string config_text;
    std::string config_sha256;
    std::string version = tool_version;
    std::vector<std::string> point_status;
    std::string created;  // UTC timestamp, excluded from determinism checks

    std::string to_json() const;
};

std::string sha256_hex(std::string_view bytes);

/// Writes config.ini (the snapshot) and manifest.json into `dir`.
RunManifest write_manifest(const std::filesystem::path& dir, const std::string& config_text,
                           const std::vector<std::string>& point_status);

// ---- figure drivers -------------------------------------------------------

struct Figure3Result {
    Trajectory trajectory;
    double delta = 0.0;
    double z_r = 0.0;
    std::optional<double> z_flip_over_zr;  // first |phase| = pi crossing
    double max_width_deviation = 0.0;      // max |w/w_p - 1| over the run
    double ln_power_end = 0.0;
    double phase_end = 0.0;
    Cancellation cancellation;
    std::optional<AnalyticPrediction> analytic_end;  // when the residual allows it
};

/// Full-diagnostic propagation of the configured beam to z_end_over_zR * z_R
/// with run.samples samples. Detuning per run.detuning.
Figure3Result run_trajectory(const ParameterSet& params);

/// run_trajectory with at least 512 samples to z_R; writes figure3.csv when
/// `out` is given.
Figure3Result figure3(const ParameterSet& params, const std::optional<std::filesystem::path>& out = {});

/// Default scans behind the control (4), pump (5) and two-dimensional (6) figures.
ScanSpec figure_scan_spec(int figure, const ParameterSet& params, const std::filesystem::path& out);

struct Figure7Result {
    Trajectory free_space;
    Trajectory kerr;
    Trajectory vapor;
    double z_f = 0.0;
    double chi3 = 0.0;
};

/// Free space, Kerr and vapor to z_f = 0.168 z_R from the same Gaussian.
/// Writes phase maps and phase_difference.csv (from z = 0.002 z_R) when `out` is given.
Figure7Result figure7(const ParameterSet& params, const std::optional<std::filesystem::path>& out = {});

inline constexpr double figure7_z_f_over_zr = 0.168;
inline constexpr double kerr_target_phase_over_pi = 0.13;

/// chi3 for which the split-step Kerr axis phase at z_f is 0.13 pi for the
/// configured beam with Omega_p0 = 0.1 Omega_c.
double calibrate_kerr_chi3(const ParameterSet& params);

/// Pump rate for which the cancellation residual vanishes (detuning re-solved
/// at each trial p), searched in [lo, hi].
double solve_pump_for_cancellation(const ParameterSet& params, double lo, double hi);

}  // namespace lambda_beam

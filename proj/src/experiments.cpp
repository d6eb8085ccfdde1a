#include "lambda_beam/experiments.hpp"

#include "lambda_beam/config.hpp"
#include "lambda_beam/constants.hpp"
#include "lambda_beam/errors.hpp"

#include <algorithm>
#include <atomic>
#include <boost/math/tools/roots.hpp>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fmt/chrono.h>
#include <fmt/core.h>
#include <fstream>
#include <json.hpp>
#include <limits>
#include <openssl/evp.h>
#include <thread>

namespace lambda_beam {

namespace {

constexpr double nan = std::numeric_limits<double>::quiet_NaN();
constexpr int figure7_samples = 84;  // z_f / 84 = 0.002 z_R, the first plotted point

void write_text(const std::filesystem::path& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw ConfigError(fmt::format("cannot write {}", path.string()));
    out << text;
}

void ensure_dir(const std::filesystem::path& dir)
{
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec)
        throw ConfigError(fmt::format("cannot create output directory {}: {}", dir.string(), ec.message()));
}

std::string csv_safe(std::string s)
{
    std::replace(s.begin(), s.end(), ',', ';');
    std::replace(s.begin(), s.end(), '\n', ' ');
    std::replace(s.begin(), s.end(), '"', '\'');
    return s;
}

std::string column_name(ScanVariable v)
{
    switch (v) {
    case ScanVariable::omega_c:
        return "omega_c_over_G31";
    case ScanVariable::pump_p:
        return "p_over_G31";
    case ScanVariable::z:
        return "z_over_zR";
    }
    return {};
}

TransverseField input_field(const ParameterSet& p)
{
    return gaussian(p.beam, p.atom.k_p(), p.grid.n, p.grid.window_over_wp * p.beam.w_p);
}

ChiOptions chi_options(const ParameterSet& p) { return {p.run.complex_k31}; }

int figure7_kerr_steps(const ParameterSet& p)
{
    const int steps = std::max(p.run.kerr_steps, figure7_samples);
    return (steps + figure7_samples - 1) / figure7_samples * figure7_samples;
}

BeamConfig figure7_beam(const ParameterSet& p)
{
    BeamConfig beam = p.beam;
    beam.omega_p0 = 0.1 * p.drive.omega_c;
    return beam;
}

}  // namespace

std::string_view to_string(ScanVariable v)
{
    switch (v) {
    case ScanVariable::omega_c:
        return "omega_c";
    case ScanVariable::pump_p:
        return "pump_p";
    case ScanVariable::z:
        return "z";
    }
    return "?";
}

double ScanAxis::value(int i) const
{
    if (i == points - 1)
        return hi;
    return lo + (hi - lo) * i / (points - 1);
}

void check(const ScanSpec& spec)
{
    if (spec.axes.empty() || spec.axes.size() > 2)
        throw ConfigError(fmt::format("a scan needs one or two variables (got {})", spec.axes.size()));
    if (spec.axes.size() == 2 && spec.axes[0].variable == spec.axes[1].variable)
        throw ConfigError("the two scan variables must differ");
    for (const auto& a : spec.axes) {
        const auto name = to_string(a.variable);
        if (a.points < 2)
            throw ConfigError(fmt::format("scan {}: points must be >= 2 (got {})", name, a.points));
        if (!(a.lo < a.hi))
            throw ConfigError(fmt::format("scan {}: lo must be below hi", name));
        if (a.lo < 0.0 || (a.variable == ScanVariable::z && a.lo <= 0.0))
            throw ConfigError(fmt::format("scan {}: range must be positive", name));
    }
    if (spec.samples < 64)
        throw ConfigError(fmt::format("scan samples must be >= 64 (got {})", spec.samples));
    check(spec.base);
}

double base_detuning(const ParameterSet& params)
{
    if (params.run.detuning == DetuningMode::fixed)
        return params.drive.delta();
    return optimal_detuning(params.atom, params.vapor, params.drive, chi_options(params)).delta;
}

PointResult evaluate_point(const ParameterSet& params, double delta, double z, int samples)
{
    PointResult r;
    r.delta = delta;
    r.z = z;
    try {
        const DriveConfig drive = params.drive.with_two_photon_detuning(delta);
        const ChiModel model = build_chi_model(params.atom, params.vapor, drive, chi_options(params));
        r.rho11 = model.steady.rho11;
        r.rho33 = model.steady.rho33;
        r.im_rho23 = model.steady.rho23.imag();
        const Trajectory t =
            propagate_linear(input_field(params), ThermalVapor{model}, params.beam, z, samples, SampleMode::axis);
        const auto& d = t.samples.back().diagnostics;
        r.phase = d.axis_phase;
        r.ln_power = std::log(d.power);
        r.width_ratio = d.width / params.beam.w_p;
        r.ok = true;
    } catch (const std::exception& e) {
        r.ok = false;
        r.error = e.what();
        r.phase = r.ln_power = r.width_ratio = nan;
    }
    return r;
}

int worker_count(std::size_t tasks)
{
    int n = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    if (const char* env = std::getenv("LAMBDA_BEAM_THREADS"); env && *env) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (*end != '\0' || v < 1)
            throw ConfigError(fmt::format("LAMBDA_BEAM_THREADS must be a positive integer (got '{}')", env));
        n = static_cast<int>(std::min<long>(v, 1024));
    }
    return std::max(1, std::min<int>(n, static_cast<int>(std::max<std::size_t>(tasks, 1))));
}

ScanResult run_scan(const ScanSpec& spec)
{
    check(spec);
    const double z_r = spec.base.beam.rayleigh_length(spec.base.atom.lambda_p);
    const bool fixed_mode = spec.base.run.detuning == DetuningMode::fixed;
    const double delta0 = (fixed_mode || spec.retune_delta) ? spec.base.drive.delta() : base_detuning(spec.base);

    std::vector<std::vector<double>> coords;
    const auto& a0 = spec.axes[0];
    for (int i = 0; i < a0.points; ++i) {
        if (spec.axes.size() == 1) {
            coords.push_back({a0.value(i)});
            continue;
        }
        for (int j = 0; j < spec.axes[1].points; ++j)
            coords.push_back({a0.value(i), spec.axes[1].value(j)});
    }

    ScanResult result;
    result.points.resize(coords.size());
    auto work = [&](std::size_t idx) {
        ParameterSet p = spec.base;
        double z = spec.base.run.z_end_over_zr * z_r;
        for (std::size_t k = 0; k < spec.axes.size(); ++k) {
            switch (spec.axes[k].variable) {
            case ScanVariable::omega_c:
                p.drive.omega_c = coords[idx][k];
                break;
            case ScanVariable::pump_p:
                p.drive.pump_p = coords[idx][k];
                break;
            case ScanVariable::z:
                z = coords[idx][k] * z_r;
                break;
            }
        }
        ScanPoint& out = result.points[idx];
        out.coords = coords[idx];
        double delta = delta0;
        if (!fixed_mode && spec.retune_delta) {
            try {
                delta = optimal_detuning(p.atom, p.vapor, p.drive, chi_options(p)).delta;
            } catch (const std::exception& e) {
                out.result.ok = false;
                out.result.error = e.what();
                out.result.phase = out.result.ln_power = out.result.width_ratio = nan;
                return;
            }
        }
        out.result = evaluate_point(p, delta, z, spec.samples);
    };

    const int workers = worker_count(coords.size());
    std::atomic<std::size_t> next{0};
    auto loop = [&] {
        for (std::size_t idx = next++; idx < coords.size(); idx = next++)
            work(idx);
    };
    if (workers == 1) {
        loop();
    } else {
        std::vector<std::jthread> pool;
        for (int w = 0; w < workers; ++w)
            pool.emplace_back(loop);
    }

    // Single writer, index order.
    const double g31 = spec.base.atom.gamma31;
    std::string csv;
    for (const auto& a : spec.axes)
        csv += column_name(a.variable) + ",";
    csv += "phase_over_pi,ln_power,width_over_wp,delta_over_G31,rho11,rho33,im_rho23,status\n";
    for (const auto& pt : result.points) {
        for (std::size_t k = 0; k < spec.axes.size(); ++k) {
            const double scale = spec.axes[k].variable == ScanVariable::z ? 1.0 : g31;
            csv += fmt::format("{:.17g},", pt.coords[k] / scale);
        }
        const auto& r = pt.result;
        csv += fmt::format("{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{}\n", r.phase / constants::pi,
                           r.ln_power, r.width_ratio, r.delta / g31, r.rho11, r.rho33, r.im_rho23,
                           r.ok ? std::string("ok") : "failed: " + csv_safe(r.error));
    }
    result.csv = std::move(csv);
    return result;
}

ScanResult run_scan_to_disk(const ScanSpec& spec)
{
    ScanResult r = run_scan(spec);
    ensure_dir(spec.output_dir);
    write_text(spec.output_dir / "scan.csv", r.csv);
    std::vector<std::string> status;
    for (const auto& p : r.points)
        status.push_back(p.result.ok ? "ok" : p.result.error);
    write_manifest(spec.output_dir, serialize_scan_spec(spec), status);
    return r;
}

ScanSpec parse_scan_spec(std::string_view text)
{
    const IniDocument doc = parse_ini(text);
    const std::vector<std::string> extra{"scan"};
    ScanSpec spec;
    spec.base = parameters_from(doc, extra);
    spec.retune_delta = spec.base.run.retune_delta;
    spec.output_dir = "scan-output";

    const auto* section = doc.section("scan");
    if (!section)
        throw ConfigError("scan spec has no [scan] section");
    std::vector<ScanVariable> variables;
    std::map<std::string, std::string> ranges;
    auto parse_variable = [](std::string name) {
        name.erase(0, name.find_first_not_of(" \t"));
        name.erase(name.find_last_not_of(" \t") + 1);
        if (name == "omega_c")
            return ScanVariable::omega_c;
        if (name == "pump_p")
            return ScanVariable::pump_p;
        if (name == "z")
            return ScanVariable::z;
        throw ConfigError(fmt::format("[scan] variable: unknown variable '{}' (omega_c, pump_p, z)", name));
    };
    for (const auto& e : *section) {
        if (e.key == "variable") {
            std::string_view rest = e.value;
            while (!rest.empty()) {
                const auto comma = rest.find(',');
                variables.push_back(parse_variable(std::string(rest.substr(0, comma))));
                if (comma == std::string_view::npos)
                    break;
                rest.remove_prefix(comma + 1);
            }
        } else if (e.key == "omega_c" || e.key == "pump_p" || e.key == "z") {
            ranges[e.key] = e.value;
        } else if (e.key == "output") {
            spec.output_dir = e.value;
        } else if (e.key == "samples") {
            char* end = nullptr;
            const long v = std::strtol(e.value.c_str(), &end, 10);
            if (*end != '\0')
                throw ConfigError(fmt::format("[scan] samples (line {}): not an integer", e.line));
            spec.samples = static_cast<int>(v);
        } else if (e.key == "retune_delta") {
            if (e.value == "true")
                spec.retune_delta = true;
            else if (e.value == "false")
                spec.retune_delta = false;
            else
                throw ConfigError(fmt::format("[scan] retune_delta (line {}): expected true or false", e.line));
        } else {
            throw ConfigError(fmt::format("[scan] unknown key '{}' (line {})", e.key, e.line));
        }
    }
    for (ScanVariable v : variables) {
        const std::string name(to_string(v));
        const auto it = ranges.find(name);
        if (it == ranges.end())
            throw ConfigError(fmt::format("[scan] variable {} has no range (expected {} = lo, hi, points)", name, name));
        std::vector<std::string> parts;
        std::string_view rest = it->second;
        while (true) {
            const auto comma = rest.find(',');
            parts.emplace_back(rest.substr(0, comma));
            if (comma == std::string_view::npos)
                break;
            rest.remove_prefix(comma + 1);
        }
        if (parts.size() != 3)
            throw ConfigError(fmt::format("[scan] {}: expected lo, hi, points", name));
        ScanAxis axis;
        axis.variable = v;
        const bool rate = v != ScanVariable::z;
        const std::string field = "scan." + name;
        axis.lo = parse_quantity(parts[0], spec.base.atom.gamma31, rate, field);
        axis.hi = parse_quantity(parts[1], spec.base.atom.gamma31, rate, field);
        const double pts = parse_quantity(parts[2], 0.0, false, field);
        if (pts != std::floor(pts))
            throw ConfigError(fmt::format("[scan] {}: points must be an integer", name));
        axis.points = static_cast<int>(pts);
        spec.axes.push_back(axis);
    }
    check(spec);
    return spec;
}

ScanSpec load_scan_spec(const std::filesystem::path& path) { return parse_scan_spec(read_text_file(path)); }

std::string serialize_scan_spec(const ScanSpec& spec)
{
    std::string out = serialize_config(spec.base);
    out += "\n[scan]\nvariable = ";
    for (std::size_t k = 0; k < spec.axes.size(); ++k)
        out += (k ? ", " : "") + std::string(to_string(spec.axes[k].variable));
    out += "\n";
    for (const auto& a : spec.axes)
        out += fmt::format("{} = {:.17g}, {:.17g}, {}\n", to_string(a.variable), a.lo, a.hi, a.points);
    out += fmt::format("samples = {}\nretune_delta = {}\n", spec.samples, spec.retune_delta ? "true" : "false");
    return out;
}

std::string sha256_hex(std::string_view bytes)
{
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
        throw NumericalError("SHA-256 digest failed");
    std::string hex;
    for (unsigned int i = 0; i < len; ++i)
        hex += fmt::format("{:02x}", digest[i]);
    return hex;
}

std::string RunManifest::to_json() const
{
    nlohmann::json j;
    j["tool"] = "lambda-beam";
    j["version"] = version;
    j["created"] = created;
    j["config_file"] = "config.ini";
    j["config_sha256"] = config_sha256;
    j["config"] = config_text;
    auto points = nlohmann::json::array();
    for (std::size_t i = 0; i < point_status.size(); ++i)
        points.push_back({{"index", i}, {"status", point_status[i] == "ok" ? "ok" : "failed"},
                          {"message", point_status[i]}});
    j["points"] = points;
    return j.dump(2) + "\n";
}

RunManifest write_manifest(const std::filesystem::path& dir, const std::string& config_text,
                           const std::vector<std::string>& point_status)
{
    ensure_dir(dir);
    RunManifest m;
    m.config_text = config_text;
    m.config_sha256 = sha256_hex(config_text);
    m.point_status = point_status;
    m.created = fmt::format("{:%Y-%m-%dT%H:%M:%SZ}", fmt::gmtime(std::chrono::system_clock::to_time_t(
                                                         std::chrono::system_clock::now())));
    write_text(dir / "config.ini", config_text);
    write_text(dir / "manifest.json", m.to_json());
    return m;
}

Figure3Result run_trajectory(const ParameterSet& params)
{
    check(params);
    Figure3Result r;
    r.z_r = params.beam.rayleigh_length(params.atom.lambda_p);
    r.delta = base_detuning(params);
    const ChiModel model = build_chi_model(params.atom, params.vapor, params.drive.with_two_photon_detuning(r.delta),
                                           chi_options(params));
    r.trajectory = propagate_linear(input_field(params), ThermalVapor{model}, params.beam,
                                    params.run.z_end_over_zr * r.z_r, params.run.samples, SampleMode::full);

    const auto& samples = r.trajectory.samples;
    for (std::size_t k = 0; k < samples.size(); ++k) {
        const auto& d = samples[k].diagnostics;
        r.max_width_deviation = std::max(r.max_width_deviation, std::abs(d.width / params.beam.w_p - 1.0));
        if (!r.z_flip_over_zr && k > 0) {
            const double a = std::abs(samples[k - 1].diagnostics.axis_phase);
            const double b = std::abs(d.axis_phase);
            if (a < constants::pi && b >= constants::pi) {
                const double t = (constants::pi - a) / (b - a);
                r.z_flip_over_zr = (samples[k - 1].z + t * (samples[k].z - samples[k - 1].z)) / r.z_r;
            }
        }
    }
    r.ln_power_end = std::log(samples.back().diagnostics.power);
    r.phase_end = samples.back().diagnostics.axis_phase;
    try {
        r.cancellation = cancellation_density(model, expansion(model));
        if (std::abs(r.cancellation.residual) < 1e-2)
            r.analytic_end = analytic_reference(model, samples.back().z);
    } catch (const PhysicsError& e) {
        r.cancellation.residual = nan;
        r.cancellation.n0_required = nan;
        r.trajectory.warnings.push_back(e.what());
    }
    return r;
}

Figure3Result figure3(const ParameterSet& params, const std::optional<std::filesystem::path>& out)
{
    ParameterSet p = params;
    p.run.z_end_over_zr = 1.0;
    p.run.samples = std::max(p.run.samples, 512);
    Figure3Result r = run_trajectory(p);
    if (out) {
        ensure_dir(*out);
        write_trajectory_csv(*out / "figure3.csv", r.trajectory, r.z_r, p.beam.w_p);
        write_manifest(*out, serialize_config(p), {"ok"});
    }
    return r;
}

ScanSpec figure_scan_spec(int figure, const ParameterSet& params, const std::filesystem::path& out)
{
    ScanSpec spec;
    spec.base = params;
    spec.base.run.z_end_over_zr = 1.0;
    spec.output_dir = out;
    spec.retune_delta = params.run.retune_delta;
    const double g31 = params.atom.gamma31;
    switch (figure) {
    case 4:
        spec.axes = {{ScanVariable::omega_c, 0.0, 2.5 * g31, 51}};
        break;
    case 5:
        spec.axes = {{ScanVariable::pump_p, 0.3 * g31, 2.0 * g31, 35}};
        break;
    case 6:
        spec.axes = {{ScanVariable::pump_p, 0.3 * g31, 2.0 * g31, 18},
                     {ScanVariable::omega_c, 0.2 * g31, 2.0 * g31, 19}};
        break;
    default:
        throw ConfigError(fmt::format("no scan behind figure {} (scans exist for 4, 5 and 6)", figure));
    }
    return spec;
}

Figure7Result figure7(const ParameterSet& params, const std::optional<std::filesystem::path>& out)
{
    check(params);
    Figure7Result r;
    const double z_r = params.beam.rayleigh_length(params.atom.lambda_p);
    r.z_f = figure7_z_f_over_zr * z_r;
    r.chi3 = params.run.kerr_chi3;

    const BeamConfig beam = figure7_beam(params);
    const TransverseField f = gaussian(beam, params.atom.k_p(), params.grid.n, params.grid.window_over_wp * beam.w_p);

    r.free_space = propagate_linear(f, FreeSpace{}, beam, r.z_f, figure7_samples);
    r.kerr = propagate_kerr(f, r.chi3, beam, r.z_f, figure7_kerr_steps(params), figure7_samples);
    const double delta = base_detuning(params);
    const ChiModel model =
        build_chi_model(params.atom, params.vapor, params.drive.with_two_photon_detuning(delta), chi_options(params));
    r.vapor = propagate_linear(f, ThermalVapor{model}, beam, r.z_f, figure7_samples);

    if (out) {
        ensure_dir(*out);
        const double half = 2.0 * beam.w_p;
        write_phase_map_csv(*out / "phase_map_free_space.csv", r.free_space.final,
                            r.free_space.samples.back().diagnostics.axis_phase, beam.w_p, half);
        write_phase_map_csv(*out / "phase_map_kerr.csv", r.kerr.final, r.kerr.samples.back().diagnostics.axis_phase,
                            beam.w_p, half);
        write_phase_map_csv(*out / "phase_map_vapor.csv", r.vapor.final, r.vapor.samples.back().diagnostics.axis_phase,
                            beam.w_p, half);

        std::string csv = "z_over_zR,free_space,kerr,vapor,free_space_axis_phase_over_pi,kerr_axis_phase_over_pi,"
                          "vapor_axis_phase_over_pi\n";
        // Sample k of each trajectory sits at z_f k / 84; row k starts at 0.002 z_R.
        for (std::size_t k = 1; k < r.vapor.samples.size(); ++k) {
            const auto& a = r.free_space.samples[k].diagnostics;
            const auto& b = r.kerr.samples[k].diagnostics;
            const auto& c = r.vapor.samples[k].diagnostics;
            csv += fmt::format("{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g}\n", r.vapor.samples[k].z / z_r,
                               a.uniformity, b.uniformity, c.uniformity, a.axis_phase / constants::pi,
                               b.axis_phase / constants::pi, c.axis_phase / constants::pi);
        }
        write_text(*out / "phase_difference.csv", csv);
        write_trajectory_csv(*out / "trajectory_free_space.csv", r.free_space, z_r, beam.w_p);
        write_trajectory_csv(*out / "trajectory_kerr.csv", r.kerr, z_r, beam.w_p);
        write_trajectory_csv(*out / "trajectory_vapor.csv", r.vapor, z_r, beam.w_p);
        write_manifest(*out, serialize_config(params), {"ok"});
    }
    return r;
}

double calibrate_kerr_chi3(const ParameterSet& params)
{
    check(params);
    const BeamConfig beam = figure7_beam(params);
    if (!(beam.omega_p0 > 0.0))
        throw PhysicsError("Kerr calibration needs omega_c > 0 (the probe amplitude is 0.1 omega_c)");
    const double z_f = figure7_z_f_over_zr * beam.rayleigh_length(params.atom.lambda_p);
    const TransverseField f = gaussian(beam, params.atom.k_p(), params.grid.n, params.grid.window_over_wp * beam.w_p);
    const int steps = figure7_kerr_steps(params);
    const double target = kerr_target_phase_over_pi * constants::pi;

    auto phase_error = [&](double chi3) {
        const TransverseField g = split_step_kerr(f, chi3, z_f, steps);
        return std::arg(g.at(g.n / 2, g.n / 2)) - target;
    };
    // The axis phase is close to linear in chi3; secant from the plane-wave estimate.
    const double k_p = params.atom.k_p();
    double x0 = 0.0;
    double x1 = target / (0.5 * k_p * beam.omega_p0 * beam.omega_p0 * z_f);
    double f0 = phase_error(x0), f1 = phase_error(x1);
    for (int it = 0; it < 50; ++it) {
        if (std::abs(f1) < 1e-12)
            return x1;
        if (f1 == f0)
            break;
        const double x2 = x1 - f1 * (x1 - x0) / (f1 - f0);
        x0 = x1;
        f0 = f1;
        x1 = x2;
        f1 = phase_error(x1);
    }
    if (std::abs(f1) < 1e-9)
        return x1;
    throw NumericalError(fmt::format("Kerr calibration did not converge (phase error {:.3e} rad)", f1));
}

double solve_pump_for_cancellation(const ParameterSet& params, double lo, double hi)
{
    auto residual = [&](double p) {
        DriveConfig drive = params.drive;
        drive.pump_p = p;
        const DetuningSolution sol = optimal_detuning(params.atom, params.vapor, drive, chi_options(params));
        return cancellation_density(sol.model, expansion(sol.model)).residual;
    };
    const double r_lo = residual(lo), r_hi = residual(hi);
    if (r_lo * r_hi > 0.0)
        throw PhysicsError(fmt::format(
            "cancellation residual does not change sign for p in [{:.4g}, {:.4g}] rad/s ({:.3e}, {:.3e})", lo, hi,
            r_lo, r_hi));
    std::uintmax_t max_iter = 200;
    const auto [a, b] =
        boost::math::tools::toms748_solve(residual, lo, hi, r_lo, r_hi, boost::math::tools::eps_tolerance<double>(48),
                                          max_iter);
    return 0.5 * (a + b);
}

}  // namespace lambda_beam

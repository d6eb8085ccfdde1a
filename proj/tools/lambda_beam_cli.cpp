// lambda-beam: command-line front end for the vapor beam simulator.

#include "lambda_beam/config.hpp"
#include "lambda_beam/constants.hpp"
#include "lambda_beam/errors.hpp"
#include "lambda_beam/experiments.hpp"

#include <CLI11.hpp>
#include <fmt/core.h>

#include <cmath>
#include <filesystem>
#include <iostream>

using namespace lambda_beam;

namespace {

constexpr int exit_config = 2;
constexpr int exit_physics = 3;
constexpr int exit_numerical = 4;

std::string cplx(Complex c) { return fmt::format("{:.10g}{:+.10g}i", c.real(), c.imag()); }

void print_warnings(const std::vector<std::string>& warnings)
{
    for (const auto& w : warnings)
        fmt::print(stderr, "warning: {}\n", w);
}

void print_trajectory_summary(const Figure3Result& r, const ParameterSet& p)
{
    const auto& last = r.trajectory.samples.back();
    fmt::print("delta            = {:.10g} Gamma31\n", r.delta / p.atom.gamma31);
    fmt::print("z_end            = {:.10g} z_R ({:.6g} m)\n", last.z / r.z_r, last.z);
    fmt::print("axis phase (end) = {:.6f} pi\n", r.phase_end / constants::pi);
    fmt::print("ln(P_out/P_in)   = {:.6f}\n", r.ln_power_end);
    fmt::print("width (end)      = {:.6f} w_p\n", last.diagnostics.width / p.beam.w_p);
    fmt::print("max |w/w_p - 1|  = {:.4f} %\n", 100.0 * r.max_width_deviation);
    if (r.z_flip_over_zr)
        fmt::print("|phase| = pi at  = {:.6f} z_R\n", *r.z_flip_over_zr);
    fmt::print("cancellation residual = {:.6g}\n", r.cancellation.residual);
    if (r.analytic_end)
        fmt::print("analytic end: phase {:.6f} pi, power {:.6f}\n", r.analytic_end->phase / constants::pi,
                   r.analytic_end->power);
    print_warnings(r.trajectory.warnings);
}

int cmd_check(const std::string& path, bool csv)
{
    const ParameterSet p = load_config(path);
    const ValidityReport v = validate(p.atom, p.vapor, p.drive);
    const DetuningSolution sol = optimal_detuning(p.atom, p.vapor, p.drive, ChiOptions{p.run.complex_k31});
    const double delta = p.run.detuning == DetuningMode::fixed ? p.drive.delta() : sol.delta;
    const ChiModel m = build_chi_model(p.atom, p.vapor, p.drive.with_two_photon_detuning(delta), ChiOptions{p.run.complex_k31});
    const Expansion e = expansion(m);
    const double g31 = p.atom.gamma31;

    std::optional<Cancellation> c;
    std::string cancel_note;
    try {
        c = cancellation_density(m, e);
    } catch (const PhysicsError& err) {
        cancel_note = err.what();
    }

    if (csv) {
        fmt::print("quantity,value_re,value_im,unit\n");
        fmt::print("dicke_ratio,{:.17g},0,1\n", v.dicke_ratio);
        fmt::print("resonance_ratio,{:.17g},0,1\n", v.resonance_ratio);
        fmt::print("alpha,{:.17g},{:.17g},1\n", m.alpha.real(), m.alpha.imag());
        fmt::print("Gamma_c,{:.17g},{:.17g},rad/s\n", m.gamma_cap_c.real(), m.gamma_cap_c.imag());
        fmt::print("Gamma_1,{:.17g},{:.17g},rad/s\n", m.gamma_cap_1.real(), m.gamma_cap_1.imag());
        fmt::print("c0,{:.17g},{:.17g},1\n", e.c0.real(), e.c0.imag());
        fmt::print("c1,{:.17g},{:.17g},1\n", e.c1.real(), e.c1.imag());
        fmt::print("k1,{:.17g},0,rad/m\n", e.k1);
        fmt::print("delta_star,{:.17g},0,rad/s\n", sol.delta);
        fmt::print("delta_used,{:.17g},0,rad/s\n", delta);
        if (c) {
            fmt::print("cancellation_residual,{:.17g},0,1\n", c->residual);
            fmt::print("n0_star,{:.17g},0,m^-3\n", c->n0_required);
        }
        fmt::print("rho11,{:.17g},0,1\nrho33,{:.17g},0,1\nrho23,{:.17g},{:.17g},1\n", m.steady.rho11, m.steady.rho33,
                   m.steady.rho23.real(), m.steady.rho23.imag());
    } else {
        fmt::print("validity\n");
        fmt::print("  Dicke ratio  dk v_th / (p/2 + gamma_c)           = {:.4g} ({})\n", v.dicke_ratio,
                   v.dicke_ok ? "ok" : "above 0.1");
        fmt::print("  resonance    |Delta_p| / (p/2 + Gamma3/2 + gamma_c) = {:.4g} ({})\n", v.resonance_ratio,
                   v.resonance_ok ? "ok" : "above 0.1");
        fmt::print("steady state\n");
        fmt::print("  rho11 = {:.10g}, rho33 = {:.10g}, rho23 = {}\n", m.steady.rho11, m.steady.rho33,
                   cplx(m.steady.rho23));
        fmt::print("susceptibility\n");
        fmt::print("  alpha   = {}\n", cplx(m.alpha));
        fmt::print("  Gamma_c = {} rad/s ({:.6g} Gamma31)\n", cplx(m.gamma_cap_c), m.gamma_cap_c.real() / g31);
        fmt::print("  Gamma_1 = {} rad/s ({:.6g} Gamma31)\n", cplx(m.gamma_cap_1), m.gamma_cap_1.real() / g31);
        fmt::print("  c0      = {}\n", cplx(e.c0));
        fmt::print("  c1      = {}\n", cplx(e.c1));
        fmt::print("  k1      = {:.10g} rad/m\n", e.k1);
        fmt::print("  Delta*  = {:.10g} rad/s ({:.8g} Gamma31, {} iterations)\n", sol.delta, sol.delta / g31,
                   sol.iterations);
        if (delta != sol.delta)
            fmt::print("  Delta used (fixed) = {:.10g} rad/s\n", delta);
        if (c) {
            fmt::print("  cancellation residual = {:.6g}\n", c->residual);
            fmt::print("  n0*     = {:.6g} m^-3 ({:.4g} cm^-3)\n", c->n0_required, c->n0_required * 1e-6);
        } else {
            fmt::print("  cancellation: {}\n", cancel_note);
        }
    }
    print_warnings(v.warnings);
    return 0;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Thermal double-Lambda vapor: susceptibility, beam propagation and parameter scans"};
    app.require_subcommand(1);

    std::string config_path, out_dir;

    auto* run = app.add_subcommand("run", "propagate the configured beam and write a trajectory CSV");
    run->add_option("config", config_path, "configuration file")->required()->check(CLI::ExistingFile);
    run->add_option("--out", out_dir, "output directory")->default_val("run-output");

    int figure = 0;
    bool fixed_delta = false, retune_delta = false;
    std::string figure_config;
    auto* fig = app.add_subcommand("figure", "reproduce one of the figures 3, 4, 5, 6 or 7");
    fig->add_option("number", figure, "figure number")->required()->check(CLI::IsMember({3, 4, 5, 6, 7}));
    fig->add_option("--out", out_dir, "output directory (default: figureN)");
    fig->add_option("--config", figure_config, "start from this configuration instead of the defaults")
        ->check(CLI::ExistingFile);
    auto* fixed_flag = fig->add_flag("--fixed-delta", fixed_delta, "hold the two-photon detuning at the base value");
    fig->add_flag("--retune-delta", retune_delta, "re-solve the detuning at every scan point (default)")
        ->excludes(fixed_flag);

    std::string scan_path;
    auto* scan = app.add_subcommand("scan", "run a parameter scan described by a config with a [scan] section");
    scan->add_option("spec", scan_path, "scan specification")->required()->check(CLI::ExistingFile);
    scan->add_option("--out", out_dir, "override the output directory of the spec");

    bool csv = false;
    auto* chk = app.add_subcommand("check", "print the validity and susceptibility report");
    chk->add_option("config", config_path, "configuration file")->required()->check(CLI::ExistingFile);
    chk->add_flag("--csv", csv, "machine-readable output");

    auto* cal = app.add_subcommand("calibrate-kerr", "solve for the Kerr coefficient of the comparison run");
    cal->add_option("--config", figure_config, "configuration file")->check(CLI::ExistingFile);

    app.add_subcommand("default-config", "print the default configuration");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : exit_config;
    }

    try {
        if (*run) {
            const ParameterSet p = load_config(config_path);
            const Figure3Result r = run_trajectory(p);
            std::filesystem::create_directories(out_dir);
            write_trajectory_csv(std::filesystem::path(out_dir) / "trajectory.csv", r.trajectory, r.z_r, p.beam.w_p);
            write_manifest(out_dir, serialize_config(p), {"ok"});
            print_trajectory_summary(r, p);
            return 0;
        }
        if (*fig) {
            ParameterSet p = figure_config.empty() ? default_rb87_d1() : load_config(figure_config);
            if (fixed_delta)
                p.run.retune_delta = false;
            if (retune_delta)
                p.run.retune_delta = true;
            const std::filesystem::path out = out_dir.empty() ? fmt::format("figure{}", figure) : out_dir;
            if (figure == 3) {
                print_trajectory_summary(figure3(p, out), p);
            } else if (figure == 7) {
                const Figure7Result r = figure7(p, out);
                auto line = [](const char* name, const Trajectory& t) {
                    const auto& d = t.samples.back().diagnostics;
                    fmt::print("{:<11} axis phase {:+.6f} pi, uniformity {:.6f}\n", name, d.axis_phase / constants::pi,
                               d.uniformity);
                };
                fmt::print("z_f = {:.6g} m, chi3 = {:.6g}\n", r.z_f, r.chi3);
                line("free space", r.free_space);
                line("Kerr", r.kerr);
                line("vapor", r.vapor);
            } else {
                const ScanResult r = run_scan_to_disk(figure_scan_spec(figure, p, out));
                std::size_t failed = 0;
                for (const auto& pt : r.points)
                    failed += pt.result.ok ? 0 : 1;
                fmt::print("{} points written to {} ({} failed)\n", r.points.size(), (out / "scan.csv").string(), failed);
            }
            return 0;
        }
        if (*scan) {
            ScanSpec spec = load_scan_spec(scan_path);
            if (!out_dir.empty())
                spec.output_dir = out_dir;
            const ScanResult r = run_scan_to_disk(spec);
            std::size_t failed = 0;
            for (const auto& pt : r.points)
                failed += pt.result.ok ? 0 : 1;
            fmt::print("{} points written to {} ({} failed)\n", r.points.size(),
                       (spec.output_dir / "scan.csv").string(), failed);
            return 0;
        }
        if (*chk)
            return cmd_check(config_path, csv);
        if (*cal) {
            const ParameterSet p = figure_config.empty() ? default_rb87_d1() : load_config(figure_config);
            fmt::print("kerr_chi3 = {:.17g}\n", calibrate_kerr_chi3(p));
            return 0;
        }
        fmt::print("{}", serialize_config(default_rb87_d1()));
        return 0;
    } catch (const ConfigError& e) {
        fmt::print(stderr, "config error: {}\n", e.what());
        return exit_config;
    } catch (const PhysicsError& e) {
        fmt::print(stderr, "physics error: {}\n", e.what());
        return exit_physics;
    } catch (const NumericalError& e) {
        fmt::print(stderr, "numerical error: {}\n", e.what());
        return exit_numerical;
    } catch (const std::filesystem::filesystem_error& e) {
        fmt::print(stderr, "config error: {}\n", e.what());
        return exit_config;
    }
}

#include "lambda_beam/steady_state.hpp"

#include "lambda_beam/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/core.h>

namespace lambda_beam {

namespace {

using Complex = std::complex<double>;
using Liouvillian = Eigen::Matrix<Complex, 16, 16>;
using Vector16 = Eigen::Matrix<Complex, 16, 1>;

constexpr int levels = 4;
constexpr double rank_tolerance = 1e-9;

constexpr int vec_index(int i, int j) { return levels * i + j; }

// Lindblad dissipator for the jump |to><from| at `rate`.
void add_jump(Liouvillian& L, int from, int to, double rate)
{
    if (rate == 0.0)
        return;
    L(vec_index(to, to), vec_index(from, from)) += rate;
    for (int k = 0; k < levels; ++k) {
        L(vec_index(from, k), vec_index(from, k)) -= 0.5 * rate;
        L(vec_index(k, from), vec_index(k, from)) -= 0.5 * rate;
    }
}

double rate_scale(const AtomSystem& atom, const DriveConfig& drive)
{
    if (atom.gamma31 > 0.0)
        return atom.gamma31;
    const double m = std::max({atom.gamma32, atom.gamma41, atom.gamma42, atom.gamma21,
                               drive.omega_c, drive.pump_p, std::abs(drive.delta_c)});
    return m > 0.0 ? m : 1.0;
}

void fill_from_matrix(SteadyState& s)
{
    s.rho11 = s.matrix(0, 0).real();
    s.rho22 = s.matrix(1, 1).real();
    s.rho33 = s.matrix(2, 2).real();
    s.rho44 = s.matrix(3, 3).real();
    s.rho23 = s.matrix(1, 2);
}

}  // namespace

Liouvillian liouvillian(const AtomSystem& atom, const DriveConfig& drive, double scale)
{
    // Rotating frame of the control field: H = -delta_c |3><3| - Omega_c (|2><3| + |3><2|).
    Eigen::Matrix4cd H = Eigen::Matrix4cd::Zero();
    H(2, 2) = -drive.delta_c / scale;
    H(1, 2) = H(2, 1) = -drive.omega_c / scale;

    Liouvillian L = Liouvillian::Zero();
    const Complex i_unit(0.0, 1.0);
    for (int i = 0; i < levels; ++i)
        for (int j = 0; j < levels; ++j)
            for (int k = 0; k < levels; ++k) {
                L(vec_index(i, j), vec_index(k, j)) += -i_unit * H(i, k);
                L(vec_index(i, j), vec_index(i, k)) += i_unit * H(k, j);
            }

    add_jump(L, 2, 0, atom.gamma31 / scale);
    add_jump(L, 2, 1, atom.gamma32 / scale);
    add_jump(L, 3, 0, atom.gamma41 / scale);
    add_jump(L, 3, 1, atom.gamma42 / scale);
    // Two-way incoherent pump |1> <-> |4>; gives p/2 damping of every
    // coherence that involves |1> or |4>.
    add_jump(L, 0, 3, drive.pump_p / scale);
    add_jump(L, 3, 0, drive.pump_p / scale);

    L(vec_index(0, 1), vec_index(0, 1)) -= atom.gamma21 / scale;
    L(vec_index(1, 0), vec_index(1, 0)) -= atom.gamma21 / scale;
    return L;
}

SteadyState steady_numeric(const AtomSystem& atom, const DriveConfig& drive)
{
    const double scale = rate_scale(atom, drive);
    const Liouvillian L = liouvillian(atom, drive, scale);

    Eigen::JacobiSVD<Liouvillian> svd(L);
    const auto& sigma = svd.singularValues();
    if (sigma(14) <= rank_tolerance * sigma(0))
        throw NumericalError(fmt::format(
            "steady state is not unique: second-smallest singular value {:.3e} <= {:.0e} * {:.3e}",
            sigma(14), rank_tolerance, sigma(0)));

    // Replace the |1><1| balance equation (redundant with trace conservation)
    // by the unit-trace constraint.
    Liouvillian A = L;
    A.row(0).setZero();
    for (int i = 0; i < levels; ++i)
        A(0, vec_index(i, i)) = 1.0;
    Vector16 b = Vector16::Zero();
    b(0) = 1.0;
    const Vector16 x = A.fullPivHouseholderQr().solve(b);

    SteadyState s;
    s.source = SteadySource::numeric;
    for (int i = 0; i < levels; ++i)
        for (int j = 0; j < levels; ++j)
            s.matrix(i, j) = x(vec_index(i, j));
    fill_from_matrix(s);
    return s;
}

SteadyState steady_closed(const AtomSystem& atom, const DriveConfig& drive)
{
    if (drive.delta_c != 0.0)
        throw PhysicsError("closed-form steady state requires a resonant control field (delta_c = 0)");

    const double p = drive.pump_p;
    const double oc = drive.omega_c;
    SteadyState s;
    s.source = SteadySource::closed_form;

    if (p == 0.0) {
        // Without the pump every atom ends up in |1>.
        s.rho11 = 1.0;
        s.matrix(0, 0) = 1.0;
        return s;
    }
    if (oc == 0.0)
        throw PhysicsError("dark configuration: omega_c = 0 with p > 0 optically pumps all atoms "
                           "into |2>; the closed form does not apply");

    const double g3 = atom.gamma3();
    const double g4 = atom.gamma4();
    const double g31 = atom.gamma31;
    const double g42 = atom.gamma42;
    const double oc2 = oc * oc;
    const double norm = p * g3 * g3 * g42 + 4.0 * (2.0 * p * (g31 + g42) + g31 * g4) * oc2;

    const SteadyState numeric = steady_numeric(atom, drive);
    s.matrix = numeric.matrix;
    s.rho11 = 4.0 * g31 * (p + g4) * oc2 / norm;
    s.rho33 = 4.0 * p * g42 * oc2 / norm;
    s.rho23 = Complex(0.0, -2.0 * p * g3 * g42 * oc / norm);
    s.rho22 = numeric.rho22;
    s.rho44 = numeric.rho44;
    return s;
}

SteadyState steady_state(const AtomSystem& atom, const DriveConfig& drive)
{
    if (drive.delta_c == 0.0 && (drive.omega_c > 0.0 || drive.pump_p == 0.0))
        return steady_closed(atom, drive);
    return steady_numeric(atom, drive);
}

}  // namespace lambda_beam

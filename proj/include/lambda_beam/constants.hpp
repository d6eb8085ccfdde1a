#pragma once

#include <numbers>

namespace lambda_beam::constants {

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

inline constexpr double boltzmann = 1.380649e-23;          // J/K
inline constexpr double atomic_mass_unit = 1.66053906660e-27;  // kg
inline constexpr double rb87_mass = 86.909180520 * atomic_mass_unit;

}  // namespace lambda_beam::constants

#pragma once

#include <stdexcept>
#include <string>

namespace lambda_beam {

/// Malformed or inconsistent input. Maps to CLI exit code 2.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The requested configuration is outside the physics the model can describe
/// (dark configuration, no diffraction dragging, ...). Exit code 3.
class PhysicsError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A numerical procedure failed to converge or violated its sampling contract.
/// Exit code 4.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace lambda_beam

#pragma once

#include <stdexcept>
#include <string>

namespace platesim {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A precondition on an argument was violated (bad geometry, parameter out of range, ...).
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// A shift lies within the pole guard of some oscillator frequency sigma_j.
class PoleProximityError : public Error {
public:
    using Error::Error;
};

/// The operator function is (numerically) singular at the requested shift.
class SingularShiftError : public Error {
public:
    using Error::Error;
};

/// The spectral indicator recursion hit its depth cap before reaching the target box size.
class MaxDepthError : public Error {
public:
    using Error::Error;
};

/// Dense reference path refused a problem that is too large.
class SizeGuardError : public Error {
public:
    using Error::Error;
};

/// Malformed or inconsistent run configuration.
class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace platesim

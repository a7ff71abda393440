#pragma once

#include <stdexcept>
#include <string>

namespace voxfield {

// Error categories map 1:1 onto the CLI exit codes (see tools/).
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Invalid or inconsistent input (bad readings, malformed files, bad flags).
class InputError : public Error {
public:
    explicit InputError(const std::string& msg) : Error(msg) {}
};

/// An iterative solve exhausted its iteration budget.
class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& msg, long iterations, double residual)
        : Error(msg), iterations(iterations), residual(residual) {}
    long iterations;
    double residual;
};

/// Filesystem and socket failures.
class IoError : public Error {
public:
    explicit IoError(const std::string& msg) : Error(msg) {}
};

} // namespace voxfield

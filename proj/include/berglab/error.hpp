#pragma once

#include <stdexcept>
#include <string>

namespace berglab {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A caller-supplied value violates a documented precondition.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// A query point or entity does not lie where the operation requires it.
class GeometryError : public Error {
public:
    using Error::Error;
};

/// The iterative solver stopped before reaching the requested tolerance.
class SolverError : public Error {
public:
    SolverError(const std::string& what, int iterations, double residual)
        : Error(what), iterations_(iterations), residual_(residual) {}

    int iterations() const noexcept { return iterations_; }
    double residual() const noexcept { return residual_; }

private:
    int iterations_;
    double residual_;
};

/// The local least-squares fit for a singular coefficient is numerically unreliable.
class FitError : public Error {
public:
    using Error::Error;
};

} // namespace berglab

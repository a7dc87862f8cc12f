/**
 * @file errors.hpp
 * @brief Exception types shared by the rimming-flow solvers.
 */

#pragma once

#include <stdexcept>
#include <string>

namespace rimming {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of a function (e.g. z <= 0 for an entropy).
class DomainError : public Error {
public:
    using Error::Error;
};

/// Model or algorithm parameter violates a stated constraint.
class ParameterError : public Error {
public:
    using Error::Error;
};

/// Fields defined on incompatible grids.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// Invalid user-supplied data (negative initial film, malformed file, ...).
class InputError : public Error {
public:
    using Error::Error;
};

/// Time step could not be completed even at the minimum step size.
class StepFailure : public Error {
public:
    StepFailure(const std::string& what, double last_residual)
        : Error(what), last_residual_(last_residual) {}
    double last_residual() const { return last_residual_; }

private:
    double last_residual_;
};

/// Newton iterate became non-finite.
class Diverged : public StepFailure {
public:
    using StepFailure::StepFailure;
};

/// Steady-state Newton iteration exhausted its iteration budget.
class NoConvergence : public Error {
public:
    NoConvergence(const std::string& what, double last_residual)
        : Error(what), last_residual_(last_residual) {}
    double last_residual() const { return last_residual_; }

private:
    double last_residual_;
};

/// Steady-state iterate left the positive-solution region.
class BranchLost : public Error {
public:
    using Error::Error;
};

class NumericalError : public Error {
public:
    using Error::Error;
};

}  // namespace rimming

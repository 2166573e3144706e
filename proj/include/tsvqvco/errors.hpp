#pragma once

#include <stdexcept>
#include <string>

namespace tsvqvco {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Degenerate or inconsistent conductor geometry.
class InvalidGeometry : public Error {
public:
    using Error::Error;
};

/// Argument outside the mathematical domain of a formula.
class DomainError : public Error {
public:
    using Error::Error;
};

/// The design violates an oscillation or feasibility constraint.
class InfeasibleDesign : public Error {
public:
    InfeasibleDesign(std::string constraint, const std::string& what)
        : Error(what), constraint_(std::move(constraint)) {}
    const std::string& constraint() const noexcept { return constraint_; }

private:
    std::string constraint_;
};

/// Electrical model that is non-physical (e.g. an indefinite inductance matrix).
class InvalidModel : public Error {
public:
    using Error::Error;
};

class NumericError : public Error {
public:
    using Error::Error;
};

class NetlistError : public Error {
public:
    using Error::Error;
};

/// Newton failed to converge at a time point.
class StepFailure : public NumericError {
public:
    StepFailure(double time, double residual, const std::string& what)
        : NumericError(what), time_(time), residual_(residual) {}
    double time() const noexcept { return time_; }
    double residual() const noexcept { return residual_; }

private:
    double time_;
    double residual_;
};

/// The MNA matrix is structurally or numerically singular.
class SingularMatrix : public NumericError {
public:
    SingularMatrix(std::string unknown, const std::string& what)
        : NumericError(what), unknown_(std::move(unknown)) {}
    const std::string& unknown() const noexcept { return unknown_; }

private:
    std::string unknown_;
};

}  // namespace tsvqvco

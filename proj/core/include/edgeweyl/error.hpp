#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace edgeweyl {

/// Coarse classification used by the command-line front end to pick exit codes.
enum class ErrorKind {
    usage,       // bad flags, missing inputs
    validation,  // an invariant or precondition of the data was violated
    numerical,   // a solver, quadrature or recurrence failed
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

class UsageError : public Error {
public:
    explicit UsageError(const std::string& what) : Error(ErrorKind::usage, what) {}
};

class ValidationError : public Error {
public:
    explicit ValidationError(const std::string& what) : Error(ErrorKind::validation, what) {}
};

class NumericalError : public Error {
public:
    explicit NumericalError(const std::string& what) : Error(ErrorKind::numerical, what) {}
};

/// Argument outside the domain where an operation is defined (e.g. zeta below d/2).
class DomainError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

/// An encoding rule failed to be strictly decreasing.
class MonotonicityViolation : public ValidationError {
public:
    MonotonicityViolation(double lambda_at_failure, const std::string& what)
        : ValidationError(what), lambda_at_failure_(lambda_at_failure) {}
    double lambda_at_failure() const noexcept { return lambda_at_failure_; }

private:
    double lambda_at_failure_;
};

/// No sign change could be located for a root finder.
class BracketFailure : public NumericalError {
public:
    using NumericalError::NumericalError;
};

/// A recurrence stopped at a given (1-based) index: Lanczos breakdown or qd positivity loss.
class RecurrenceFailure : public NumericalError {
public:
    RecurrenceFailure(std::size_t index, const std::string& what)
        : NumericalError(what), index_(index) {}
    std::size_t index() const noexcept { return index_; }

private:
    std::size_t index_;
};

}  // namespace edgeweyl

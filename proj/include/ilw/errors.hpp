#pragma once

#include <stdexcept>
#include <string>

namespace ilw {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent input (size mismatch, invalid parameters).
class InvalidInput : public Error {
public:
    using Error::Error;
};

/// A symbol or operator was evaluated outside the binary64 overflow budget.
class RangeError : public Error {
public:
    using Error::Error;
};

/// Frequency window too small or inconsistent with the data it must hold.
class WindowError : public Error {
public:
    using Error::Error;
};

/// The log-determinant series cannot converge: some eigenvalue has |λ| >= 1.
class DivergentSeries : public Error {
public:
    explicit DivergentSeries(double max_abs_eigenvalue)
        : Error("alpha series diverges: max |lambda| = " + std::to_string(max_abs_eigenvalue)),
          max_abs_eigenvalue(max_abs_eigenvalue) {}
    double max_abs_eigenvalue;
};

/// Requested accuracy not reached within the work budget.
class AccuracyError : public Error {
public:
    AccuracyError(const std::string& what, double achieved_error)
        : Error(what + " (achieved error estimate " + std::to_string(achieved_error) + ")"),
          achieved_error(achieved_error) {}
    double achieved_error;
};

/// Numerical blow-up during time stepping.
class BlowUp : public Error {
public:
    BlowUp(const std::string& what, double time)
        : Error(what + " at t = " + std::to_string(time)), time(time) {}
    double time;
};

/// A parameter search (kappa, threshold A) exhausted its budget.
class SearchFailure : public Error {
public:
    using Error::Error;
};

/// An internal invariant that should hold by construction was violated.
class InvariantViolation : public Error {
public:
    using Error::Error;
};

} // namespace ilw

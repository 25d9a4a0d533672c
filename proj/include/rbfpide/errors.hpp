#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace rbfpide {

enum class ErrorKind {
    InvalidModel,
    InvalidContract,
    DivergentCompensator,
    InfeasibleThreshold,
    Domain,
    UnsupportedFactorization,
    NumericalFailure,
    QuadratureFailure,
    SeriesUndefined,
    DomainTooSmall,
    LengthMismatch,
    Config,
};

/// Base for every error thrown by the library. `is_input_error()` separates
/// bad inputs (exit code 2 in the CLI) from numerical breakdowns (exit code 3).
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

    bool is_input_error() const noexcept {
        switch (kind_) {
        case ErrorKind::NumericalFailure:
        case ErrorKind::QuadratureFailure:
            return false;
        default:
            return true;
        }
    }

private:
    ErrorKind kind_;
};

/// Raised when an adaptive quadrature entry of the jump matrix exhausts its
/// subdivision budget. Carries the offending matrix entry.
class QuadratureError : public Error {
public:
    QuadratureError(std::size_t row, std::size_t col, double estimate, const std::string& what)
        : Error(ErrorKind::QuadratureFailure, what), row_(row), col_(col), estimate_(estimate) {}

    std::size_t row() const noexcept { return row_; }
    std::size_t col() const noexcept { return col_; }
    double error_estimate() const noexcept { return estimate_; }

private:
    std::size_t row_;
    std::size_t col_;
    double estimate_;
};

/// Linear-solve breakdown, optionally tagged with the time step where it happened.
class SolveError : public Error {
public:
    explicit SolveError(const std::string& what, std::optional<std::size_t> step = std::nullopt)
        : Error(ErrorKind::NumericalFailure, what), step_(step) {}

    std::optional<std::size_t> step() const noexcept { return step_; }

private:
    std::optional<std::size_t> step_;
};

}  // namespace rbfpide

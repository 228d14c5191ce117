#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace driftwatch {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DomainError : public Error {
public:
    using Error::Error;
};

/// A(x, alpha) = a a^T failed to be positive definite at an evaluation point.
class NonPositiveDefiniteDiffusion : public Error {
public:
    NonPositiveDefiniteDiffusion(std::size_t index, const std::string& detail)
        : Error("non-positive-definite diffusion at index " + std::to_string(index) + ": " + detail),
          index_(index) {}
    std::size_t index() const noexcept { return index_; }

private:
    std::size_t index_;
};

class NumericalBlowup : public Error {
public:
    explicit NumericalBlowup(std::size_t step)
        : Error("numerical blowup at fine step " + std::to_string(step)), step_(step) {}
    std::size_t step() const noexcept { return step_; }

private:
    std::size_t step_;
};

class OptimizerFailure : public Error {
public:
    using Error::Error;
};

class DegenerateRegression : public Error {
public:
    using Error::Error;
};

class SingularInformation : public Error {
public:
    using Error::Error;
};

class EmptySeries : public Error {
public:
    using Error::Error;
};

class InsufficientSample : public Error {
public:
    using Error::Error;
};

class DimensionMismatch : public Error {
public:
    using Error::Error;
};

/// Row-numbered input errors. Rows count data rows from 1; the header is row 0.
class RowError : public Error {
public:
    RowError(const std::string& what, std::size_t row)
        : Error(what + " at row " + std::to_string(row)), row_(row) {}
    std::size_t row() const noexcept { return row_; }

private:
    std::size_t row_;
};

class ParseError : public RowError {
public:
    using RowError::RowError;
};

class NonUniformGrid : public RowError {
public:
    explicit NonUniformGrid(std::size_t row) : RowError("non-uniform time grid", row) {}
};

}  // namespace driftwatch

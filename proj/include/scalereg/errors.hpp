// Copyright (C) 2026 scalereg developers
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace scalereg {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid parameter combination (bad family index, gamma outside its domain, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

/// Efficiency or Fisher-information request outside the family's valid gamma range.
class EfficiencyUndefinedError : public DomainError {
public:
    using DomainError::DomainError;
};

/// Design matrix is rank deficient (or otherwise violates the dataset contract).
class SingularDesignError : public Error {
public:
    using Error::Error;
};

/// Data on which the likelihood is unbounded (e.g. an exact linear fit).
class DegenerateDataError : public Error {
public:
    using Error::Error;
};

/// Adaptive quadrature did not reach the requested tolerance. Carries the best
/// estimate and the associated error bound so callers can decide what to do.
class QuadratureError : public Error {
public:
    QuadratureError(const std::string& what, double best_estimate, double error_bound)
        : Error(what), best_estimate_(best_estimate), error_bound_(error_bound) {}

    double best_estimate() const noexcept { return best_estimate_; }
    double error_bound() const noexcept { return error_bound_; }

private:
    double best_estimate_;
    double error_bound_;
};

/// Malformed tabular input. Locations are 1-based; 0 means "not applicable".
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t row, std::size_t column)
        : Error(what), row_(row), column_(column) {}

    std::size_t row() const noexcept { return row_; }
    std::size_t column() const noexcept { return column_; }

private:
    std::size_t row_;
    std::size_t column_;
};

}  // namespace scalereg

#pragma once

#include <stdexcept>
#include <string>

namespace datamap {

/// Base class for all toolkit errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Malformed input file or stream (reports line numbers where possible).
class ParseError : public Error {
public:
    using Error::Error;
};

/// Data violates a documented contract (bad ranges, incomplete grids, ...).
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Numerical failure: non-finite loss, divergence.
class NumericError : public Error {
public:
    using Error::Error;
};

/// Correlation requested on a constant sequence. Distinct from NumericError
/// so callers can degrade per-metric instead of aborting a whole report.
class ConstantInputError : public Error {
public:
    using Error::Error;
};

/// File system failure (open/read/write).
class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace datamap

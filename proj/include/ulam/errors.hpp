#pragma once

#include <stdexcept>
#include <string>

namespace ulam {

// Base for every error raised by the library. Findings (violated bounds,
// failed hypotheses) are never errors; they go into an AuditReport.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bad argument value: empty sample set, C < 1, non-finite coordinate, ...
class InputError : public Error {
public:
    using Error::Error;
};

/// Shape mismatch between a vector and the space it is used in.
class StructuralError : public Error {
public:
    using Error::Error;
};

/// Operation called on an object of the wrong kind (e.g. a homogeneity
/// check on a quasi-normed space) or a user callback broke its contract.
class ContractError : public Error {
public:
    using Error::Error;
};

/// Non-finite intermediate while evaluating a mapping.
class NumericError : public Error {
public:
    using Error::Error;
};

/// Amplitude calibration impossible because the core mapping alone
/// already violates the defect bound.
class CalibrationError : public Error {
public:
    using Error::Error;
};

/// Malformed or inconsistent experiment configuration.
class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace ulam

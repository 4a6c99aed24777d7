#pragma once

#include <stdexcept>
#include <string>

namespace rmt {

// Base for every error raised by the library. The CLI maps the concrete
// subclasses onto exit codes (validation -> 2, resource -> 3, other -> 1).
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Bad parameters, malformed configs, violated preconditions.
class ValidationError : public Error {
public:
    using Error::Error;
};

class DimensionError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

// Rank-deficient or otherwise degenerate input to a geometric construction.
class DegenerateInputError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

// An enumeration or scan would exceed its fixed budget.
class ResourceError : public Error {
public:
    using Error::Error;
};

// An adopted proof constant was contradicted by data.
class CalibrationError : public Error {
public:
    using Error::Error;
};

}  // namespace rmt

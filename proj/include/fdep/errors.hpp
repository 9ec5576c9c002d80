#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fdep {

// Base of all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Invalid or inconsistent input data. Mapped to exit code 3 by the CLI.
struct DataError : Error {
    using Error::Error;
};

// A theorem-backed internal check failed (implementation bug, not bad data).
// Mapped to exit code 4 by the CLI.
struct InternalError : Error {
    using Error::Error;
};

struct DimensionMismatch : DataError {
    using DataError::DataError;
};

struct NonFiniteValue : DataError {
    size_t row;
    size_t col;
    NonFiniteValue(size_t r, size_t c)
        : DataError("non-finite value at (" + std::to_string(r) + "," + std::to_string(c) + ")"),
          row(r), col(c) {}
};

struct SampleTooSmall : DataError {
    using DataError::DataError;
};

struct SampleTooLarge : DataError {
    using DataError::DataError;
};

struct ParseError : DataError {
    size_t line;   // 1-based; 0 if not applicable
    explicit ParseError(const std::string& what, size_t line_no = 0)
        : DataError(line_no ? what + " (line " + std::to_string(line_no) + ")" : what),
          line(line_no) {}
};

struct DegenerateSignal : DataError {
    using DataError::DataError;
};

struct UnknownKind : DataError {
    using DataError::DataError;
};

struct TooLargeForOracle : DataError {
    using DataError::DataError;
};

struct NonpositiveVariance : InternalError {
    using InternalError::InternalError;
};

struct BoundViolation : InternalError {
    using InternalError::InternalError;
};

}  // namespace fdep

#pragma once

#include <stdexcept>
#include <string>

namespace vfcert {

// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Bad argument values (out-of-range region, invalid channel, ...).
struct ArgumentError : Error {
    using Error::Error;
};

// Coordinates or displacements outside the image domain.
struct DomainError : Error {
    using Error::Error;
};

// Malformed files (IDX header, JSON schema, shape mismatches).
struct FormatError : Error {
    using Error::Error;
};

// API misuse: caller violated a documented precondition.
struct ContractError : Error {
    using Error::Error;
};

// Numerical solver breakdown; message carries diagnostics.
struct SolverError : Error {
    using Error::Error;
};

} // namespace vfcert

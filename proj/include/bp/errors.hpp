#pragma once

#include <stdexcept>
#include <string>

namespace bp {

/// Base class for all errors raised by this library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Malformed input file (JSON syntax, missing fields, wrong types).
struct ParseError : Error {
    using Error::Error;
};

/// Structurally valid input that violates a model invariant. The message
/// names the invariant and the offending object.
struct ValidationError : Error {
    using Error::Error;
};

/// Request exceeds a documented brute-force budget (oracle sizes,
/// path-enumeration caps, exhaustive-adversary limits).
struct SizeLimitError : Error {
    using Error::Error;
};

/// LP solver failure or residuals beyond tolerance.
struct NumericalError : Error {
    using Error::Error;
};

/// An optimal LP solution violated the expected block structure beyond
/// tolerance; points at a solver bug or insufficient normalization.
struct StructureError : Error {
    using Error::Error;
};

} // namespace bp

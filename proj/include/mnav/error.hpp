#pragma once

#include <stdexcept>
#include <string>

namespace mnav {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Malformed input file (ASCII/PGM map, session archive, scenario config).
struct ParseError : Error {
    using Error::Error;
};

/// Query outside a precondition: pose in a wall, point outside a bounding
/// box, stale room set, unassignable room.
struct DomainError : Error {
    using Error::Error;
};

/// Non-finite value surfaced during evaluation or training.
struct NumericError : Error {
    using Error::Error;
};

/// No route between the requested endpoints.
struct UnreachableError : Error {
    using Error::Error;
};

}  // namespace mnav

#pragma once

#include <stdexcept>
#include <string>

namespace ewarn {

/// Base class of every error thrown by this library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed input file (CSV / JSON).
class ParseError : public Error {
public:
    using Error::Error;
};

/// A precondition on operation inputs was violated.
class InvalidInput : public Error {
public:
    using Error::Error;
};

/// Undefined statistic or failed numerical step (constant sequence,
/// singular system, zero denominator).
class NumericError : public Error {
public:
    using Error::Error;
};

} // namespace ewarn

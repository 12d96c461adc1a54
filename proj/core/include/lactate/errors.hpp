#pragma once

#include <stdexcept>
#include <string>

namespace lactate {

/// Base class for all library failures.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Numeric input outside the operation's domain (non-positive speed, empty sample, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

/// API misuse: a documented precondition was violated (too few points, unsorted speeds, ...).
class PreconditionError : public Error {
public:
    using Error::Error;
};

/// Least-squares system could not be solved (rank deficient / ill conditioned).
class FitError : public Error {
public:
    using Error::Error;
};

/// The fitted curve never lies below the chord, so no Dmax point exists.
class NoDmaxError : public Error {
public:
    using Error::Error;
};

/// Pace faster than the acceptable-error table covers.
class OutOfScopeError : public Error {
public:
    using Error::Error;
};

/// Malformed input file (bad header, unparseable row, ...).
class FormatError : public Error {
public:
    using Error::Error;
};

/// Invalid configuration value or flag combination.
class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace lactate

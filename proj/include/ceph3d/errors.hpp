#pragma once

#include <stdexcept>
#include <string>

namespace ceph3d {

// Base class for all library errors. Subclasses map 1:1 onto CLI exit codes.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bad argument values (negative spacing, rate >= 1, empty vectors, ...).
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// Dimension or shape mismatch, including pad-target overflow.
class ShapeError : public Error {
public:
    using Error::Error;
};

/// Operation called in the wrong object state (double normalize, backward before forward).
class StateError : public Error {
public:
    using Error::Error;
};

/// Coordinate or landmark index outside the volume grid.
class OutOfBounds : public Error {
public:
    using Error::Error;
};

/// File not readable/writable or malformed on-disk format.
class IoError : public Error {
public:
    using Error::Error;
};

/// Unknown or malformed configuration key/value.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Incomplete, degenerate, or insufficient input data for a statistic.
class DataError : public Error {
public:
    using Error::Error;
};

/// Non-finite loss or gradient during optimization.
class DivergedError : public Error {
public:
    using Error::Error;
};

} // namespace ceph3d

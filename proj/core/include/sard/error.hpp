#pragma once

#include <stdexcept>
#include <string>

namespace sard {

/// Root of every exception thrown by the toolkit.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Caller supplied arguments that violate an operation's preconditions.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// Data on disk or in memory is unusable (I/O failures, corruption, degenerate statistics).
class DataError : public Error {
public:
    using Error::Error;
};

class CorruptFileError : public DataError {
public:
    using DataError::DataError;
};

/// ENL or a moment fit was requested over a region with zero variance.
class DegenerateRegionError : public DataError {
public:
    using DataError::DataError;
};

/// Optimization produced a non-finite loss or gradient.
class DivergenceError : public DataError {
public:
    DivergenceError(const std::string& what, std::string layer);
    const std::string& layer() const noexcept { return layer_; }

private:
    std::string layer_;
};

} // namespace sard

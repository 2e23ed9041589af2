#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace felis {

/// Base of every error raised by the library. The CLI maps subclasses to
/// process exit codes (config 2, data 3, internal 4).
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A FilterConfig or run option is out of its allowed domain.
class InvalidConfig : public Error {
public:
    using Error::Error;
};

/// Shapes, sizes or preconditions of the input data are violated.
class InvalidInput : public Error {
public:
    using Error::Error;
};

/// The input is well-formed but the statistic is undefined on it
/// (constant features, zero-norm rows, zero variance).
class DegenerateInput : public Error {
public:
    using Error::Error;
};

/// A file does not match its container format. Carries the byte offset at
/// which the problem was detected.
class FormatError : public Error {
public:
    FormatError(const std::string& what, std::uint64_t offset);

    std::uint64_t offset() const noexcept { return offset_; }

private:
    std::uint64_t offset_;
};

/// An internal postcondition failed.
class InvariantViolation : public Error {
public:
    using Error::Error;
};

}  // namespace felis

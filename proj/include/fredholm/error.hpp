#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fredholm {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed expression text. `offset` is the byte offset of the offending token.
class ParseError : public Error {
public:
    ParseError(std::size_t offset, std::string expected, const std::string& message)
        : Error(message), offset_(offset), expected_(std::move(expected)) {}

    std::size_t offset() const noexcept { return offset_; }
    const std::string& expected() const noexcept { return expected_; }

private:
    std::size_t offset_;
    std::string expected_;
};

/// Expression evaluation failure: unbound variable or a math domain violation.
class EvalError : public Error {
public:
    using Error::Error;
};

/// Invalid arguments or problem configuration.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Divergence, non-finite intermediate values, or a singular system.
class NumericalError : public Error {
public:
    using Error::Error;
};

}  // namespace fredholm

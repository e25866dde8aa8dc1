#pragma once

#include <stdexcept>
#include <string>

namespace drfr {

// Base of every exception thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Caller passed an out-of-range or malformed argument.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

// Vector or matrix shapes do not agree.
class DimensionMismatch : public InvalidArgument {
public:
    using InvalidArgument::InvalidArgument;
};

// Input data (files, datasets, label lookups) is unusable.
class DataError : public Error {
public:
    using Error::Error;
};

// Parse failure with a 1-based line number; line 0 means "not line-specific".
class ParseError : public DataError {
public:
    ParseError(std::size_t line, const std::string& detail, const std::string& source = {})
        : DataError((source.empty() ? std::string() : source + ": ") +
                    (line == 0 ? detail : "line " + std::to_string(line) + ": " + detail)),
          line_(line),
          detail_(detail) {}

    std::size_t line() const noexcept { return line_; }
    const std::string& detail() const noexcept { return detail_; }

private:
    std::size_t line_;
    std::string detail_;
};

// Optimisation produced a non-finite objective.
class DivergenceError : public Error {
public:
    using Error::Error;
};

}  // namespace drfr

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace qs3orao {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input text. `line()` is 1-based, 0 when not tied to a line.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line);
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// Well-formed input that violates a domain rule (bad label, missing class, ...).
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Invalid hyperparameters or option combinations.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Non-finite values or solver failure during optimization.
class NumericError : public Error {
public:
    NumericError(const std::string& what, std::uint64_t iteration);
    std::uint64_t iteration() const noexcept { return iteration_; }

private:
    std::uint64_t iteration_;
};

/// Problems reading a persisted model file.
class ModelFormatError : public Error {
public:
    enum class Kind { bad_magic, version_mismatch, truncated, checksum, io };

    ModelFormatError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}
    Kind kind() const noexcept { return kind_; }

private:
    Kind kind_;
};

}  // namespace qs3orao

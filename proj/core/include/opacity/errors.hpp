#ifndef OPACITY_ERRORS_HPP
#define OPACITY_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace opacity {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Malformed input text. Carries the 1-based line number when known.
class ParseError : public Error {
public:
    ParseError(const std::string& msg, std::size_t line = 0)
        : Error(line ? "line " + std::to_string(line) + ": " + msg : msg),
          line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

/// Invalid model or run configuration.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Numerical failure during training (non-finite loss or gradient).
class DivergenceError : public Error {
public:
    using Error::Error;
};

/// Domain violation in an arithmetic operation (e.g. L_uncond <= 0).
class DomainError : public Error {
public:
    using Error::Error;
};

}  // namespace opacity

#endif

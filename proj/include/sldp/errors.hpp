#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sldp {

/// Root of the library's exception hierarchy.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed user input: expression text, problem files, CLI values.
class InputError : public Error {
public:
    using Error::Error;
};

/// Expression syntax error with the byte offset and offending token.
class ParseError : public InputError {
public:
    ParseError(const std::string& message, std::size_t position, std::string token)
        : InputError(message + " at position " + std::to_string(position) + " near '" + token + "'"),
          position_(position),
          token_(std::move(token)) {}

    std::size_t position() const noexcept { return position_; }
    const std::string& token() const noexcept { return token_; }

private:
    std::size_t position_;
    std::string token_;
};

/// A field or modulus could not be evaluated (domain violation, non-finite value).
class EvaluationError : public Error {
public:
    using Error::Error;
};

/// A state or query point left the region where the objects are defined.
class DomainError : public Error {
public:
    using Error::Error;
};

/// A simulated path left its box.
class EscapeError : public DomainError {
public:
    EscapeError(const std::string& message, long step)
        : DomainError(message + " (step " + std::to_string(step) + ")"), step_(step) {}
    long step() const noexcept { return step_; }

private:
    long step_;
};

/// Iterative method failed to converge or produced non-finite values.
class ConvergenceError : public Error {
public:
    using Error::Error;
};

}  // namespace sldp

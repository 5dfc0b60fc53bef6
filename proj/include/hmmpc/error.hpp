#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace hmmpc {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An argument lies outside the domain of the operation (negative delay,
/// theta outside (0,1), mismatched dimensions, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

/// A model, trace or matrix violates one of its structural invariants.
class InvariantError : public Error {
public:
    using Error::Error;
};

/// Forward recursion produced an all-zero row.
class UnderflowError : public Error {
public:
    UnderflowError(std::size_t step, const std::string& what)
        : Error(what), step_(step) {}
    std::size_t step() const { return step_; }

private:
    std::size_t step_;
};

/// Malformed text input; `line` is 1-based, 0 when not applicable.
class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& what)
        : Error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

/// Invalid configuration field; the message names the field.
class ConfigError : public Error {
public:
    ConfigError(const std::string& field, const std::string& what)
        : Error(field + ": " + what), field_(field) {}
    const std::string& field() const { return field_; }

private:
    std::string field_;
};

/// Gain synthesis could not produce a solution (Riccati divergence).
class SynthesisError : public Error {
public:
    using Error::Error;
};

/// A synthesized gain failed one of its numeric certificates.
class CertificateError : public Error {
public:
    using Error::Error;
};

/// A simulated state became non-finite.
class DivergenceError : public Error {
public:
    DivergenceError(long step, const std::string& what) : Error(what), step_(step) {}
    long step() const { return step_; }

private:
    long step_;
};

}  // namespace hmmpc

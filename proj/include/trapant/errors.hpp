#pragma once

#include <stdexcept>
#include <string>

namespace trapant {

/// Argument outside the mathematical domain of an operation (f <= 0, L <= 0, ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// A mesh or configuration that is structurally unusable.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Singular or ill-conditioned linear system.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Component selection could not be realised from the catalogs.
class SynthesisError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed run configuration. Carries the offending line when known.
class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& msg, int line = 0)
        : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + msg : msg),
          line_(line) {}
    int line() const { return line_; }

private:
    int line_;
};

}  // namespace trapant

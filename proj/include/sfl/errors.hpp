#pragma once

#include <stdexcept>
#include <string>

namespace sfl {

// Invalid or missing configuration. The message names the offending field.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// The convergence constraint leaves no admissible split point.
class InfeasibleError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A solver failed to terminate or produced a non-finite value.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Mismatched tensor shapes between device and server sub-models.
class ProtocolError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace sfl

#pragma once

#include <stdexcept>
#include <string>

namespace pmdeg {

/// Malformed or missing run configuration. Maps to CLI exit code 1.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Input data violates a documented precondition. Maps to CLI exit code 2.
class DataError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// An internal postcondition failed. Maps to CLI exit code 3.
class InvariantError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

inline void require(bool condition, const std::string& message) {
    if (!condition) throw DataError(message);
}

} // namespace pmdeg

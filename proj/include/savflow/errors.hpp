#pragma once
// Error types shared across the library. ConfigError maps to CLI exit code 2,
// NumericError to exit code 3.

#include <stdexcept>
#include <string>

namespace savflow {

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct NumericError : std::runtime_error {
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace savflow

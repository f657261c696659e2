#pragma once

#include <stdexcept>
#include <string>

namespace topox {

// Bad configuration or malformed input (CLI exit code 2).
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// NaN loss, non-convergence, singular system (CLI exit code 3).
struct NumericError : std::runtime_error {
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace topox

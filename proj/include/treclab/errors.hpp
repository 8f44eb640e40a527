#pragma once

#include <stdexcept>
#include <string>

namespace treclab {

// Raised when an input document (JSON, CSV, CLI argument) cannot be read.
// The CLI maps this to exit code 2.
class ParseError : public std::runtime_error {
public:
    explicit ParseError(const std::string& msg) : std::runtime_error(msg) {}
};

// Raised when a structurally valid input violates an invariant
// (negative learning rate, degenerate normalization, ...).
// The CLI maps this to exit code 3.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace treclab

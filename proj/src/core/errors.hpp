#pragma once

#include <stdexcept>
#include <string>

namespace lossprior {

// Bad input: violated precondition, malformed file, invalid flag value.
// Maps to LP_ERR_INVALID / exit code 2 at the C boundary.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

// Numerical failure: singular design mid-computation, non-convergent
// quadrature. Maps to LP_ERR_NUMERIC / exit code 3.
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace lossprior

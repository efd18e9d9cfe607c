#pragma once

#include <stdexcept>
#include <string>

namespace zk {

/// Bad input: config, shapes, mismatched bases. Maps to exit code 2.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Numerical failure: eigen-solver non-convergence, blow-up, singular
/// systems. Maps to exit code 3.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Filesystem or stream failure. Maps to exit code 4.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised for regimes the solver refuses (e.g. uniqueness runs with d = 2).
class UnsupportedRegime : public ValidationError {
public:
    using ValidationError::ValidationError;
};

inline void require(bool ok, const std::string& what)
{
    if (!ok) throw ValidationError(what);
}

}  // namespace zk

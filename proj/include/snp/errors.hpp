#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace snp {

/// Base class for all errors thrown by this library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Invalid arguments or violated preconditions (CLI exit code 2).
class UsageError : public Error {
public:
    explicit UsageError(const std::string& what) : Error(what) {}
};

/// Numeric failures: divergence, degeneracy, infeasibility (CLI exit code 3).
class NumericError : public Error {
public:
    explicit NumericError(const std::string& what) : Error(what) {}
};

/// Trajectory left the representable range during integration.
class DivergenceError : public NumericError {
public:
    DivergenceError(const std::string& what, double time_of_failure)
        : NumericError(what), time(time_of_failure) {}
    double time;
};

/// Sample covariance is not symmetric positive definite.
class DegenerateEnsembleError : public NumericError {
public:
    explicit DegenerateEnsembleError(const std::string& what) : NumericError(what) {}
};

/// File and parse errors (CLI exit code 4).
class IoError : public Error {
public:
    explicit IoError(const std::string& what) : Error(what) {}
};

}  // namespace snp

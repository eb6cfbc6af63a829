#ifndef SEMCOM_ERRORS_HPP
#define SEMCOM_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace semcom {

/// Base class for all library errors.
struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Invalid configuration or precondition violation (bad ranges, shape
/// mismatches, inconsistent parameters). CLI maps these to exit code 2.
struct config_error : error {
    using error::error;
};

/// Malformed or out-of-contract data (NaN inputs, out-of-range codes,
/// duplicate packets, unreadable files).
struct data_error : error {
    using error::error;
};

/// Optimizer failure: infeasible instance or no convergence within the
/// iteration cap.
struct solver_error : error {
    using error::error;
};

/// Numerical breakdown (singular covariance, non-finite intermediate).
struct numeric_error : error {
    using error::error;
};

}  // namespace semcom

#endif

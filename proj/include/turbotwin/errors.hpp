#pragma once

#include <stdexcept>
#include <string>

namespace twin {

/// Base for all toolkit errors. The CLI maps the concrete types below to
/// distinct exit codes; see README.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Bad command-line usage or invalid argument combinations.
struct UsageError : Error {
    using Error::Error;
};

/// Invalid parameter values or violated operation preconditions.
struct ConfigError : Error {
    using Error::Error;
};

/// Malformed input files or mismatched datasets/channels.
struct DataError : Error {
    using Error::Error;
};

/// Non-finite values, degenerate systems, solver failures.
struct NumericError : Error {
    using Error::Error;
};

} // namespace twin
